#include "ccep/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ccep/errors.hpp"
#include "layer_kernels.hpp"

namespace ccep {

void FinetuneConfig::validate() const {
  if (!(initial_lr > 0.0) || !std::isfinite(initial_lr)) throw ConfigError("finetune: initial_lr must be positive");
  if (batch_size == 0) throw ConfigError("finetune: batch_size must be at least 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("finetune: momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("finetune: weight_decay must be non-negative");
  for (std::size_t i = 0; i < milestones.size(); ++i) {
    if (i > 0 && milestones[i] <= milestones[i - 1])
      throw ConfigError("finetune: milestones must be strictly increasing");
    if (epochs > 0 && milestones[i] >= epochs) throw ConfigError("finetune: milestones must be below epochs");
  }
}

double FinetuneConfig::lr_at(std::size_t epoch) const {
  double lr = initial_lr;
  for (std::size_t m : milestones)
    if (epoch >= m) lr *= 0.1;
  return lr;
}

namespace presets {

FinetuneConfig desk() { return {0.05, {10}, 15, 0.9, 1e-4, 32}; }
FinetuneConfig cifar10() { return {0.1, {50}, 100, 0.9, 1e-4, 128}; }
FinetuneConfig imagenet() { return {0.01, {20, 40, 50}, 60, 0.9, 1e-4, 256}; }

std::optional<FinetuneConfig> by_name(std::string_view name) {
  if (name == "desk") return desk();
  if (name == "cifar10") return cifar10();
  if (name == "imagenet") return imagenet();
  return std::nullopt;
}

std::vector<std::string> names() { return {"desk", "cifar10", "imagenet"}; }

}  // namespace presets

namespace {

std::vector<LayerParams> zeros_like(const std::vector<LayerParams>& params) {
  std::vector<LayerParams> out(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    out[i].weights.assign(params[i].weights.size(), 0.0);
    out[i].bias.assign(params[i].bias.size(), 0.0);
  }
  return out;
}

// Works on raw spec + params so the optimizer loop can skip re-validating
// a NetworkModel for every batch.
double batch_loss(const ArchitectureSpec& spec, const std::vector<Shape>& shapes,
                  const std::vector<LayerParams>& params, const Matrix& batch, std::span<const int> labels,
                  std::vector<LayerParams>* grad) {
  const std::size_t n_layers = spec.layers.size();
  const std::size_t n = batch.rows();
  if (n == 0) throw DatasetError("loss: empty batch");
  if (labels.size() != n) throw DatasetError("loss: label count does not match batch rows");
  if (batch.cols() != spec.input.size()) throw ShapeError("loss: batch feature width does not match network input");
  if (grad) *grad = zeros_like(params);

  std::vector<std::vector<double>> acts(n_layers + 1);
  for (std::size_t i = 0; i <= n_layers; ++i) acts[i].resize(shapes[i].size());
  std::size_t widest = 0;
  for (const auto& s : shapes) widest = std::max(widest, s.size());
  std::vector<double> g_out(widest), g_in(widest);

  const std::size_t classes = shapes.back().size();
  const double scale = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto x = batch.row(r);
    std::copy(x.begin(), x.end(), acts[0].begin());
    for (std::size_t i = 0; i < n_layers; ++i) detail::layer_forward(spec.layers[i], params[i], shapes[i], acts[i], acts[i + 1]);

    const auto& logits = acts[n_layers];
    const double peak = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double z : logits) denom += std::exp(z - peak);
    const double log_denom = std::log(denom) + peak;
    const auto y = static_cast<std::size_t>(labels[r]);
    if (y >= classes) throw DatasetError("loss: label out of range");
    loss += (log_denom - logits[y]) * scale;
    if (!grad) continue;

    for (std::size_t c = 0; c < classes; ++c)
      g_out[c] = (std::exp(logits[c] - log_denom) - (c == y ? 1.0 : 0.0)) * scale;
    for (std::size_t i = n_layers; i-- > 0;) {
      std::span<double> in_grad = i == 0 ? std::span<double>() : std::span<double>(g_in.data(), shapes[i].size());
      detail::layer_backward(spec.layers[i], params[i], shapes[i], acts[i],
                             std::span<const double>(g_out.data(), shapes[i + 1].size()), in_grad, &(*grad)[i]);
      std::swap(g_out, g_in);
    }
  }
  return loss;
}

bool all_finite(const std::vector<LayerParams>& params) {
  const auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(params.begin(), params.end(), [&](const LayerParams& p) {
    return std::all_of(p.weights.begin(), p.weights.end(), finite) && std::all_of(p.bias.begin(), p.bias.end(), finite);
  });
}

}  // namespace

double loss_and_gradient(const NetworkModel& net, const Matrix& batch, std::span<const int> labels,
                         std::vector<LayerParams>* grad) {
  return batch_loss(net.spec(), net.spec().shapes(), net.params(), batch, labels, grad);
}

NetworkModel init_network(const ArchitectureSpec& spec, Rng& rng) {
  spec.validate();
  std::vector<LayerParams> params;
  params.reserve(spec.layers.size());
  for (const auto& layer : spec.layers) {
    std::size_t fan_in = 0;
    if (const auto* d = std::get_if<DenseSpec>(&layer)) fan_in = d->in_units;
    if (const auto* c = std::get_if<Conv2DSpec>(&layer)) fan_in = c->in_channels * c->kernel_size * c->kernel_size;
    LayerParams p{std::vector<double>(weight_count(layer)), std::vector<double>(bias_count(layer))};
    if (fan_in > 0) {
      const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
      for (double& w : p.weights) w = rng.uniform(-bound, bound);
      for (double& b : p.bias) b = rng.uniform(-bound, bound);
    }
    params.push_back(std::move(p));
  }
  return NetworkModel(spec, std::move(params));
}

NetworkModel finetune(const NetworkModel& net, const LabeledDataset& train, const FinetuneConfig& cfg, Rng& rng) {
  cfg.validate();
  if (cfg.epochs == 0) return net;
  if (train.size() == 0) throw DatasetError("finetune: training set is empty");
  if (train.feature_dim() != net.input_size()) throw ShapeError("finetune: training features do not match network input");

  const ArchitectureSpec& spec = net.spec();
  const auto shapes = spec.shapes();
  std::vector<LayerParams> params = net.params();
  std::vector<LayerParams> velocity = zeros_like(params);
  std::vector<LayerParams> grad;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<int> batch_labels;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.lr_at(epoch);
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const Matrix xb = train.features.select_rows(idx);
      batch_labels.resize(idx.size());
      for (std::size_t j = 0; j < idx.size(); ++j) batch_labels[j] = train.labels[idx[j]];

      const double loss = batch_loss(spec, shapes, params, xb, batch_labels, &grad);
      if (!std::isfinite(loss))
        throw DivergenceError("training diverged: non-finite loss at epoch " + std::to_string(epoch));

      for (std::size_t i = 0; i < params.size(); ++i) {
        const auto step = [&](std::vector<double>& w, std::vector<double>& v, const std::vector<double>& g) {
          for (std::size_t j = 0; j < w.size(); ++j) {
            v[j] = cfg.momentum * v[j] + g[j] + cfg.weight_decay * w[j];
            w[j] -= lr * v[j];
          }
        };
        step(params[i].weights, velocity[i].weights, grad[i].weights);
        step(params[i].bias, velocity[i].bias, grad[i].bias);
      }
    }
  }
  if (!all_finite(params)) throw DivergenceError("training diverged: non-finite weights");
  return NetworkModel(spec, std::move(params));
}

NetworkModel train_from_scratch(const ArchitectureSpec& spec, const LabeledDataset& train,
                                const FinetuneConfig& cfg, Rng& rng) {
  return finetune(init_network(spec, rng), train, cfg, rng);
}

}  // namespace ccep
