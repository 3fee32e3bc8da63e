#include "ccep/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ccep/errors.hpp"
#include "layer_kernels.hpp"

namespace ccep {
namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

std::string layer_label(std::size_t i) { return "layer " + std::to_string(i); }

Shape propagate(const LayerSpec& layer, const Shape& in, std::size_t index) {
  return std::visit(
      Overloaded{
          [&](const DenseSpec& d) {
            if (!in.is_flat())
              throw ShapeError(layer_label(index) + ": Dense needs a flat input (insert GlobalAvgPool after convolutions)");
            if (in.channels != d.in_units)
              throw ShapeError(layer_label(index) + ": Dense in_units " + std::to_string(d.in_units) +
                               " does not match incoming width " + std::to_string(in.channels));
            if (d.out_units == 0) throw ShapeError(layer_label(index) + ": Dense out_units must be positive");
            return Shape{d.out_units, 1, 1};
          },
          [&](const Conv2DSpec& c) {
            if (in.channels != c.in_channels || in.height != c.input_height || in.width != c.input_width)
              throw ShapeError(layer_label(index) + ": Conv2D input geometry does not match incoming shape");
            if (c.out_channels == 0 || c.kernel_size == 0 || c.stride == 0)
              throw ShapeError(layer_label(index) + ": Conv2D channels, kernel and stride must be positive");
            if (c.input_height + 2 * c.padding() < c.kernel_size || c.input_width + 2 * c.padding() < c.kernel_size)
              throw ShapeError(layer_label(index) + ": Conv2D kernel larger than padded input");
            return Shape{c.out_channels, c.output_height(), c.output_width()};
          },
          [&](const GlobalAvgPoolSpec&) { return Shape{in.channels, 1, 1}; },
          [&](const ActivationSpec&) { return in; },
      },
      layer);
}

}  // namespace

bool has_weights(const LayerSpec& layer) noexcept {
  return std::holds_alternative<DenseSpec>(layer) || std::holds_alternative<Conv2DSpec>(layer);
}

std::size_t weight_count(const LayerSpec& layer) {
  if (const auto* d = std::get_if<DenseSpec>(&layer)) return d->in_units * d->out_units;
  if (const auto* c = std::get_if<Conv2DSpec>(&layer))
    return c->out_channels * c->in_channels * c->kernel_size * c->kernel_size;
  return 0;
}

std::size_t bias_count(const LayerSpec& layer) {
  if (const auto* d = std::get_if<DenseSpec>(&layer)) return d->out_units;
  if (const auto* c = std::get_if<Conv2DSpec>(&layer)) return c->out_channels;
  return 0;
}

std::vector<Shape> ArchitectureSpec::shapes() const {
  if (input.size() == 0) throw ShapeError("architecture input shape must be non-empty");
  std::vector<Shape> out;
  out.reserve(layers.size() + 1);
  out.push_back(input);
  for (std::size_t i = 0; i < layers.size(); ++i) out.push_back(propagate(layers[i], out.back(), i));
  return out;
}

Shape ArchitectureSpec::output_shape() const { return shapes().back(); }

void ArchitectureSpec::validate() const {
  if (layers.empty()) throw ShapeError("architecture has no layers");
  if (prunable.size() != layers.size()) throw ShapeError("prunable flags must match the layer count");
  const auto all = shapes();
  if (!all.back().is_flat()) throw ShapeError("network output must be flat (class scores)");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (!prunable[i]) continue;
    if (!has_weights(layers[i])) throw ShapeError(layer_label(i) + ": only Dense and Conv2D layers can be prunable");
    bool consumed = false;
    for (std::size_t j = i + 1; j < layers.size() && !consumed; ++j) consumed = has_weights(layers[j]);
    if (!consumed) throw ShapeError(layer_label(i) + ": the output layer cannot be prunable");
  }
}

std::vector<std::size_t> ArchitectureSpec::prunable_layers() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < prunable.size(); ++i)
    if (prunable[i]) out.push_back(i);
  return out;
}

std::size_t ArchitectureSpec::layer_width(std::size_t i) const {
  if (i >= layers.size()) throw ShapeError(layer_label(i) + ": index out of range");
  if (const auto* d = std::get_if<DenseSpec>(&layers[i])) return d->out_units;
  if (const auto* c = std::get_if<Conv2DSpec>(&layers[i])) return c->out_channels;
  throw ShapeError(layer_label(i) + ": layer has no units to prune");
}

std::size_t ArchitectureSpec::consumer_of(std::size_t i) const {
  for (std::size_t j = i + 1; j < layers.size(); ++j)
    if (has_weights(layers[j])) return j;
  throw ShapeError(layer_label(i) + ": no downstream weighted layer");
}

ArchitectureBuilder::ArchitectureBuilder(Shape input) : current_(input) { spec_.input = input; }

ArchitectureBuilder& ArchitectureBuilder::dense(std::size_t out_units, bool prunable) {
  DenseSpec d{current_.size(), out_units};
  if (!current_.is_flat()) d.in_units = current_.channels;  // rejected by validate()
  spec_.layers.emplace_back(d);
  spec_.prunable.push_back(prunable);
  current_ = Shape{out_units, 1, 1};
  return *this;
}

ArchitectureBuilder& ArchitectureBuilder::conv2d(std::size_t out_channels, std::size_t kernel_size,
                                                 std::size_t stride, bool prunable) {
  Conv2DSpec c{current_.channels, out_channels, kernel_size, stride, current_.height, current_.width};
  spec_.layers.emplace_back(c);
  spec_.prunable.push_back(prunable);
  current_ = Shape{out_channels, c.output_height(), c.output_width()};
  return *this;
}

ArchitectureBuilder& ArchitectureBuilder::global_avg_pool() {
  spec_.layers.emplace_back(GlobalAvgPoolSpec{});
  spec_.prunable.push_back(false);
  current_ = Shape{current_.channels, 1, 1};
  return *this;
}

ArchitectureBuilder& ArchitectureBuilder::relu() {
  spec_.layers.emplace_back(ActivationSpec{ActivationKind::relu});
  spec_.prunable.push_back(false);
  return *this;
}

ArchitectureSpec ArchitectureBuilder::build() const {
  spec_.validate();
  return spec_;
}

NetworkModel::NetworkModel(ArchitectureSpec spec, std::vector<LayerParams> params)
    : spec_(std::move(spec)), params_(std::move(params)) {
  spec_.validate();
  if (params_.size() != spec_.layers.size()) throw ShapeError("parameter list must have one entry per layer");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].weights.size() != weight_count(spec_.layers[i]) ||
        params_[i].bias.size() != bias_count(spec_.layers[i]))
      throw ShapeError(layer_label(i) + ": parameter tensor shape does not match the architecture");
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(params_[i].weights.begin(), params_[i].weights.end(), finite) ||
        !std::all_of(params_[i].bias.begin(), params_[i].bias.end(), finite))
      throw ShapeError(layer_label(i) + ": non-finite parameter");
  }
}

NetworkModel NetworkModel::zeros(ArchitectureSpec spec) {
  std::vector<LayerParams> params;
  params.reserve(spec.layers.size());
  for (const auto& layer : spec.layers)
    params.push_back({std::vector<double>(weight_count(layer), 0.0), std::vector<double>(bias_count(layer), 0.0)});
  return NetworkModel(std::move(spec), std::move(params));
}

Matrix forward(const NetworkModel& net, const Matrix& batch) {
  const auto& spec = net.spec();
  if (batch.cols() != spec.input.size())
    throw ShapeError("forward: batch has " + std::to_string(batch.cols()) + " features, network expects " +
                     std::to_string(spec.input.size()));
  const auto shapes = spec.shapes();
  std::size_t widest = 0;
  for (const auto& s : shapes) widest = std::max(widest, s.size());
  Matrix scores(batch.rows(), shapes.back().size());
  std::vector<double> a(widest), b(widest);
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    const auto src = batch.row(r);
    std::copy(src.begin(), src.end(), a.begin());
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
      detail::layer_forward(spec.layers[i], net.params(i), shapes[i], std::span<const double>(a.data(), shapes[i].size()),
                            std::span<double>(b.data(), shapes[i + 1].size()));
      std::swap(a, b);
    }
    std::copy_n(a.begin(), scores.cols(), scores.row(r).begin());
  }
  return scores;
}

EvalCount evaluate(const NetworkModel& net, const LabeledDataset& data) {
  if (data.size() == 0) throw DatasetError("evaluate: dataset is empty");
  if (data.features.rows() != data.labels.size()) throw DatasetError("evaluate: feature/label count mismatch");
  const Matrix scores = forward(net, data.features);
  EvalCount count{0, data.size()};
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    const auto row = scores.row(r);
    const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best == data.labels[r]) ++count.correct;
  }
  return count;
}

std::uint64_t layer_flops(const LayerSpec& layer) {
  if (const auto* d = std::get_if<DenseSpec>(&layer)) return 2ULL * d->in_units * d->out_units;
  if (const auto* c = std::get_if<Conv2DSpec>(&layer))
    return 2ULL * c->kernel_size * c->kernel_size * c->in_channels * c->out_channels * c->output_height() *
           c->output_width();
  return 0;
}

std::uint64_t flops(const ArchitectureSpec& spec) {
  std::uint64_t total = 0;
  for (const auto& layer : spec.layers) total += layer_flops(layer);
  return total;
}

std::uint64_t flops(const NetworkModel& net) { return flops(net.spec()); }

std::uint64_t param_count(const ArchitectureSpec& spec) {
  std::uint64_t total = 0;
  for (const auto& layer : spec.layers) total += weight_count(layer) + bias_count(layer);
  return total;
}

namespace {

// Keeps output units `keep` of a weighted layer.
void prune_outputs(LayerSpec& layer, LayerParams& params, const std::vector<std::size_t>& keep) {
  if (auto* d = std::get_if<DenseSpec>(&layer)) {
    std::vector<double> w;
    w.reserve(keep.size() * d->in_units);
    std::vector<double> b;
    for (std::size_t o : keep) {
      w.insert(w.end(), params.weights.begin() + static_cast<std::ptrdiff_t>(o * d->in_units),
               params.weights.begin() + static_cast<std::ptrdiff_t>((o + 1) * d->in_units));
      b.push_back(params.bias[o]);
    }
    d->out_units = keep.size();
    params = {std::move(w), std::move(b)};
  } else if (auto* c = std::get_if<Conv2DSpec>(&layer)) {
    const std::size_t per_filter = c->in_channels * c->kernel_size * c->kernel_size;
    std::vector<double> w;
    w.reserve(keep.size() * per_filter);
    std::vector<double> b;
    for (std::size_t o : keep) {
      w.insert(w.end(), params.weights.begin() + static_cast<std::ptrdiff_t>(o * per_filter),
               params.weights.begin() + static_cast<std::ptrdiff_t>((o + 1) * per_filter));
      b.push_back(params.bias[o]);
    }
    c->out_channels = keep.size();
    params = {std::move(w), std::move(b)};
  }
}

// Keeps input units / channels `keep` of a weighted layer.
void prune_inputs(LayerSpec& layer, LayerParams& params, const std::vector<std::size_t>& keep) {
  if (auto* d = std::get_if<DenseSpec>(&layer)) {
    std::vector<double> w;
    w.reserve(d->out_units * keep.size());
    for (std::size_t o = 0; o < d->out_units; ++o)
      for (std::size_t i : keep) w.push_back(params.weights[o * d->in_units + i]);
    d->in_units = keep.size();
    params.weights = std::move(w);
  } else if (auto* c = std::get_if<Conv2DSpec>(&layer)) {
    const std::size_t kk = c->kernel_size * c->kernel_size;
    std::vector<double> w;
    w.reserve(c->out_channels * keep.size() * kk);
    for (std::size_t o = 0; o < c->out_channels; ++o)
      for (std::size_t ic : keep) {
        const auto first = params.weights.begin() + static_cast<std::ptrdiff_t>((o * c->in_channels + ic) * kk);
        w.insert(w.end(), first, first + static_cast<std::ptrdiff_t>(kk));
      }
    c->in_channels = keep.size();
    params.weights = std::move(w);
  }
}

}  // namespace

NetworkModel apply_genomes(const NetworkModel& base, std::span<const LayerGenome> genomes) {
  ArchitectureSpec spec = base.spec();
  std::vector<LayerParams> params = base.params();
  const auto prunable = spec.prunable_layers();
  if (genomes.size() != prunable.size())
    throw PruneError("apply_genomes: expected " + std::to_string(prunable.size()) + " genomes, got " +
                     std::to_string(genomes.size()));
  for (std::size_t k = 0; k < prunable.size(); ++k) {
    const std::size_t li = prunable[k];
    const LayerGenome& g = genomes[k];
    if (g.size() != spec.layer_width(li))
      throw PruneError(layer_label(li) + ": genome length " + std::to_string(g.size()) + " does not match width " +
                       std::to_string(spec.layer_width(li)));
    if (g.retained() == 0) throw PruneError(layer_label(li) + ": genome prunes every unit");
    if (g.is_all_ones()) continue;
    const auto keep = g.retained_indices();
    const std::size_t consumer = spec.consumer_of(li);
    prune_outputs(spec.layers[li], params[li], keep);
    prune_inputs(spec.layers[consumer], params[consumer], keep);
  }
  return NetworkModel(std::move(spec), std::move(params));
}

NetworkModel splice_one(const NetworkModel& base, std::size_t layer_index, const LayerGenome& genome) {
  const auto prunable = base.spec().prunable_layers();
  std::vector<LayerGenome> genomes;
  genomes.reserve(prunable.size());
  bool found = false;
  for (std::size_t li : prunable) {
    if (li == layer_index) {
      genomes.push_back(genome);
      found = true;
    } else {
      genomes.push_back(LayerGenome::all_ones(base.spec().layer_width(li)));
    }
  }
  if (!found) throw PruneError(layer_label(layer_index) + ": not a prunable layer");
  return apply_genomes(base, genomes);
}

}  // namespace ccep
