#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccep/dataset.hpp"
#include "ccep/network.hpp"
#include "ccep/rng.hpp"

namespace ccep {

// Mini-batch SGD with momentum, L2 weight decay and step decay (x0.1 at
// each milestone epoch). Minimizes mean softmax cross-entropy.
struct FinetuneConfig {
  double initial_lr = 0.05;
  std::vector<std::size_t> milestones{10};
  std::size_t epochs = 15;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::size_t batch_size = 32;

  void validate() const;
  // Learning rate used during epoch `epoch` (0-based).
  double lr_at(std::size_t epoch) const;

  friend bool operator==(const FinetuneConfig&, const FinetuneConfig&) = default;
};

namespace presets {
FinetuneConfig desk();      // lr 0.05, 15 epochs, milestone [10], batch 32
FinetuneConfig cifar10();   // lr 0.1, 100 epochs, milestone [50], batch 128
FinetuneConfig imagenet();  // lr 0.01, 60 epochs, milestones [20,40,50], batch 256
std::optional<FinetuneConfig> by_name(std::string_view name);
std::vector<std::string> names();
}  // namespace presets

// Mean cross-entropy over the rows of `batch`. When grad is non-null it is
// resized to the network's parameter shapes and receives d(loss)/d(param).
double loss_and_gradient(const NetworkModel& net, const Matrix& batch, std::span<const int> labels,
                         std::vector<LayerParams>* grad);

// Weights and biases uniform in +-sqrt(1 / fan_in).
NetworkModel init_network(const ArchitectureSpec& spec, Rng& rng);

// Throws DivergenceError if the loss turns non-finite. epochs == 0 returns
// the input unchanged. The rng drives the per-epoch shuffle.
NetworkModel finetune(const NetworkModel& net, const LabeledDataset& train, const FinetuneConfig& cfg, Rng& rng);

NetworkModel train_from_scratch(const ArchitectureSpec& spec, const LabeledDataset& train,
                                const FinetuneConfig& cfg, Rng& rng);

}  // namespace ccep
