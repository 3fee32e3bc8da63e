#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "ccep/dataset.hpp"
#include "ccep/genome.hpp"
#include "ccep/tensor.hpp"

namespace ccep {

// Per-sample activation shape. Flat vectors are {units, 1, 1}.
struct Shape {
  std::size_t channels = 0;
  std::size_t height = 1;
  std::size_t width = 1;

  std::size_t size() const noexcept { return channels * height * width; }
  bool is_flat() const noexcept { return height == 1 && width == 1; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

struct DenseSpec {
  std::size_t in_units = 0;
  std::size_t out_units = 0;
  friend bool operator==(const DenseSpec&, const DenseSpec&) = default;
};

// Zero padding is kernel_size / 2 on every side, so stride 1 with an odd
// kernel keeps the spatial size.
struct Conv2DSpec {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_size = 1;
  std::size_t stride = 1;
  std::size_t input_height = 1;
  std::size_t input_width = 1;

  std::size_t padding() const noexcept { return kernel_size / 2; }
  std::size_t output_height() const noexcept {
    return (input_height + 2 * padding() - kernel_size) / stride + 1;
  }
  std::size_t output_width() const noexcept {
    return (input_width + 2 * padding() - kernel_size) / stride + 1;
  }
  friend bool operator==(const Conv2DSpec&, const Conv2DSpec&) = default;
};

struct GlobalAvgPoolSpec {
  friend bool operator==(const GlobalAvgPoolSpec&, const GlobalAvgPoolSpec&) = default;
};

enum class ActivationKind { relu };

struct ActivationSpec {
  ActivationKind kind = ActivationKind::relu;
  friend bool operator==(const ActivationSpec&, const ActivationSpec&) = default;
};

using LayerSpec = std::variant<DenseSpec, Conv2DSpec, GlobalAvgPoolSpec, ActivationSpec>;

bool has_weights(const LayerSpec& layer) noexcept;

// Ordered sequential architecture. prunable[i] marks layers whose output
// units / filters are subject to pruning.
struct ArchitectureSpec {
  Shape input;
  std::vector<LayerSpec> layers;
  std::vector<bool> prunable;

  // Throws ShapeError if any invariant fails:
  //  - adjacent layers are shape compatible;
  //  - Dense layers only see flat inputs, so a conv stack must pass through
  //    GlobalAvgPool before any Dense layer;
  //  - only Dense / Conv2D layers are prunable, and every prunable layer has
  //    a downstream weighted layer consuming its outputs.
  void validate() const;

  // shapes()[i] is the input shape of layer i; the last element is the
  // network output shape.
  std::vector<Shape> shapes() const;
  Shape output_shape() const;

  std::vector<std::size_t> prunable_layers() const;
  // Output units (Dense) or filters (Conv2D) of layer i.
  std::size_t layer_width(std::size_t i) const;
  // Index of the weighted layer consuming layer i's outputs.
  std::size_t consumer_of(std::size_t i) const;

  friend bool operator==(const ArchitectureSpec&, const ArchitectureSpec&) = default;
};

// Builds an ArchitectureSpec by shape propagation.
class ArchitectureBuilder {
 public:
  explicit ArchitectureBuilder(Shape input);

  ArchitectureBuilder& dense(std::size_t out_units, bool prunable = false);
  ArchitectureBuilder& conv2d(std::size_t out_channels, std::size_t kernel_size, std::size_t stride = 1,
                              bool prunable = false);
  ArchitectureBuilder& global_avg_pool();
  ArchitectureBuilder& relu();

  ArchitectureSpec build() const;

 private:
  ArchitectureSpec spec_;
  Shape current_;
};

// Dense weights are [out][in]; Conv2D weights are [out][in][ky][kx].
struct LayerParams {
  std::vector<double> weights;
  std::vector<double> bias;
  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

std::size_t weight_count(const LayerSpec& layer);
std::size_t bias_count(const LayerSpec& layer);

// Architecture plus weights. Immutable once constructed; transformations
// return new values.
class NetworkModel {
 public:
  // Validates the spec, the tensor shapes against it, and finiteness.
  NetworkModel(ArchitectureSpec spec, std::vector<LayerParams> params);

  static NetworkModel zeros(ArchitectureSpec spec);

  const ArchitectureSpec& spec() const noexcept { return spec_; }
  const std::vector<LayerParams>& params() const noexcept { return params_; }
  const LayerParams& params(std::size_t layer) const { return params_[layer]; }

  std::size_t input_size() const noexcept { return spec_.input.size(); }
  std::size_t num_outputs() const { return spec_.output_shape().size(); }

  friend bool operator==(const NetworkModel&, const NetworkModel&) = default;

 private:
  ArchitectureSpec spec_;
  std::vector<LayerParams> params_;
};

// Class scores for every row of `batch`. Deterministic and bit-reproducible.
Matrix forward(const NetworkModel& net, const Matrix& batch);

struct EvalCount {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const noexcept {
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
  }
  friend bool operator==(const EvalCount&, const EvalCount&) = default;
};

// Counts samples whose argmax score (lowest index on ties) equals the label.
EvalCount evaluate(const NetworkModel& net, const LabeledDataset& data);

// Multiply-accumulate = 2 FLOPs. Dense: 2*in*out. Conv2D:
// 2*k*k*in*out*H_out*W_out. Bias adds, activations and pooling are free.
std::uint64_t flops(const ArchitectureSpec& spec);
std::uint64_t flops(const NetworkModel& net);
std::uint64_t layer_flops(const LayerSpec& layer);
std::uint64_t param_count(const ArchitectureSpec& spec);

// Structurally removes pruned units. genomes[k] belongs to the k-th
// prunable layer (ascending layer index) and must match its current width.
NetworkModel apply_genomes(const NetworkModel& base, std::span<const LayerGenome> genomes);

// apply_genomes with all-ones genomes everywhere except layer_index.
NetworkModel splice_one(const NetworkModel& base, std::size_t layer_index, const LayerGenome& genome);

}  // namespace ccep
