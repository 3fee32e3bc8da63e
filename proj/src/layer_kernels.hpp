#pragma once

#include <span>

#include "ccep/network.hpp"

namespace ccep::detail {

// Single-sample kernels shared by inference and training.

void layer_forward(const LayerSpec& layer, const LayerParams& params, const Shape& in_shape,
                   std::span<const double> in, std::span<double> out);

// Propagates out_grad back through one layer given its forward input.
// in_grad may be empty when the input gradient is not needed. Parameter
// gradients are accumulated into *param_grad when it is non-null.
void layer_backward(const LayerSpec& layer, const LayerParams& params, const Shape& in_shape,
                    std::span<const double> in, std::span<const double> out_grad,
                    std::span<double> in_grad, LayerParams* param_grad);

}  // namespace ccep::detail
