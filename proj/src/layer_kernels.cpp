#include "layer_kernels.hpp"

#include <algorithm>
#include <vector>

namespace ccep::detail {
namespace {

struct PaddedInput {
  std::size_t height;
  std::size_t width;
  std::vector<double> values;  // [channel][height][width]
};

PaddedInput pad_input(const Conv2DSpec& c, std::span<const double> in) {
  const std::size_t p = c.padding();
  PaddedInput out{c.input_height + 2 * p, c.input_width + 2 * p, {}};
  out.values.assign(c.in_channels * out.height * out.width, 0.0);
  for (std::size_t ch = 0; ch < c.in_channels; ++ch)
    for (std::size_t y = 0; y < c.input_height; ++y)
      for (std::size_t x = 0; x < c.input_width; ++x)
        out.values[(ch * out.height + y + p) * out.width + x + p] =
            in[(ch * c.input_height + y) * c.input_width + x];
  return out;
}

void dense_forward(const DenseSpec& d, const LayerParams& params, std::span<const double> in,
                   std::span<double> out) {
  for (std::size_t o = 0; o < d.out_units; ++o) {
    const double* w = params.weights.data() + o * d.in_units;
    double acc = 0.0;
    for (std::size_t i = 0; i < d.in_units; ++i) acc += w[i] * in[i];
    out[o] = acc + params.bias[o];
  }
}

// Every kernel tap is a multiply-accumulate against the zero-padded input,
// so the work done matches the FLOPs model exactly.
void conv_forward(const Conv2DSpec& c, const LayerParams& params, std::span<const double> in,
                  std::span<double> out) {
  const PaddedInput padded = pad_input(c, in);
  const std::size_t k = c.kernel_size;
  const std::size_t oh = c.output_height();
  const std::size_t ow = c.output_width();
  for (std::size_t oc = 0; oc < c.out_channels; ++oc) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        double acc = 0.0;
        for (std::size_t ic = 0; ic < c.in_channels; ++ic) {
          const double* w = params.weights.data() + ((oc * c.in_channels + ic) * k) * k;
          for (std::size_t ky = 0; ky < k; ++ky) {
            const double* row =
                padded.values.data() + (ic * padded.height + oy * c.stride + ky) * padded.width + ox * c.stride;
            for (std::size_t kx = 0; kx < k; ++kx) acc += w[ky * k + kx] * row[kx];
          }
        }
        out[(oc * oh + oy) * ow + ox] = acc + params.bias[oc];
      }
    }
  }
}

}  // namespace

void layer_forward(const LayerSpec& layer, const LayerParams& params, const Shape& in_shape,
                   std::span<const double> in, std::span<double> out) {
  if (const auto* d = std::get_if<DenseSpec>(&layer)) {
    dense_forward(*d, params, in, out);
  } else if (const auto* c = std::get_if<Conv2DSpec>(&layer)) {
    conv_forward(*c, params, in, out);
  } else if (std::holds_alternative<GlobalAvgPoolSpec>(layer)) {
    const std::size_t area = in_shape.height * in_shape.width;
    for (std::size_t ch = 0; ch < in_shape.channels; ++ch) {
      double acc = 0.0;
      for (std::size_t j = 0; j < area; ++j) acc += in[ch * area + j];
      out[ch] = acc / static_cast<double>(area);
    }
  } else {
    for (std::size_t j = 0; j < in.size(); ++j) out[j] = in[j] > 0.0 ? in[j] : 0.0;
  }
}

void layer_backward(const LayerSpec& layer, const LayerParams& params, const Shape& in_shape,
                    std::span<const double> in, std::span<const double> out_grad,
                    std::span<double> in_grad, LayerParams* param_grad) {
  if (const auto* d = std::get_if<DenseSpec>(&layer)) {
    if (!in_grad.empty()) std::fill(in_grad.begin(), in_grad.end(), 0.0);
    for (std::size_t o = 0; o < d->out_units; ++o) {
      const double g = out_grad[o];
      const double* w = params.weights.data() + o * d->in_units;
      if (param_grad) {
        double* gw = param_grad->weights.data() + o * d->in_units;
        for (std::size_t i = 0; i < d->in_units; ++i) gw[i] += g * in[i];
        param_grad->bias[o] += g;
      }
      if (!in_grad.empty())
        for (std::size_t i = 0; i < d->in_units; ++i) in_grad[i] += g * w[i];
    }
  } else if (const auto* c = std::get_if<Conv2DSpec>(&layer)) {
    const PaddedInput padded = pad_input(*c, in);
    std::vector<double> padded_grad(in_grad.empty() ? 0 : padded.values.size(), 0.0);
    const std::size_t k = c->kernel_size;
    const std::size_t oh = c->output_height();
    const std::size_t ow = c->output_width();
    for (std::size_t oc = 0; oc < c->out_channels; ++oc) {
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          const double g = out_grad[(oc * oh + oy) * ow + ox];
          if (param_grad) param_grad->bias[oc] += g;
          for (std::size_t ic = 0; ic < c->in_channels; ++ic) {
            const std::size_t wbase = ((oc * c->in_channels + ic) * k) * k;
            for (std::size_t ky = 0; ky < k; ++ky) {
              const std::size_t rbase = (ic * padded.height + oy * c->stride + ky) * padded.width + ox * c->stride;
              for (std::size_t kx = 0; kx < k; ++kx) {
                if (param_grad) param_grad->weights[wbase + ky * k + kx] += g * padded.values[rbase + kx];
                if (!padded_grad.empty()) padded_grad[rbase + kx] += g * params.weights[wbase + ky * k + kx];
              }
            }
          }
        }
      }
    }
    if (!in_grad.empty()) {
      const std::size_t p = c->padding();
      for (std::size_t ch = 0; ch < c->in_channels; ++ch)
        for (std::size_t y = 0; y < c->input_height; ++y)
          for (std::size_t x = 0; x < c->input_width; ++x)
            in_grad[(ch * c->input_height + y) * c->input_width + x] =
                padded_grad[(ch * padded.height + y + p) * padded.width + x + p];
    }
  } else if (std::holds_alternative<GlobalAvgPoolSpec>(layer)) {
    if (in_grad.empty()) return;
    const std::size_t area = in_shape.height * in_shape.width;
    for (std::size_t ch = 0; ch < in_shape.channels; ++ch)
      for (std::size_t j = 0; j < area; ++j) in_grad[ch * area + j] = out_grad[ch] / static_cast<double>(area);
  } else {
    if (in_grad.empty()) return;
    for (std::size_t j = 0; j < in.size(); ++j) in_grad[j] = in[j] > 0.0 ? out_grad[j] : 0.0;
  }
}

}  // namespace ccep::detail
