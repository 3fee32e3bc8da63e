#include "ccep/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "ccep/errors.hpp"
#include "ccep/file_io.hpp"

namespace ccep {
namespace {

constexpr char kMagic[8] = {'C', 'C', 'E', 'P', 'N', 'E', 'T', '\0'};

enum class LayerKind : std::uint8_t { dense = 0, conv2d = 1, global_avg_pool = 2, relu = 3 };

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void size(std::size_t v) {
    if (v > UINT32_MAX) throw FormatError("checkpoint: dimension exceeds 32 bits");
    u32(static_cast<std::uint32_t>(v));
  }
  void floats(const std::vector<double>& values) {
    size(values.size());
    for (double v : values) u32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw FormatError("checkpoint: truncated file");
  }
  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::vector<double> floats(std::size_t expected) {
    const std::uint32_t n = u32();
    if (n != expected) throw FormatError("checkpoint: parameter count does not match layer shape");
    need(4ULL * n);
    std::vector<double> out(n);
    for (auto& v : out) v = static_cast<double>(std::bit_cast<float>(u32()));
    return out;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const NetworkModel& net) {
  Writer w;
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kCheckpointVersion);
  const auto& spec = net.spec();
  w.size(spec.input.channels);
  w.size(spec.input.height);
  w.size(spec.input.width);
  w.size(spec.layers.size());
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& layer = spec.layers[i];
    if (const auto* d = std::get_if<DenseSpec>(&layer)) {
      w.u8(static_cast<std::uint8_t>(LayerKind::dense));
      w.u8(spec.prunable[i] ? 1 : 0);
      w.u8(0);
      w.u8(0);
      w.size(d->in_units);
      w.size(d->out_units);
    } else if (const auto* c = std::get_if<Conv2DSpec>(&layer)) {
      w.u8(static_cast<std::uint8_t>(LayerKind::conv2d));
      w.u8(spec.prunable[i] ? 1 : 0);
      w.u8(0);
      w.u8(0);
      w.size(c->in_channels);
      w.size(c->out_channels);
      w.size(c->kernel_size);
      w.size(c->stride);
      w.size(c->input_height);
      w.size(c->input_width);
    } else if (std::holds_alternative<GlobalAvgPoolSpec>(layer)) {
      w.u8(static_cast<std::uint8_t>(LayerKind::global_avg_pool));
      w.u8(0);
      w.u8(0);
      w.u8(0);
    } else {
      w.u8(static_cast<std::uint8_t>(LayerKind::relu));
      w.u8(0);
      w.u8(0);
      w.u8(0);
    }
    if (has_weights(layer)) {
      w.floats(net.params(i).weights);
      w.floats(net.params(i).bias);
    }
  }
  return w.take();
}

NetworkModel decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  for (char c : kMagic)
    if (r.u8() != static_cast<std::uint8_t>(c)) throw FormatError("checkpoint: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  ArchitectureSpec spec;
  spec.input.channels = r.u32();
  spec.input.height = r.u32();
  spec.input.width = r.u32();
  const std::uint32_t n_layers = r.u32();
  std::vector<LayerParams> params;
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    const auto kind = static_cast<LayerKind>(r.u8());
    const bool prunable = r.u8() != 0;
    r.u8();
    r.u8();
    LayerSpec layer;
    switch (kind) {
      case LayerKind::dense: {
        DenseSpec d;
        d.in_units = r.u32();
        d.out_units = r.u32();
        layer = d;
        break;
      }
      case LayerKind::conv2d: {
        Conv2DSpec c;
        c.in_channels = r.u32();
        c.out_channels = r.u32();
        c.kernel_size = r.u32();
        c.stride = r.u32();
        c.input_height = r.u32();
        c.input_width = r.u32();
        layer = c;
        break;
      }
      case LayerKind::global_avg_pool:
        layer = GlobalAvgPoolSpec{};
        break;
      case LayerKind::relu:
        layer = ActivationSpec{ActivationKind::relu};
        break;
      default:
        throw FormatError("checkpoint: unknown layer kind");
    }
    LayerParams p;
    if (has_weights(layer)) {
      p.weights = r.floats(weight_count(layer));
      p.bias = r.floats(bias_count(layer));
    }
    spec.layers.push_back(layer);
    spec.prunable.push_back(prunable);
    params.push_back(std::move(p));
  }
  if (!r.at_end()) throw FormatError("checkpoint: trailing bytes");
  try {
    return NetworkModel(std::move(spec), std::move(params));
  } catch (const ShapeError& e) {
    throw FormatError(std::string("checkpoint: invalid network: ") + e.what());
  }
}

void save_checkpoint(const NetworkModel& net, const std::filesystem::path& path) {
  write_file_atomic(path, encode_checkpoint(net));
}

NetworkModel load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_binary_file(path)); }

NetworkModel round_to_float32(const NetworkModel& net) {
  std::vector<LayerParams> params = net.params();
  for (auto& p : params) {
    for (double& v : p.weights) v = static_cast<double>(static_cast<float>(v));
    for (double& v : p.bias) v = static_cast<double>(static_cast<float>(v));
  }
  return NetworkModel(net.spec(), std::move(params));
}

}  // namespace ccep
