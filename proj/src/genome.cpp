#include "ccep/genome.hpp"

#include <algorithm>
#include <cmath>

#include "ccep/errors.hpp"

namespace ccep {

LayerGenome::LayerGenome(std::vector<bool> bits) : bits_(std::move(bits)) {
  if (bits_.empty()) throw GenomeError("layer genome must have at least one bit");
}

LayerGenome LayerGenome::all_ones(std::size_t length) {
  if (length == 0) throw GenomeError("all_ones: layer width must be positive");
  return LayerGenome(std::vector<bool>(length, true));
}

LayerGenome LayerGenome::from_string(std::string_view text) {
  std::vector<bool> bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c == '1') {
      bits.push_back(true);
    } else if (c == '0') {
      bits.push_back(false);
    } else {
      throw GenomeError("genome string may only contain '0' and '1'");
    }
  }
  return LayerGenome(std::move(bits));
}

std::size_t LayerGenome::zero_count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), false));
}

std::vector<std::size_t> LayerGenome::retained_indices() const {
  std::vector<std::size_t> out;
  out.reserve(bits_.size());
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) out.push_back(i);
  return out;
}

std::string LayerGenome::to_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) s[i] = '1';
  return s;
}

void MutationParams::validate() const {
  if (!(rate >= 0.0 && rate <= 1.0)) throw GenomeError("mutation rate must lie in [0, 1]");
  if (!(ratio_bound > 0.0 && ratio_bound <= 1.0))
    throw GenomeError("ratio bound must lie in (0, 1]");
}

LayerGenome mutate(const LayerGenome& parent, const MutationParams& params, Rng& rng) {
  params.validate();
  std::vector<bool> bits = parent.bits();
  const double bound = static_cast<double>(bits.size()) * params.ratio_bound;
  std::size_t zeros = parent.zero_count();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const double q = rng.uniform01();
    if (!(q < params.rate)) continue;
    if (!bits[i]) {
      bits[i] = true;
      --zeros;
    } else if (static_cast<double>(zeros + 1) <= bound) {
      bits[i] = false;
      ++zeros;
    }
  }
  return LayerGenome(std::move(bits));
}

std::size_t max_zero_count(std::size_t length, double ratio_bound) noexcept {
  const double bound = static_cast<double>(length) * ratio_bound;
  const auto z = static_cast<std::size_t>(std::floor(bound));
  return std::min(z, length);
}

}  // namespace ccep
