#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ccep/rng.hpp"

namespace ccep {

// Retain/prune mask over the filters (or hidden units) of one layer.
// true = retain, false = prune. Length is fixed at construction and >= 1.
class LayerGenome {
 public:
  explicit LayerGenome(std::vector<bool> bits);

  static LayerGenome all_ones(std::size_t length);
  // Parses "1101..." as written by to_string().
  static LayerGenome from_string(std::string_view text);

  std::size_t size() const noexcept { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i]; }
  const std::vector<bool>& bits() const noexcept { return bits_; }

  std::size_t zero_count() const noexcept;
  std::size_t retained() const noexcept { return size() - zero_count(); }
  bool is_all_ones() const noexcept { return zero_count() == 0; }
  std::vector<std::size_t> retained_indices() const;

  std::string to_string() const;

  friend bool operator==(const LayerGenome&, const LayerGenome&) = default;

 private:
  std::vector<bool> bits_;
};

struct MutationParams {
  double rate = 0.0;         // per-bit flip probability
  double ratio_bound = 1.0;  // cap on the pruned fraction, in (0, 1]

  void validate() const;
};

// Bit-wise mutation with a ratio bound.
//
// Bits are scanned in ascending index order. For each bit a uniform q in
// [0, 1) is drawn; when q < rate the bit is a flip candidate. A 0 always
// becomes 1. A 1 becomes 0 only if the vector under construction would still
// hold no more than size() * ratio_bound zeros afterwards (the bound is
// compared as a real number, never rounded). The running zero-count starts
// from the parent's zeros and tracks every flip made earlier in the scan.
LayerGenome mutate(const LayerGenome& parent, const MutationParams& params, Rng& rng);

// Largest zero-count mutate() can produce from an in-bound parent:
// floor(length * ratio_bound).
std::size_t max_zero_count(std::size_t length, double ratio_bound) noexcept;

}  // namespace ccep
