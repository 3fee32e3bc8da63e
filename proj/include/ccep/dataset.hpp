#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ccep/tensor.hpp"

namespace ccep {

// Sample-major features with one integer class label per row.
struct LabeledDataset {
  Matrix features;
  std::vector<int> labels;
  std::size_t num_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t feature_dim() const noexcept { return features.cols(); }

  // Throws DatasetError when counts disagree, a label is out of range, or a
  // feature is non-finite.
  void validate() const;

  LabeledDataset subset(std::span<const std::size_t> indices) const;
  std::vector<std::size_t> class_histogram() const;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

// Gaussian clusters, one per class, samples_per_class each, ordered by class.
//
// Class c has its mean on a circle of radius 2 in the first two coordinates,
// at angle 2*pi*c/num_classes; remaining coordinates have mean 0. With
// dims == 1 the means sit at 2*c on the line. Every coordinate gets
// independent N(0, spread^2) noise.
LabeledDataset gen_blobs(std::size_t num_classes, std::size_t samples_per_class, std::size_t dims,
                         double spread, std::uint64_t seed);

// Concentric annuli in 2-D. Class k has nominal radius k + 1 and a uniform
// angle; the radius is perturbed by N(0, noise^2).
LabeledDataset gen_rings(std::size_t num_classes, std::size_t samples_per_class, double noise,
                         std::uint64_t seed);

struct IdxImageInfo {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

// Loads at most `limit` samples from an IDX image/label file pair
// (image magic 0x00000803, label magic 0x00000801, big-endian sizes,
// unsigned-byte pixels scaled to [0, 1]). num_classes == 0 infers
// max label + 1. Throws IdxFormatError on malformed input.
LabeledDataset load_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path, std::size_t limit,
                        std::size_t num_classes = 0);

IdxImageInfo read_idx_image_header(const std::filesystem::path& images_path);

// Writes features as rows x cols unsigned-byte images (values are clamped to
// [0, 1] and rounded to the nearest k/255).
void write_idx(const LabeledDataset& data, std::size_t rows, std::size_t cols,
               const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

// ceil(fraction * N) samples drawn uniformly without replacement, returned in
// ascending original-index order. fraction must lie in (0, 1].
std::vector<std::size_t> sample_indices(std::size_t population, double fraction, std::uint64_t seed);
LabeledDataset sample_subset(const LabeledDataset& data, double fraction, std::uint64_t seed);

}  // namespace ccep
