#include "ccep/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "ccep/errors.hpp"
#include "ccep/file_io.hpp"
#include "ccep/rng.hpp"

namespace ccep {

void LabeledDataset::validate() const {
  if (features.rows() != labels.size())
    throw DatasetError("dataset: " + std::to_string(features.rows()) + " feature rows but " +
                       std::to_string(labels.size()) + " labels");
  for (int y : labels)
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) throw DatasetError("dataset: label out of range");
  for (double v : features.values())
    if (!std::isfinite(v)) throw DatasetError("dataset: non-finite feature");
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.features = features.select_rows(indices);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.labels.push_back(labels[i]);
  out.num_classes = num_classes;
  return out;
}

std::vector<std::size_t> LabeledDataset::class_histogram() const {
  std::vector<std::size_t> hist(num_classes, 0);
  for (int y : labels) ++hist[static_cast<std::size_t>(y)];
  return hist;
}

LabeledDataset gen_blobs(std::size_t num_classes, std::size_t samples_per_class, std::size_t dims, double spread,
                         std::uint64_t seed) {
  if (num_classes == 0 || samples_per_class == 0 || dims == 0)
    throw DatasetError("gen_blobs: counts must be positive");
  if (!(spread >= 0.0)) throw DatasetError("gen_blobs: spread must be non-negative");
  constexpr double kRadius = 2.0;
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  Rng rng(seed);
  LabeledDataset data;
  data.num_classes = num_classes;
  data.features = Matrix(num_classes * samples_per_class, dims);
  data.labels.reserve(num_classes * samples_per_class);
  std::vector<double> mean(dims, 0.0);
  std::size_t row = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    std::fill(mean.begin(), mean.end(), 0.0);
    if (dims == 1) {
      mean[0] = kRadius * static_cast<double>(c);
    } else {
      const double angle = kTwoPi * static_cast<double>(c) / static_cast<double>(num_classes);
      mean[0] = kRadius * std::cos(angle);
      mean[1] = kRadius * std::sin(angle);
    }
    for (std::size_t s = 0; s < samples_per_class; ++s, ++row) {
      for (std::size_t d = 0; d < dims; ++d) data.features(row, d) = mean[d] + spread * rng.normal();
      data.labels.push_back(static_cast<int>(c));
    }
  }
  return data;
}

LabeledDataset gen_rings(std::size_t num_classes, std::size_t samples_per_class, double noise, std::uint64_t seed) {
  if (num_classes == 0 || samples_per_class == 0) throw DatasetError("gen_rings: counts must be positive");
  if (!(noise >= 0.0)) throw DatasetError("gen_rings: noise must be non-negative");
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  Rng rng(seed);
  LabeledDataset data;
  data.num_classes = num_classes;
  data.features = Matrix(num_classes * samples_per_class, 2);
  std::size_t row = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    for (std::size_t s = 0; s < samples_per_class; ++s, ++row) {
      const double angle = kTwoPi * rng.uniform01();
      const double radius = static_cast<double>(c + 1) + noise * rng.normal();
      data.features(row, 0) = radius * std::cos(angle);
      data.features(row, 1) = radius * std::sin(angle);
      data.labels.push_back(static_cast<int>(c));
    }
  }
  return data;
}

namespace {

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset, const std::string& what) {
  if (offset + 4 > bytes.size()) throw IdxFormatError(what + ": truncated header");
  return (static_cast<std::uint32_t>(bytes[offset]) << 24) | (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
         (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) | static_cast<std::uint32_t>(bytes[offset + 3]);
}

void append_be32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

std::vector<std::uint8_t> read_idx_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DatasetError("IDX file not found: " + path.string());
  return read_binary_file(path);
}

IdxImageInfo parse_image_header(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  const std::uint32_t magic = read_be32(bytes, 0, name);
  if (magic != kIdxImageMagic) throw IdxFormatError(name + ": bad image magic number");
  IdxImageInfo info{read_be32(bytes, 4, name), read_be32(bytes, 8, name), read_be32(bytes, 12, name)};
  if (info.rows == 0 || info.cols == 0) throw IdxFormatError(name + ": zero image dimension");
  if (bytes.size() < 16 + info.count * info.rows * info.cols) throw IdxFormatError(name + ": truncated pixel data");
  return info;
}

}  // namespace

IdxImageInfo read_idx_image_header(const std::filesystem::path& images_path) {
  return parse_image_header(read_idx_file(images_path), images_path.string());
}

LabeledDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                        std::size_t limit, std::size_t num_classes) {
  const auto images = read_idx_file(images_path);
  const auto labels = read_idx_file(labels_path);
  const IdxImageInfo info = parse_image_header(images, images_path.string());

  const std::string lname = labels_path.string();
  if (read_be32(labels, 0, lname) != kIdxLabelMagic) throw IdxFormatError(lname + ": bad label magic number");
  const std::size_t label_count = read_be32(labels, 4, lname);
  if (label_count != info.count)
    throw IdxFormatError("IDX image count " + std::to_string(info.count) + " does not match label count " +
                         std::to_string(label_count));
  if (labels.size() < 8 + label_count) throw IdxFormatError(lname + ": truncated label data");

  const std::size_t n = std::min(limit, info.count);
  const std::size_t pixels = info.rows * info.cols;
  LabeledDataset data;
  data.features = Matrix(n, pixels);
  data.labels.resize(n);
  int max_label = -1;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < pixels; ++p)
      data.features(i, p) = static_cast<double>(images[16 + i * pixels + p]) / 255.0;
    data.labels[i] = labels[8 + i];
    max_label = std::max(max_label, data.labels[i]);
  }
  data.num_classes = num_classes > 0 ? num_classes : static_cast<std::size_t>(max_label + 1);
  data.validate();
  return data;
}

void write_idx(const LabeledDataset& data, std::size_t rows, std::size_t cols,
               const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  if (rows * cols != data.feature_dim()) throw DatasetError("write_idx: rows x cols must equal the feature width");
  std::string img;
  append_be32(img, kIdxImageMagic);
  append_be32(img, static_cast<std::uint32_t>(data.size()));
  append_be32(img, static_cast<std::uint32_t>(rows));
  append_be32(img, static_cast<std::uint32_t>(cols));
  for (double v : data.features.values())
    img.push_back(static_cast<char>(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
  std::string lab;
  append_be32(lab, kIdxLabelMagic);
  append_be32(lab, static_cast<std::uint32_t>(data.size()));
  for (int y : data.labels) {
    if (y < 0 || y > 255) throw DatasetError("write_idx: label does not fit in a byte");
    lab.push_back(static_cast<char>(static_cast<std::uint8_t>(y)));
  }
  write_file_atomic(images_path, img);
  write_file_atomic(labels_path, lab);
}

std::vector<std::size_t> sample_indices(std::size_t population, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw DatasetError("sample_subset: fraction must lie in (0, 1]");
  if (population == 0) throw DatasetError("sample_subset: dataset is empty");
  // The 1e-9 slack keeps products such as 0.2 * 1000 from rounding up to 201.
  const double exact = fraction * static_cast<double>(population);
  auto n = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  n = std::clamp<std::size_t>(n, 1, population);
  std::vector<std::size_t> idx(population);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  // Partial Fisher-Yates: the first n slots are a uniform sample.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.uniform_index(population - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  return idx;
}

LabeledDataset sample_subset(const LabeledDataset& data, double fraction, std::uint64_t seed) {
  const auto idx = sample_indices(data.size(), fraction, seed);
  return data.subset(idx);
}

}  // namespace ccep
