#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ccep/coevolution.hpp"
#include "ccep/dataset.hpp"
#include "ccep/network.hpp"
#include "ccep/training.hpp"

namespace ccep {

// Where the train / test splits come from. Synthetic splits are two
// independently seeded draws from the same generator.
struct DatasetConfig {
  std::string kind = "blobs";  // blobs | rings | idx
  std::size_t num_classes = 4;
  std::size_t train_per_class = 250;
  std::size_t test_per_class = 250;
  std::size_t dims = 2;        // blobs only
  double spread = 0.6;         // blobs only
  double noise = 0.1;          // rings only
  std::uint64_t train_seed = 1;
  std::uint64_t test_seed = 2;
  std::string train_images, train_labels, test_images, test_labels;  // idx only
  std::size_t train_limit = 60000;
  std::size_t test_limit = 10000;

  friend bool operator==(const DatasetConfig&, const DatasetConfig&) = default;
};

// A named schedule preset plus the fully resolved schedule (explicit keys in
// the file override the preset's values).
struct ScheduleConfig {
  std::string preset = "desk";
  FinetuneConfig schedule = presets::desk();
  friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

struct RunConfig {
  DatasetConfig dataset;
  ArchitectureSpec architecture;
  ScheduleConfig train;        // from-scratch training of the original network
  std::uint64_t train_seed = 7;
  ScheduleConfig finetune;     // per-iteration finetuning inside CCEP
  CCEPConfig ccep;             // ccep.finetune mirrors finetune.schedule
  std::string output_dir = "out";
  int verbosity = 1;           // 0 quiet, 1 progress, 2 progress + per-generation traces

  void validate() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// The built-in desk-scale task: 2 x 64 ReLU MLP on 4-class 2-D blobs and the
// CIFAR hyperparameter profile with T = 8.
RunConfig default_run_config();

RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string serialize_run_config(const RunConfig& cfg);

// FNV-1a 64 of the canonical serialization, as 16 hex digits.
std::string config_fingerprint(const RunConfig& cfg);

// Layer tokens: "dense <units> [prunable]", "conv <filters> k<size> s<stride>
// [prunable]", "gap", "relu".
ArchitectureSpec parse_architecture(const std::vector<std::size_t>& input_shape,
                                    const std::vector<std::string>& layer_tokens);
std::vector<std::string> architecture_tokens(const ArchitectureSpec& spec);

struct DataSplits {
  LabeledDataset train;
  LabeledDataset test;
};

// Builds / loads both splits and checks them against the architecture.
DataSplits load_datasets(const DatasetConfig& cfg);
void check_compatible(const ArchitectureSpec& spec, const DataSplits& data);

}  // namespace ccep
