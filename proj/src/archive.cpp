#include "ccep/archive.hpp"

#include <algorithm>
#include <cstdio>
#include <regex>

#include <json.hpp>

#include "ccep/checkpoint.hpp"
#include "ccep/errors.hpp"
#include "ccep/file_io.hpp"

namespace ccep {
namespace {

using json = nlohmann::ordered_json;

json metrics_json(const EntryMetrics& m) {
  json j;
  j["test_correct"] = m.test_correct;
  j["test_total"] = m.test_total;
  j["test_accuracy"] = m.test_accuracy();
  j["flops"] = m.flops;
  j["params"] = m.params;
  j["flops_reduction"] = m.flops_reduction;
  return j;
}

StoredMetrics read_metrics(const json& j) {
  StoredMetrics m;
  m.test_correct = j.at("test_correct").get<std::size_t>();
  m.test_total = j.at("test_total").get<std::size_t>();
  m.test_accuracy = j.at("test_accuracy").get<double>();
  m.flops = j.at("flops").get<std::uint64_t>();
  m.params = j.at("params").get<std::uint64_t>();
  m.flops_reduction = j.at("flops_reduction").get<double>();
  return m;
}

template <class F>
auto parse_guarded(const std::string& text, const char* what, F&& body) {
  try {
    return body(json::parse(text));
  } catch (const json::exception& e) {
    throw FormatError(std::string("corrupt ") + what + ": " + e.what());
  }
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

BaselineInfo make_baseline(const NetworkModel& original, const LabeledDataset& test, std::string fingerprint) {
  BaselineInfo b;
  b.metrics = measure(original, test, flops(original));
  for (std::size_t li : original.spec().prunable_layers()) {
    b.layer_indices.push_back(li);
    b.widths.push_back(original.spec().layer_width(li));
  }
  b.config_fingerprint = std::move(fingerprint);
  return b;
}

std::string entry_file_stem(std::size_t iteration) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "entry_%03zu", iteration);
  return buf;
}

std::string baseline_json(const BaselineInfo& baseline) {
  json j;
  j["iteration"] = 0;
  j["layer_indices"] = baseline.layer_indices;
  j["widths"] = baseline.widths;
  j["metrics"] = metrics_json(baseline.metrics);
  j["config_fingerprint"] = baseline.config_fingerprint;
  return j.dump(2) + "\n";
}

std::string entry_json(const ArchiveEntry& entry, const std::string& fingerprint) {
  json j;
  j["iteration"] = entry.iteration;
  json layers = json::array();
  std::size_t retained_total = 0;
  for (const auto& l : entry.layers) {
    json lj;
    lj["layer"] = l.layer_index;
    lj["width_before"] = l.width_before;
    lj["width"] = l.genome.retained();
    lj["bits"] = l.genome.to_string();
    lj["correct_count"] = l.fitness.correct_count;
    lj["eval_total"] = l.fitness.eval_total;
    lj["final_population_has_pruned"] = l.final_population_has_pruned;
    layers.push_back(std::move(lj));
    retained_total += l.genome.retained();
  }
  j["layers"] = std::move(layers);
  j["retained_total"] = retained_total;
  j["metrics"] = metrics_json(entry.metrics);
  j["config_fingerprint"] = fingerprint;
  j["checkpoint"] = entry_file_stem(entry.iteration) + ".ckpt";
  return j.dump(2) + "\n";
}

std::string summary_csv(const BaselineInfo& baseline, std::span<const ArchiveEntry> entries) {
  std::string out = "iteration,test_acc,flops,flops_reduction\n";
  out += "0," + fmt6(baseline.metrics.test_accuracy()) + "," + std::to_string(baseline.metrics.flops) + "," +
         fmt6(0.0) + "\n";
  for (const auto& e : entries)
    out += std::to_string(e.iteration) + "," + fmt6(e.metrics.test_accuracy()) + "," + std::to_string(e.metrics.flops) +
           "," + fmt6(e.metrics.flops_reduction) + "\n";
  return out;
}

std::string trace_csv(std::span<const ArchiveEntry> entries) {
  std::string out = "iteration,layer,generation,correct_count,retained,flops\n";
  for (const auto& e : entries)
    for (const auto& l : e.layers)
      for (const auto& g : l.history)
        out += std::to_string(e.iteration) + "," + std::to_string(l.layer_index) + "," + std::to_string(g.generation) +
               "," + std::to_string(g.best.correct_count) + "," + std::to_string(g.best.retained) + "," +
               std::to_string(g.best.flops) + "\n";
  return out;
}

void write_baseline(const std::filesystem::path& dir, const BaselineInfo& baseline) {
  write_file_atomic(dir / "baseline.json", baseline_json(baseline));
}

void write_entry(const std::filesystem::path& dir, const ArchiveEntry& entry, const std::string& fingerprint) {
  const std::string stem = entry_file_stem(entry.iteration);
  save_checkpoint(entry.network, dir / (stem + ".ckpt"));
  write_file_atomic(dir / (stem + ".json"), entry_json(entry, fingerprint));
}

void write_summary(const std::filesystem::path& dir, const BaselineInfo& baseline,
                   std::span<const ArchiveEntry> entries) {
  write_file_atomic(dir / "summary.csv", summary_csv(baseline, entries));
}

void write_trace(const std::filesystem::path& dir, std::span<const ArchiveEntry> entries) {
  write_file_atomic(dir / "trace.csv", trace_csv(entries));
}

StoredEntry parse_entry_json(const std::string& text) {
  return parse_guarded(text, "archive entry", [](const json& j) {
    StoredEntry e;
    e.iteration = j.at("iteration").get<std::size_t>();
    for (const auto& lj : j.at("layers")) {
      StoredLayer l;
      l.layer = lj.at("layer").get<std::size_t>();
      l.width_before = lj.at("width_before").get<std::size_t>();
      l.width = lj.at("width").get<std::size_t>();
      l.bits = lj.at("bits").get<std::string>();
      l.correct_count = lj.at("correct_count").get<std::size_t>();
      l.eval_total = lj.at("eval_total").get<std::size_t>();
      l.final_population_has_pruned = lj.at("final_population_has_pruned").get<bool>();
      if (l.bits.size() != l.width_before || static_cast<std::size_t>(std::count(l.bits.begin(), l.bits.end(), '1')) != l.width)
        throw FormatError("archive entry: layer bits disagree with widths");
      e.layers.push_back(std::move(l));
    }
    e.retained_total = j.at("retained_total").get<std::size_t>();
    e.metrics = read_metrics(j.at("metrics"));
    e.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    e.checkpoint = j.at("checkpoint").get<std::string>();
    return e;
  });
}

StoredBaseline parse_baseline_json(const std::string& text) {
  return parse_guarded(text, "baseline", [](const json& j) {
    StoredBaseline b;
    b.metrics = read_metrics(j.at("metrics"));
    b.layer_indices = j.at("layer_indices").get<std::vector<std::size_t>>();
    b.widths = j.at("widths").get<std::vector<std::size_t>>();
    b.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    if (b.layer_indices.size() != b.widths.size()) throw FormatError("baseline: layer_indices and widths differ in length");
    return b;
  });
}

StoredArchive read_archive(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw FormatError("archive directory not found: " + dir.string());
  const auto baseline_path = dir / "baseline.json";
  if (!std::filesystem::exists(baseline_path)) throw FormatError("archive is missing " + baseline_path.string());
  StoredArchive archive;
  archive.baseline = parse_baseline_json(read_text_file(baseline_path));

  static const std::regex entry_name(R"(entry_(\d+)\.json)");
  std::vector<std::filesystem::path> files;
  for (const auto& de : std::filesystem::directory_iterator(dir))
    if (de.is_regular_file() && std::regex_match(de.path().filename().string(), entry_name)) files.push_back(de.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    StoredEntry e = parse_entry_json(read_text_file(f));
    if (f.filename().string() != entry_file_stem(e.iteration) + ".json")
      throw FormatError("archive entry " + f.string() + " records iteration " + std::to_string(e.iteration));
    archive.entries.push_back(std::move(e));
  }
  std::sort(archive.entries.begin(), archive.entries.end(),
            [](const StoredEntry& a, const StoredEntry& b) { return a.iteration < b.iteration; });
  return archive;
}

}  // namespace ccep
