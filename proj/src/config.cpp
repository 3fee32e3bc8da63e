#include "ccep/config.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "ccep/errors.hpp"
#include "ccep/file_io.hpp"
#include "ccep/toml_lite.hpp"

namespace ccep {
namespace {

using toml::Value;

// Reads typed keys out of one section and rejects keys nobody asked for.
class SectionReader {
 public:
  SectionReader(const toml::Document& doc, std::string name) : name_(std::move(name)) {
    table_ = doc.section(name_);
  }

  ~SectionReader() = default;

  bool has(std::string_view key) const { return table_ && table_->find(key); }

  template <class T>
  void read(std::string_view key, T& out) {
    used_.insert(std::string(key));
    const Value* v = table_ ? table_->find(key) : nullptr;
    if (!v) return;
    out = convert<T>(*v, key);
  }

  void finish() const {
    if (!table_) return;
    for (const auto& [k, v] : table_->entries)
      if (!used_.count(k)) throw ConfigError("unknown key '" + k + "' in [" + name_ + "]");
  }

 private:
  [[noreturn]] void bad(std::string_view key, const char* what) const {
    throw ConfigError("[" + name_ + "] " + std::string(key) + ": expected " + what);
  }

  template <class T>
  T convert(const Value& v, std::string_view key) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_bool()) bad(key, "a boolean");
      return std::get<bool>(v.data);
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) bad(key, "a string");
      return std::get<std::string>(v.data);
    } else if constexpr (std::is_same_v<T, double>) {
      if (v.is_int()) return static_cast<double>(std::get<std::int64_t>(v.data));
      if (!v.is_number()) bad(key, "a number");
      return std::get<double>(v.data);
    } else if constexpr (std::is_same_v<T, int>) {
      if (!v.is_int()) bad(key, "an integer");
      return static_cast<int>(std::get<std::int64_t>(v.data));
    } else if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
      if (!v.is_int() || std::get<std::int64_t>(v.data) < 0) bad(key, "a non-negative integer");
      return static_cast<T>(std::get<std::int64_t>(v.data));
    } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
      if (!v.is_array()) bad(key, "an array of integers");
      std::vector<std::size_t> out;
      for (const auto& e : std::get<toml::Array>(v.data)) out.push_back(convert<std::size_t>(e, key));
      return out;
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      if (!v.is_array()) bad(key, "an array of strings");
      std::vector<std::string> out;
      for (const auto& e : std::get<toml::Array>(v.data)) out.push_back(convert<std::string>(e, key));
      return out;
    }
  }

  std::string name_;
  const toml::Table* table_ = nullptr;
  std::set<std::string> used_;
};

Value int_value(std::uint64_t v) {
  if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
    throw ConfigError("integer value too large to serialize");
  return Value{static_cast<std::int64_t>(v)};
}

Value string_array(const std::vector<std::string>& items) {
  toml::Array arr;
  for (const auto& s : items) arr.push_back(Value{s});
  return Value{std::move(arr)};
}

Value size_array(const std::vector<std::size_t>& items) {
  toml::Array arr;
  for (auto s : items) arr.push_back(int_value(s));
  return Value{std::move(arr)};
}

void read_schedule(SectionReader& r, ScheduleConfig& out) {
  r.read("preset", out.preset);
  const auto preset = presets::by_name(out.preset);
  if (!preset) throw ConfigError("unknown schedule preset '" + out.preset + "'");
  out.schedule = *preset;
  r.read("lr", out.schedule.initial_lr);
  r.read("epochs", out.schedule.epochs);
  r.read("milestones", out.schedule.milestones);
  r.read("momentum", out.schedule.momentum);
  r.read("weight_decay", out.schedule.weight_decay);
  r.read("batch_size", out.schedule.batch_size);
}

void write_schedule(toml::Table& t, const ScheduleConfig& s) {
  t.set("preset", Value{s.preset});
  t.set("lr", Value{s.schedule.initial_lr});
  t.set("epochs", int_value(s.schedule.epochs));
  t.set("milestones", size_array(s.schedule.milestones));
  t.set("momentum", Value{s.schedule.momentum});
  t.set("weight_decay", Value{s.schedule.weight_decay});
  t.set("batch_size", int_value(s.schedule.batch_size));
}

std::size_t parse_size_token(const std::string& tok, const std::string& layer) {
  std::size_t v = 0;
  std::istringstream in(tok);
  if (!(in >> v) || !in.eof() || v == 0) throw ConfigError("layer '" + layer + "': bad number '" + tok + "'");
  return v;
}

}  // namespace

ArchitectureSpec parse_architecture(const std::vector<std::size_t>& input_shape,
                                    const std::vector<std::string>& layer_tokens) {
  Shape input;
  if (input_shape.size() == 1) {
    input = {input_shape[0], 1, 1};
  } else if (input_shape.size() == 3) {
    input = {input_shape[0], input_shape[1], input_shape[2]};
  } else {
    throw ConfigError("architecture input must be [features] or [channels, height, width]");
  }
  ArchitectureBuilder builder(input);
  for (const auto& layer : layer_tokens) {
    std::istringstream in(layer);
    std::vector<std::string> parts;
    for (std::string p; in >> p;) parts.push_back(p);
    if (parts.empty()) throw ConfigError("empty layer description");
    bool prunable = false;
    if (parts.size() > 1 && parts.back() == "prunable") {
      prunable = true;
      parts.pop_back();
    }
    const std::string& kind = parts[0];
    if (kind == "dense" && parts.size() == 2) {
      builder.dense(parse_size_token(parts[1], layer), prunable);
    } else if (kind == "conv" && parts.size() >= 2 && parts.size() <= 4) {
      std::size_t kernel = 3, stride = 1;
      for (std::size_t i = 2; i < parts.size(); ++i) {
        if (parts[i].size() > 1 && parts[i][0] == 'k') {
          kernel = parse_size_token(parts[i].substr(1), layer);
        } else if (parts[i].size() > 1 && parts[i][0] == 's') {
          stride = parse_size_token(parts[i].substr(1), layer);
        } else {
          throw ConfigError("layer '" + layer + "': expected k<size> or s<stride>");
        }
      }
      builder.conv2d(parse_size_token(parts[1], layer), kernel, stride, prunable);
    } else if (kind == "gap" && parts.size() == 1 && !prunable) {
      builder.global_avg_pool();
    } else if (kind == "relu" && parts.size() == 1 && !prunable) {
      builder.relu();
    } else {
      throw ConfigError("unrecognized layer description '" + layer + "'");
    }
  }
  try {
    return builder.build();
  } catch (const ShapeError& e) {
    throw ConfigError(std::string("invalid architecture: ") + e.what());
  }
}

std::vector<std::string> architecture_tokens(const ArchitectureSpec& spec) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& layer = spec.layers[i];
    std::string tok;
    if (const auto* d = std::get_if<DenseSpec>(&layer)) {
      tok = "dense " + std::to_string(d->out_units);
    } else if (const auto* c = std::get_if<Conv2DSpec>(&layer)) {
      tok = "conv " + std::to_string(c->out_channels) + " k" + std::to_string(c->kernel_size) + " s" +
            std::to_string(c->stride);
    } else if (std::holds_alternative<GlobalAvgPoolSpec>(layer)) {
      tok = "gap";
    } else {
      tok = "relu";
    }
    if (spec.prunable[i]) tok += " prunable";
    out.push_back(tok);
  }
  return out;
}

void RunConfig::validate() const {
  architecture.validate();
  train.schedule.validate();
  finetune.schedule.validate();
  ccep.validate();
  if (!(ccep.finetune == finetune.schedule)) throw ConfigError("ccep finetune schedule out of sync with [finetune]");
  const auto& k = dataset.kind;
  if (k != "blobs" && k != "rings" && k != "idx") throw ConfigError("dataset kind must be blobs, rings or idx");
  if (k != "idx" && (dataset.num_classes == 0 || dataset.train_per_class == 0 || dataset.test_per_class == 0))
    throw ConfigError("dataset class and sample counts must be positive");
  if (k == "idx" && (dataset.train_images.empty() || dataset.train_labels.empty() || dataset.test_images.empty() ||
                     dataset.test_labels.empty()))
    throw ConfigError("idx dataset needs train_images, train_labels, test_images and test_labels");
  if (verbosity < 0 || verbosity > 2) throw ConfigError("verbosity must be 0, 1 or 2");
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.architecture = ArchitectureBuilder({2, 1, 1}).dense(64, true).relu().dense(64, true).relu().dense(4).build();
  cfg.train.preset = "desk";
  cfg.train.schedule = presets::desk();
  cfg.train.schedule.epochs = 30;
  cfg.train.schedule.milestones = {20};
  cfg.finetune.preset = "desk";
  cfg.finetune.schedule = presets::desk();
  cfg.ccep = cifar_profile();
  cfg.ccep.iterations = 8;
  cfg.ccep.global_seed = 42;
  cfg.ccep.finetune = cfg.finetune.schedule;
  return cfg;
}

RunConfig parse_run_config(std::string_view text) {
  const toml::Document doc = toml::parse(text);
  if (!doc.root.entries.empty()) throw ConfigError("keys must live inside a [section]");
  static const std::set<std::string> known = {"dataset", "architecture", "train", "finetune", "ccep", "output"};
  for (const auto& [name, table] : doc.sections)
    if (!known.count(name)) throw ConfigError("unknown section [" + name + "]");

  RunConfig cfg = default_run_config();
  {
    SectionReader r(doc, "dataset");
    auto& d = cfg.dataset;
    r.read("kind", d.kind);
    r.read("classes", d.num_classes);
    r.read("train_per_class", d.train_per_class);
    r.read("test_per_class", d.test_per_class);
    r.read("dims", d.dims);
    r.read("spread", d.spread);
    r.read("noise", d.noise);
    r.read("train_seed", d.train_seed);
    r.read("test_seed", d.test_seed);
    r.read("train_images", d.train_images);
    r.read("train_labels", d.train_labels);
    r.read("test_images", d.test_images);
    r.read("test_labels", d.test_labels);
    r.read("train_limit", d.train_limit);
    r.read("test_limit", d.test_limit);
    r.finish();
  }
  {
    SectionReader r(doc, "architecture");
    if (r.has("input") != r.has("layers")) throw ConfigError("[architecture] needs both input and layers");
    std::vector<std::size_t> input;
    std::vector<std::string> layers;
    r.read("input", input);
    r.read("layers", layers);
    r.finish();
    if (!layers.empty()) cfg.architecture = parse_architecture(input, layers);
  }
  {
    SectionReader r(doc, "train");
    if (r.has("preset")) read_schedule(r, cfg.train);
    else {
      cfg.train.preset = "desk";
      read_schedule(r, cfg.train);
      if (!r.has("epochs") && !r.has("milestones")) {
        cfg.train.schedule.epochs = 30;
        cfg.train.schedule.milestones = {20};
      }
    }
    r.read("seed", cfg.train_seed);
    r.finish();
  }
  {
    SectionReader r(doc, "finetune");
    read_schedule(r, cfg.finetune);
    r.finish();
  }
  {
    SectionReader r(doc, "ccep");
    auto& c = cfg.ccep;
    std::string profile = "cifar";
    r.read("profile", profile);
    if (profile == "cifar") {
      c = cifar_profile();
      c.iterations = 8;
    } else if (profile == "imagenet") {
      c = imagenet_profile();
      c.iterations = 8;
    } else {
      throw ConfigError("unknown ccep profile '" + profile + "' (cifar or imagenet)");
    }
    c.global_seed = 42;
    r.read("iterations", c.iterations);
    r.read("population", c.group.population);
    r.read("generations", c.group.generations);
    r.read("p1", c.group.p1);
    r.read("p2", c.group.p2);
    r.read("ratio_bound", c.group.ratio_bound);
    std::string sel(to_string(c.group.selection));
    r.read("selection", sel);
    const auto parsed = parse_selection(sel);
    if (!parsed) throw ConfigError("selection must be sel_a or sel_b");
    c.group.selection = *parsed;
    r.read("ds_fraction", c.ds_fraction);
    r.read("seed", c.global_seed);
    r.finish();
  }
  cfg.ccep.finetune = cfg.finetune.schedule;
  {
    SectionReader r(doc, "output");
    r.read("dir", cfg.output_dir);
    r.read("verbosity", cfg.verbosity);
    r.finish();
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  return parse_run_config(read_text_file(path));
}

std::string serialize_run_config(const RunConfig& cfg) {
  toml::Document doc;
  {
    auto& t = doc.section_mut("dataset");
    const auto& d = cfg.dataset;
    t.set("kind", Value{d.kind});
    t.set("classes", int_value(d.num_classes));
    t.set("train_per_class", int_value(d.train_per_class));
    t.set("test_per_class", int_value(d.test_per_class));
    t.set("dims", int_value(d.dims));
    t.set("spread", Value{d.spread});
    t.set("noise", Value{d.noise});
    t.set("train_seed", int_value(d.train_seed));
    t.set("test_seed", int_value(d.test_seed));
    t.set("train_images", Value{d.train_images});
    t.set("train_labels", Value{d.train_labels});
    t.set("test_images", Value{d.test_images});
    t.set("test_labels", Value{d.test_labels});
    t.set("train_limit", int_value(d.train_limit));
    t.set("test_limit", int_value(d.test_limit));
  }
  {
    auto& t = doc.section_mut("architecture");
    const Shape& in = cfg.architecture.input;
    t.set("input", in.is_flat() ? size_array({in.channels}) : size_array({in.channels, in.height, in.width}));
    t.set("layers", string_array(architecture_tokens(cfg.architecture)));
  }
  {
    auto& t = doc.section_mut("train");
    write_schedule(t, cfg.train);
    t.set("seed", int_value(cfg.train_seed));
  }
  write_schedule(doc.section_mut("finetune"), cfg.finetune);
  {
    auto& t = doc.section_mut("ccep");
    const auto& c = cfg.ccep;
    t.set("iterations", int_value(c.iterations));
    t.set("population", int_value(c.group.population));
    t.set("generations", int_value(c.group.generations));
    t.set("p1", Value{c.group.p1});
    t.set("p2", Value{c.group.p2});
    t.set("ratio_bound", Value{c.group.ratio_bound});
    t.set("selection", Value{std::string(to_string(c.group.selection))});
    t.set("ds_fraction", Value{c.ds_fraction});
    t.set("seed", int_value(c.global_seed));
  }
  {
    auto& t = doc.section_mut("output");
    t.set("dir", Value{cfg.output_dir});
    t.set("verbosity", Value{static_cast<std::int64_t>(cfg.verbosity)});
  }
  return toml::serialize(doc);
}

std::string config_fingerprint(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_run_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

DataSplits load_datasets(const DatasetConfig& cfg) {
  if (cfg.kind == "blobs")
    return {gen_blobs(cfg.num_classes, cfg.train_per_class, cfg.dims, cfg.spread, cfg.train_seed),
            gen_blobs(cfg.num_classes, cfg.test_per_class, cfg.dims, cfg.spread, cfg.test_seed)};
  if (cfg.kind == "rings")
    return {gen_rings(cfg.num_classes, cfg.train_per_class, cfg.noise, cfg.train_seed),
            gen_rings(cfg.num_classes, cfg.test_per_class, cfg.noise, cfg.test_seed)};
  if (cfg.kind == "idx") {
    DataSplits s{load_idx(cfg.train_images, cfg.train_labels, cfg.train_limit),
                 load_idx(cfg.test_images, cfg.test_labels, cfg.test_limit)};
    const std::size_t classes = std::max(s.train.num_classes, s.test.num_classes);
    s.train.num_classes = s.test.num_classes = classes;
    if (s.train.size() == 0 || s.test.size() == 0) throw DatasetError("idx dataset: empty split");
    return s;
  }
  throw ConfigError("unknown dataset kind '" + cfg.kind + "'");
}

void check_compatible(const ArchitectureSpec& spec, const DataSplits& data) {
  if (data.train.feature_dim() != spec.input.size())
    throw ConfigError("architecture input size " + std::to_string(spec.input.size()) +
                      " does not match dataset feature width " + std::to_string(data.train.feature_dim()));
  if (spec.output_shape().size() < data.train.num_classes)
    throw ConfigError("architecture has " + std::to_string(spec.output_shape().size()) + " outputs but the dataset has " +
                      std::to_string(data.train.num_classes) + " classes");
}

}  // namespace ccep
