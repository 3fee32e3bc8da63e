#include "ccep/sweep.hpp"

#include <algorithm>
#include <cstdio>

#include "ccep/errors.hpp"
#include "ccep/file_io.hpp"
#include "ccep/parallel.hpp"
#include "ccep/toml_lite.hpp"

namespace ccep {
namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

double as_double(const toml::Value& v) {
  if (v.is_int()) return static_cast<double>(std::get<std::int64_t>(v.data));
  if (!v.is_number()) throw ConfigError("grid: expected a number");
  return std::get<double>(v.data);
}

std::size_t as_size(const toml::Value& v) {
  if (!v.is_int() || std::get<std::int64_t>(v.data) < 1) throw ConfigError("grid: expected a positive integer");
  return static_cast<std::size_t>(std::get<std::int64_t>(v.data));
}

using Axis = std::vector<std::pair<std::string, std::function<void(GroupEAConfig&)>>>;

Axis parse_axis(const std::string& key, const toml::Value& value) {
  if (!value.is_array() || std::get<toml::Array>(value.data).empty())
    throw ConfigError("grid: axis '" + key + "' must be a non-empty array");
  Axis axis;
  for (const auto& v : std::get<toml::Array>(value.data)) {
    if (key == "population") {
      const std::size_t m = as_size(v);
      axis.emplace_back("m=" + std::to_string(m), [m](GroupEAConfig& g) { g.population = m; });
    } else if (key == "generations") {
      const std::size_t n = as_size(v);
      axis.emplace_back("G=" + std::to_string(n), [n](GroupEAConfig& g) { g.generations = n; });
    } else if (key == "p1" || key == "p2" || key == "ratio_bound") {
      const double x = as_double(v);
      axis.emplace_back(key + "=" + toml::format_double(x), [key, x](GroupEAConfig& g) {
        (key == "p1" ? g.p1 : key == "p2" ? g.p2 : g.ratio_bound) = x;
      });
    } else if (key == "mutation") {
      if (!v.is_array() || std::get<toml::Array>(v.data).size() != 2)
        throw ConfigError("grid: mutation entries must be [p1, r] pairs");
      const auto& pair = std::get<toml::Array>(v.data);
      const double p1 = as_double(pair[0]), r = as_double(pair[1]);
      axis.emplace_back("p1=" + toml::format_double(p1) + " r=" + toml::format_double(r),
                        [p1, r](GroupEAConfig& g) {
                          g.p1 = p1;
                          g.ratio_bound = r;
                        });
    } else if (key == "selection") {
      if (!v.is_string()) throw ConfigError("grid: selection entries must be strings");
      const auto sel = parse_selection(std::get<std::string>(v.data));
      if (!sel) throw ConfigError("grid: selection must be sel_a or sel_b");
      axis.emplace_back(std::string(to_string(*sel)), [s = *sel](GroupEAConfig& g) { g.selection = s; });
    } else {
      throw ConfigError("grid: unknown axis '" + key + "'");
    }
  }
  return axis;
}

}  // namespace

std::vector<std::string> builtin_grid_names() { return {"population", "generations", "mutation", "selection"}; }

std::vector<SweepPoint> builtin_grid(std::string_view name, const GroupEAConfig& base) {
  if (name == "population") return parse_grid("[grid]\npopulation = [3, 5, 7, 9]\n", base);
  if (name == "generations") return parse_grid("[grid]\ngenerations = [5, 10, 15]\n", base);
  if (name == "mutation") return parse_grid("[grid]\nmutation = [[0.05, 0.1], [0.1, 0.15], [0.15, 0.2]]\n", base);
  if (name == "selection") return parse_grid("[grid]\nselection = [\"sel_a\", \"sel_b\"]\n", base);
  throw ConfigError("unknown built-in grid '" + std::string(name) + "'");
}

std::vector<SweepPoint> parse_grid(std::string_view text, const GroupEAConfig& base) {
  const toml::Document doc = toml::parse(text);
  if (!doc.root.entries.empty() || doc.sections.size() != 1 || doc.sections[0].first != "grid")
    throw ConfigError("grid file must contain exactly one [grid] section");
  std::vector<SweepPoint> points{{"", base}};
  for (const auto& [key, value] : doc.sections[0].second.entries) {
    const Axis axis = parse_axis(key, value);
    std::vector<SweepPoint> next;
    for (const auto& p : points)
      for (const auto& [label, apply] : axis) {
        SweepPoint q = p;
        q.label += (q.label.empty() ? "" : " ") + label;
        apply(q.group);
        next.push_back(std::move(q));
      }
    points = std::move(next);
  }
  if (doc.sections[0].second.entries.empty()) points[0].label = "base";
  for (const auto& p : points) p.group.validate();
  return points;
}

std::vector<SweepPoint> resolve_grid(const std::string& grid, const GroupEAConfig& base) {
  const auto names = builtin_grid_names();
  if (std::find(names.begin(), names.end(), grid) != names.end()) return builtin_grid(grid, base);
  if (!std::filesystem::exists(grid)) throw ConfigError("grid file not found: " + grid);
  return parse_grid(read_text_file(grid), base);
}

SweepResult run_sweep(const NetworkModel& original, const LabeledDataset& train, const LabeledDataset& test,
                      const CCEPConfig& base, const std::vector<SweepPoint>& points, std::size_t seeds,
                      std::size_t workers, const std::function<void(const SweepRun&)>& on_run) {
  if (points.empty()) throw ConfigError("sweep grid is empty");
  if (seeds == 0) throw ConfigError("sweep needs at least one seed");
  base.validate();
  SweepResult result;
  result.points = points;
  result.iterations = base.iterations;
  result.baseline = measure(original, test, flops(original));
  result.runs.resize(points.size() * seeds);

  parallel_for(result.runs.size(), workers, [&](std::size_t k) {
    SweepRun& run = result.runs[k];
    run.point = k / seeds;
    run.seed = base.global_seed + k % seeds;
    CCEPConfig cfg = base;
    cfg.group = points[run.point].group;
    cfg.global_seed = run.seed;
    const RunResult r = ccep::run(original, train, test, cfg, RunOptions{1, {}});
    run.completed = r.archive.size();
    EntryMetrics last = result.baseline;
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
      if (it < r.archive.size()) last = r.archive[it].metrics;
      run.per_iteration.push_back(last);
    }
    if (on_run) on_run(run);
  });
  return result;
}

std::size_t iterations_to_target(const SweepRun& run, double target) {
  for (std::size_t i = 0; i < run.per_iteration.size(); ++i)
    if (run.per_iteration[i].flops_reduction >= target) return i + 1;
  return run.per_iteration.size() + 1;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "point,label,iteration,mean_test_acc,mean_acc_drop,mean_flops_reduction\n";
  const double base_acc = result.baseline.test_accuracy();
  for (std::size_t p = 0; p < result.points.size(); ++p) {
    for (std::size_t it = 0; it < result.iterations; ++it) {
      double acc = 0.0, red = 0.0;
      std::size_t n = 0;
      for (const auto& r : result.runs) {
        if (r.point != p) continue;
        acc += r.per_iteration[it].test_accuracy();
        red += r.per_iteration[it].flops_reduction;
        ++n;
      }
      acc /= static_cast<double>(n);
      red /= static_cast<double>(n);
      out += std::to_string(p) + "," + result.points[p].label + "," + std::to_string(it + 1) + "," + fmt("%.6f", acc) +
             "," + fmt("%.6f", base_acc - acc) + "," + fmt("%.6f", red) + "\n";
    }
  }
  return out;
}

std::string sweep_runs_csv(const SweepResult& result) {
  std::string out = "point,seed,iteration,test_acc,flops,flops_reduction,carried\n";
  for (const auto& r : result.runs)
    for (std::size_t it = 0; it < r.per_iteration.size(); ++it) {
      const auto& m = r.per_iteration[it];
      out += std::to_string(r.point) + "," + std::to_string(r.seed) + "," + std::to_string(it + 1) + "," +
             fmt("%.6f", m.test_accuracy()) + "," + std::to_string(m.flops) + "," + fmt("%.6f", m.flops_reduction) +
             "," + (it < r.completed ? "0" : "1") + "\n";
    }
  return out;
}

std::string sweep_points_csv(const SweepResult& result, double target) {
  std::string out =
      "point,label,population,generations,p1,p2,ratio_bound,selection,median_iters_to_target,mean_final_acc,"
      "mean_final_flops_reduction\n";
  for (std::size_t p = 0; p < result.points.size(); ++p) {
    std::vector<double> iters;
    double acc = 0.0, red = 0.0;
    for (const auto& r : result.runs) {
      if (r.point != p) continue;
      iters.push_back(static_cast<double>(iterations_to_target(r, target)));
      acc += r.per_iteration.back().test_accuracy();
      red += r.per_iteration.back().flops_reduction;
    }
    const double n = static_cast<double>(iters.size());
    const auto& g = result.points[p].group;
    out += std::to_string(p) + "," + result.points[p].label + "," + std::to_string(g.population) + "," +
           std::to_string(g.generations) + "," + toml::format_double(g.p1) + "," + toml::format_double(g.p2) + "," +
           toml::format_double(g.ratio_bound) + "," + std::string(to_string(g.selection)) + "," +
           fmt("%.1f", median(iters)) + "," + fmt("%.6f", acc / n) + "," + fmt("%.6f", red / n) + "\n";
  }
  return out;
}

}  // namespace ccep
