#include "ccep/coevolution.hpp"

#include <algorithm>
#include <optional>

#include "ccep/errors.hpp"
#include "ccep/parallel.hpp"

namespace ccep {
namespace {

// Stream tags keep the D_s, group and finetune seeds of one iteration apart.
constexpr std::uint64_t kDsStream = 1;
constexpr std::uint64_t kGroupStream = 2;
constexpr std::uint64_t kFinetuneStream = 3;

}  // namespace

void CCEPConfig::validate() const {
  if (iterations < 1) throw ConfigError("ccep: at least one iteration is required");
  if (!(ds_fraction > 0.0 && ds_fraction <= 1.0)) throw ConfigError("ccep: ds_fraction must lie in (0, 1]");
  group.validate();
  finetune.validate();
}

CCEPConfig cifar_profile() {
  CCEPConfig cfg;
  cfg.iterations = 12;
  cfg.group = {5, 10, 0.05, 0.1, 0.1, Selection::sel_a};
  cfg.ds_fraction = 0.2;
  return cfg;
}

CCEPConfig imagenet_profile() {
  CCEPConfig cfg;
  cfg.iterations = 12;
  cfg.group = {5, 10, 0.1, 0.1, 0.15, Selection::sel_b};
  cfg.ds_fraction = 0.01;
  return cfg;
}

std::vector<LayerGroup> group_by_layer(const NetworkModel& base) {
  std::vector<LayerGroup> groups;
  for (std::size_t li : base.spec().prunable_layers()) groups.push_back({li, base.spec().layer_width(li)});
  if (groups.empty()) throw NoPrunableLayersError("network has no prunable layers");
  return groups;
}

EntryMetrics measure(const NetworkModel& net, const LabeledDataset& test, std::uint64_t original_flops) {
  const EvalCount count = evaluate(net, test);
  EntryMetrics m;
  m.test_correct = count.correct;
  m.test_total = count.total;
  m.flops = flops(net);
  m.params = param_count(net.spec());
  m.flops_reduction =
      original_flops == 0 ? 0.0 : 1.0 - static_cast<double>(m.flops) / static_cast<double>(original_flops);
  return m;
}

std::uint64_t ds_seed(std::uint64_t global_seed, std::size_t iteration) {
  return derive_seed(global_seed, kDsStream, iteration);
}

std::uint64_t group_seed(std::uint64_t global_seed, std::size_t iteration, std::size_t layer_index) {
  return derive_seed(global_seed, kGroupStream, iteration, layer_index);
}

std::uint64_t finetune_seed(std::uint64_t global_seed, std::size_t iteration) {
  return derive_seed(global_seed, kFinetuneStream, iteration);
}

IterationResult run_iteration(const NetworkModel& base, const LabeledDataset& train, const LabeledDataset& test,
                              const CCEPConfig& cfg, std::size_t iteration, std::uint64_t original_flops,
                              const RunOptions& options) {
  cfg.validate();
  const auto groups = group_by_layer(base);
  const LabeledDataset ds = sample_subset(train, cfg.ds_fraction, ds_seed(cfg.global_seed, iteration));

  // Every group evaluates against the same frozen base; results land in
  // per-group slots so the outcome is independent of thread scheduling.
  std::vector<std::optional<GroupRunResult>> results(groups.size());
  parallel_for(groups.size(), options.workers, [&](std::size_t g) {
    Rng rng(group_seed(cfg.global_seed, iteration, groups[g].layer_index));
    results[g] = run_group_ea(base, groups[g].layer_index, ds, cfg.group, rng);
  });

  std::vector<LayerGenome> genomes;
  std::vector<LayerOutcome> outcomes;
  std::uint64_t evaluations = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    GroupRunResult& r = *results[g];
    evaluations += r.evaluations;
    genomes.push_back(r.selected.genome);
    outcomes.push_back({groups[g].layer_index, groups[g].width, r.selected.genome, *r.selected.fitness,
                        r.final_population_has_pruned(), std::move(r.history)});
  }

  const NetworkModel pruned = apply_genomes(base, genomes);
  Rng ft_rng(finetune_seed(cfg.global_seed, iteration));
  NetworkModel tuned = finetune(pruned, train, cfg.finetune, ft_rng);
  EntryMetrics metrics = measure(tuned, test, original_flops);
  ArchiveEntry entry{iteration, tuned, std::move(outcomes), metrics};
  return {std::move(tuned), std::move(entry), evaluations};
}

RunResult run(const NetworkModel& original, const LabeledDataset& train, const LabeledDataset& test,
              const CCEPConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const std::uint64_t original_flops = flops(original);
  RunResult result;
  NetworkModel base = original;
  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    std::vector<LayerGroup> groups;
    try {
      groups = group_by_layer(base);
    } catch (const NoPrunableLayersError& e) {
      result.terminated_early = true;
      result.termination_reason = e.what();
      break;
    }
    if (std::all_of(groups.begin(), groups.end(), [](const LayerGroup& g) { return g.width <= 1; })) {
      result.terminated_early = true;
      result.termination_reason = "every prunable layer has width 1";
      break;
    }
    IterationResult step = run_iteration(base, train, test, cfg, it, original_flops, options);
    result.evaluations += step.evaluations;
    base = std::move(step.new_base);
    if (options.on_entry) options.on_entry(step.entry);
    result.archive.push_back(std::move(step.entry));
  }
  return result;
}

}  // namespace ccep
