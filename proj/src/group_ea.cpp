#include "ccep/group_ea.hpp"

#include <algorithm>
#include <stdexcept>

#include "ccep/errors.hpp"

namespace ccep {

std::string_view to_string(Selection s) noexcept { return s == Selection::sel_a ? "sel_a" : "sel_b"; }

std::optional<Selection> parse_selection(std::string_view text) noexcept {
  if (text == "sel_a" || text == "a") return Selection::sel_a;
  if (text == "sel_b" || text == "b") return Selection::sel_b;
  return std::nullopt;
}

void GroupEAConfig::validate() const {
  if (population < 2) throw ConfigError("group EA: population size must be at least 2");
  if (generations < 1) throw ConfigError("group EA: at least one generation is required");
  if (!(p1 >= 0.0 && p1 <= 1.0) || !(p2 >= 0.0 && p2 <= 1.0))
    throw ConfigError("group EA: mutation rates must lie in [0, 1]");
  if (!(ratio_bound > 0.0 && ratio_bound <= 1.0)) throw ConfigError("group EA: ratio bound must lie in (0, 1]");
}

bool better_key(const Fitness& a, const Fitness& b) noexcept {
  if (a.correct_count != b.correct_count) return a.correct_count > b.correct_count;
  return a.retained < b.retained;
}

Population init_population(std::size_t width, const GroupEAConfig& cfg, Rng& rng) {
  const LayerGenome seed = LayerGenome::all_ones(width);
  const MutationParams params{cfg.p1, cfg.ratio_bound};
  Population pop;
  pop.reserve(cfg.population);
  pop.push_back({seed, std::nullopt});
  for (std::size_t i = 1; i < cfg.population; ++i) pop.push_back({mutate(seed, params, rng), std::nullopt});
  return pop;
}

Population make_offspring(const Population& parents, const GroupEAConfig& cfg, Rng& rng) {
  if (parents.empty()) throw std::invalid_argument("make_offspring: parent population is empty");
  const MutationParams params{cfg.p2, cfg.ratio_bound};
  Population children;
  children.reserve(cfg.population);
  for (std::size_t i = 0; i < cfg.population; ++i) {
    const Individual& parent = parents[rng.uniform_index(parents.size())];
    children.push_back({mutate(parent.genome, params, rng), std::nullopt});
  }
  return children;
}

Individual evaluate_individual(Individual ind, const NetworkModel& base, std::size_t layer_index,
                               const LabeledDataset& ds) {
  const NetworkModel spliced = splice_one(base, layer_index, ind.genome);
  const EvalCount count = evaluate(spliced, ds);
  ind.fitness = Fitness{count.correct, count.total, ind.genome.retained(), flops(spliced)};
  return ind;
}

Population rank(Population individuals) {
  for (const auto& ind : individuals)
    if (!ind.fitness) throw std::invalid_argument("rank: individual has not been evaluated");
  std::stable_sort(individuals.begin(), individuals.end(),
                   [](const Individual& a, const Individual& b) { return better_key(*a.fitness, *b.fitness); });
  return individuals;
}

Population select_survivors(const Population& parents, const Population& offspring, std::size_t m) {
  if (parents.size() + offspring.size() < m) throw std::invalid_argument("select_survivors: not enough individuals");
  Population merged;
  merged.reserve(parents.size() + offspring.size());
  merged.insert(merged.end(), parents.begin(), parents.end());
  merged.insert(merged.end(), offspring.begin(), offspring.end());
  merged = rank(std::move(merged));
  merged.resize(m, merged.front());
  return merged;
}

Individual final_select(const Population& final_population, Selection strategy) {
  if (final_population.empty()) throw std::invalid_argument("final_select: population is empty");
  const Population ranked = rank(final_population);
  if (strategy == Selection::sel_b) {
    for (const auto& ind : ranked)
      if (!ind.genome.is_all_ones()) return ind;
  }
  return ranked.front();
}

bool GroupRunResult::final_population_has_pruned() const {
  return std::any_of(final_population.begin(), final_population.end(),
                     [](const Individual& ind) { return !ind.genome.is_all_ones(); });
}

GroupRunResult run_group_ea(const NetworkModel& base, std::size_t layer_index, const LabeledDataset& ds,
                            const GroupEAConfig& cfg, Rng& rng) {
  cfg.validate();
  GroupRunResult result{{LayerGenome::all_ones(1), std::nullopt}, {}, {}, 0};
  const std::size_t width = base.spec().layer_width(layer_index);

  auto evaluate_all = [&](Population pop) {
    for (auto& ind : pop) {
      ind = evaluate_individual(std::move(ind), base, layer_index, ds);
      ++result.evaluations;
    }
    return pop;
  };

  Population pop = rank(evaluate_all(init_population(width, cfg, rng)));
  result.history.push_back({0, *pop.front().fitness});
  for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
    Population children = evaluate_all(make_offspring(pop, cfg, rng));
    pop = select_survivors(pop, children, cfg.population);
    result.history.push_back({gen, *pop.front().fitness});
  }
  result.selected = final_select(pop, cfg.selection);
  result.final_population = std::move(pop);
  return result;
}

}  // namespace ccep
