#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ccep/dataset.hpp"
#include "ccep/genome.hpp"
#include "ccep/network.hpp"
#include "ccep/rng.hpp"

namespace ccep {

// Final individual selection.
//   sel_a: the top-ranked individual.
//   sel_b: the top-ranked individual that is not all-ones (falls back to the
//          all-ones individual when nothing else is left).
enum class Selection { sel_a, sel_b };

std::string_view to_string(Selection s) noexcept;
std::optional<Selection> parse_selection(std::string_view text) noexcept;

struct GroupEAConfig {
  std::size_t population = 5;   // m
  std::size_t generations = 10; // G
  double p1 = 0.05;             // initialization mutation rate
  double p2 = 0.1;              // offspring mutation rate
  double ratio_bound = 0.1;     // r
  Selection selection = Selection::sel_a;

  void validate() const;
  friend bool operator==(const GroupEAConfig&, const GroupEAConfig&) = default;
};

struct Fitness {
  std::size_t correct_count = 0;  // on D_s
  std::size_t eval_total = 0;
  std::size_t retained = 0;       // true bits of the genome
  std::uint64_t flops = 0;        // of the spliced network
  friend bool operator==(const Fitness&, const Fitness&) = default;
};

// Lexicographic preference: more correct first, then fewer retained units.
bool better_key(const Fitness& a, const Fitness& b) noexcept;

struct Individual {
  LayerGenome genome;
  std::optional<Fitness> fitness;
  friend bool operator==(const Individual&, const Individual&) = default;
};

using Population = std::vector<Individual>;

// I_0 followed by m-1 mutants of I_0 (rate p1, bound r). Unevaluated.
Population init_population(std::size_t width, const GroupEAConfig& cfg, Rng& rng);

// m children, each a p2-mutant of a uniformly drawn parent.
Population make_offspring(const Population& parents, const GroupEAConfig& cfg, Rng& rng);

// Splices the genome into `base` at layer_index and scores it on `ds`.
Individual evaluate_individual(Individual ind, const NetworkModel& base, std::size_t layer_index,
                               const LabeledDataset& ds);

// Stable sort by (correct desc, retained asc); equal keys keep input order.
// Throws std::invalid_argument if any individual lacks fitness.
Population rank(Population individuals);

// Top m of rank(parents ++ offspring).
Population select_survivors(const Population& parents, const Population& offspring, std::size_t m);

Individual final_select(const Population& final_population, Selection strategy);

struct GenerationRecord {
  std::size_t generation = 0;  // 0 = evaluated initial population
  Fitness best;
};

struct GroupRunResult {
  Individual selected;
  Population final_population;
  std::vector<GenerationRecord> history;
  std::uint64_t evaluations = 0;

  // Whether any final individual prunes at least one unit.
  bool final_population_has_pruned() const;
};

// One complete group EA: init, evaluate, G generations of offspring /
// evaluate / truncation, then final selection. Performs m + m*G evaluations.
GroupRunResult run_group_ea(const NetworkModel& base, std::size_t layer_index, const LabeledDataset& ds,
                            const GroupEAConfig& cfg, Rng& rng);

}  // namespace ccep
