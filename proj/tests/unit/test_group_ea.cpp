#include <doctest.h>

#include <algorithm>
#include <map>
#include <stdexcept>

#include "ccep/dataset.hpp"
#include "ccep/errors.hpp"
#include "ccep/group_ea.hpp"
#include "ccep/training.hpp"
#include "support/oracles.hpp"

using namespace ccep;

namespace {

Individual scored(const std::string& bits, std::size_t correct) {
  const LayerGenome g = LayerGenome::from_string(bits);
  return {g, Fitness{correct, 100, g.retained(), 0}};
}

Individual with_key(std::size_t correct, std::size_t retained, std::size_t width = 12) {
  std::string bits(width, '0');
  std::fill(bits.begin(), bits.begin() + retained, '1');
  return scored(bits, correct);
}

struct Fixture {
  LabeledDataset train = gen_blobs(3, 60, 2, 0.7, 41);
  ArchitectureSpec spec = ArchitectureBuilder({2, 1, 1}).dense(12, true).relu().dense(3).build();
  NetworkModel net = [this] {
    Rng rng(3);
    auto cfg = presets::desk();
    cfg.epochs = 10;
    cfg.milestones = {8};
    return train_from_scratch(spec, train, cfg, rng);
  }();
};

}  // namespace

TEST_CASE("selection names") {
  CHECK(to_string(Selection::sel_a) == "sel_a");
  CHECK(parse_selection("sel_b") == Selection::sel_b);
  CHECK_FALSE(parse_selection("sel_c").has_value());
}

TEST_CASE("config validation") {
  GroupEAConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.population = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.generations = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.ratio_bound = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.p2 = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("init_population") {
  Rng rng(1);
  GroupEAConfig cfg;
  SUBCASE("l=8, r=0.1 forbids every flip") {
    const auto pop = init_population(8, cfg, rng);
    CHECK(pop.size() == 5);
    for (const auto& ind : pop) {
      CHECK(ind.genome.to_string() == "11111111");
      CHECK_FALSE(ind.fitness.has_value());
    }
  }
  SUBCASE("l=64, r=0.1 allows at most 6 zeros") {
    cfg.p1 = 0.5;
    for (int t = 0; t < 200; ++t) {
      const auto pop = init_population(64, cfg, rng);
      CHECK(pop[0].genome.is_all_ones());
      for (const auto& ind : pop) CHECK(ind.genome.zero_count() <= 6);
    }
  }
  SUBCASE("p1=0 gives identical all-ones individuals") {
    cfg.p1 = 0;
    for (const auto& ind : init_population(20, cfg, rng)) CHECK(ind.genome.is_all_ones());
  }
}

TEST_CASE("make_offspring") {
  Rng rng(2);
  GroupEAConfig cfg;
  SUBCASE("p2=0 copies the parent") {
    cfg.population = 1;
    cfg.p2 = 0;
    const Population parents{{LayerGenome::all_ones(6), std::nullopt}};
    const auto kids = make_offspring(parents, cfg, rng);
    REQUIRE(kids.size() == 1);
    CHECK(kids[0].genome.is_all_ones());
  }
  SUBCASE("offspring respect the bound") {
    cfg.p2 = 0.9;
    cfg.ratio_bound = 0.2;
    const Population parents = init_population(30, cfg, rng);
    for (int t = 0; t < 200; ++t)
      for (const auto& k : make_offspring(parents, cfg, rng)) CHECK(k.genome.zero_count() <= 6);
  }
  SUBCASE("parent choice is uniform (chi-square)") {
    // p2 = 0 makes each child an exact copy, revealing the chosen parent.
    cfg.p2 = 0;
    cfg.population = 10000;
    Population parents;
    const char* patterns[] = {"10000", "01000", "00100", "00010", "00001"};
    for (auto* p : patterns) parents.push_back({LayerGenome::from_string(p), std::nullopt});
    std::map<std::string, int> counts;
    for (const auto& k : make_offspring(parents, cfg, rng)) ++counts[k.genome.to_string()];
    double chi2 = 0;
    for (auto* p : patterns) {
      CHECK(std::abs(counts[p] - 2000) <= 150);
      chi2 += (counts[p] - 2000.0) * (counts[p] - 2000.0) / 2000.0;
    }
    CHECK(chi2 < 18.47);  // chi-square(4) at p = 0.001
  }
  CHECK_THROWS_AS(make_offspring({}, cfg, rng), std::invalid_argument);
}

TEST_CASE("rank") {
  SUBCASE("accuracy first, then fewer retained") {
    const auto r = rank({with_key(42, 9), with_key(40, 8), with_key(42, 7)});
    CHECK(r[0].fitness->correct_count == 42);
    CHECK(r[0].fitness->retained == 7);
    CHECK(r[1].fitness->retained == 9);
    CHECK(r[2].fitness->correct_count == 40);
  }
  SUBCASE("equal keys keep insertion order") {
    const Population pop{scored("110", 5), scored("101", 5), scored("011", 5)};
    CHECK(rank(pop) == pop);
  }
  SUBCASE("single individual") {
    const Population one{scored("1", 1)};
    CHECK(rank(one) == one);
  }
  SUBCASE("unevaluated individual") {
    CHECK_THROWS_AS(rank({scored("11", 3), {LayerGenome::all_ones(2), std::nullopt}}), std::invalid_argument);
  }
}

TEST_CASE("property: rank is a total order agreeing with a reference sort") {
  Rng rng(3);
  for (int t = 0; t < 300; ++t) {
    Population pop;
    const std::size_t n = 1 + rng.uniform_index(12);
    for (std::size_t i = 0; i < n; ++i) pop.push_back(with_key(rng.uniform_index(4), 1 + rng.uniform_index(4), 5));
    const Population r = rank(pop);
    // Reference: insertion-sort on the documented key, stable by construction.
    Population ref;
    for (const auto& ind : pop) {
      auto pos = ref.end();
      for (auto it = ref.begin(); it != ref.end(); ++it)
        if (oracle::key_less(ind.fitness->correct_count, ind.fitness->retained, it->fitness->correct_count,
                             it->fitness->retained)) {
          pos = it;
          break;
        }
      ref.insert(pos, ind);
    }
    CHECK(r == ref);
    for (std::size_t i = 0; i + 1 < r.size(); ++i) CHECK_FALSE(better_key(*r[i + 1].fitness, *r[i].fitness));
    CHECK(rank(r) == r);
  }
}

TEST_CASE("select_survivors") {
  const Population parents{with_key(50, 10), with_key(49, 9), with_key(48, 12)};
  SUBCASE("worse offspring leave parents unchanged") {
    const Population kids{with_key(10, 3), with_key(20, 3), with_key(47, 1)};
    CHECK(select_survivors(parents, kids, 3) == rank(parents));
  }
  SUBCASE("m equal to the union keeps everything") {
    const Population kids{with_key(10, 3)};
    CHECK(select_survivors(parents, kids, 4).size() == 4);
  }
  SUBCASE("interleaved fitness matches a full sort") {
    Rng rng(4);
    for (int t = 0; t < 100; ++t) {
      Population p, k;
      for (int i = 0; i < 5; ++i) p.push_back(with_key(rng.uniform_index(6), 1 + rng.uniform_index(8)));
      for (int i = 0; i < 5; ++i) k.push_back(with_key(rng.uniform_index(6), 1 + rng.uniform_index(8)));
      Population all = p;
      all.insert(all.end(), k.begin(), k.end());
      std::stable_sort(all.begin(), all.end(), [](const Individual& a, const Individual& b) {
        return oracle::key_less(a.fitness->correct_count, a.fitness->retained, b.fitness->correct_count,
                                b.fitness->retained);
      });
      all.erase(all.begin() + 5, all.end());
      CHECK(select_survivors(p, k, 5) == all);
    }
  }
  CHECK_THROWS_AS(select_survivors(parents, {}, 4), std::invalid_argument);
}

TEST_CASE("final_select") {
  const Population top_full{scored("1111", 90), scored("1010", 88), scored("1110", 70)};
  CHECK(final_select(top_full, Selection::sel_a).genome.to_string() == "1111");
  CHECK(final_select(top_full, Selection::sel_b).genome.to_string() == "1010");
  const Population top_pruned{scored("1101", 90), scored("1111", 90)};
  CHECK(final_select(top_pruned, Selection::sel_a) == final_select(top_pruned, Selection::sel_b));
  const Population all_full{scored("111", 3), scored("111", 3)};
  CHECK(final_select(all_full, Selection::sel_b).genome.is_all_ones());
}

TEST_CASE("evaluate_individual") {
  Fixture f;
  const auto all = evaluate_individual({LayerGenome::all_ones(12), std::nullopt}, f.net, 0, f.train);
  CHECK(all.fitness->correct_count == evaluate(f.net, f.train).correct);
  CHECK(all.fitness->eval_total == f.train.size());
  CHECK(all.fitness->retained == 12);
  CHECK(all.fitness->flops == flops(f.net));
  const auto a = evaluate_individual({LayerGenome::from_string("111111111110"), std::nullopt}, f.net, 0, f.train);
  const auto b = evaluate_individual({LayerGenome::from_string("111111111100"), std::nullopt}, f.net, 0, f.train);
  CHECK(b.fitness->flops < a.fitness->flops);
  CHECK(a.fitness->retained == 11);
}

TEST_CASE("run_group_ea") {
  Fixture f;
  GroupEAConfig cfg;
  cfg.ratio_bound = 0.3;
  cfg.p1 = 0.2;
  cfg.p2 = 0.2;
  Rng r1(77), r2(77);
  const auto a = run_group_ea(f.net, 0, f.train, cfg, r1);
  const auto b = run_group_ea(f.net, 0, f.train, cfg, r2);
  CHECK(a.selected == b.selected);
  CHECK(a.final_population == b.final_population);
  CHECK(a.evaluations == cfg.population + cfg.population * cfg.generations);
  CHECK(a.history.size() == cfg.generations + 1);
  for (std::size_t g = 1; g < a.history.size(); ++g) CHECK_FALSE(better_key(a.history[g - 1].best, a.history[g].best));
  for (const auto& ind : a.final_population) CHECK(ind.genome.zero_count() <= max_zero_count(12, 0.3));

  SUBCASE("no variation returns all-ones under sel_a") {
    cfg.p1 = cfg.p2 = 0;
    Rng rng(5);
    const auto r = run_group_ea(f.net, 0, f.train, cfg, rng);
    CHECK(r.selected.genome.is_all_ones());
    CHECK_FALSE(r.final_population_has_pruned());
  }
  SUBCASE("sel_a never worse than sel_b on the same population") {
    for (const auto& pop_seed : {1, 2, 3, 4}) {
      Rng rng(pop_seed);
      const auto r = run_group_ea(f.net, 0, f.train, cfg, rng);
      const auto sa = final_select(r.final_population, Selection::sel_a);
      const auto sb = final_select(r.final_population, Selection::sel_b);
      CHECK_FALSE(better_key(*sb.fitness, *sa.fitness));
    }
  }
}
