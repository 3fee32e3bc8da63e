#include <doctest.h>

#include <algorithm>

#include "ccep/errors.hpp"
#include "ccep/sweep.hpp"
#include "ccep/training.hpp"

using namespace ccep;

TEST_CASE("built-in grids") {
  const GroupEAConfig base;
  const auto m = builtin_grid("population", base);
  REQUIRE(m.size() == 4);
  CHECK(m[0].group.population == 3);
  CHECK(m[3].group.population == 9);
  CHECK(m[3].group.generations == base.generations);
  const auto g = builtin_grid("generations", base);
  CHECK(g.size() == 3);
  CHECK(g[2].group.generations == 15);
  const auto mu = builtin_grid("mutation", base);
  REQUIRE(mu.size() == 3);
  CHECK(mu[2].group.p1 == 0.15);
  CHECK(mu[2].group.ratio_bound == 0.2);
  CHECK(mu[2].group.p2 == base.p2);
  const auto s = builtin_grid("selection", base);
  CHECK(s[1].group.selection == Selection::sel_b);
  CHECK_THROWS_AS(builtin_grid("other", base), ConfigError);
}

TEST_CASE("grid files form a cartesian product") {
  const auto pts = parse_grid("[grid]\npopulation = [3, 5]\nselection = [\"sel_a\", \"sel_b\"]\n", GroupEAConfig{});
  REQUIRE(pts.size() == 4);
  CHECK(pts[1].group.population == 3);
  CHECK(pts[1].group.selection == Selection::sel_b);
  CHECK(pts[1].label == "m=3 sel_b");
  CHECK(parse_grid("[grid]\n", GroupEAConfig{}).size() == 1);
  CHECK_THROWS_AS(parse_grid("[grid]\nunknown = [1]\n", GroupEAConfig{}), ConfigError);
  CHECK_THROWS_AS(parse_grid("[other]\n", GroupEAConfig{}), ConfigError);
  CHECK_THROWS_AS(parse_grid("[grid]\npopulation = [1]\n", GroupEAConfig{}), ConfigError);
  CHECK_THROWS_AS(resolve_grid("/nonexistent/grid.toml", GroupEAConfig{}), ConfigError);
}

TEST_CASE("iterations_to_target and median") {
  SweepRun r;
  for (double f : {0.1, 0.3, 0.45, 0.5}) {
    EntryMetrics m;
    m.flops_reduction = f;
    r.per_iteration.push_back(m);
  }
  CHECK(iterations_to_target(r, 0.4) == 3);
  CHECK(iterations_to_target(r, 0.1) == 1);
  CHECK(iterations_to_target(r, 0.9) == 5);
  CHECK(median({3, 1, 2}) == 2);
  CHECK(median({4, 1, 2, 3}) == 2.5);
}

TEST_CASE("run_sweep bookkeeping") {
  const auto train = gen_blobs(3, 40, 2, 0.6, 1), test = gen_blobs(3, 40, 2, 0.6, 2);
  Rng rng(2);
  auto tcfg = presets::desk();
  tcfg.epochs = 5;
  tcfg.milestones = {4};
  const auto net = train_from_scratch(
      ArchitectureBuilder({2, 1, 1}).dense(10, true).relu().dense(3).build(), train, tcfg, rng);
  CCEPConfig cfg = cifar_profile();
  cfg.iterations = 2;
  cfg.group.generations = 2;
  cfg.finetune.epochs = 1;
  cfg.finetune.milestones = {};
  const auto points = builtin_grid("selection", cfg.group);
  const auto a = run_sweep(net, train, test, cfg, points, 2, 1);
  const auto b = run_sweep(net, train, test, cfg, points, 2, 3);
  CHECK(a.runs.size() == 4);
  CHECK(sweep_csv(a) == sweep_csv(b));
  CHECK(sweep_runs_csv(a) == sweep_runs_csv(b));
  const std::string csv = sweep_csv(a);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 2);
  CHECK(a.runs[1].seed == cfg.global_seed + 1);
  const std::string points_csv = sweep_points_csv(a, 0.4);
  CHECK(std::count(points_csv.begin(), points_csv.end(), '\n') == 1 + 2);

  // One configuration, one seed: the same run as a plain prune.
  const auto single = run_sweep(net, train, test, cfg, {points[0]}, 1, 1);
  const auto direct = run(net, train, test, cfg);
  REQUIRE(single.runs.size() == 1);
  for (std::size_t i = 0; i < direct.archive.size(); ++i)
    CHECK(single.runs[0].per_iteration[i].flops == direct.archive[i].metrics.flops);
}

TEST_CASE("sweep carries the last entry after early termination") {
  const auto d = gen_blobs(2, 20, 2, 0.5, 3);
  Rng rng(1);
  const auto net = init_network(ArchitectureBuilder({2, 1, 1}).dense(1, true).relu().dense(2).build(), rng);
  CCEPConfig cfg = cifar_profile();
  cfg.iterations = 3;
  cfg.finetune.epochs = 1;
  cfg.finetune.milestones = {};
  const auto r = run_sweep(net, d, d, cfg, {{"base", cfg.group}}, 1, 1);
  CHECK(r.runs[0].completed == 0);
  CHECK(r.runs[0].per_iteration.size() == 3);
  CHECK(sweep_runs_csv(r).find(",1\n") != std::string::npos);
}
