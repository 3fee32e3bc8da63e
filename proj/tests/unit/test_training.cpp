#include <doctest.h>

#include <cmath>

#include "ccep/dataset.hpp"
#include "ccep/errors.hpp"
#include "ccep/training.hpp"
#include "support/oracles.hpp"

using namespace ccep;

namespace {

// Closed-form linear rule: assign each sample to the nearest class mean.
double nearest_mean_accuracy(const LabeledDataset& d) {
  std::vector<std::vector<double>> mean(d.num_classes, std::vector<double>(d.feature_dim(), 0.0));
  std::vector<double> count(d.num_classes, 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    count[d.labels[i]] += 1;
    for (std::size_t j = 0; j < d.feature_dim(); ++j) mean[d.labels[i]][j] += d.features(i, j);
  }
  for (std::size_t c = 0; c < d.num_classes; ++c)
    for (double& v : mean[c]) v /= count[c];
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t c = 0; c < d.num_classes; ++c) {
      double s = 0;
      for (std::size_t j = 0; j < d.feature_dim(); ++j) s += std::pow(d.features(i, j) - mean[c][j], 2);
      if (s < best_d) best_d = s, best = c;
    }
    if (static_cast<int>(best) == d.labels[i]) ++ok;
  }
  return static_cast<double>(ok) / d.size();
}

}  // namespace

TEST_CASE("presets") {
  const auto desk = presets::desk();
  CHECK(desk.initial_lr == 0.05);
  CHECK(desk.epochs == 15);
  CHECK(desk.milestones == std::vector<std::size_t>{10});
  CHECK(desk.batch_size == 32);
  CHECK(desk.momentum == 0.9);
  CHECK(desk.weight_decay == 1e-4);

  const auto c = presets::cifar10();
  CHECK(c.initial_lr == 0.1);
  CHECK(c.epochs == 100);
  CHECK(c.milestones == std::vector<std::size_t>{50});
  CHECK(c.batch_size == 128);
  CHECK(c.momentum == 0.9);
  CHECK(c.weight_decay == 1e-4);

  const auto im = presets::imagenet();
  CHECK(im.initial_lr == 0.01);
  CHECK(im.epochs == 60);
  CHECK(im.milestones == std::vector<std::size_t>{20, 40, 50});
  CHECK(im.batch_size == 256);
  CHECK(im.momentum == 0.9);
  CHECK(im.weight_decay == 1e-4);

  CHECK(presets::by_name("cifar10") == c);
  CHECK_FALSE(presets::by_name("nope").has_value());
}

TEST_CASE("schedule: step decay and validation") {
  auto cfg = presets::imagenet();
  CHECK(cfg.lr_at(0) == doctest::Approx(0.01));
  CHECK(cfg.lr_at(19) == doctest::Approx(0.01));
  CHECK(cfg.lr_at(20) == doctest::Approx(0.001));
  CHECK(cfg.lr_at(45) == doctest::Approx(0.0001));
  CHECK(cfg.lr_at(59) == doctest::Approx(0.00001));
  cfg.milestones = {30, 20};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = presets::desk();
  cfg.milestones = {15};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = presets::desk();
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = presets::desk();
  cfg.initial_lr = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("gradients match central finite differences on every layer kind") {
  Rng rng(21);
  const std::vector<ArchitectureSpec> specs = {
      ArchitectureBuilder({3, 1, 1}).dense(4, true).relu().dense(3).build(),
      ArchitectureBuilder({2, 5, 5}).conv2d(3, 3, 1, true).relu().conv2d(2, 3, 2).relu().global_avg_pool().dense(3).build(),
      ArchitectureBuilder({1, 4, 4}).conv2d(2, 1, 1).global_avg_pool().dense(2).build(),
  };
  for (const auto& spec : specs) {
    const NetworkModel net = init_network(spec, rng);
    Matrix batch(3, spec.input.size());
    for (double& v : batch.values()) v = rng.uniform(-1, 1);
    const std::vector<int> labels{0, 1, 1};
    const auto report = oracle::check_gradients(net, batch, labels, 1e-4, 1e-4);
    CHECK(report.failures == 0);
    CHECK(report.checked > 0);
    CHECK(report.kinks * 10 <= report.checked);
  }
}

TEST_CASE("init uses uniform +-sqrt(1/fan_in)") {
  Rng rng(22);
  const auto spec = ArchitectureBuilder({2, 3, 3}).conv2d(4, 3).global_avg_pool().dense(5).build();
  const NetworkModel net = init_network(spec, rng);
  const double conv_bound = std::sqrt(1.0 / (2 * 9));
  for (double w : net.params(0).weights) CHECK(std::abs(w) <= conv_bound);
  for (double w : net.params(2).weights) CHECK(std::abs(w) <= std::sqrt(1.0 / 4));
}

TEST_CASE("finetune: zero epochs returns the input") {
  Rng rng(23);
  const NetworkModel net = init_network(ArchitectureBuilder({2, 1, 1}).dense(3).build(), rng);
  auto cfg = presets::desk();
  cfg.epochs = 0;
  cfg.milestones = {};
  CHECK(finetune(net, gen_blobs(3, 5, 2, 0.5, 1), cfg, rng) == net);
}

TEST_CASE("finetune: single dense layer fits separable blobs") {
  const LabeledDataset d = gen_blobs(2, 100, 2, 0.5, 31);
  REQUIRE(nearest_mean_accuracy(d) >= 0.99);
  Rng rng(24);
  auto cfg = presets::desk();
  cfg.epochs = 50;
  cfg.milestones = {40};
  const auto spec = ArchitectureBuilder({2, 1, 1}).dense(2).build();
  const NetworkModel net = train_from_scratch(spec, d, cfg, rng);
  CHECK(evaluate(net, d).accuracy() >= 0.95);
}

TEST_CASE("train_from_scratch is deterministic per seed") {
  const LabeledDataset d = gen_blobs(3, 30, 2, 0.6, 8);
  auto cfg = presets::desk();
  cfg.epochs = 4;
  cfg.milestones = {2};
  const auto spec = ArchitectureBuilder({2, 1, 1}).dense(8, true).relu().dense(3).build();
  Rng a(5), b(5), c(6);
  const NetworkModel na = train_from_scratch(spec, d, cfg, a);
  CHECK(na == train_from_scratch(spec, d, cfg, b));
  CHECK_FALSE(na == train_from_scratch(spec, d, cfg, c));
}

TEST_CASE("finetune: divergence raises a distinct error") {
  const LabeledDataset d = gen_blobs(2, 50, 2, 0.5, 9);
  Rng rng(25);
  auto cfg = presets::desk();
  cfg.initial_lr = 1e6;
  cfg.momentum = 0.99;
  cfg.epochs = 20;
  cfg.milestones = {};
  const auto spec = ArchitectureBuilder({2, 1, 1}).dense(16).relu().dense(16).relu().dense(2).build();
  CHECK_THROWS_AS(train_from_scratch(spec, d, cfg, rng), DivergenceError);
}

TEST_CASE("desk MLP reaches 0.95 and beats the narrow net") {
  const LabeledDataset train = gen_blobs(4, 250, 2, 0.6, 1);
  const LabeledDataset test = gen_blobs(4, 250, 2, 0.6, 2);
  auto cfg = presets::desk();
  cfg.epochs = 30;
  cfg.milestones = {20};
  auto build = [](std::size_t h) {
    return ArchitectureBuilder({2, 1, 1}).dense(h, true).relu().dense(h, true).relu().dense(4).build();
  };
  Rng a(7), b(7);
  const double wide = evaluate(train_from_scratch(build(64), train, cfg, a), test).accuracy();
  const double narrow = evaluate(train_from_scratch(build(4), train, cfg, b), test).accuracy();
  CHECK(wide >= 0.95);
  CHECK(narrow < wide);
}
