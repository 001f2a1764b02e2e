//  Copyright 2026 The PSD Toolkit Authors. All Rights Reserved.
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "psd/classify.hpp"
#include "support/synthetic.hpp"
#include "test_util.hpp"

using namespace psd;
namespace pt = psd::testing;

namespace {

PrepInstance labeled(const std::string& id, const std::string& sense) {
  return {id, {"x", "zp", "y"}, 1, "zp", sense};
}

FeatureTriple triple(Vec l, Vec r, Vec i) {
  FeatureTriple t;
  t.left = std::move(l);
  t.right = std::move(r);
  t.inter = std::move(i);
  t.left_degenerate = t.right_degenerate = t.inter_degenerate = false;
  return t;
}

KnnModel model_of(std::vector<Exemplar> ex, std::size_t k, BlockWeights w) {
  KnnModel m;
  m.preposition = "zp";
  m.k_neighbors = k;
  m.weights = w;
  m.exemplars = std::move(ex);
  return m;
}

}  // namespace

TEST_CASE("split_train_dev examples") {
  std::vector<PrepInstance> ten;
  for (int i = 0; i < 10; ++i) ten.push_back(labeled(std::to_string(i), i < 5 ? "a" : "b"));
  const auto [train, dev] = split_train_dev(ten, 0.8, 1);
  CHECK(train.size() == 8);
  CHECK(dev.size() == 2);
  std::set<std::string> ids;
  for (const auto& v : {train, dev})
    for (const auto& i : v) ids.insert(i.id);
  CHECK(ids.size() == 10);

  const auto again = split_train_dev(ten, 0.8, 1);
  CHECK(again.first == train);
  CHECK(again.second == dev);

  std::vector<PrepInstance> single{labeled("s", "only"), labeled("1", "m"), labeled("2", "m")};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto [tr, dv] = split_train_dev(single, 0.5, seed);
    CHECK(std::any_of(tr.begin(), tr.end(), [](const PrepInstance& p) { return p.id == "s"; }));
    CHECK(std::any_of(tr.begin(), tr.end(), [](const PrepInstance& p) { return *p.sense == "m"; }));
  }
  CHECK_THROWS_AS(split_train_dev({}, 0.8, 1), UsageError);
  CHECK_THROWS_AS(split_train_dev(ten, 1.0, 1), UsageError);
}

TEST_CASE("knn_predict: exact match with k=1") {
  const auto m = model_of({{triple({1, 0}, {0, 1}, {1, 1}), "a"}, {triple({0, 1}, {1, 0}, {1, -1}), "b"}},
                          1, {1, 1, 1});
  CHECK(knn_predict(m, triple({1, 0}, {0, 1}, {1, 1})) == "a");
  CHECK(knn_predict(m, triple({0, 1}, {1, 0}, {1, -1})) == "b");
}

TEST_CASE("knn_predict: ignored blocks tie, resolved by smallest sense") {
  // Same left block, different right blocks; weights (1,0,0) see only left.
  const auto m = model_of({{triple({1, 0}, {0, 1}, {1, 0}), "b"}, {triple({1, 0}, {1, 0}, {0, 1}), "a"}},
                          2, {1, 0, 0});
  CHECK(knn_predict(m, triple({1, 0.1}, {0, 1}, {1, 0})) == "a");
}

TEST_CASE("knn_predict: degenerate blocks count as distance 1") {
  auto q = triple({1, 0}, {0, 1}, {1, 0});
  q.right_degenerate = true;
  q.right = {0, 0};
  // With only the right block weighted, every exemplar is at distance 1.
  const auto m = model_of({{triple({1, 0}, {0, 1}, {1, 0}), "z"}, {triple({0, 1}, {1, 0}, {0, 1}), "c"}},
                          2, {0, 1, 0});
  CHECK(knn_predict(m, q) == "c");
}

TEST_CASE("knn_predict: weight scaling leaves predictions unchanged") {
  std::mt19937_64 rng(1);
  std::vector<Exemplar> ex;
  for (int i = 0; i < 40; ++i) {
    ex.push_back({triple(pt::gaussian_vec(rng, 4), pt::gaussian_vec(rng, 4), pt::random_unit(rng, 4)),
                  i % 3 == 0 ? "a" : i % 3 == 1 ? "b" : "c"});
  }
  for (int q = 0; q < 100; ++q) {
    const auto t = triple(pt::gaussian_vec(rng, 4), pt::gaussian_vec(rng, 4), pt::random_unit(rng, 4));
    const auto base = knn_predict(model_of(ex, 5, {1, 0.5, 0.25}), t);
    for (double c : {0.5, 2.0, 8.0}) {
      CHECK(knn_predict(model_of(ex, 5, {c, 0.5 * c, 0.25 * c}), t) == base);
    }
  }
}

TEST_CASE("knn_predict: exemplar order does not matter without ties") {
  std::mt19937_64 rng(2);
  std::vector<Exemplar> ex;
  for (int i = 0; i < 30; ++i) {
    ex.push_back({triple(pt::gaussian_vec(rng, 3), pt::gaussian_vec(rng, 3), pt::random_unit(rng, 3)),
                  i % 2 ? "a" : "b"});
  }
  auto shuffled = ex;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  for (int q = 0; q < 100; ++q) {
    const auto t = triple(pt::gaussian_vec(rng, 3), pt::gaussian_vec(rng, 3), pt::random_unit(rng, 3));
    CHECK(knn_predict(model_of(ex, 3, {1, 1, 1}), t) == knn_predict(model_of(shuffled, 3, {1, 1, 1}), t));
  }
}

TEST_CASE("knn_predict errors") {
  CHECK_THROWS_AS(knn_predict(model_of({}, 1, {1, 1, 1}), triple({1}, {1}, {1})), UsageError);
  const auto m = model_of({{triple({1, 0}, {0, 1}, {1, 0}), "a"}}, 1, {1, 1, 1});
  CHECK_THROWS_AS(knn_predict(m, triple({1}, {1}, {1})), UsageError);
}

TEST_CASE("evaluate on the training set is perfect") {
  const auto task = pt::joint_context_task(50, 3);
  const auto m = build_knn(task.train, 1, {1, 1, 1}, 2, 2, FeatureMode::kAll, task.table);
  CHECK(evaluate(m, task.train, task.table) == 1.0);
  CHECK(evaluate(m, task.train, task.table, 4) == 1.0);
  CHECK_THROWS_AS(evaluate(m, {}, task.table), UsageError);
}

TEST_CASE("planted separable senses are classified") {
  const auto task = pt::joint_context_task(200, 8);
  const auto m = build_knn(task.train, 5, {1, 1, 1}, 1, 1, FeatureMode::kAll, task.table);
  CHECK(evaluate(m, task.test, task.table) >= 0.95);
}

TEST_CASE("tune: one-cell grid returns that cell") {
  const auto task = pt::joint_context_task(30, 4);
  const TuneGrid grid{{3}, {{0.5, 1, 0}}, {2}, {1}};
  const auto r = tune(task.train, task.dev, grid, task.table);
  CHECK(r.model.k_neighbors == 3);
  CHECK(r.model.weights == BlockWeights{0.5, 1, 0});
  CHECK(r.model.k_left == 2);
  CHECK(r.model.k_right == 1);
  REQUIRE(r.cells.size() == 1);
  CHECK(r.dev_accuracy == r.cells[0].dev_accuracy);
  CHECK(r.dev_accuracy == evaluate(r.model, task.dev, task.table));
}

TEST_CASE("tune: planted optimum on a 3x3 grid") {
  // Only the right block carries signal, and label noise on the training
  // set means a single neighbor cannot match a vote over several.
  std::mt19937_64 rng(6);
  EmbeddingTable table(4);
  const std::vector<Vec> centers{pt::random_unit(rng, 4), pt::random_unit(rng, 4)};
  for (int g = 0; g < 2; ++g)
    for (int w = 0; w < 10; ++w) {
      Vec v = pt::gaussian_vec(rng, 4, 0.05);
      for (int d = 0; d < 4; ++d) v[d] += centers[g][d];
      table.add("r" + std::to_string(g) + "_" + std::to_string(w), v);
    }
  for (int w = 0; w < 10; ++w) table.add("l" + std::to_string(w), pt::random_unit(rng, 4));
  table.add("zp", pt::random_unit(rng, 4));
  std::uniform_int_distribution<int> pick(0, 9);
  auto make = [&](int n, std::vector<PrepInstance>& out) {
    for (int i = 0; i < n; ++i) {
      const int g = i % 2;
      out.push_back({std::to_string(out.size()),
                     {"l" + std::to_string(pick(rng)), "zp", "r" + std::to_string(g) + "_" + std::to_string(pick(rng))},
                     1, "zp", g ? "b" : "a"});
    }
  };
  std::vector<PrepInstance> train, dev;
  make(120, train);
  make(60, dev);
  for (std::size_t i = 0; i < train.size(); i += 7) train[i].sense = *train[i].sense == "a" ? "b" : "a";
  const TuneGrid grid{{1, 9, 15}, {{1, 0, 0}, {0, 1, 0}, {1, 1, 1}}, {1}, {1}};
  const auto r = tune(train, dev, grid, table);
  double best = -1;
  const GridCell* best_cell = nullptr;
  for (const auto& c : r.cells) {
    const auto m = build_knn(train, c.k_neighbors, c.weights, c.k_left, c.k_right, FeatureMode::kAll, table);
    const double acc = evaluate(m, dev, table);
    CHECK(acc == c.dev_accuracy);
    if (acc > best) {
      best = acc;
      best_cell = &c;
    }
  }
  REQUIRE(best_cell != nullptr);
  CHECK(r.dev_accuracy == best);
  CHECK(r.model.weights == best_cell->weights);
  CHECK(r.model.k_neighbors == best_cell->k_neighbors);
  CHECK(r.model.weights == BlockWeights{0, 1, 0});
  CHECK(r.model.k_neighbors > 1);
}

TEST_CASE("tune rejects a dev instance of another preposition") {
  const auto task = pt::joint_context_task(10, 4);
  auto dev = task.dev;
  dev[0].preposition = "other";
  dev[0].tokens[1] = "other";
  CHECK_THROWS_AS(tune(task.train, dev, TuneGrid{{1}, {{1, 1, 1}}, {1}, {1}}, task.table), DataError);
}

TEST_CASE("default and restricted grids") {
  const auto g = default_grid();
  CHECK(g.k_neighbors == std::vector<std::size_t>{1, 3, 5, 9, 15});
  CHECK(g.weights.size() == 26);
  CHECK(g.k_left == std::vector<std::size_t>{1, 2, 3, 4});
  const auto lr = restrict_grid(g, FeatureMode::kLeftRight);
  for (const auto& w : lr.weights) CHECK(w.inter == 0.0);
  CHECK(lr.weights.size() == 8);
  const auto avg = restrict_grid(g, FeatureMode::kAverage);
  REQUIRE(avg.weights.size() == 1);
  CHECK(avg.weights[0] == BlockWeights{1, 0, 0});
}

TEST_CASE("knn model file round trip") {
  pt::TempDir dir;
  const auto task = pt::joint_context_task(20, 5);
  const auto m = build_knn(task.train, 3, {0.5, 1, 0}, 2, 3, FeatureMode::kLeftRight, task.table);
  save_knn(m, dir / "m.tsv");
  const auto back = load_knn(dir / "m.tsv");
  CHECK(back.preposition == "zp");
  CHECK(back.k_neighbors == 3);
  CHECK(back.weights == m.weights);
  CHECK(back.k_left == 2);
  CHECK(back.k_right == 3);
  CHECK(back.feature_mode == FeatureMode::kLeftRight);
  REQUIRE(back.exemplars.size() == m.exemplars.size());
  for (std::size_t i = 0; i < m.exemplars.size(); ++i) {
    CHECK(back.exemplars[i].sense == m.exemplars[i].sense);
    CHECK(back.exemplars[i].triple.inter == m.exemplars[i].triple.inter);
  }
  CHECK(evaluate(back, task.test, task.table) == evaluate(m, task.test, task.table));
  pt::write_file(dir / "bad.tsv", "zp\t1\n");
  CHECK_THROWS_AS(load_knn(dir / "bad.tsv"), DataError);
}
