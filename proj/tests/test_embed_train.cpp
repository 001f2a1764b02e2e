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

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "doctest.h"
#include "psd/embed_train.hpp"
#include "support/synthetic.hpp"

using namespace psd;
namespace pt = psd::testing;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.dim = 16;
  c.epochs = 2;
  c.min_count = 1;
  c.subsample_threshold = 0.0;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("build_vocab examples") {
  const Corpus c{{{"a", "a", "a", "b"}}, ""};
  const auto v2 = build_vocab(c, 2);
  REQUIRE(v2.size() == 1);
  CHECK(v2.token(0) == "a");
  CHECK(v2.count(0) == 3);
  const auto v1 = build_vocab(c, 1);
  REQUIRE(v1.size() == 2);
  CHECK(v1.token(0) == "a");
  CHECK(v1.token(1) == "b");
  CHECK(v1.total() == 4);
  CHECK_THROWS_AS(build_vocab(c, 4), DataError);
  CHECK_THROWS_AS(build_vocab(Corpus{}, 1), DataError);
  const auto tie = build_vocab(Corpus{{{"z", "y", "x"}}, ""}, 1);
  CHECK(tie.token(0) == "x");
  CHECK(tie.token(2) == "z");
}

TEST_CASE("negative sampling follows count^0.75") {
  const Vocab v({"a", "b"}, {8, 1});
  std::mt19937_64 rng(1);
  std::size_t na = 0, nb = 0;
  for (int i = 0; i < 1000000; ++i) (v.sample_negative(rng) == 0 ? na : nb) += 1;
  const double ratio = static_cast<double>(na) / static_cast<double>(nb);
  const double expect = std::pow(8.0, 0.75);
  CHECK(std::abs(ratio - expect) / expect <= 0.02);
}

TEST_CASE("TrainConfig validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.prep_window = 6;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = TrainConfig{};
  c.initial_lr = 0;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = TrainConfig{};
  c.dim = 0;
  CHECK_THROWS_AS(c.validate(), UsageError);
}

TEST_CASE("reduced window around sense-tagged centers") {
  Sentence s;
  for (int i = 0; i < 11; ++i) s.push_back(i == 5 ? "with::1" : "w" + std::to_string(i));
  const Corpus c{{s}, ""};
  auto cfg = small_config();
  cfg.window = 5;
  cfg.prep_window = 1;
  const auto vocab = build_vocab(c, 1);
  const auto ex = enumerate_examples(c, vocab, cfg);
  REQUIRE(ex.size() == 11);
  const std::size_t tagged = *vocab.index_of("with::1");
  for (const auto& e : ex) {
    if (e.center == tagged) {
      REQUIRE(e.context.size() == 2);
      CHECK(vocab.token(e.context[0]) == "w4");
      CHECK(vocab.token(e.context[1]) == "w6");
    } else {
      CHECK(e.context.size() <= 10);
    }
  }
  // w0 sees w1..w5 (five to the right, none to the left).
  CHECK(ex[0].context.size() == 5);
}

TEST_CASE("infinite subsampling threshold is a no-op") {
  const auto corpus = pt::twins_corpus(200, 2);
  auto off = small_config();
  auto inf = off;
  inf.subsample_threshold = std::numeric_limits<double>::infinity();
  const auto vocab = build_vocab(corpus, 1);
  const auto a = enumerate_examples(corpus, vocab, off);
  const auto b = enumerate_examples(corpus, vocab, inf);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].center == b[i].center);
    CHECK(a[i].context == b[i].context);
  }
  auto on = off;
  on.subsample_threshold = 1e-3;
  CHECK(enumerate_examples(corpus, vocab, on).size() < a.size());
}

TEST_CASE("training is deterministic and shaped |V| x dim") {
  const auto corpus = pt::twins_corpus(300, 4);
  const auto cfg = small_config();
  const auto a = train_cbow(corpus, cfg);
  const auto b = train_cbow(corpus, cfg);
  CHECK(a.size() == build_vocab(corpus, 1).size());
  CHECK(a.dim() == 16);
  bool same = a.vocab() == b.vocab();
  for (std::size_t i = 0; same && i < a.size(); ++i)
    for (std::size_t d = 0; d < a.dim(); ++d) same = same && a.row(i)[d] == b.row(i)[d];
  CHECK(same);
}

TEST_CASE("zero learning rate changes nothing") {
  std::mt19937_64 rng(3);
  CbowParams p;
  p.dim = 4;
  p.input = pt::gaussian_vec(rng, 40);
  p.output = pt::gaussian_vec(rng, 40);
  const auto before = p;
  const std::vector<std::size_t> ctx{1, 2}, negs{3, 4};
  cbow_step(p, ctx, 0, negs, 0.0);
  CHECK(p.input == before.input);
  CHECK(p.output == before.output);
}

TEST_CASE("initial loss with zero outputs is (1+negatives) ln 2") {
  std::mt19937_64 rng(4);
  CbowParams p;
  p.dim = 8;
  p.input = pt::gaussian_vec(rng, 80);
  p.output.assign(80, 0.0);
  const std::vector<std::size_t> ctx{1, 2, 3}, negs{4, 5, 6, 7, 8};
  CHECK(std::abs(cbow_loss(p, ctx, 0, negs) - 6 * std::numbers::ln2) <= 1e-9);
  CHECK(std::abs(cbow_step(p, ctx, 0, negs, 0.1) - 6 * std::numbers::ln2) <= 1e-9);
  CHECK(cbow_loss(p, ctx, 0, negs) < 6 * std::numbers::ln2);
}

TEST_CASE("gradient check passes") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TrainConfig c;
    c.dim = 6;
    c.negatives = 3;
    c.seed = seed;
    CHECK(gradient_check(c) < 1e-4);
  }
  TrainConfig big;
  big.dim = 9;
  CHECK_THROWS_AS(gradient_check(big), UsageError);
}

TEST_CASE("distributional twins end up closer than unrelated tokens") {
  const auto corpus = pt::twins_corpus(5000, 1);
  auto cfg = small_config();
  cfg.dim = 20;
  cfg.epochs = 3;
  TrainStats stats;
  const auto t = train_cbow(corpus, cfg, &stats);
  const auto king = *get_vector(t, "king");
  CHECK(cosine(king, *get_vector(t, "queen")) > cosine(king, *get_vector(t, "pawn")));
  REQUIRE(stats.epoch_loss.size() == 3);
  CHECK(stats.epoch_loss[1] < stats.epoch_loss[0]);
}

TEST_CASE("parallel mode yields finite, well-shaped output") {
  const auto corpus = pt::twins_corpus(2000, 6);
  auto cfg = small_config();
  cfg.parallel = true;
  cfg.jobs = 4;
  TrainStats stats;
  const auto t = train_cbow(corpus, cfg, &stats);
  CHECK(t.size() == build_vocab(corpus, 1).size());
  CHECK(t.dim() == cfg.dim);
  for (std::size_t i = 0; i < t.size(); ++i)
    for (double x : t.row(i)) CHECK(std::isfinite(x));
  CHECK(stats.epoch_loss.size() == cfg.epochs);
}
