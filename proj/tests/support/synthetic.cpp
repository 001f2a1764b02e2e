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

#include "support/synthetic.hpp"

#include <cmath>

namespace psd::testing {

Vec gaussian_vec(std::mt19937_64& rng, std::size_t dim, double sigma) {
  std::normal_distribution<double> g(0.0, sigma);
  Vec v(dim);
  for (double& x : v) x = g(rng);
  return v;
}

Vec random_unit(std::mt19937_64& rng, std::size_t dim) {
  for (;;) {
    Vec v = gaussian_vec(rng, dim);
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n < 1e-6) continue;
    for (double& x : v) x /= n;
    return v;
  }
}

PlantedPoints planted_gaussians(std::size_t n, std::size_t dim, double separation,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Vec dir = random_unit(rng, dim);
  PlantedPoints out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool b = i % 2 == 1;
    Vec p = gaussian_vec(rng, dim);
    for (std::size_t d = 0; d < dim; ++d) p[d] += (b ? 0.5 : -0.5) * separation * dir[d];
    out.points.push_back(std::move(p));
    out.senses.push_back(b ? "b" : "a");
  }
  return out;
}

JointContextTask joint_context_task(std::size_t per_split, std::uint64_t seed) {
  constexpr std::size_t kDim = 8;
  constexpr std::size_t kWords = 10;
  std::mt19937_64 rng(seed);
  JointContextTask task;
  task.table = EmbeddingTable(kDim);
  std::vector<Vec> centers;
  for (int g = 0; g < 3; ++g) centers.push_back(random_unit(rng, kDim));
  for (int g = 0; g < 3; ++g) {
    for (std::size_t w = 0; w < kWords; ++w) {
      Vec v = gaussian_vec(rng, kDim, 0.15);
      for (std::size_t d = 0; d < kDim; ++d) v[d] += centers[g][d];
      task.table.add("g" + std::to_string(g) + "w" + std::to_string(w), v);
    }
  }
  task.table.add("zp", random_unit(rng, kDim));

  std::uniform_int_distribution<int> group(0, 2);
  std::uniform_int_distribution<std::size_t> word(0, kWords - 1);
  std::size_t next_id = 0;
  auto make = [&](std::vector<PrepInstance>& dst) {
    for (std::size_t i = 0; i < per_split; ++i) {
      const int gl = group(rng);
      const int step = 1 + static_cast<int>(i % 2);  // 1: s1 pairs, 2: s2 pairs
      const int gr = (gl + step) % 3;
      PrepInstance inst;
      inst.id = std::to_string(next_id++);
      inst.tokens = {"g" + std::to_string(gl) + "w" + std::to_string(word(rng)), "zp",
                     "g" + std::to_string(gr) + "w" + std::to_string(word(rng))};
      inst.prep_index = 1;
      inst.preposition = "zp";
      inst.sense = step == 1 ? "s1" : "s2";
      dst.push_back(std::move(inst));
    }
  };
  make(task.train);
  make(task.dev);
  make(task.test);
  return task;
}

PlantedCorpus planted_corpus(std::size_t sentences, std::uint64_t seed) {
  static const std::vector<std::string> kFunction = {"the", "of", "and", "to", "is"};
  PlantedCorpus out;
  for (int i = 0; i < 20; ++i) {
    out.vocab_a.push_back("a" + std::to_string(i));
    out.vocab_b.push_back("b" + std::to_string(i));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick20(0, 19);
  std::uniform_int_distribution<std::size_t> pick_fn(0, kFunction.size() - 1);
  out.corpus.source = "planted";
  for (std::size_t s = 0; s < sentences; ++s) {
    const bool is_a = u(rng) < 0.5;
    const auto& own = is_a ? out.vocab_a : out.vocab_b;
    Sentence sent;
    for (int pos = 0; pos < 7; ++pos) {
      if (pos == 3) {
        sent.push_back(kPseudoPrep);
        continue;
      }
      sent.push_back(u(rng) < 0.8 ? own[pick20(rng)] : kFunction[pick_fn(rng)]);
    }
    out.corpus.sentences.push_back(std::move(sent));
    out.sense_of_sentence.push_back(is_a ? "A" : "B");
  }
  return out;
}

Corpus twins_corpus(std::size_t sentences, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> royal_filler(0, 19);
  std::uniform_int_distribution<int> pawn_filler(20, 39);
  std::uniform_int_distribution<int> kind(0, 2);
  Corpus c;
  c.source = "twins";
  for (std::size_t s = 0; s < sentences; ++s) {
    const int k = kind(rng);
    auto& dist = k == 2 ? pawn_filler : royal_filler;
    Sentence sent;
    for (int i = 0; i < 6; ++i) {
      if (i == 2) sent.push_back(k == 0 ? "king" : k == 1 ? "queen" : "pawn");
      else sent.push_back("w" + std::to_string(dist(rng)));
    }
    c.sentences.push_back(std::move(sent));
  }
  return c;
}

}  // namespace psd::testing
