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
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "psd/embeddings.hpp"
#include "support/synthetic.hpp"
#include "test_util.hpp"

using namespace psd;
namespace pt = psd::testing;

namespace {

EmbeddingTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_table(in, "mem");
}

EmbeddingTable random_table(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  EmbeddingTable t(dim);
  for (std::size_t i = 0; i < n; ++i) t.add("t" + std::to_string(i), pt::gaussian_vec(rng, dim));
  return t;
}

}  // namespace

TEST_CASE("load_table reads the text format") {
  const auto t = parse("2 3\na 1 0 0\nb 0 1 0\n");
  CHECK(t.size() == 2);
  CHECK(t.dim() == 3);
  CHECK(t.vocab() == std::vector<std::string>{"a", "b"});
  CHECK(t.row(1)[1] == 1.0);
}

TEST_CASE("load_table errors") {
  CHECK_THROWS_WITH_AS(parse("1 2\na 1 x\n"), doctest::Contains("non-numeric"), DataError);
  CHECK_THROWS_WITH_AS(parse("5 1\na 1\nb 1\nc 1\nd 1\n"), doctest::Contains("count"), DataError);
  CHECK_THROWS_WITH_AS(parse("2 2\na 1 1\nb 1\n"), doctest::Contains("mem:3"), DataError);
  CHECK_THROWS_AS(parse("1 2\na 1 nan\n"), DataError);
  CHECK_THROWS_AS(parse(""), DataError);
  CHECK_THROWS_AS(load_table("/nonexistent/vectors.txt"), DataError);
}

TEST_CASE("duplicate tokens keep the first row and warn") {
  const auto t = parse("3 1\na 1\nb 2\na 3\n");
  CHECK(t.size() == 2);
  CHECK(t.row(*t.index_of("a"))[0] == 1.0);
  CHECK(t.warnings().size() == 1);
}

TEST_CASE("save/load round trip") {
  pt::TempDir dir;
  const auto t = random_table(2, 4, 1);
  save_table(t, dir / "v.txt");
  const auto back = load_table(dir / "v.txt");
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t d = 0; d < 4; ++d) CHECK(std::abs(back.row(i)[d] - t.row(i)[d]) <= 1e-5);
  CHECK(back.vocab() == t.vocab());
}

TEST_CASE("empty table saves as a bare header") {
  pt::TempDir dir;
  save_table(EmbeddingTable(7), dir / "e.txt");
  CHECK(pt::read_file(dir / "e.txt") == "0 7\n");
  CHECK(load_table(dir / "e.txt").empty());
}

TEST_CASE("300-dim, 10-token table writes 11 lines") {
  pt::TempDir dir;
  save_table(random_table(10, 300, 2), dir / "big.txt");
  const std::string text = pt::read_file(dir / "big.txt");
  CHECK(std::count(text.begin(), text.end(), '\n') == 11);
}

TEST_CASE("get_vector is exact-match") {
  const auto t = parse("1 2\nin 1 2\n");
  REQUIRE(get_vector(t, "in"));
  CHECK((*get_vector(t, "in"))[1] == 2.0);
  CHECK_FALSE(get_vector(t, "In"));
  CHECK_FALSE(get_vector(t, "zzz"));
}

TEST_CASE("cosine examples") {
  const Vec v{0.3, -1.2, 4.0};
  CHECK(cosine(v, v) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine(Vec{1, 0}, Vec{0, 1}) == 0.0);
  CHECK(std::abs(cosine(Vec{1, 1}, Vec{1, 0}) - 0.70710678) <= 1e-8);
  CHECK_THROWS_AS(cosine(Vec{0, 0}, Vec{1, 0}), UsageError);
  CHECK_THROWS_AS(cosine(Vec{1, 0}, Vec{1, 0, 0}), UsageError);
}

TEST_CASE("cosine is symmetric and scale-free") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> c(0.01, 100.0);
  for (int i = 0; i < 200; ++i) {
    const Vec a = pt::gaussian_vec(rng, 9), b = pt::gaussian_vec(rng, 9);
    Vec ca = a;
    const double s = c(rng);
    for (double& x : ca) x *= s;
    CHECK(std::abs(cosine(a, b) - cosine(b, a)) <= 1e-12);
    CHECK(std::abs(cosine(ca, b) - cosine(a, b)) <= 1e-12);
  }
}

TEST_CASE("nearest: self and exclusion") {
  const auto t = parse("3 2\na 1 0\nb 0.9 0.1\nc 0 1\n");
  const auto self = nearest(t, *get_vector(t, "a"), 1);
  REQUIRE(self.size() == 1);
  CHECK(self[0].token == "a");
  CHECK(self[0].cosine == doctest::Approx(1.0));
  const auto other = nearest(t, *get_vector(t, "a"), 1, {"a"});
  CHECK(other[0].token == "b");
  CHECK(nearest(t, *get_vector(t, "a"), 10, {"a"}).size() == 2);
  CHECK_THROWS_AS(nearest(t, Vec{0, 0}, 1), UsageError);
}

TEST_CASE("nearest matches an exhaustive scan") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto t = random_table(5, 6, seed);
    std::mt19937_64 rng(seed + 1000);
    const Vec q = pt::gaussian_vec(rng, 6);
    std::vector<std::pair<double, std::size_t>> scan;
    for (std::size_t i = 0; i < t.size(); ++i) {
      double d = 0, nq = 0, nr = 0;
      for (std::size_t k = 0; k < 6; ++k) {
        d += q[k] * t.row(i)[k];
        nq += q[k] * q[k];
        nr += t.row(i)[k] * t.row(i)[k];
      }
      scan.emplace_back(-d / std::sqrt(nq * nr), i);
    }
    std::sort(scan.begin(), scan.end());
    const auto got = nearest(t, q, 3);
    REQUIRE(got.size() == 3);
    for (std::size_t r = 0; r < 3; ++r) {
      CHECK(got[r].token == t.token(scan[r].second));
      if (r > 0) CHECK(got[r - 1].cosine >= got[r].cosine);
    }
  }
}

TEST_CASE("nearest breaks ties by vocabulary order") {
  const auto t = parse("3 2\nz 1 0\ny 2 0\nx 3 0\n");
  const auto got = nearest(t, Vec{1, 0}, 3);
  CHECK(got[0].token == "z");
  CHECK(got[1].token == "y");
  CHECK(got[2].token == "x");
}
