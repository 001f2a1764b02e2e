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

#include "psd/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

namespace psd {

namespace {

constexpr double kVoteEpsilon = 1e-6;

double block_distance(const Vec& a, bool a_degenerate, const Vec& b, bool b_degenerate) {
  if (a_degenerate || b_degenerate) return 1.0;
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 1.0;
  return 1.0 - std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

struct BlockDistances {
  double left, right, inter;
};

BlockDistances block_distances(const FeatureTriple& q, const FeatureTriple& e) {
  return {block_distance(q.left, q.left_degenerate, e.left, e.left_degenerate),
          block_distance(q.right, q.right_degenerate, e.right, e.right_degenerate),
          block_distance(q.inter, q.inter_degenerate, e.inter, e.inter_degenerate)};
}

double combine(const BlockWeights& w, const BlockDistances& d) {
  return w.left * d.left + w.right * d.right + w.inter * d.inter;
}

// `scored` holds (distance, exemplar index).
template <typename SenseOf>
std::string vote(std::vector<std::pair<double, std::size_t>>& scored, std::size_t k,
                 SenseOf sense_of) {
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end());
  std::map<std::string, double> mass;
  for (std::size_t i = 0; i < take; ++i) {
    mass[sense_of(scored[i].second)] += 1.0 / (scored[i].first + kVoteEpsilon);
  }
  std::string best;
  double best_mass = -1.0;
  for (const auto& [sense, m] : mass) {
    if (m > best_mass) {
      best = sense;
      best_mass = m;
    }
  }
  return best;
}

void check_weights(const BlockWeights& w) {
  if (w.left < 0 || w.right < 0 || w.inter < 0) throw UsageError("block weights must be >= 0");
  if (w.left + w.right + w.inter <= 0) throw UsageError("block weights must not all be zero");
}

template <typename T>
void sort_unique(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

const std::string& sense_or_throw(const PrepInstance& inst) {
  if (!inst.sense) throw DataError("instance " + inst.id + " has no sense label");
  return *inst.sense;
}

}  // namespace

TuneGrid default_grid() {
  TuneGrid g;
  g.k_neighbors = {1, 3, 5, 9, 15};
  const double levels[] = {0.0, 0.5, 1.0};
  for (double l : levels)
    for (double r : levels)
      for (double i : levels)
        if (l + r + i > 0) g.weights.push_back({l, r, i});
  g.k_left = {1, 2, 3, 4};
  g.k_right = {1, 2, 3, 4};
  return g;
}

TuneGrid restrict_grid(TuneGrid grid, FeatureMode mode) {
  for (auto& w : grid.weights) {
    switch (mode) {
      case FeatureMode::kAll: break;
      case FeatureMode::kLeftRight: w.inter = 0; break;
      case FeatureMode::kLeftInter: w.right = 0; break;
      case FeatureMode::kRightInter: w.left = 0; break;
      case FeatureMode::kAverage: w = {1, 0, 0}; break;
    }
  }
  std::erase_if(grid.weights, [](const BlockWeights& w) { return w.left + w.right + w.inter <= 0; });
  sort_unique(grid.weights);
  sort_unique(grid.k_neighbors);
  sort_unique(grid.k_left);
  sort_unique(grid.k_right);
  return grid;
}

FeatureTriple knn_features(const PrepInstance& instance, std::size_t k_left, std::size_t k_right,
                           FeatureMode mode, const EmbeddingTable& table) {
  if (mode != FeatureMode::kAverage) return feature_triple(instance, k_left, k_right, table);
  FeatureTriple t;
  auto avg = average_feature(instance, k_left, k_right, table);
  t.left = std::move(avg.mean);
  t.left_degenerate = avg.degenerate;
  t.right = Vec(table.dim(), 0.0);
  t.inter = Vec(table.dim(), 0.0);
  return t;
}

std::pair<std::vector<PrepInstance>, std::vector<PrepInstance>> split_train_dev(
    const std::vector<PrepInstance>& instances, double ratio, std::uint64_t seed) {
  if (instances.empty()) throw UsageError("split_train_dev: no instances");
  if (!(ratio > 0.0 && ratio < 1.0)) throw UsageError("split_train_dev: ratio must be in (0, 1)");

  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    groups[instances[i].sense.value_or("-")].push_back(i);
  }

  // Dev quota per sense by largest remainder, capped so each sense keeps a
  // training instance.
  const double dev_frac = 1.0 - ratio;
  const auto total = static_cast<std::size_t>(std::llround(dev_frac * static_cast<double>(instances.size())));
  struct Quota {
    std::vector<std::size_t>* members;
    std::size_t dev;
    double remainder;
    std::size_t cap;
  };
  std::vector<Quota> quotas;
  std::size_t assigned = 0;
  for (auto& [_, members] : groups) {
    const double q = dev_frac * static_cast<double>(members.size());
    const std::size_t cap = members.size() - 1;
    const std::size_t base = std::min(cap, static_cast<std::size_t>(std::floor(q)));
    quotas.push_back({&members, base, q - std::floor(q), cap});
    assigned += base;
  }
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return quotas[a].remainder > quotas[b].remainder; });
  for (bool progress = true; assigned < total && progress;) {
    progress = false;
    for (std::size_t g : order) {
      if (assigned >= total) break;
      if (quotas[g].dev < quotas[g].cap) {
        ++quotas[g].dev;
        ++assigned;
        progress = true;
      }
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<bool> in_dev(instances.size(), false);
  for (auto& q : quotas) {
    std::vector<std::size_t> shuffled = *q.members;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (std::size_t i = 0; i < q.dev; ++i) in_dev[shuffled[i]] = true;
  }
  std::pair<std::vector<PrepInstance>, std::vector<PrepInstance>> out;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    (in_dev[i] ? out.second : out.first).push_back(instances[i]);
  }
  return out;
}

KnnModel build_knn(const std::vector<PrepInstance>& train, std::size_t k_neighbors,
                   BlockWeights weights, std::size_t k_left, std::size_t k_right,
                   FeatureMode mode, const EmbeddingTable& table) {
  if (train.empty()) throw UsageError("build_knn: no training instances");
  if (k_neighbors == 0) throw UsageError("k_neighbors must be at least 1");
  check_weights(weights);
  KnnModel m;
  m.preposition = train.front().preposition;
  m.k_neighbors = k_neighbors;
  m.weights = weights;
  m.k_left = k_left;
  m.k_right = k_right;
  m.feature_mode = mode;
  for (const auto& inst : train) {
    if (inst.preposition != m.preposition) {
      throw DataError("instance " + inst.id + " is for '" + inst.preposition + "', expected '" +
                      m.preposition + "'");
    }
    m.exemplars.push_back({knn_features(inst, k_left, k_right, mode, table), sense_or_throw(inst)});
  }
  return m;
}

std::string knn_predict(const KnnModel& model, const FeatureTriple& triple) {
  if (model.exemplars.empty()) throw UsageError("knn_predict: model has no exemplars");
  if (triple.left.size() != model.dim()) throw UsageError("knn_predict: dimension mismatch");
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(model.exemplars.size());
  for (std::size_t i = 0; i < model.exemplars.size(); ++i) {
    scored.emplace_back(combine(model.weights, block_distances(triple, model.exemplars[i].triple)), i);
  }
  return vote(scored, model.k_neighbors,
              [&](std::size_t i) -> const std::string& { return model.exemplars[i].sense; });
}

double evaluate(const KnnModel& model, const std::vector<PrepInstance>& test,
                const EmbeddingTable& table, int jobs) {
  if (test.empty()) throw UsageError("evaluate: empty test set");
  std::vector<char> correct(test.size(), 0);
  parallel_for(test.size(), jobs, [&](std::size_t i) {
    const auto t = knn_features(test[i], model.k_left, model.k_right, model.feature_mode, table);
    correct[i] = knn_predict(model, t) == sense_or_throw(test[i]);
  });
  const auto hits = std::count(correct.begin(), correct.end(), 1);
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

TuneResult tune(const std::vector<PrepInstance>& train, const std::vector<PrepInstance>& dev,
                const TuneGrid& raw_grid, const EmbeddingTable& table, FeatureMode mode, int jobs) {
  if (train.empty() || dev.empty()) throw UsageError("tune: train and dev must be nonempty");
  const TuneGrid grid = restrict_grid(raw_grid, mode);
  if (grid.k_neighbors.empty() || grid.weights.empty() || grid.k_left.empty() ||
      grid.k_right.empty()) {
    throw UsageError("tune: every grid axis needs at least one value");
  }
  for (const auto& w : grid.weights) check_weights(w);
  const std::string& prep = train.front().preposition;
  for (const auto* set : {&train, &dev}) {
    for (const auto& inst : *set) {
      if (inst.preposition != prep) {
        throw DataError("instance " + inst.id + " is for '" + inst.preposition +
                        "', expected '" + prep + "'");
      }
      sense_or_throw(inst);
    }
  }

  TuneResult result;
  for (std::size_t kl : grid.k_left) {
    for (std::size_t kr : grid.k_right) {
      std::vector<FeatureTriple> train_f(train.size()), dev_f(dev.size());
      parallel_for(train.size(), jobs, [&](std::size_t i) {
        train_f[i] = knn_features(train[i], kl, kr, mode, table);
      });
      parallel_for(dev.size(), jobs, [&](std::size_t i) {
        dev_f[i] = knn_features(dev[i], kl, kr, mode, table);
      });
      std::vector<std::vector<BlockDistances>> dist(dev.size());
      parallel_for(dev.size(), jobs, [&](std::size_t q) {
        dist[q].reserve(train.size());
        for (const auto& e : train_f) dist[q].push_back(block_distances(dev_f[q], e));
      });

      std::vector<GridCell> cells;
      for (std::size_t k : grid.k_neighbors)
        for (const auto& w : grid.weights) cells.push_back({k, w, kl, kr, 0.0});
      parallel_for(cells.size(), jobs, [&](std::size_t c) {
        std::size_t hits = 0;
        std::vector<std::pair<double, std::size_t>> scored(train.size());
        for (std::size_t q = 0; q < dev.size(); ++q) {
          for (std::size_t e = 0; e < train.size(); ++e) {
            scored[e] = {combine(cells[c].weights, dist[q][e]), e};
          }
          const auto predicted = vote(scored, cells[c].k_neighbors,
                                      [&](std::size_t i) -> const std::string& { return *train[i].sense; });
          hits += predicted == *dev[q].sense;
        }
        cells[c].dev_accuracy = static_cast<double>(hits) / static_cast<double>(dev.size());
      });
      result.cells.insert(result.cells.end(), cells.begin(), cells.end());
    }
  }

  const GridCell* best = &result.cells.front();
  for (const auto& c : result.cells) {
    if (c.dev_accuracy > best->dev_accuracy) best = &c;
  }
  result.dev_accuracy = best->dev_accuracy;
  result.model = build_knn(train, best->k_neighbors, best->weights, best->k_left, best->k_right,
                           mode, table);
  return result;
}

void save_knn(const KnnModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  const auto& w = model.weights;
  out << model.preposition << '\t' << model.k_neighbors << '\t' << format_double(w.left) << ','
      << format_double(w.right) << ',' << format_double(w.inter) << '\t' << model.k_left << '\t'
      << model.k_right << '\t' << model.dim() << '\t' << feature_mode_name(model.feature_mode)
      << '\n';
  for (const auto& e : model.exemplars) {
    const auto& t = e.triple;
    out << e.sense << '\t' << t.left_degenerate << t.right_degenerate << t.inter_degenerate << '\t'
        << vec_to_csv(t.left) << '\t' << vec_to_csv(t.right) << '\t' << vec_to_csv(t.inter)
        << '\n';
  }
  if (!out) throw DataError("I/O failure writing " + path.string());
}

KnnModel load_knn(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 1;
  auto fail = [&](const std::string& msg) {
    return DataError(path.string() + ":" + std::to_string(line_no) + ": " + msg);
  };
  if (!std::getline(in, line)) throw fail("empty model file");
  const auto h = split(line, '\t');
  if (h.size() != 7) throw fail("header needs 7 tab-separated fields");
  KnnModel m;
  m.preposition = h[0];
  m.k_neighbors = static_cast<std::size_t>(parse_int(h[1]));
  const auto w = vec_from_csv(h[2]);
  if (w.size() != 3) throw fail("weights must be 3 comma-separated values");
  m.weights = {w[0], w[1], w[2]};
  m.k_left = static_cast<std::size_t>(parse_int(h[3]));
  m.k_right = static_cast<std::size_t>(parse_int(h[4]));
  const auto dim = static_cast<std::size_t>(parse_int(h[5]));
  try {
    m.feature_mode = parse_feature_mode(h[6]);
    check_weights(m.weights);
  } catch (const UsageError& e) {
    throw fail(e.what());
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 5 || cols[1].size() != 3) throw fail("malformed exemplar row");
    Exemplar e;
    e.sense = cols[0];
    e.triple.left_degenerate = cols[1][0] == '1';
    e.triple.right_degenerate = cols[1][1] == '1';
    e.triple.inter_degenerate = cols[1][2] == '1';
    e.triple.left = vec_from_csv(cols[2]);
    e.triple.right = vec_from_csv(cols[3]);
    e.triple.inter = vec_from_csv(cols[4]);
    if (e.triple.left.size() != dim || e.triple.right.size() != dim ||
        e.triple.inter.size() != dim) {
      throw fail("exemplar vectors do not match declared dimension");
    }
    m.exemplars.push_back(std::move(e));
  }
  return m;
}

}  // namespace psd
