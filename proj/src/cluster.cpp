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

#include "psd/cluster.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <random>

namespace psd {

namespace {

double sq_dist(VecView a, VecView b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Most frequent label; ties resolve to the lexicographically smallest.
std::string majority(const std::map<std::string, std::size_t>& counts) {
  std::string best;
  std::size_t best_count = 0;
  for (const auto& [label, c] : counts) {
    if (c > best_count) {
      best = label;
      best_count = c;
    }
  }
  return best;
}

std::vector<Vec> seed_plus_plus(const std::vector<Vec>& points, std::size_t k,
                                std::mt19937_64& rng) {
  std::vector<Vec> centers;
  std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
  centers.push_back(points[pick(rng)]);
  std::vector<double> d2(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) d2[i] = sq_dist(points[i], centers[0]);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (centers.size() < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t chosen = 0;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      chosen = points.size() - 1;
      for (std::size_t i = 0; i < points.size(); ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      // Every point coincides with a center already; duplicates are harmless.
      chosen = pick(rng);
    }
    centers.push_back(points[chosen]);
    for (std::size_t i = 0; i < points.size(); ++i)
      d2[i] = std::min(d2[i], sq_dist(points[i], centers.back()));
  }
  return centers;
}

}  // namespace

std::size_t assign_cluster(const KMeansModel& model, VecView point) {
  if (model.centroids.empty()) throw UsageError("assign_cluster: model has no centroids");
  if (point.size() != model.dim()) throw UsageError("assign_cluster: dimension mismatch");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < model.centroids.size(); ++c) {
    const double d = sq_dist(point, model.centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

double within_cluster_sse(const KMeansModel& model, const std::vector<Vec>& points) {
  double s = 0.0;
  for (const Vec& p : points) s += sq_dist(p, model.centroids[assign_cluster(model, p)]);
  return s;
}

KMeansModel kmeans_fit(const std::vector<Vec>& points, std::size_t k, std::uint64_t seed,
                       std::size_t max_iter, std::vector<double>* sse_trace) {
  if (k == 0) throw UsageError("kmeans_fit: k must be at least 1");
  if (points.size() < k) {
    throw UsageError("kmeans_fit: " + std::to_string(points.size()) +
                     " points cannot form " + std::to_string(k) + " clusters");
  }
  const std::size_t dim = points.front().size();
  for (const Vec& p : points) {
    if (p.size() != dim) throw UsageError("kmeans_fit: mixed point dimensions");
  }

  std::mt19937_64 rng(seed);
  KMeansModel model;
  model.centroids = seed_plus_plus(points, k, rng);

  std::vector<std::size_t> assignment(points.size(), k);
  auto assign_all = [&] {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::size_t c = assign_cluster(model, points[i]);
      if (c != assignment[i]) {
        assignment[i] = c;
        changed = true;
      }
    }
    return changed;
  };
  auto current_sse = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
      s += sq_dist(points[i], model.centroids[assignment[i]]);
    return s;
  };

  assign_all();
  if (sse_trace) sse_trace->push_back(current_sse());
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    std::vector<Vec> sums(k, Vec(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      ++counts[assignment[i]];
      for (std::size_t d = 0; d < dim; ++d) sums[assignment[i]][d] += points[i][d];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d)
        model.centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (counts[assignment[i]] <= 1) continue;
        const double d = sq_dist(points[i], model.centroids[assignment[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far_d < 0.0) continue;
      --counts[assignment[far]];
      model.centroids[c] = points[far];
      assignment[far] = c;
      counts[c] = 1;
    }
    const bool changed = assign_all();
    if (sse_trace) sse_trace->push_back(current_sse());
    if (!changed) break;
  }
  return model;
}

KMeansModel label_clusters(KMeansModel model, const std::vector<Vec>& points,
                           const std::vector<std::string>& senses) {
  if (points.size() != senses.size()) {
    throw UsageError("label_clusters: points and senses differ in length");
  }
  if (senses.empty()) throw UsageError("label_clusters: no training senses");
  std::vector<std::map<std::string, std::size_t>> per_cluster(model.k());
  std::map<std::string, std::size_t> overall;
  for (std::size_t i = 0; i < points.size(); ++i) {
    ++per_cluster[assign_cluster(model, points[i])][senses[i]];
    ++overall[senses[i]];
  }
  const std::string fallback = majority(overall);
  std::vector<std::string> labels(model.k());
  std::vector<double> purity(model.k(), 0.0);
  for (std::size_t c = 0; c < model.k(); ++c) {
    if (per_cluster[c].empty()) {
      labels[c] = fallback;
      continue;
    }
    labels[c] = majority(per_cluster[c]);
    std::size_t total = 0;
    for (const auto& [_, n] : per_cluster[c]) total += n;
    purity[c] = static_cast<double>(per_cluster[c].at(labels[c])) / static_cast<double>(total);
  }
  model.sense_of_cluster = std::move(labels);
  model.purity = std::move(purity);
  return model;
}

std::string predict_sense(const KMeansModel& model, VecView point) {
  if (!model.sense_of_cluster) throw UsageError("predict_sense: model has no cluster labels");
  return (*model.sense_of_cluster)[assign_cluster(model, point)];
}

double disambiguation_accuracy(const std::vector<std::string>& predictions,
                               const std::vector<std::string>& gold) {
  if (predictions.empty()) throw UsageError("accuracy: empty prediction list");
  if (predictions.size() != gold.size()) throw UsageError("accuracy: length mismatch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hits += predictions[i] == gold[i];
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

void save_kmeans(const KMeansModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << model.k() << ' ' << model.dim() << ' ' << feature_mode_name(model.feature_mode) << '\n';
  for (const Vec& c : model.centroids) {
    for (std::size_t d = 0; d < c.size(); ++d) out << (d ? "\t" : "") << format_double(c[d]);
    out << '\n';
  }
  if (model.sense_of_cluster) {
    out << "labels\n";
    for (std::size_t c = 0; c < model.k(); ++c) {
      out << c << '\t' << (*model.sense_of_cluster)[c] << '\t'
          << format_double(model.purity ? (*model.purity)[c] : 0.0) << '\n';
    }
  }
  if (!out) throw DataError("I/O failure writing " + path.string());
}

KMeansModel load_kmeans(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  const std::string where = path.string() + ": ";
  std::string line;
  if (!std::getline(in, line)) throw DataError(where + "empty model file");
  const auto header = split_ws(line);
  if (header.size() != 3) throw DataError(where + "header must be 'k D feature_mode'");
  const auto k = static_cast<std::size_t>(parse_int(header[0]));
  const auto dim = static_cast<std::size_t>(parse_int(header[1]));
  KMeansModel model;
  try {
    model.feature_mode = parse_feature_mode(header[2]);
  } catch (const UsageError& e) {
    throw DataError(where + e.what());
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (!std::getline(in, line)) throw DataError(where + "missing centroid rows");
    const auto cols = split(line, '\t');
    if (cols.size() != dim) throw DataError(where + "centroid row has wrong width");
    Vec row;
    for (const auto& s : cols) row.push_back(parse_double(s));
    model.centroids.push_back(std::move(row));
  }
  if (std::getline(in, line) && line == "labels") {
    std::vector<std::string> labels(k);
    std::vector<double> purity(k, 0.0);
    std::vector<bool> seen(k, false);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto cols = split(line, '\t');
      if (cols.size() != 3) throw DataError(where + "label rows need 3 columns");
      const auto c = static_cast<std::size_t>(parse_int(cols[0]));
      if (c >= k) throw DataError(where + "label for unknown cluster " + cols[0]);
      labels[c] = cols[1];
      purity[c] = parse_double(cols[2]);
      seen[c] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      throw DataError(where + "labels block does not cover every cluster");
    }
    model.sense_of_cluster = std::move(labels);
    model.purity = std::move(purity);
  }
  return model;
}

}  // namespace psd
