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

#ifndef PSD_CLASSIFY_HPP_
#define PSD_CLASSIFY_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "psd/embeddings.hpp"
#include "psd/features.hpp"

namespace psd {

struct BlockWeights {
  double left = 1.0;
  double right = 1.0;
  double inter = 1.0;

  auto operator<=>(const BlockWeights&) const = default;
};

struct Exemplar {
  FeatureTriple triple;
  std::string sense;
};

struct KnnModel {
  std::string preposition;
  std::size_t k_neighbors = 1;
  BlockWeights weights;
  std::size_t k_left = 2;
  std::size_t k_right = 2;
  FeatureMode feature_mode = FeatureMode::kAll;
  std::vector<Exemplar> exemplars;

  std::size_t dim() const { return exemplars.empty() ? 0 : exemplars.front().triple.left.size(); }
};

struct TuneGrid {
  std::vector<std::size_t> k_neighbors;
  std::vector<BlockWeights> weights;
  std::vector<std::size_t> k_left;
  std::vector<std::size_t> k_right;
};

// k in {1,3,5,9,15}; weights in {0,0.5,1}^3 minus all-zero; windows 1..4.
TuneGrid default_grid();

// Ablation modes pin the unused block weights to zero; kAverage evaluates
// only (1,0,0) over the pooled-mean feature. Duplicates are removed and
// every axis sorted ascending.
TuneGrid restrict_grid(TuneGrid grid, FeatureMode mode);

// Features as the k-NN classifier sees them. For kAverage the pooled mean
// sits in the left slot and the other blocks are marked degenerate.
FeatureTriple knn_features(const PrepInstance& instance, std::size_t k_left, std::size_t k_right,
                           FeatureMode mode, const EmbeddingTable& table);

// Stratified by sense: every sense with >= 2 instances keeps at least one in
// train, singletons always go to train. Both halves keep input order.
std::pair<std::vector<PrepInstance>, std::vector<PrepInstance>> split_train_dev(
    const std::vector<PrepInstance>& instances, double ratio, std::uint64_t seed);

KnnModel build_knn(const std::vector<PrepInstance>& train, std::size_t k_neighbors,
                   BlockWeights weights, std::size_t k_left, std::size_t k_right,
                   FeatureMode mode, const EmbeddingTable& table);

// Per-block cosine distance (1 for degenerate blocks) combined by weight;
// the k closest exemplars vote with weight 1/(d + 1e-6).
std::string knn_predict(const KnnModel& model, const FeatureTriple& triple);

double evaluate(const KnnModel& model, const std::vector<PrepInstance>& test,
                const EmbeddingTable& table, int jobs = 1);

struct GridCell {
  std::size_t k_neighbors;
  BlockWeights weights;
  std::size_t k_left;
  std::size_t k_right;
  double dev_accuracy = 0.0;
};

struct TuneResult {
  KnnModel model;
  double dev_accuracy = 0.0;
  std::vector<GridCell> cells;  // in grid iteration order
};

// Exhaustive search; cells iterate k_left, k_right, k_neighbors, weights
// (outermost first, each ascending). First cell with the top accuracy wins.
TuneResult tune(const std::vector<PrepInstance>& train, const std::vector<PrepInstance>& dev,
                const TuneGrid& grid, const EmbeddingTable& table,
                FeatureMode mode = FeatureMode::kAll, int jobs = 1);

void save_knn(const KnnModel& model, const std::filesystem::path& path);
KnnModel load_knn(const std::filesystem::path& path);

}  // namespace psd

#endif  // PSD_CLASSIFY_HPP_
