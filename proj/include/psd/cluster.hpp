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

#ifndef PSD_CLUSTER_HPP_
#define PSD_CLUSTER_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "psd/common.hpp"
#include "psd/features.hpp"

namespace psd {

struct KMeansModel {
  std::vector<Vec> centroids;
  FeatureMode feature_mode = FeatureMode::kAll;
  // Present after label_clusters; indexed by cluster id.
  std::optional<std::vector<std::string>> sense_of_cluster;
  std::optional<std::vector<double>> purity;

  std::size_t k() const { return centroids.size(); }
  std::size_t dim() const { return centroids.empty() ? 0 : centroids.front().size(); }
};

// k-means++ seeding (draws scan points in input order) followed by Lloyd
// iterations until the assignment stops changing or max_iter is reached.
// An emptied cluster is re-seeded at the point farthest from its centroid.
// When `sse_trace` is given, it receives the within-cluster SSE after
// seeding and after every iteration.
KMeansModel kmeans_fit(const std::vector<Vec>& points, std::size_t k, std::uint64_t seed,
                       std::size_t max_iter = 300, std::vector<double>* sse_trace = nullptr);

// Nearest centroid by Euclidean distance; ties go to the lowest id.
std::size_t assign_cluster(const KMeansModel& model, VecView point);

double within_cluster_sse(const KMeansModel& model, const std::vector<Vec>& points);

// Names each cluster by its most frequent training sense (ties: smallest
// label). Clusters without members take the overall most frequent sense.
KMeansModel label_clusters(KMeansModel model, const std::vector<Vec>& points,
                           const std::vector<std::string>& senses);

std::string predict_sense(const KMeansModel& model, VecView point);

double disambiguation_accuracy(const std::vector<std::string>& predictions,
                               const std::vector<std::string>& gold);

// "k D feature_mode", k centroid rows, then an optional "labels" block of
// "cluster_id<TAB>sense<TAB>purity" lines.
void save_kmeans(const KMeansModel& model, const std::filesystem::path& path);
KMeansModel load_kmeans(const std::filesystem::path& path);

}  // namespace psd

#endif  // PSD_CLUSTER_HPP_
