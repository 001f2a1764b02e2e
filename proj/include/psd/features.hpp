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

#ifndef PSD_FEATURES_HPP_
#define PSD_FEATURES_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "psd/common.hpp"
#include "psd/embeddings.hpp"

namespace psd {

// One preposition occurrence inside a sentence.
struct PrepInstance {
  std::string id;
  std::vector<std::string> tokens;
  std::size_t prep_index = 0;
  std::string preposition;
  std::optional<std::string> sense;

  // Throws DataError unless prep_index is in range and names `preposition`.
  void validate() const;
  bool operator==(const PrepInstance&) const = default;
};

// In-vocabulary context tokens around the preposition, nearest first.
struct ContextWindow {
  std::vector<std::string> left;
  std::vector<std::string> right;
};

struct FeatureTriple {
  Vec left;
  Vec right;
  Vec inter;
  bool left_degenerate = true;
  bool right_degenerate = true;
  bool inter_degenerate = true;
};

enum class FeatureMode { kAll, kLeftRight, kLeftInter, kRightInter, kAverage };

// Accepts the short CLI names (all, lr, li, ri, average) and the long ones
// (left_right, left_inter, right_inter, average_baseline).
FeatureMode parse_feature_mode(const std::string& name);
std::string feature_mode_name(FeatureMode mode);

// Scans outward from the preposition, skipping OOV tokens, until k tokens are
// collected or the sentence ends.
ContextWindow extract_window(const PrepInstance& instance, std::size_t k_left, std::size_t k_right,
                             const EmbeddingTable& table);

struct MeanResult {
  Vec mean;
  bool degenerate = true;
};

// Arithmetic mean of the tokens' rows. Empty input gives a zero vector.
MeanResult mean_feature(const std::vector<std::string>& tokens, const EmbeddingTable& table);

struct InterplayResult {
  Vec direction;
  bool degenerate = true;
};

// Unit vector closest (in summed squared distance) to span(left) and
// span(right): the top eigenvector of P_left + P_right. Sign is chosen so the
// result points along mean(left) + mean(right); if that is orthogonal, the
// first nonzero coordinate is made positive. One empty side falls back to the
// normalized mean of the other side (degenerate); both empty gives zero.
InterplayResult interplay_feature(const std::vector<Vec>& left, const std::vector<Vec>& right);

FeatureTriple feature_triple(const PrepInstance& instance, std::size_t k_left,
                             std::size_t k_right, const EmbeddingTable& table);

// Mean over the left and right windows pooled together.
MeanResult average_feature(const PrepInstance& instance, std::size_t k_left, std::size_t k_right,
                           const EmbeddingTable& table);

// Flat vector for clustering. Ablation modes concatenate the selected blocks,
// each normalized to unit length first (degenerate blocks stay zero).
// kAverage returns the pooled window mean and ignores `triple`.
Vec concat_features(const FeatureTriple& triple, FeatureMode mode, const EmbeddingTable& table,
                    const PrepInstance& instance, std::size_t k_left, std::size_t k_right);

struct FeatureRecord {
  std::string id;
  FeatureTriple triple;
};

// id, left/right/inter flags (0/1), then the three vectors comma-joined.
void write_features_tsv(const std::vector<FeatureRecord>& records,
                        const std::filesystem::path& path);
std::vector<FeatureRecord> read_features_tsv(const std::filesystem::path& path);

}  // namespace psd

#endif  // PSD_FEATURES_HPP_
