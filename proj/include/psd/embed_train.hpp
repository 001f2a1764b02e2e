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

#ifndef PSD_EMBED_TRAIN_HPP_
#define PSD_EMBED_TRAIN_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "psd/corpus.hpp"
#include "psd/embeddings.hpp"

namespace psd {

struct TrainConfig {
  std::size_t dim = 300;
  std::size_t window = 5;
  // Window used when the center token carries a sense tag.
  std::size_t prep_window = 2;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double initial_lr = 0.025;
  std::size_t min_count = 5;
  // <= 0 or infinite disables frequent-word subsampling.
  double subsample_threshold = 1e-3;
  std::uint64_t seed = 42;
  // Uniformly shrink each window (word2vec style). Off in deterministic runs.
  bool dynamic_window = false;
  // Hogwild workers over sentence shards; output is not reproducible.
  bool parallel = false;
  int jobs = 1;

  void validate() const;
};

class Vocab {
 public:
  Vocab() = default;
  Vocab(std::vector<std::string> tokens, std::vector<std::uint64_t> counts);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(std::size_t i) const { return tokens_[i]; }
  std::uint64_t count(std::size_t i) const { return counts_[i]; }
  std::uint64_t total() const { return total_; }
  std::optional<std::size_t> index_of(const std::string& token) const;

  // Draws an index with probability proportional to count^0.75.
  std::size_t sample_negative(std::mt19937_64& rng) const;

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> cumulative_;
  std::uint64_t total_ = 0;
};

// Keeps tokens seen at least min_count times, ordered by descending count
// then lexicographically. Throws DataError if nothing survives.
Vocab build_vocab(const Corpus& corpus, std::size_t min_count);

struct CbowExample {
  std::size_t center;
  std::vector<std::size_t> context;
};

// The (center, context) stream of one epoch, after OOV removal and
// subsampling, using the config's seed. Training draws the same sequence.
std::vector<CbowExample> enumerate_examples(const Corpus& corpus, const Vocab& vocab,
                                            const TrainConfig& config);

struct CbowParams {
  std::size_t dim = 0;
  std::vector<double> input;   // |V| x dim, row-major
  std::vector<double> output;  // |V| x dim, row-major

  std::span<double> in_row(std::size_t i) { return {input.data() + i * dim, dim}; }
  std::span<double> out_row(std::size_t i) { return {output.data() + i * dim, dim}; }
};

// Negative-sampling loss of one example: -log s(h.u_c) - sum log s(-h.u_n),
// with h the mean of the context input rows.
double cbow_loss(const CbowParams& params, std::span<const std::size_t> context,
                 std::size_t center, std::span<const std::size_t> negatives);

// One SGD step on cbow_loss; returns the loss before the update.
double cbow_step(CbowParams& params, std::span<const std::size_t> context, std::size_t center,
                 std::span<const std::size_t> negatives, double lr);

struct TrainStats {
  std::vector<double> epoch_loss;  // mean per-example loss
  std::size_t examples_per_epoch = 0;
};

// CBOW with negative sampling. Input rows start uniform in
// [-0.5/dim, 0.5/dim], output rows at zero; the learning rate decays
// linearly to 1e-4 of its initial value. Returns the input vectors.
EmbeddingTable train_cbow(const Corpus& corpus, const TrainConfig& config,
                          TrainStats* stats = nullptr);

// Max relative error between the analytic gradient of cbow_loss and central
// differences (h = 1e-5) on a random instance with a 10-token vocabulary.
double gradient_check(const TrainConfig& config);

}  // namespace psd

#endif  // PSD_EMBED_TRAIN_HPP_
