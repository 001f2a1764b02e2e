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

#ifndef PSD_EVAL_HPP_
#define PSD_EVAL_HPP_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "psd/classify.hpp"
#include "psd/embeddings.hpp"

namespace psd {

struct RelationPairSet {
  std::string name;
  std::vector<std::pair<std::string, std::string>> pairs;  // (base, target)
};

// "base<TAB>target" lines grouped under ": <relation-name>" headers.
std::vector<RelationPairSet> load_relation_pairs(const std::filesystem::path& path);

struct VpcEntry {
  std::string verb;
  std::string particle;
  std::set<std::string> gold;
  std::vector<std::string> sentences;
  std::optional<std::string> phrase_type;  // compositional, aspectual or idiomatic
};

// Columns: verb, particle, comma-joined gold paraphrases, optional phrase
// type, then one or more example sentences.
std::vector<VpcEntry> load_vpc(const std::filesystem::path& path);

struct DiffVector {
  Vec vector;
  std::size_t used = 0;
  std::vector<std::string> skipped;  // "base/target" for OOV pairs
};

// Mean of (target - base) over in-vocabulary pairs.
DiffVector diff_baseline_vector(const EmbeddingTable& table,
                                const std::vector<std::pair<std::string, std::string>>& pairs);

struct RelationVector {
  Vec vector;
  // Token the vector was read from; excluded from candidates.
  std::optional<std::string> source_token;
  bool is_diff_baseline = false;
};

struct EvalOutcome {
  double accuracy = 0.0;
  std::size_t hits = 0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};

// Hit when the target is among the topk nearest tokens to base + relation
// (base and source token excluded). With holdout on a diff-baseline vector,
// each pair uses the mean difference of the other evaluable pairs.
EvalOutcome relation_eval(const EmbeddingTable& table,
                          const std::vector<std::pair<std::string, std::string>>& pairs,
                          const RelationVector& relation, std::size_t topk, bool holdout = false);

// Nearest tokens to verb + prep_token (verb alone when prep_token is empty),
// excluding the verb, the preposition token and sense-tagged forms of the
// verb. `allowed`, when given, restricts candidates.
std::vector<std::string> vpc_paraphrase(const EmbeddingTable& table, const VpcEntry& entry,
                                        const std::optional<std::string>& prep_token,
                                        std::size_t topk,
                                        const std::set<std::string>* allowed = nullptr);

// Sense token for the entry's particle: the k-NN prediction on each example
// sentence, majority over sentences (ties: smallest sense). nullopt when no
// model covers the particle or it never appears in the sentences.
std::optional<std::string> select_sense_token(const VpcEntry& entry,
                                              const std::map<std::string, KnnModel>& models,
                                              const EmbeddingTable& table);

double vpc_accuracy(const std::vector<VpcEntry>& entries,
                    const std::vector<std::vector<std::string>>& candidates, std::size_t topk);

double prec_at_k(const std::vector<VpcEntry>& entries,
                 const std::vector<std::vector<std::string>>& candidates, std::size_t k);

struct ReportRow {
  std::string evaluation;
  std::string condition;
  std::string metric;
  std::optional<double> value;  // nullopt prints as NA
  std::size_t n = 0;
  std::size_t skipped = 0;
  std::string note;  // reason for NA, OOV details
};

// Writes the TSV to `path` and a human-readable summary to `path`.txt.
void emit_report(const std::vector<ReportRow>& rows, const std::filesystem::path& path);
std::vector<ReportRow> read_report(const std::filesystem::path& path);

}  // namespace psd

#endif  // PSD_EVAL_HPP_
