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

#ifndef PSD_EMBEDDINGS_HPP_
#define PSD_EMBEDDINGS_HPP_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "psd/common.hpp"

namespace psd {

// Vocabulary plus one dense row per token. Immutable once built; rows are
// stored contiguously in vocabulary order.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim);

  // Appends a row. Returns false (and leaves the table unchanged) when the
  // token is already present. Throws DataError on wrong width or non-finite
  // entries.
  bool add(const std::string& token, VecView row);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vocab_.size(); }
  bool empty() const { return vocab_.empty(); }

  const std::vector<std::string>& vocab() const { return vocab_; }
  const std::string& token(std::size_t index) const { return vocab_[index]; }
  std::optional<std::size_t> index_of(const std::string& token) const;
  bool contains(const std::string& token) const { return index_.count(token) > 0; }

  VecView row(std::size_t index) const { return {data_.data() + index * dim_, dim_}; }
  double row_norm(std::size_t index) const { return norms_[index]; }

  // Non-fatal findings from loading, e.g. duplicate tokens that were dropped.
  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

 private:
  std::size_t dim_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
  std::vector<double> norms_;
  std::vector<std::string> warnings_;
};

// Textual word-vector format: "<count> <dim>" header then "<token> v1 .. vdim"
// per line. Duplicate tokens keep the first row and record a warning.
EmbeddingTable load_table(const std::filesystem::path& path);
EmbeddingTable parse_table(std::istream& in, const std::string& source = "<stream>");
void save_table(const EmbeddingTable& table, const std::filesystem::path& path);
void write_table(const EmbeddingTable& table, std::ostream& out);

// Exact-match lookup; OOV tokens yield nullopt.
std::optional<VecView> get_vector(const EmbeddingTable& table, const std::string& token);

// Cosine similarity. Throws UsageError on zero-norm input or width mismatch.
double cosine(VecView a, VecView b);

struct Neighbor {
  std::string token;
  double cosine;
};

// Exact top-k scan. Ties keep vocabulary order; zero rows score 0. `skip` (optional) is
// consulted per vocabulary index in addition to the exclusion set.
std::vector<Neighbor> nearest(const EmbeddingTable& table, VecView query, std::size_t k,
                              const std::set<std::string>& exclude = {},
                              const std::function<bool(const std::string&)>& skip = {});

}  // namespace psd

#endif  // PSD_EMBEDDINGS_HPP_
