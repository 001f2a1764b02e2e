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

#include "psd/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace psd {

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw UsageError("embedding dimension must be positive");
}

bool EmbeddingTable::add(const std::string& token, VecView row) {
  if (row.size() != dim_) {
    throw DataError("row for '" + token + "' has " + std::to_string(row.size()) +
                    " entries, expected " + std::to_string(dim_));
  }
  for (double x : row) {
    if (!std::isfinite(x)) throw DataError("non-finite entry in row for '" + token + "'");
  }
  if (index_.count(token)) return false;
  index_.emplace(token, vocab_.size());
  vocab_.push_back(token);
  data_.insert(data_.end(), row.begin(), row.end());
  norms_.push_back(norm(row));
  return true;
}

std::optional<std::size_t> EmbeddingTable::index_of(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingTable parse_table(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": missing header line");
  const auto header = split_ws(line);
  if (header.size() != 2) throw DataError(source + ": header must be '<count> <dim>'");
  const long long count = parse_int(header[0]);
  const long long dim = parse_int(header[1]);
  if (count < 0 || dim < 1) throw DataError(source + ": invalid header '" + line + "'");

  EmbeddingTable table(static_cast<std::size_t>(dim));
  Vec row(static_cast<std::size_t>(dim));
  long long rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_ws(line);
    if (fields.size() != static_cast<std::size_t>(dim) + 1) {
      throw DataError(source + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(dim) + " values, found " +
                      std::to_string(fields.size() - 1));
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      try {
        row[i] = parse_double(fields[i + 1]);
      } catch (const DataError& e) {
        throw DataError(source + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    ++rows;
    if (rows > count) break;
    if (!table.add(fields[0], row)) {
      table.add_warning(source + ":" + std::to_string(line_no) + ": duplicate token '" +
                        fields[0] + "' ignored");
    }
  }
  if (rows != count) {
    throw DataError(source + ": row count mismatch: header declares " + std::to_string(count) + " rows, found " +
                    (rows > count ? "more" : std::to_string(rows)));
  }
  return table;
}

EmbeddingTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embeddings file " + path.string());
  return parse_table(in, path.string());
}

void write_table(const EmbeddingTable& table, std::ostream& out) {
  out << table.size() << ' ' << table.dim() << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.token(i);
    for (double x : table.row(i)) out << ' ' << format_double(x);
    out << '\n';
  }
}

void save_table(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write embeddings file " + path.string());
  write_table(table, out);
  out.flush();
  if (!out) throw DataError("I/O failure writing " + path.string());
}

std::optional<VecView> get_vector(const EmbeddingTable& table, const std::string& token) {
  auto idx = table.index_of(token);
  if (!idx) return std::nullopt;
  return table.row(*idx);
}

double cosine(VecView a, VecView b) {
  if (a.size() != b.size()) throw UsageError("cosine: dimension mismatch");
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw UsageError("cosine: zero-norm input");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

std::vector<Neighbor> nearest(const EmbeddingTable& table, VecView query, std::size_t k,
                              const std::set<std::string>& exclude,
                              const std::function<bool(const std::string&)>& skip) {
  if (k == 0) throw UsageError("nearest: k must be at least 1");
  if (query.size() != table.dim()) throw UsageError("nearest: query dimension mismatch");
  const double qn = norm(query);
  if (qn == 0.0) throw UsageError("nearest: zero-norm query");

  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const std::string& tok = table.token(i);
    if (exclude.count(tok) || (skip && skip(tok))) continue;
    const double rn = table.row_norm(i);
    const double c = rn > 0.0 ? std::clamp(dot(query, table.row(i)) / (qn * rn), -1.0, 1.0) : 0.0;
    scored.emplace_back(c, i);
  }
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  std::vector<Neighbor> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.push_back({table.token(scored[i].second), scored[i].first});
  }
  return out;
}

}  // namespace psd
