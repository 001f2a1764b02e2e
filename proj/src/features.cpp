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

#include "psd/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace psd {

namespace {

constexpr double kRankTolerance = 1e-8;
constexpr double kEigenGap = 1e-9;
constexpr double kSignTolerance = 1e-12;

// Modified Gram-Schmidt; vectors whose residual falls below kRankTolerance
// times their own norm are treated as dependent and dropped.
void extend_basis(std::vector<Vec>& basis, const std::vector<Vec>& vecs) {
  for (const Vec& v : vecs) {
    const double n0 = norm(v);
    if (n0 == 0.0) continue;
    Vec w = v;
    // Two passes keep the basis orthonormal to working precision.
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vec& q : basis) {
        const double c = dot(q, w);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= c * q[i];
      }
    }
    const double n = norm(w);
    if (n <= kRankTolerance * n0) continue;
    for (double& x : w) x /= n;
    basis.push_back(std::move(w));
  }
}

struct SymEigen {
  std::vector<double> values;
  std::vector<Vec> vectors;  // vectors[j] pairs with values[j]
};

// Cyclic Jacobi rotations for a small dense symmetric matrix (row-major m*m).
SymEigen jacobi_eigen(std::vector<double> a, std::size_t m) {
  std::vector<double> v(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) v[i * m + i] = 1.0;
  auto at = [m](std::vector<double>& x, std::size_t r, std::size_t c) -> double& {
    return x[r * m + c];
  };
  double frob = 0.0;
  for (double x : a) frob += x * x;
  frob = std::sqrt(frob);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = p + 1; q < m; ++q) off += at(a, p, q) * at(a, p, q);
    if (std::sqrt(off) <= 1e-15 * frob || off == 0.0) break;
    for (std::size_t p = 0; p < m; ++p) {
      for (std::size_t q = p + 1; q < m; ++q) {
        const double apq = at(a, p, q);
        if (apq == 0.0) continue;
        const double theta = (at(a, q, q) - at(a, p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < m; ++k) {
          const double akp = at(a, k, p);
          const double akq = at(a, k, q);
          at(a, k, p) = c * akp - s * akq;
          at(a, k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double apk = at(a, p, k);
          const double aqk = at(a, q, k);
          at(a, p, k) = c * apk - s * aqk;
          at(a, q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double vkp = at(v, k, p);
          const double vkq = at(v, k, q);
          at(v, k, p) = c * vkp - s * vkq;
          at(v, k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  SymEigen out;
  for (std::size_t j = 0; j < m; ++j) {
    out.values.push_back(at(a, j, j));
    Vec col(m);
    for (std::size_t k = 0; k < m; ++k) col[k] = at(v, k, j);
    out.vectors.push_back(std::move(col));
  }
  return out;
}

Vec mean_of(const std::vector<Vec>& vecs, std::size_t dim) {
  Vec m(dim, 0.0);
  if (vecs.empty()) return m;
  for (const Vec& v : vecs)
    for (std::size_t i = 0; i < dim; ++i) m[i] += v[i];
  for (double& x : m) x /= static_cast<double>(vecs.size());
  return m;
}

void fix_sign(Vec& v, VecView reference) {
  const double d = dot(v, reference);
  if (std::abs(d) > kSignTolerance * norm(reference)) {
    if (d < 0) {
      for (double& x : v) x = -x;
    }
    return;
  }
  for (double x : v) {
    if (std::abs(x) > kSignTolerance) {
      if (x < 0) {
        for (double& y : v) y = -y;
      }
      return;
    }
  }
}

std::vector<Vec> rows_for(const std::vector<std::string>& tokens, const EmbeddingTable& table) {
  std::vector<Vec> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    auto row = get_vector(table, t);
    out.emplace_back(row->begin(), row->end());
  }
  return out;
}

void append_block(Vec& out, const Vec& block, bool degenerate, std::size_t dim) {
  if (degenerate || block.empty()) {
    out.insert(out.end(), dim, 0.0);
    return;
  }
  Vec unit = normalized(block);
  out.insert(out.end(), unit.begin(), unit.end());
}

}  // namespace

void PrepInstance::validate() const {
  if (prep_index >= tokens.size()) {
    throw DataError("instance " + id + ": prep_index " + std::to_string(prep_index) +
                    " out of range for " + std::to_string(tokens.size()) + " tokens");
  }
  if (tokens[prep_index] != preposition) {
    throw DataError("instance " + id + ": token at prep_index is '" + tokens[prep_index] +
                    "', expected '" + preposition + "'");
  }
}

FeatureMode parse_feature_mode(const std::string& name) {
  if (name == "all") return FeatureMode::kAll;
  if (name == "lr" || name == "left_right") return FeatureMode::kLeftRight;
  if (name == "li" || name == "left_inter") return FeatureMode::kLeftInter;
  if (name == "ri" || name == "right_inter") return FeatureMode::kRightInter;
  if (name == "average" || name == "average_baseline") return FeatureMode::kAverage;
  throw UsageError("unknown feature mode '" + name + "'");
}

std::string feature_mode_name(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::kAll: return "all";
    case FeatureMode::kLeftRight: return "lr";
    case FeatureMode::kLeftInter: return "li";
    case FeatureMode::kRightInter: return "ri";
    case FeatureMode::kAverage: return "average";
  }
  return "all";
}

ContextWindow extract_window(const PrepInstance& instance, std::size_t k_left, std::size_t k_right,
                             const EmbeddingTable& table) {
  instance.validate();
  ContextWindow w;
  for (std::size_t i = instance.prep_index; i-- > 0 && w.left.size() < k_left;) {
    if (table.contains(instance.tokens[i])) w.left.push_back(instance.tokens[i]);
  }
  for (std::size_t i = instance.prep_index + 1;
       i < instance.tokens.size() && w.right.size() < k_right; ++i) {
    if (table.contains(instance.tokens[i])) w.right.push_back(instance.tokens[i]);
  }
  return w;
}

MeanResult mean_feature(const std::vector<std::string>& tokens, const EmbeddingTable& table) {
  MeanResult out{Vec(table.dim(), 0.0), true};
  std::size_t n = 0;
  for (const auto& t : tokens) {
    auto row = get_vector(table, t);
    if (!row) throw DataError("mean_feature: token '" + t + "' is not in the vocabulary");
    for (std::size_t i = 0; i < table.dim(); ++i) out.mean[i] += (*row)[i];
    ++n;
  }
  if (n == 0) return out;
  for (double& x : out.mean) x /= static_cast<double>(n);
  out.degenerate = false;
  return out;
}

InterplayResult interplay_feature(const std::vector<Vec>& left, const std::vector<Vec>& right) {
  std::size_t dim = 0;
  for (const auto* side : {&left, &right})
    for (const Vec& v : *side) {
      if (dim == 0) dim = v.size();
      if (v.size() != dim) throw UsageError("interplay_feature: mixed vector dimensions");
    }
  InterplayResult out{Vec(dim, 0.0), true};
  if (dim == 0) return out;

  const Vec left_mean = mean_of(left, dim);
  const Vec right_mean = mean_of(right, dim);
  if (left.empty() || right.empty()) {
    out.direction = normalized(left.empty() ? right_mean : left_mean);
    return out;
  }

  std::vector<Vec> basis_left, basis_right, combined;
  extend_basis(basis_left, left);
  extend_basis(basis_right, right);
  if (basis_left.empty() || basis_right.empty()) {
    // A side whose vectors are all zero spans nothing; fall back as above.
    out.direction = normalized(basis_left.empty() ? right_mean : left_mean);
    return out;
  }
  extend_basis(combined, basis_left);
  extend_basis(combined, basis_right);
  const std::size_t m = combined.size();

  // Restriction of P_left + P_right to the combined span, in the combined
  // orthonormal coordinates: sum over side bases of (Q^T q)(Q^T q)^T.
  std::vector<double> mat(m * m, 0.0);
  for (const auto* side : {&basis_left, &basis_right}) {
    for (const Vec& q : *side) {
      Vec c(m);
      for (std::size_t i = 0; i < m; ++i) c[i] = dot(combined[i], q);
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t s = 0; s < m; ++s) mat[r * m + s] += c[r] * c[s];
    }
  }
  const SymEigen eig = jacobi_eigen(std::move(mat), m);
  const double top = *std::max_element(eig.values.begin(), eig.values.end());

  Vec reference(dim);
  for (std::size_t i = 0; i < dim; ++i) reference[i] = left_mean[i] + right_mean[i];
  Vec ref_coords(m);
  for (std::size_t i = 0; i < m; ++i) ref_coords[i] = dot(combined[i], reference);

  // Within a (near-)degenerate top eigenspace, take the direction of the
  // reference vector's projection onto it.
  Vec coords(m, 0.0);
  std::size_t first_top = m;
  for (std::size_t j = 0; j < m; ++j) {
    if (top - eig.values[j] >= kEigenGap) continue;
    if (first_top == m) first_top = j;
    const double w = dot(eig.vectors[j], ref_coords);
    for (std::size_t i = 0; i < m; ++i) coords[i] += w * eig.vectors[j][i];
  }
  if (norm(coords) <= kSignTolerance * std::max(1.0, norm(ref_coords))) {
    coords = eig.vectors[first_top];
  }

  Vec v(dim, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t d = 0; d < dim; ++d) v[d] += coords[i] * combined[i][d];
  v = normalized(v);
  fix_sign(v, reference);
  out.direction = std::move(v);
  out.degenerate = false;
  return out;
}

FeatureTriple feature_triple(const PrepInstance& instance, std::size_t k_left,
                             std::size_t k_right, const EmbeddingTable& table) {
  const ContextWindow w = extract_window(instance, k_left, k_right, table);
  FeatureTriple t;
  auto l = mean_feature(w.left, table);
  auto r = mean_feature(w.right, table);
  auto inter = interplay_feature(rows_for(w.left, table), rows_for(w.right, table));
  t.left = std::move(l.mean);
  t.left_degenerate = l.degenerate;
  t.right = std::move(r.mean);
  t.right_degenerate = r.degenerate;
  t.inter = inter.direction.empty() ? Vec(table.dim(), 0.0) : std::move(inter.direction);
  t.inter_degenerate = inter.degenerate;
  return t;
}

MeanResult average_feature(const PrepInstance& instance, std::size_t k_left, std::size_t k_right,
                           const EmbeddingTable& table) {
  ContextWindow w = extract_window(instance, k_left, k_right, table);
  w.left.insert(w.left.end(), w.right.begin(), w.right.end());
  return mean_feature(w.left, table);
}

Vec concat_features(const FeatureTriple& triple, FeatureMode mode, const EmbeddingTable& table,
                    const PrepInstance& instance, std::size_t k_left, std::size_t k_right) {
  const std::size_t dim = table.dim();
  Vec out;
  switch (mode) {
    case FeatureMode::kAverage:
      return average_feature(instance, k_left, k_right, table).mean;
    case FeatureMode::kAll:
      out.reserve(3 * dim);
      append_block(out, triple.left, triple.left_degenerate, dim);
      append_block(out, triple.right, triple.right_degenerate, dim);
      append_block(out, triple.inter, triple.inter_degenerate, dim);
      break;
    case FeatureMode::kLeftRight:
      append_block(out, triple.left, triple.left_degenerate, dim);
      append_block(out, triple.right, triple.right_degenerate, dim);
      break;
    case FeatureMode::kLeftInter:
      append_block(out, triple.left, triple.left_degenerate, dim);
      append_block(out, triple.inter, triple.inter_degenerate, dim);
      break;
    case FeatureMode::kRightInter:
      append_block(out, triple.right, triple.right_degenerate, dim);
      append_block(out, triple.inter, triple.inter_degenerate, dim);
      break;
  }
  return out;
}

void write_features_tsv(const std::vector<FeatureRecord>& records,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& r : records) {
    const auto& t = r.triple;
    out << r.id << '\t' << t.left_degenerate << '\t' << t.right_degenerate << '\t'
        << t.inter_degenerate << '\t' << vec_to_csv(t.left) << '\t' << vec_to_csv(t.right)
        << '\t' << vec_to_csv(t.inter) << '\n';
  }
  if (!out) throw DataError("I/O failure writing " + path.string());
}

std::vector<FeatureRecord> read_features_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<FeatureRecord> out;
  std::string line;
  std::size_t line_no = 0;
  auto flag = [&](const std::string& s) {
    if (s == "0") return false;
    if (s == "1") return true;
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad flag '" + s + "'");
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 7) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 7 columns");
    }
    FeatureRecord r;
    r.id = cols[0];
    r.triple.left_degenerate = flag(cols[1]);
    r.triple.right_degenerate = flag(cols[2]);
    r.triple.inter_degenerate = flag(cols[3]);
    r.triple.left = vec_from_csv(cols[4]);
    r.triple.right = vec_from_csv(cols[5]);
    r.triple.inter = vec_from_csv(cols[6]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace psd
