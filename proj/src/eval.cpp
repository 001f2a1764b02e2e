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

#include "psd/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "psd/corpus.hpp"

namespace psd {

namespace {

bool is_phrase_type(const std::string& s) {
  return s == "compositional" || s == "aspectual" || s == "idiomatic";
}

void check_aligned(const std::vector<VpcEntry>& entries,
                   const std::vector<std::vector<std::string>>& candidates) {
  if (entries.empty()) throw UsageError("no VPC entries to score");
  if (entries.size() != candidates.size()) {
    throw UsageError("entries and candidate lists differ in length");
  }
}

}  // namespace

std::vector<RelationPairSet> load_relation_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<RelationPairSet> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == ':') {
      auto name = split_ws(line.substr(1));
      out.push_back({join(name, " "), {}});
      continue;
    }
    const auto cols = split(line, '\t');
    if (cols.size() != 2 || cols[0].empty() || cols[1].empty()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected base<TAB>target");
    }
    if (out.empty()) out.push_back({"default", {}});
    out.back().pairs.emplace_back(cols[0], cols[1]);
  }
  std::erase_if(out, [](const RelationPairSet& s) { return s.pairs.empty(); });
  return out;
}

std::vector<VpcEntry> load_vpc(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<VpcEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    const auto cols = split(line, '\t');
    if (cols.size() < 4) throw DataError(where + "need verb, particle, gold and a sentence");
    VpcEntry e;
    e.verb = cols[0];
    e.particle = cols[1];
    for (const auto& g : split(cols[2], ',')) {
      if (!g.empty() && g != e.verb) e.gold.insert(g);
    }
    std::size_t first_sentence = 3;
    if (is_phrase_type(cols[3])) {
      e.phrase_type = cols[3];
      first_sentence = 4;
    }
    for (std::size_t i = first_sentence; i < cols.size(); ++i) {
      if (!cols[i].empty()) e.sentences.push_back(cols[i]);
    }
    if (e.verb.empty() || e.particle.empty() || e.verb == e.particle) {
      throw DataError(where + "verb and particle must be distinct nonempty tokens");
    }
    if (e.gold.empty()) throw DataError(where + "gold paraphrase set is empty");
    if (e.sentences.empty()) throw DataError(where + "no example sentence");
    out.push_back(std::move(e));
  }
  return out;
}

DiffVector diff_baseline_vector(const EmbeddingTable& table,
                                const std::vector<std::pair<std::string, std::string>>& pairs) {
  DiffVector out;
  out.vector.assign(table.dim(), 0.0);
  for (const auto& [base, target] : pairs) {
    auto b = get_vector(table, base);
    auto t = get_vector(table, target);
    if (!b || !t) {
      out.skipped.push_back(base + "/" + target);
      continue;
    }
    for (std::size_t d = 0; d < table.dim(); ++d) out.vector[d] += (*t)[d] - (*b)[d];
    ++out.used;
  }
  if (out.used == 0) throw DataError("diff baseline: every pair is out of vocabulary");
  for (double& x : out.vector) x /= static_cast<double>(out.used);
  return out;
}

EvalOutcome relation_eval(const EmbeddingTable& table,
                          const std::vector<std::pair<std::string, std::string>>& pairs,
                          const RelationVector& relation, std::size_t topk, bool holdout) {
  if (topk == 0) throw UsageError("relation_eval: topk must be at least 1");
  if (relation.vector.size() != table.dim()) {
    throw UsageError("relation_eval: relation vector has the wrong dimension");
  }
  std::vector<std::pair<VecView, VecView>> rows;
  std::vector<std::size_t> usable;
  EvalOutcome out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto b = get_vector(table, pairs[i].first);
    auto t = get_vector(table, pairs[i].second);
    if (!b || !t) {
      ++out.skipped;
      continue;
    }
    rows.emplace_back(*b, *t);
    usable.push_back(i);
  }
  if (usable.empty()) throw DataError("relation_eval: no evaluable pairs");
  const bool leave_one_out = holdout && relation.is_diff_baseline;
  if (leave_one_out && usable.size() < 2) {
    throw DataError("relation_eval: holdout needs at least two evaluable pairs");
  }

  Vec diff_sum(table.dim(), 0.0);
  if (leave_one_out) {
    for (const auto& [b, t] : rows)
      for (std::size_t d = 0; d < table.dim(); ++d) diff_sum[d] += t[d] - b[d];
  }

  std::set<std::string> exclude;
  if (relation.source_token) exclude.insert(*relation.source_token);
  Vec query(table.dim());
  for (std::size_t r = 0; r < usable.size(); ++r) {
    const auto& [base, target] = pairs[usable[r]];
    const auto& [b, t] = rows[r];
    for (std::size_t d = 0; d < table.dim(); ++d) {
      const double rel = leave_one_out
                             ? (diff_sum[d] - (t[d] - b[d])) / static_cast<double>(usable.size() - 1)
                             : relation.vector[d];
      query[d] = b[d] + rel;
    }
    ++out.evaluated;
    if (norm(query) == 0.0) continue;
    std::set<std::string> pair_exclude = exclude;
    pair_exclude.insert(base);
    const auto nn = nearest(table, query, topk, pair_exclude);
    if (std::any_of(nn.begin(), nn.end(), [&](const Neighbor& n) { return n.token == target; })) {
      ++out.hits;
    }
  }
  out.accuracy = static_cast<double>(out.hits) / static_cast<double>(out.evaluated);
  return out;
}

std::vector<std::string> vpc_paraphrase(const EmbeddingTable& table, const VpcEntry& entry,
                                        const std::optional<std::string>& prep_token,
                                        std::size_t topk, const std::set<std::string>* allowed) {
  auto verb = get_vector(table, entry.verb);
  if (!verb) throw DataError("vpc_paraphrase: verb '" + entry.verb + "' is out of vocabulary");
  Vec query(verb->begin(), verb->end());
  std::set<std::string> exclude{entry.verb};
  if (prep_token) {
    auto prep = get_vector(table, *prep_token);
    if (!prep) throw DataError("vpc_paraphrase: particle '" + *prep_token + "' is out of vocabulary");
    for (std::size_t d = 0; d < query.size(); ++d) query[d] += (*prep)[d];
    exclude.insert(*prep_token);
  }
  const std::string verb_tag = entry.verb + std::string(kSenseDelimiter);
  auto skip = [&](const std::string& tok) {
    if (tok.compare(0, verb_tag.size(), verb_tag) == 0) return true;
    return allowed != nullptr && !allowed->count(tok);
  };
  std::vector<std::string> out;
  for (auto& n : nearest(table, query, topk, exclude, skip)) out.push_back(std::move(n.token));
  return out;
}

std::optional<std::string> select_sense_token(const VpcEntry& entry,
                                              const std::map<std::string, KnnModel>& models,
                                              const EmbeddingTable& table) {
  auto m = models.find(entry.particle);
  if (m == models.end()) return std::nullopt;
  std::map<std::string, std::size_t> votes;
  for (const auto& text : entry.sentences) {
    for (const auto& s : tokenize(text).sentences) {
      auto it = std::find(s.begin(), s.end(), entry.particle);
      if (it == s.end()) continue;
      PrepInstance inst{"vpc", s, static_cast<std::size_t>(it - s.begin()), entry.particle, std::nullopt};
      const auto& model = m->second;
      ++votes[knn_predict(model, knn_features(inst, model.k_left, model.k_right,
                                              model.feature_mode, table))];
      break;
    }
  }
  if (votes.empty()) return std::nullopt;
  std::string best;
  std::size_t best_n = 0;
  for (const auto& [sense, n] : votes) {
    if (n > best_n) {
      best = sense;
      best_n = n;
    }
  }
  return entry.particle + std::string(kSenseDelimiter) + best;
}

double vpc_accuracy(const std::vector<VpcEntry>& entries,
                    const std::vector<std::vector<std::string>>& candidates, std::size_t topk) {
  check_aligned(entries, candidates);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::size_t n = std::min(topk, candidates[i].size());
    for (std::size_t j = 0; j < n; ++j) {
      if (entries[i].gold.count(candidates[i][j])) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(entries.size());
}

double prec_at_k(const std::vector<VpcEntry>& entries,
                 const std::vector<std::vector<std::string>>& candidates, std::size_t k) {
  if (k == 0) throw UsageError("prec_at_k: k must be at least 1");
  check_aligned(entries, candidates);
  double sum = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::size_t n = std::min(k, candidates[i].size());
    std::size_t good = 0;
    for (std::size_t j = 0; j < n; ++j) good += entries[i].gold.count(candidates[i][j]);
    sum += static_cast<double>(good) / static_cast<double>(k);
  }
  return sum / static_cast<double>(entries.size());
}

void emit_report(const std::vector<ReportRow>& rows, const std::filesystem::path& path) {
  std::ofstream tsv(path);
  if (!tsv) throw DataError("cannot write report " + path.string());
  tsv << "evaluation\tcondition\tmetric\tvalue\tn\tskipped\n";
  for (const auto& r : rows) {
    tsv << r.evaluation << '\t' << r.condition << '\t' << r.metric << '\t'
        << (r.value ? format_double(*r.value) : "NA") << '\t' << r.n << '\t' << r.skipped << '\n';
  }
  if (!tsv) throw DataError("I/O failure writing " + path.string());

  std::filesystem::path text_path = path;
  text_path += ".txt";
  std::ofstream txt(text_path);
  if (!txt) throw DataError("cannot write report " + text_path.string());
  std::string current;
  for (const auto& r : rows) {
    if (r.evaluation != current) {
      if (!current.empty()) txt << '\n';
      txt << "== " << r.evaluation << " ==\n";
      current = r.evaluation;
    }
    txt << "  " << r.condition << "  " << r.metric << " = "
        << (r.value ? format_double(*r.value) : "NA") << "  (n=" << r.n << ", skipped=" << r.skipped
        << ")";
    if (!r.note.empty()) txt << "  " << r.note;
    txt << '\n';
  }
  if (!txt) throw DataError("I/O failure writing " + text_path.string());
}

std::vector<ReportRow> read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<ReportRow> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split(line, '\t');
    if (c.size() != 6) throw DataError(path.string() + ": malformed report row");
    ReportRow r{c[0], c[1], c[2], std::nullopt, static_cast<std::size_t>(parse_int(c[4])),
                static_cast<std::size_t>(parse_int(c[5])), {}};
    if (c[3] != "NA") r.value = parse_double(c[3]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace psd
