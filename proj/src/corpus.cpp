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

#include "psd/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace psd {

namespace {

bool valid_utf8(std::string_view s, std::size_t& bad_offset) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    if (c < 0x80) len = 1;
    else if ((c & 0xE0) == 0xC0 && c >= 0xC2) len = 2;
    else if ((c & 0xF0) == 0xE0) len = 3;
    else if ((c & 0xF8) == 0xF0 && c <= 0xF4) len = 4;
    else {
      bad_offset = i;
      return false;
    }
    if (i + len > s.size()) {
      bad_offset = i;
      return false;
    }
    for (std::size_t j = 1; j < len; ++j) {
      if ((static_cast<unsigned char>(s[i + j]) & 0xC0) != 0x80) {
        bad_offset = i;
        return false;
      }
    }
    i += len;
  }
  return true;
}

bool is_ascii_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

std::string normalize_token(std::string_view raw) {
  std::size_t b = 0, e = raw.size();
  while (b < e && is_ascii_punct(raw[b])) ++b;
  while (e > b && is_ascii_punct(raw[e - 1])) --e;
  std::string out;
  out.reserve(e - b);
  for (std::size_t i = b; i < e; ++i) {
    const char c = raw[i];
    if (c == ':' && !out.empty() && out.back() == ':') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

void flush_sentence(std::string_view text, Corpus& corpus) {
  Sentence s;
  for (const auto& raw : split_ws(text)) {
    auto tok = normalize_token(raw);
    if (!tok.empty()) s.push_back(std::move(tok));
  }
  if (!s.empty()) corpus.sentences.push_back(std::move(s));
}

std::string decode_entities(std::string_view s) {
  static const std::pair<std::string_view, char> kEntities[] = {
      {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''}};
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    bool matched = false;
    if (s[i] == '&') {
      for (const auto& [name, ch] : kEntities) {
        if (s.substr(i, name.size()) == name) {
          out.push_back(ch);
          i += name.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out.push_back(s[i++]);
  }
  return out;
}

// Drops markup tags, replacing each with a space.
std::string strip_tags(std::string_view s) {
  std::string out;
  bool in_tag = false;
  for (char c : s) {
    if (c == '<') in_tag = true;
    else if (c == '>' && in_tag) {
      in_tag = false;
      out.push_back(' ');
    } else if (!in_tag) out.push_back(c);
  }
  return out;
}

std::string attribute(std::string_view tag, std::string_view name) {
  const std::string key = std::string(name) + "=";
  std::size_t pos = 0;
  while ((pos = tag.find(key, pos)) != std::string_view::npos) {
    if (pos == 0 || std::isspace(static_cast<unsigned char>(tag[pos - 1]))) break;
    pos += key.size();
  }
  if (pos == std::string_view::npos) return {};
  pos += key.size();
  if (pos >= tag.size()) return {};
  const char quote = tag[pos];
  if (quote != '"' && quote != '\'') return {};
  const std::size_t end = tag.find(quote, pos + 1);
  if (end == std::string_view::npos) return {};
  return decode_entities(tag.substr(pos + 1, end - pos - 1));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DataError markup_error(const std::filesystem::path& path, std::size_t offset, const std::string& what) {
  return DataError(path.string() + ": byte " + std::to_string(offset) + ": " + what);
}

constexpr std::string_view kHeadMarker = "psdheadmarkerq";

}  // namespace

Corpus tokenize(std::string_view text) {
  std::size_t bad = 0;
  if (!valid_utf8(text, bad)) {
    throw DataError("invalid UTF-8 at byte " + std::to_string(bad));
  }
  Corpus corpus;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '?' && c != '!') continue;
    if (i + 1 < text.size() && !std::isspace(static_cast<unsigned char>(text[i + 1]))) continue;
    flush_sentence(text.substr(start, i + 1 - start), corpus);
    start = i + 1;
  }
  if (start < text.size()) flush_sentence(text.substr(start), corpus);
  return corpus;
}

Corpus read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus " + path.string());
  Corpus corpus;
  corpus.source = path.string();
  std::string line;
  while (std::getline(in, line)) {
    auto toks = split_ws(line);
    if (!toks.empty()) corpus.sentences.push_back(std::move(toks));
  }
  return corpus;
}

void write_corpus(const std::vector<Sentence>& sentences, std::ostream& out) {
  for (const auto& s : sentences) out << join(s, " ") << '\n';
}

std::vector<PrepInstance> extract_instances(const Corpus& corpus,
                                            const std::set<std::string>& prepositions) {
  std::vector<PrepInstance> out;
  for (std::size_t si = 0; si < corpus.sentences.size(); ++si) {
    const auto& s = corpus.sentences[si];
    for (std::size_t ti = 0; ti < s.size(); ++ti) {
      if (!prepositions.count(s[ti])) continue;
      PrepInstance inst;
      inst.id = std::to_string(si) + ":" + std::to_string(ti);
      inst.tokens = s;
      inst.prep_index = ti;
      inst.preposition = s[ti];
      out.push_back(std::move(inst));
    }
  }
  return out;
}

void write_instances_tsv(const std::vector<PrepInstance>& instances,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& inst : instances) {
    out << inst.id << '\t' << inst.preposition << '\t' << inst.prep_index << '\t'
        << inst.sense.value_or("-") << '\t' << join(inst.tokens, " ") << '\n';
  }
  if (!out) throw DataError("I/O failure writing " + path.string());
}

std::vector<PrepInstance> read_instances_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<PrepInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    const auto cols = split(line, '\t');
    if (cols.size() != 5) {
      throw DataError(where + "expected 5 columns, found " + std::to_string(cols.size()));
    }
    PrepInstance inst;
    inst.id = cols[0];
    inst.preposition = cols[1];
    long long idx = 0;
    try {
      idx = parse_int(cols[2]);
    } catch (const DataError&) {
      throw DataError(where + "prep_index '" + cols[2] + "' is not an integer");
    }
    if (cols[3] != "-") inst.sense = cols[3];
    inst.tokens = split_ws(cols[4]);
    if (idx < 0 || static_cast<std::size_t>(idx) >= inst.tokens.size()) {
      throw DataError(where + "prep_index " + cols[2] + " out of range for " +
                      std::to_string(inst.tokens.size()) + " tokens");
    }
    inst.prep_index = static_cast<std::size_t>(idx);
    try {
      inst.validate();
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    }
    out.push_back(std::move(inst));
  }
  return out;
}

ConvertReport convert_semeval(const std::vector<std::filesystem::path>& xml_paths,
                              const std::vector<std::filesystem::path>& key_paths) {
  ConvertReport report;
  std::map<std::string, std::string> keys;
  for (const auto& kp : key_paths) {
    std::ifstream in(kp);
    if (!in) throw DataError("cannot open key file " + kp.string());
    std::string line;
    while (std::getline(in, line)) {
      const auto f = split_ws(line);
      if (f.size() >= 3) keys.emplace(f[1], f[2]);
      else if (f.size() == 2) keys.emplace(f[0], f[1]);
    }
  }

  std::set<std::string> seen_ids;
  for (const auto& xp : xml_paths) {
    const std::string doc = read_file(xp);
    std::size_t pos = 0;
    while ((pos = doc.find("<instance", pos)) != std::string::npos) {
      const std::size_t tag_end = doc.find('>', pos);
      if (tag_end == std::string::npos) throw markup_error(xp, pos, "unterminated <instance> tag");
      const std::size_t close = doc.find("</instance>", tag_end);
      if (close == std::string::npos) throw markup_error(xp, pos, "missing </instance>");
      const std::string id = attribute(std::string_view(doc).substr(pos, tag_end - pos), "id");
      if (id.empty()) throw markup_error(xp, pos, "instance without id attribute");
      const std::string_view body = std::string_view(doc).substr(tag_end + 1, close - tag_end - 1);
      const std::size_t body_offset = tag_end + 1;
      seen_ids.insert(id);

      std::string answer;
      if (auto a = body.find("<answer"); a != std::string_view::npos) {
        const std::size_t a_end = body.find('>', a);
        if (a_end == std::string_view::npos) {
          throw markup_error(xp, body_offset + a, "unterminated <answer> tag");
        }
        answer = attribute(body.substr(a, a_end - a), "senseid");
      }

      const std::size_t ctx = body.find("<context>");
      const std::size_t ctx_end = body.find("</context>");
      if (ctx == std::string_view::npos || ctx_end == std::string_view::npos || ctx_end < ctx) {
        throw markup_error(xp, body_offset, "instance " + id + " lacks a <context> element");
      }
      const std::string_view context = body.substr(ctx + 9, ctx_end - ctx - 9);
      const std::size_t h = context.find("<head>");
      const std::size_t h_end = context.find("</head>");
      if (h == std::string_view::npos || h_end == std::string_view::npos || h_end < h) {
        throw markup_error(xp, body_offset + ctx, "instance " + id + " lacks a <head> element");
      }

      const std::string head_text = decode_entities(strip_tags(context.substr(h + 6, h_end - h - 6)));
      const Corpus head_tokens = tokenize(head_text);
      std::string marked = decode_entities(strip_tags(context.substr(0, h)));
      marked += ' ';
      marked += kHeadMarker;
      marked += ' ';
      marked += decode_entities(strip_tags(context.substr(h_end + 7)));
      const Corpus tokenized = tokenize(marked);

      bool placed = false;
      if (head_tokens.sentences.size() == 1 && head_tokens.sentences[0].size() == 1) {
        const std::string& head = head_tokens.sentences[0][0];
        for (const auto& sentence : tokenized.sentences) {
          auto it = std::find(sentence.begin(), sentence.end(), kHeadMarker);
          if (it == sentence.end()) continue;
          PrepInstance inst;
          inst.id = id;
          inst.tokens = sentence;
          inst.prep_index = static_cast<std::size_t>(it - sentence.begin());
          inst.tokens[inst.prep_index] = head;
          inst.preposition = head;
          if (auto k = keys.find(id); k != keys.end()) inst.sense = k->second;
          else if (!answer.empty()) inst.sense = answer;
          report.instances.push_back(std::move(inst));
          placed = true;
          break;
        }
      }
      if (!placed) ++report.skipped;
      pos = close + 11;
    }
  }
  for (const auto& [id, _] : keys) {
    if (!seen_ids.count(id)) report.warnings.push_back("key entry " + id + " has no instance");
  }
  return report;
}

bool is_sense_tagged(std::string_view token) {
  return token.find(kSenseDelimiter) != std::string_view::npos;
}

std::vector<Sentence> tag_sentences(const std::vector<Sentence>& sentences,
                                    const std::map<std::string, KnnModel>& models,
                                    const EmbeddingTable& table, int jobs) {
  for (const auto& [prep, model] : models) {
    if (prep != model.preposition) {
      throw UsageError("model keyed '" + prep + "' is for '" + model.preposition + "'");
    }
  }
  std::vector<Sentence> out(sentences.size());
  parallel_for(sentences.size(), jobs, [&](std::size_t si) {
    const Sentence& s = sentences[si];
    Sentence tagged = s;
    for (std::size_t ti = 0; ti < s.size(); ++ti) {
      auto m = models.find(s[ti]);
      if (m == models.end()) continue;
      PrepInstance inst{std::to_string(si) + ":" + std::to_string(ti), s, ti, s[ti], std::nullopt};
      const auto& model = m->second;
      const auto triple = knn_features(inst, model.k_left, model.k_right, model.feature_mode, table);
      tagged[ti] = s[ti] + std::string(kSenseDelimiter) + knn_predict(model, triple);
    }
    out[si] = std::move(tagged);
  });
  return out;
}

Corpus tag_corpus(const Corpus& corpus, const std::map<std::string, KnnModel>& models,
                  const EmbeddingTable& table, int jobs) {
  return {tag_sentences(corpus.sentences, models, table, jobs), corpus.source};
}

std::size_t tag_stream(std::istream& in, std::ostream& out,
                       const std::map<std::string, KnnModel>& models,
                       const EmbeddingTable& table, int jobs, std::size_t batch_lines) {
  std::size_t tagged = 0;
  std::string line;
  bool more = true;
  while (more) {
    std::vector<Sentence> batch;
    for (std::size_t n = 0; n < batch_lines; ++n) {
      if (!std::getline(in, line)) {
        more = false;
        break;
      }
      for (auto& s : tokenize(line).sentences) batch.push_back(std::move(s));
    }
    const auto result = tag_sentences(batch, models, table, jobs);
    for (const auto& s : result)
      for (const auto& t : s) tagged += is_sense_tagged(t);
    write_corpus(result, out);
  }
  return tagged;
}

}  // namespace psd
