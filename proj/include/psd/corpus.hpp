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

#ifndef PSD_CORPUS_HPP_
#define PSD_CORPUS_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "psd/classify.hpp"
#include "psd/embeddings.hpp"
#include "psd/features.hpp"

namespace psd {

using Sentence = std::vector<std::string>;

struct Corpus {
  std::vector<Sentence> sentences;
  std::string source;
};

// Separator between a preposition and its sense id in tagged tokens.
inline constexpr std::string_view kSenseDelimiter = "::";

// Sentences end at '.', '?' or '!' followed by whitespace (or end of text).
// Tokens are lowercased, split on whitespace and trimmed of surrounding ASCII
// punctuation; internal hyphens and apostrophes survive, runs of ':' collapse
// to one so the sense delimiter never appears. Throws DataError on invalid
// UTF-8.
Corpus tokenize(std::string_view text);

// Plain-text corpus: one sentence per line, tokens separated by whitespace.
// Lines are taken verbatim (no tokenization); blank lines are skipped.
Corpus read_corpus(const std::filesystem::path& path);
void write_corpus(const std::vector<Sentence>& sentences, std::ostream& out);

// One instance per occurrence, ids "<sentence>:<token>".
std::vector<PrepInstance> extract_instances(const Corpus& corpus,
                                            const std::set<std::string>& prepositions);

// Columns: id, preposition, prep_index, sense ("-" when absent), tokens.
void write_instances_tsv(const std::vector<PrepInstance>& instances,
                         const std::filesystem::path& path);
std::vector<PrepInstance> read_instances_tsv(const std::filesystem::path& path);

struct ConvertReport {
  std::vector<PrepInstance> instances;
  std::size_t skipped = 0;  // head not recoverable after tokenization
  std::vector<std::string> warnings;
};

// SemEval-2007 preposition lexical-sample files. Each <instance id=...>
// carries a <context> whose target is wrapped in <head>..</head>. Key files
// hold "<item> <instance_id> <sense> ..." lines (or "<instance_id> <sense>");
// <answer senseid=...> elements inside the XML are used when no key entry
// exists.
ConvertReport convert_semeval(const std::vector<std::filesystem::path>& xml_paths,
                              const std::vector<std::filesystem::path>& key_paths);

// Rewrites each modeled preposition as "<prep>::<sense>". Context for every
// prediction comes from the untagged sentence.
std::vector<Sentence> tag_sentences(const std::vector<Sentence>& sentences,
                                    const std::map<std::string, KnnModel>& models,
                                    const EmbeddingTable& table, int jobs = 1);
Corpus tag_corpus(const Corpus& corpus, const std::map<std::string, KnnModel>& models,
                  const EmbeddingTable& table, int jobs = 1);

// Streams plain text through tokenize and tagging in fixed-size batches and
// writes the tagged corpus format. Returns the number of tagged tokens.
std::size_t tag_stream(std::istream& in, std::ostream& out,
                       const std::map<std::string, KnnModel>& models,
                       const EmbeddingTable& table, int jobs = 1,
                       std::size_t batch_lines = 4096);

bool is_sense_tagged(std::string_view token);

}  // namespace psd

#endif  // PSD_CORPUS_HPP_
