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

#include "psd/embed_train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

namespace psd {

namespace {

constexpr std::uint64_t kNegativeStream = 0x9e3779b97f4a7c15ULL;

double log_sigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

bool subsampling_enabled(const TrainConfig& c) {
  return c.subsample_threshold > 0 && std::isfinite(c.subsample_threshold);
}

// Plain access for the deterministic path; relaxed atomics for hogwild
// workers so concurrent updates stay well-defined.
struct PlainAccess {
  static double load(const double& x) { return x; }
  static void store(double& x, double v) { x = v; }
};

struct RelaxedAccess {
  static double load(const double& x) {
    return std::atomic_ref<double>(const_cast<double&>(x)).load(std::memory_order_relaxed);
  }
  static void store(double& x, double v) {
    std::atomic_ref<double>(x).store(v, std::memory_order_relaxed);
  }
};

template <typename Access>
double step_impl(CbowParams& p, std::span<const std::size_t> context, std::size_t center,
                 std::span<const std::size_t> negatives, double lr, std::vector<double>& h,
                 std::vector<double>& grad_h) {
  const std::size_t dim = p.dim;
  h.assign(dim, 0.0);
  grad_h.assign(dim, 0.0);
  if (context.empty()) return 0.0;
  for (std::size_t c : context) {
    const double* row = p.input.data() + c * dim;
    for (std::size_t d = 0; d < dim; ++d) h[d] += Access::load(row[d]);
  }
  const double inv = 1.0 / static_cast<double>(context.size());
  for (double& x : h) x *= inv;

  double loss = 0.0;
  auto target = [&](std::size_t t, double label) {
    double* row = p.output.data() + t * dim;
    double f = 0.0;
    for (std::size_t d = 0; d < dim; ++d) f += h[d] * Access::load(row[d]);
    loss -= label > 0 ? log_sigmoid(f) : log_sigmoid(-f);
    const double g = label - sigmoid(f);
    for (std::size_t d = 0; d < dim; ++d) {
      const double u = Access::load(row[d]);
      grad_h[d] += g * u;
      Access::store(row[d], u + lr * g * h[d]);
    }
  };
  target(center, 1.0);
  for (std::size_t n : negatives) target(n, 0.0);

  for (std::size_t c : context) {
    double* row = p.input.data() + c * dim;
    for (std::size_t d = 0; d < dim; ++d) {
      Access::store(row[d], Access::load(row[d]) + lr * inv * grad_h[d]);
    }
  }
  return loss;
}

void draw_negatives(const Vocab& vocab, std::size_t center, std::size_t n, std::mt19937_64& rng,
                    std::vector<std::size_t>& out) {
  out.clear();
  if (vocab.size() < 2) return;
  while (out.size() < n) {
    const std::size_t t = vocab.sample_negative(rng);
    if (t != center) out.push_back(t);
  }
}

struct SentenceEncoder {
  const Vocab& vocab;
  const TrainConfig& config;
  std::vector<bool> tagged;  // per vocab index

  SentenceEncoder(const Vocab& v, const TrainConfig& c) : vocab(v), config(c), tagged(v.size()) {
    for (std::size_t i = 0; i < v.size(); ++i) tagged[i] = is_sense_tagged(v.token(i));
  }

  void encode(const Sentence& s, std::mt19937_64& rng, std::vector<CbowExample>& out) const {
    std::vector<std::size_t> ids;
    ids.reserve(s.size());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const bool subsample = subsampling_enabled(config);
    const double scaled = config.subsample_threshold * static_cast<double>(vocab.total());
    for (const auto& tok : s) {
      auto idx = vocab.index_of(tok);
      if (!idx) continue;
      if (subsample) {
        const double cn = static_cast<double>(vocab.count(*idx));
        const double keep = (std::sqrt(cn / scaled) + 1.0) * scaled / cn;
        if (keep < unit(rng)) continue;
      }
      ids.push_back(*idx);
    }
    out.clear();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      std::size_t w = tagged[ids[i]] ? config.prep_window : config.window;
      if (config.dynamic_window && w > 1) {
        w = 1 + static_cast<std::size_t>(rng() % w);
      }
      CbowExample ex{ids[i], {}};
      const std::size_t lo = i >= w ? i - w : 0;
      const std::size_t hi = std::min(ids.size() - 1, i + w);
      for (std::size_t j = lo; j <= hi; ++j) {
        if (j != i) ex.context.push_back(ids[j]);
      }
      if (!ex.context.empty()) out.push_back(std::move(ex));
    }
  }
};

CbowParams init_params(const Vocab& vocab, const TrainConfig& config) {
  CbowParams p;
  p.dim = config.dim;
  p.input.resize(vocab.size() * config.dim);
  p.output.assign(vocab.size() * config.dim, 0.0);
  std::mt19937_64 rng(config.seed);
  const double half = 0.5 / static_cast<double>(config.dim);
  std::uniform_real_distribution<double> init(-half, half);
  for (double& x : p.input) x = init(rng);
  return p;
}

}  // namespace

void TrainConfig::validate() const {
  if (dim < 1 || window < 1 || prep_window < 1 || negatives < 1 || epochs < 1 || min_count < 1) {
    throw UsageError("training counts must all be at least 1");
  }
  if (prep_window > window) throw UsageError("prep_window must not exceed window");
  if (!(initial_lr > 0)) throw UsageError("initial learning rate must be positive");
  if (jobs < 1) throw UsageError("jobs must be at least 1");
}

Vocab::Vocab(std::vector<std::string> tokens, std::vector<std::uint64_t> counts)
    : tokens_(std::move(tokens)), counts_(std::move(counts)) {
  double acc = 0.0;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    index_.emplace(tokens_[i], i);
    total_ += counts_[i];
    acc += std::pow(static_cast<double>(counts_[i]), 0.75);
    cumulative_.push_back(acc);
  }
}

std::optional<std::size_t> Vocab::index_of(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocab::sample_negative(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unit(0.0, cumulative_.back());
  const double r = unit(rng);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), size() - 1);
}

Vocab build_vocab(const Corpus& corpus, std::size_t min_count) {
  if (corpus.sentences.empty()) throw DataError("cannot build a vocabulary from an empty corpus");
  std::map<std::string, std::uint64_t> counts;
  for (const auto& s : corpus.sentences)
    for (const auto& t : s) ++counts[t];
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [tok, c] : counts) {
    if (c >= min_count) kept.emplace_back(tok, c);
  }
  if (kept.empty()) {
    throw DataError("vocabulary is empty after applying min_count " + std::to_string(min_count));
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens;
  std::vector<std::uint64_t> freq;
  for (auto& [t, c] : kept) {
    tokens.push_back(t);
    freq.push_back(c);
  }
  return Vocab(std::move(tokens), std::move(freq));
}

std::vector<CbowExample> enumerate_examples(const Corpus& corpus, const Vocab& vocab,
                                            const TrainConfig& config) {
  const SentenceEncoder enc(vocab, config);
  std::mt19937_64 rng(config.seed);
  std::vector<CbowExample> all, chunk;
  for (const auto& s : corpus.sentences) {
    enc.encode(s, rng, chunk);
    std::move(chunk.begin(), chunk.end(), std::back_inserter(all));
  }
  return all;
}

double cbow_loss(const CbowParams& params, std::span<const std::size_t> context,
                 std::size_t center, std::span<const std::size_t> negatives) {
  if (context.empty()) return 0.0;
  const std::size_t dim = params.dim;
  std::vector<double> h(dim, 0.0);
  for (std::size_t c : context)
    for (std::size_t d = 0; d < dim; ++d) h[d] += params.input[c * dim + d];
  for (double& x : h) x /= static_cast<double>(context.size());
  auto score = [&](std::size_t t) {
    double f = 0.0;
    for (std::size_t d = 0; d < dim; ++d) f += h[d] * params.output[t * dim + d];
    return f;
  };
  double loss = -log_sigmoid(score(center));
  for (std::size_t n : negatives) loss -= log_sigmoid(-score(n));
  return loss;
}

double cbow_step(CbowParams& params, std::span<const std::size_t> context, std::size_t center,
                 std::span<const std::size_t> negatives, double lr) {
  std::vector<double> h, grad_h;
  return step_impl<PlainAccess>(params, context, center, negatives, lr, h, grad_h);
}

EmbeddingTable train_cbow(const Corpus& corpus, const TrainConfig& config, TrainStats* stats) {
  config.validate();
  const Vocab vocab = build_vocab(corpus, config.min_count);
  const SentenceEncoder enc(vocab, config);
  CbowParams params = init_params(vocab, config);

  std::uint64_t train_words = 0;
  for (const auto& s : corpus.sentences)
    for (const auto& t : s) train_words += vocab.index_of(t).has_value();
  const double total_work = static_cast<double>(config.epochs) * static_cast<double>(std::max<std::uint64_t>(train_words, 1));
  auto rate = [&](double done) {
    return config.initial_lr * std::max(1e-4, 1.0 - done / (total_work + 1.0));
  };

  if (!config.parallel || config.jobs <= 1) {
    std::mt19937_64 window_rng(config.seed);
    std::mt19937_64 neg_rng(config.seed ^ kNegativeStream);
    std::vector<CbowExample> examples;
    std::vector<std::size_t> negs;
    std::vector<double> h, grad_h;
    double done = 0.0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
      double loss_sum = 0.0;
      std::size_t n_examples = 0;
      for (const auto& s : corpus.sentences) {
        enc.encode(s, window_rng, examples);
        for (const auto& ex : examples) {
          draw_negatives(vocab, ex.center, config.negatives, neg_rng, negs);
          loss_sum += step_impl<PlainAccess>(params, ex.context, ex.center, negs, rate(done), h, grad_h);
          ++n_examples;
        }
        for (const auto& t : s) done += vocab.index_of(t).has_value();
      }
      if (stats) {
        stats->epoch_loss.push_back(n_examples ? loss_sum / static_cast<double>(n_examples) : 0.0);
        stats->examples_per_epoch = n_examples;
      }
    }
  } else {
    const auto workers = static_cast<std::size_t>(config.jobs);
    std::atomic<std::uint64_t> done{0};
    std::vector<double> loss_sum(workers * config.epochs, 0.0);
    std::vector<std::size_t> count(workers * config.epochs, 0);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        std::mt19937_64 window_rng(config.seed + 7919 * (w + 1));
        std::mt19937_64 neg_rng((config.seed + 7919 * (w + 1)) ^ kNegativeStream);
        std::vector<CbowExample> examples;
        std::vector<std::size_t> negs;
        std::vector<double> h, grad_h;
        for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
          for (std::size_t si = w; si < corpus.sentences.size(); si += workers) {
            const auto& s = corpus.sentences[si];
            enc.encode(s, window_rng, examples);
            const double lr = rate(static_cast<double>(done.load(std::memory_order_relaxed)));
            for (const auto& ex : examples) {
              draw_negatives(vocab, ex.center, config.negatives, neg_rng, negs);
              loss_sum[epoch * workers + w] +=
                  step_impl<RelaxedAccess>(params, ex.context, ex.center, negs, lr, h, grad_h);
              ++count[epoch * workers + w];
            }
            done.fetch_add(s.size(), std::memory_order_relaxed);
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (stats) {
      for (std::size_t e = 0; e < config.epochs; ++e) {
        double l = 0.0;
        std::size_t n = 0;
        for (std::size_t w = 0; w < workers; ++w) {
          l += loss_sum[e * workers + w];
          n += count[e * workers + w];
        }
        stats->epoch_loss.push_back(n ? l / static_cast<double>(n) : 0.0);
        stats->examples_per_epoch = n;
      }
    }
  }

  EmbeddingTable table(config.dim);
  for (std::size_t i = 0; i < vocab.size(); ++i) table.add(vocab.token(i), params.in_row(i));
  return table;
}

double gradient_check(const TrainConfig& config) {
  constexpr std::size_t kVocab = 10;
  constexpr double kStep = 1e-5;
  if (config.dim > 8) throw UsageError("gradient_check expects dim <= 8");
  if (config.negatives + 1 > kVocab) throw UsageError("gradient_check expects negatives <= 9");
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> init(-0.5, 0.5);

  CbowParams params;
  params.dim = std::max<std::size_t>(config.dim, 1);
  params.input.resize(kVocab * params.dim);
  params.output.resize(kVocab * params.dim);
  for (double& x : params.input) x = init(rng);
  for (double& x : params.output) x = init(rng);

  // Distinct targets keep the in-place output updates equal to one
  // gradient step taken at the starting point.
  std::vector<std::size_t> perm(kVocab);
  for (std::size_t i = 0; i < kVocab; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  const std::size_t center = perm[0];
  const std::vector<std::size_t> negatives(perm.begin() + 1,
                                           perm.begin() + 1 + static_cast<std::ptrdiff_t>(config.negatives));
  std::vector<std::size_t> context;
  std::uniform_int_distribution<std::size_t> pick(0, kVocab - 1);
  const std::size_t n_ctx = 2 * std::min<std::size_t>(config.window, 3);
  for (std::size_t i = 0; i < n_ctx; ++i) context.push_back(pick(rng));

  CbowParams stepped = params;
  cbow_step(stepped, context, center, negatives, 1.0);

  double worst = 0.0;
  auto check = [&](std::vector<double> CbowParams::*field) {
    auto& values = params.*field;
    const auto& after = stepped.*field;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double analytic = values[i] - after[i];
      const double saved = values[i];
      values[i] = saved + kStep;
      const double up = cbow_loss(params, context, center, negatives);
      values[i] = saved - kStep;
      const double down = cbow_loss(params, context, center, negatives);
      values[i] = saved;
      const double numeric = (up - down) / (2 * kStep);
      const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      worst = std::max(worst, std::abs(analytic - numeric) / scale);
    }
  };
  check(&CbowParams::input);
  check(&CbowParams::output);
  return worst;
}

}  // namespace psd
