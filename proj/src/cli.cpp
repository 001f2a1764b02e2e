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

#include "psd/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "psd/classify.hpp"
#include "psd/cluster.hpp"
#include "psd/corpus.hpp"
#include "psd/embed_train.hpp"
#include "psd/embeddings.hpp"
#include "psd/eval.hpp"
#include "psd/features.hpp"

namespace psd {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string embeddings;
  std::string instances;
  std::string dev;
  std::string model;
  std::string out;
  std::string corpus;
  std::string pairs;
  std::string dataset;
  std::string candidates;
  std::string relation;
  std::string report;
  std::vector<std::string> xml;
  std::vector<std::string> keys;
  std::uint64_t seed = 42;
  std::size_t k_left = 2;
  std::size_t k_right = 2;
  std::string features = "all";
  std::size_t k = 0;
  std::size_t topk = 3;
  int jobs = 1;
  std::string prep;
  std::string senses;
  double ratio = 0.8;
  std::size_t max_iter = 300;
  bool holdout = false;
  TrainConfig train;
  std::string log_level = "info";
};

EmbeddingTable load_embeddings(const Options& o, std::ostream& err) {
  EmbeddingTable t = load_table(o.embeddings);
  if (o.log_level != "quiet") {
    for (const auto& w : t.warnings()) err << "warning: " << w << '\n';
  }
  return t;
}

std::map<std::string, std::vector<PrepInstance>> by_preposition(
    const std::vector<PrepInstance>& instances, const std::string& only) {
  std::map<std::string, std::vector<PrepInstance>> out;
  for (const auto& inst : instances) {
    if (!only.empty() && inst.preposition != only) continue;
    out[inst.preposition].push_back(inst);
  }
  return out;
}

// A single file, or every regular *.tsv file of a directory in name order.
std::vector<fs::path> model_files(const std::string& location) {
  if (!fs::is_directory(location)) {
    if (!fs::exists(location)) throw DataError("model path " + location + " does not exist");
    return {location};
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(location)) {
    if (e.is_regular_file() && e.path().extension() == ".tsv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no *.tsv models in " + location);
  return files;
}

std::map<std::string, KnnModel> load_knn_models(const std::string& location) {
  std::map<std::string, KnnModel> models;
  for (const auto& f : model_files(location)) {
    KnnModel m = load_knn(f);
    models[m.preposition] = std::move(m);
  }
  return models;
}

// With one preposition, `out` names the model file; with several it names a
// directory receiving <prep>.tsv per preposition.
fs::path model_target(const std::string& out, const std::string& prep, bool many) {
  if (!many) return out;
  fs::create_directories(out);
  return fs::path(out) / (prep + ".tsv");
}

std::vector<Vec> cluster_points(const std::vector<PrepInstance>& instances, FeatureMode mode,
                                std::size_t k_left, std::size_t k_right,
                                const EmbeddingTable& table, int jobs) {
  std::vector<Vec> points(instances.size());
  parallel_for(instances.size(), jobs, [&](std::size_t i) {
    const auto t = feature_triple(instances[i], k_left, k_right, table);
    points[i] = concat_features(t, mode, table, instances[i], k_left, k_right);
  });
  return points;
}

std::vector<std::string> gold_senses(const std::vector<PrepInstance>& instances) {
  std::vector<std::string> out;
  for (const auto& inst : instances) {
    if (!inst.sense) throw DataError("instance " + inst.id + " has no sense label");
    out.push_back(*inst.sense);
  }
  return out;
}

int cmd_convert(const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<fs::path> xml(o.xml.begin(), o.xml.end());
  std::vector<fs::path> keys(o.keys.begin(), o.keys.end());
  const auto report = convert_semeval(xml, keys);
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  write_instances_tsv(report.instances, o.out);
  out << "converted " << report.instances.size() << " instances, skipped " << report.skipped
      << '\n';
  return 0;
}

int cmd_features(const Options& o, std::ostream& out, std::ostream& err) {
  const auto table = load_embeddings(o, err);
  const auto instances = read_instances_tsv(o.instances);
  std::vector<FeatureRecord> records(instances.size());
  parallel_for(instances.size(), o.jobs, [&](std::size_t i) {
    records[i] = {instances[i].id, feature_triple(instances[i], o.k_left, o.k_right, table)};
  });
  write_features_tsv(records, o.out);
  std::size_t degenerate = 0;
  for (const auto& r : records) degenerate += r.triple.inter_degenerate;
  out << "features for " << records.size() << " instances (" << degenerate
      << " with degenerate interplay)\n";
  return 0;
}

int cmd_cluster_fit(const Options& o, std::ostream& out, std::ostream& err) {
  const auto table = load_embeddings(o, err);
  const auto groups = by_preposition(read_instances_tsv(o.instances), o.prep);
  if (groups.empty()) throw DataError("no instances to cluster");
  const FeatureMode mode = parse_feature_mode(o.features);
  const bool many = groups.size() > 1;
  for (const auto& [prep, instances] : groups) {
    const auto points = cluster_points(instances, mode, o.k_left, o.k_right, table, o.jobs);
    const bool labeled = std::all_of(instances.begin(), instances.end(),
                                     [](const PrepInstance& i) { return i.sense.has_value(); });
    std::size_t k = o.k;
    if (k == 0) {
      if (!labeled) throw UsageError("--k is required when instances carry no senses");
      const auto senses = gold_senses(instances);
      k = std::set<std::string>(senses.begin(), senses.end()).size();
    }
    k = std::min(k, points.size());
    KMeansModel model = kmeans_fit(points, k, o.seed, o.max_iter);
    model.feature_mode = mode;
    if (labeled) model = label_clusters(std::move(model), points, gold_senses(instances));
    save_kmeans(model, model_target(o.out, prep, many));
    out << prep << ": " << instances.size() << " instances, k=" << k << '\n';
  }
  return 0;
}

int cmd_cluster_eval(const Options& o, std::ostream& out, std::ostream& err) {
  const auto table = load_embeddings(o, err);
  const auto groups = by_preposition(read_instances_tsv(o.instances), o.prep);
  std::map<std::string, KMeansModel> models;
  const auto files = model_files(o.model);
  for (const auto& f : files) {
    const std::string prep = files.size() == 1 && !o.prep.empty() ? o.prep : f.stem().string();
    models[prep] = load_kmeans(f);
  }
  std::vector<ReportRow> rows;
  std::size_t total = 0, hits = 0;
  for (const auto& [prep, instances] : groups) {
    auto m = models.find(prep);
    if (m == models.end() && models.size() == 1 && groups.size() == 1) m = models.begin();
    if (m == models.end()) {
      rows.push_back({"unsupervised", prep, "accuracy", std::nullopt, 0, instances.size(),
                      "no model for preposition"});
      continue;
    }
    const auto points = cluster_points(instances, m->second.feature_mode, o.k_left, o.k_right,
                                       table, o.jobs);
    std::vector<std::string> predicted;
    for (const auto& p : points) predicted.push_back(predict_sense(m->second, p));
    const auto gold = gold_senses(instances);
    rows.push_back({"unsupervised", prep, "accuracy", disambiguation_accuracy(predicted, gold),
                    instances.size(), 0, {}});
    total += gold.size();
    for (std::size_t i = 0; i < gold.size(); ++i) hits += predicted[i] == gold[i];
  }
  std::optional<double> overall;
  if (total) overall = static_cast<double>(hits) / static_cast<double>(total);
  rows.push_back({"unsupervised", "all", "accuracy", overall, total, 0,
                  total ? "" : "no evaluable instances"});
  if (!o.out.empty()) emit_report(rows, o.out);
  out << "unsupervised accuracy " << (overall ? format_double(*overall) : "NA") << " over "
      << total << " instances\n";
  return 0;
}

TuneGrid grid_from(const Options& o, bool k_set, bool kl_set, bool kr_set) {
  TuneGrid g = default_grid();
  if (k_set) g.k_neighbors = {o.k};
  if (kl_set) g.k_left = {o.k_left};
  if (kr_set) g.k_right = {o.k_right};
  return g;
}

int cmd_knn_tune(const Options& o, const TuneGrid& grid, std::ostream& out, std::ostream& err) {
  const auto table = load_embeddings(o, err);
  const FeatureMode mode = parse_feature_mode(o.features);
  const auto train_groups = by_preposition(read_instances_tsv(o.instances), o.prep);
  std::map<std::string, std::vector<PrepInstance>> dev_groups;
  if (!o.dev.empty()) dev_groups = by_preposition(read_instances_tsv(o.dev), o.prep);
  if (train_groups.empty()) throw DataError("no training instances");
  const bool many = train_groups.size() > 1;
  std::vector<ReportRow> rows;
  for (const auto& [prep, instances] : train_groups) {
    std::vector<PrepInstance> train, dev;
    if (o.dev.empty()) {
      std::tie(train, dev) = split_train_dev(instances, o.ratio, o.seed);
    } else {
      train = instances;
      dev = dev_groups[prep];
    }
    TuneResult result;
    if (dev.empty()) {
      // Nothing to tune on: keep the first grid cell.
      const TuneGrid g = restrict_grid(grid, mode);
      result.model = build_knn(train, g.k_neighbors.front(), g.weights.front(), g.k_left.front(),
                               g.k_right.front(), mode, table);
    } else {
      result = tune(train, dev, grid, table, mode, o.jobs);
    }
    save_knn(result.model, model_target(o.out, prep, many));
    const auto& m = result.model;
    rows.push_back({"knn-tune", prep, "dev_accuracy",
                    dev.empty() ? std::nullopt : std::optional<double>(result.dev_accuracy),
                    dev.size(), 0, dev.empty() ? "no development instances" : ""});
    out << prep << ": train=" << train.size() << " dev=" << dev.size() << " dev_accuracy="
        << (dev.empty() ? "NA" : format_double(result.dev_accuracy)) << " k=" << m.k_neighbors
        << " weights=" << format_double(m.weights.left) << ',' << format_double(m.weights.right)
        << ',' << format_double(m.weights.inter) << " windows=" << m.k_left << ',' << m.k_right
        << '\n';
  }
  if (!o.report.empty()) emit_report(rows, o.report);
  return 0;
}

int cmd_knn_eval(const Options& o, std::ostream& out, std::ostream& err) {
  const auto table = load_embeddings(o, err);
  const auto models = load_knn_models(o.model);
  const auto groups = by_preposition(read_instances_tsv(o.instances), o.prep);
  std::vector<ReportRow> rows;
  std::size_t total = 0;
  double hits = 0;
  for (const auto& [prep, instances] : groups) {
    auto m = models.find(prep);
    if (m == models.end()) {
      rows.push_back({"supervised", prep, "accuracy", std::nullopt, 0, instances.size(),
                      "no model for preposition"});
      continue;
    }
    const double acc = evaluate(m->second, instances, table, o.jobs);
    rows.push_back({"supervised", prep, "accuracy", acc, instances.size(), 0, {}});
    total += instances.size();
    hits += acc * static_cast<double>(instances.size());
  }
  std::optional<double> overall;
  if (total) overall = hits / static_cast<double>(total);
  rows.push_back({"supervised", "all", "accuracy", overall, total, 0,
                  total ? "" : "no evaluable instances"});
  if (!o.out.empty()) emit_report(rows, o.out);
  out << "supervised accuracy " << (overall ? format_double(*overall) : "NA") << " over " << total
      << " instances\n";
  return 0;
}

int cmd_tag(const Options& o, std::ostream& out, std::ostream& err) {
  const auto table = load_embeddings(o, err);
  const auto models = load_knn_models(o.model);
  std::ifstream in(o.corpus);
  if (!in) throw DataError("cannot open corpus " + o.corpus);
  std::ofstream dst(o.out);
  if (!dst) throw DataError("cannot write " + o.out);
  const std::size_t tagged = tag_stream(in, dst, models, table, o.jobs);
  if (!dst) throw DataError("I/O failure writing " + o.out);
  out << "tagged " << tagged << " preposition tokens with " << models.size() << " models\n";
  return 0;
}

int cmd_embed_train(const Options& o, std::ostream& out, std::ostream&) {
  TrainConfig cfg = o.train;
  cfg.seed = o.seed;
  cfg.jobs = o.jobs;
  const Corpus corpus = read_corpus(o.corpus);
  TrainStats stats;
  const auto table = train_cbow(corpus, cfg, &stats);
  save_table(table, o.out);
  out << "trained " << table.size() << " vectors of dim " << table.dim() << " on "
      << stats.examples_per_epoch << " examples/epoch; final epoch loss "
      << (stats.epoch_loss.empty() ? "NA" : format_double(stats.epoch_loss.back())) << '\n';
  return 0;
}

int cmd_eval_analogy(const Options& o, std::ostream& out, std::ostream& err) {
  const auto table = load_embeddings(o, err);
  auto sets = load_relation_pairs(o.pairs);
  if (!o.relation.empty()) {
    std::erase_if(sets, [&](const RelationPairSet& s) { return s.name != o.relation; });
  }
  if (sets.empty()) throw DataError("no relation pairs to evaluate");
  std::vector<ReportRow> rows;
  auto run_condition = [&](const std::string& relation, const std::string& condition,
                           const std::vector<std::pair<std::string, std::string>>& pairs,
                           const std::optional<RelationVector>& rv) {
    const std::string metric = "top" + std::to_string(o.topk);
    if (!rv) {
      rows.push_back({relation, condition, metric, std::nullopt, 0, pairs.size(),
                      "relation token out of vocabulary"});
      return;
    }
    try {
      const auto r = relation_eval(table, pairs, *rv, o.topk, o.holdout);
      rows.push_back({relation, condition, metric, r.accuracy, r.evaluated, r.skipped, {}});
    } catch (const DataError& e) {
      rows.push_back({relation, condition, metric, std::nullopt, 0, pairs.size(), e.what()});
    }
  };
  auto token_vector = [&](const std::string& tok) -> std::optional<RelationVector> {
    auto v = get_vector(table, tok);
    if (!v) return std::nullopt;
    return RelationVector{Vec(v->begin(), v->end()), tok, false};
  };
  for (const auto& set : sets) {
    if (!o.prep.empty()) run_condition(set.name, "global", set.pairs, token_vector(o.prep));
    if (!o.senses.empty()) run_condition(set.name, "sense", set.pairs, token_vector(o.senses));
    std::optional<RelationVector> diff;
    try {
      diff = RelationVector{diff_baseline_vector(table, set.pairs).vector, std::nullopt, true};
    } catch (const DataError&) {
    }
    run_condition(set.name, "diff", set.pairs, diff);
  }
  if (!o.out.empty()) emit_report(rows, o.out);
  for (const auto& r : rows) {
    out << r.evaluation << ' ' << r.condition << ' ' << r.metric << '='
        << (r.value ? format_double(*r.value) : "NA") << " (n=" << r.n << ")\n";
  }
  return 0;
}

int cmd_eval_vpc(const Options& o, std::ostream& out, std::ostream& err) {
  const auto table = load_embeddings(o, err);
  const auto entries = load_vpc(o.dataset);
  std::map<std::string, KnnModel> models;
  if (!o.model.empty()) models = load_knn_models(o.model);
  std::set<std::string> allowed;
  if (!o.candidates.empty()) {
    std::ifstream in(o.candidates);
    if (!in) throw DataError("cannot open " + o.candidates);
    std::string tok;
    while (in >> tok) allowed.insert(tok);
  }
  const std::set<std::string>* filter = o.candidates.empty() ? nullptr : &allowed;

  // Entries are scored only when every condition can be computed for them.
  std::vector<VpcEntry> kept;
  std::map<std::string, std::vector<std::vector<std::string>>> lists;
  std::size_t skipped = 0;
  for (const auto& e : entries) {
    std::optional<std::string> sense_tok;
    if (!o.senses.empty()) sense_tok = o.senses;
    else sense_tok = select_sense_token(e, models, table);
    if (!table.contains(e.verb) || !table.contains(e.particle) || !sense_tok ||
        !table.contains(*sense_tok)) {
      ++skipped;
      continue;
    }
    kept.push_back(e);
    lists["simplex"].push_back(vpc_paraphrase(table, e, std::nullopt, o.topk, filter));
    lists["global"].push_back(vpc_paraphrase(table, e, e.particle, o.topk, filter));
    lists["sense"].push_back(vpc_paraphrase(table, e, sense_tok, o.topk, filter));
  }

  std::vector<ReportRow> rows;
  std::set<std::string> types;
  for (const auto& e : kept)
    if (e.phrase_type) types.insert(*e.phrase_type);
  for (const std::string condition : {"simplex", "global", "sense"}) {
    auto emit = [&](const std::string& label, const std::vector<std::size_t>& idx) {
      std::vector<VpcEntry> es;
      std::vector<std::vector<std::string>> cs;
      for (std::size_t i : idx) {
        es.push_back(kept[i]);
        cs.push_back(lists[condition][i]);
      }
      const std::size_t skip_count = label == condition ? skipped : 0;
      if (es.empty()) {
        rows.push_back({"vpc", label, "accuracy@" + std::to_string(o.topk), std::nullopt, 0,
                        skip_count, "no evaluable phrasal verbs"});
        return;
      }
      rows.push_back({"vpc", label, "accuracy@" + std::to_string(o.topk),
                      vpc_accuracy(es, cs, o.topk), es.size(), skip_count, {}});
      for (std::size_t k = 1; k <= o.topk; ++k) {
        rows.push_back({"vpc", label, "prec@" + std::to_string(k), prec_at_k(es, cs, k),
                        es.size(), skip_count, {}});
      }
    };
    std::vector<std::size_t> all(kept.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    emit(condition, all);
    for (const auto& type : types) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < kept.size(); ++i)
        if (kept[i].phrase_type == type) idx.push_back(i);
      emit(condition + "/" + type, idx);
    }
  }
  if (!o.out.empty()) emit_report(rows, o.out);
  for (const auto& r : rows) {
    if (r.metric.rfind("accuracy", 0) != 0 || r.condition.find('/') != std::string::npos) continue;
    out << "vpc " << r.condition << ' ' << r.metric << '='
        << (r.value ? format_double(*r.value) : "NA") << " (n=" << r.n << ")\n";
  }
  return 0;
}

// Pulls "--config FILE" out of args and appends FILE's key=value pairs as
// "--key=value" for every key not already given on the command line.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
  std::vector<std::string> kept;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 == args.size()) throw UsageError("--config needs a file argument");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      kept.push_back(args[i]);
    }
  }
  if (path.empty()) return kept;
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);
  std::set<std::string> given;
  for (const auto& a : kept) {
    if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') - 2));
  }
  std::vector<std::string> extra;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#' || line[first] == ';' || line[first] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    auto trim = [](std::string x) {
      const auto b = x.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      return x.substr(b, x.find_last_not_of(" \t\r") - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw UsageError(path + ":" + std::to_string(line_no) + ": empty key");
    if (!given.count(key)) extra.push_back("--" + key + "=" + value);
  }
  kept.insert(kept.end(), extra.begin(), extra.end());
  return kept;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Preposition sense disambiguation from word-vector geometry", "psd"};
  std::string config_path;
  app.add_option("--config", config_path, "key=value file; explicit flags take precedence");
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--log-level", o.log_level, "info or quiet")->check(CLI::IsMember({"info", "quiet"}));

  auto* convert = app.add_subcommand("convert-semeval", "Convert SemEval XML + keys to instance TSV");
  convert->add_option("--xml", o.xml, "SemEval XML file(s)")->required();
  convert->add_option("--key", o.keys, "answer key file(s)");
  convert->add_option("--out", o.out, "instance TSV to write")->required();

  auto add_common = [&](CLI::App* sub, bool needs_instances) {
    sub->add_option("--embeddings", o.embeddings, "word vectors (text format)")->required();
    auto* inst = sub->add_option("--instances", o.instances, "instance TSV");
    if (needs_instances) inst->required();
    sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--prep", o.prep, "restrict to one preposition");
  };
  auto add_windows = [&](CLI::App* sub) {
    sub->add_option("--k-left", o.k_left, "left window size")->check(CLI::PositiveNumber);
    sub->add_option("--k-right", o.k_right, "right window size")->check(CLI::PositiveNumber);
  };

  auto* features = app.add_subcommand("features", "Compute (left, right, interplay) features");
  add_common(features, true);
  add_windows(features);
  features->add_option("--out", o.out, "feature TSV to write")->required();

  auto* cluster = app.add_subcommand("cluster", "Unsupervised sense induction");
  cluster->require_subcommand(1);
  auto* cfit = cluster->add_subcommand("fit", "Fit k-means models");
  add_common(cfit, true);
  add_windows(cfit);
  cfit->add_option("--features", o.features, "all, lr, li, ri or average");
  cfit->add_option("--k", o.k, "clusters (default: number of senses)");
  cfit->add_option("--seed", o.seed, "random seed");
  cfit->add_option("--max-iter", o.max_iter, "Lloyd iteration cap");
  cfit->add_option("--out", o.out, "model file or directory")->required();
  auto* ceval = cluster->add_subcommand("eval", "Score k-means models");
  add_common(ceval, true);
  add_windows(ceval);
  ceval->add_option("--model", o.model, "model file or directory")->required();
  ceval->add_option("--out", o.out, "report TSV");

  auto* knn = app.add_subcommand("knn", "Supervised weighted k-NN");
  knn->require_subcommand(1);
  auto* ktune = knn->add_subcommand("tune", "Grid-search k-NN models on a dev split");
  add_common(ktune, true);
  auto* k_opt = ktune->add_option("--k", o.k, "fix the neighbor count");
  auto* kl_opt = ktune->add_option("--k-left", o.k_left, "fix the left window");
  auto* kr_opt = ktune->add_option("--k-right", o.k_right, "fix the right window");
  ktune->add_option("--dev", o.dev, "development instance TSV (default: split --instances)");
  ktune->add_option("--ratio", o.ratio, "train fraction of the split")->check(CLI::Range(0.0, 1.0));
  ktune->add_option("--features", o.features, "all, lr, li, ri or average");
  ktune->add_option("--seed", o.seed, "random seed");
  ktune->add_option("--out", o.out, "model file or directory")->required();
  ktune->add_option("--report", o.report, "optional tuning report TSV");
  auto* keval = knn->add_subcommand("eval", "Score k-NN models");
  add_common(keval, true);
  keval->add_option("--model", o.model, "model file or directory")->required();
  keval->add_option("--out", o.out, "report TSV");

  auto* tag = app.add_subcommand("tag", "Sense-tag a raw text corpus");
  tag->add_option("--embeddings", o.embeddings, "word vectors")->required();
  tag->add_option("--model", o.model, "k-NN model file or directory")->required();
  tag->add_option("--corpus", o.corpus, "raw text input")->required();
  tag->add_option("--out", o.out, "tagged corpus output")->required();
  tag->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);

  auto* embed = app.add_subcommand("embed", "Embedding training");
  embed->require_subcommand(1);
  auto* etrain = embed->add_subcommand("train", "Train CBOW vectors with negative sampling");
  etrain->add_option("--corpus", o.corpus, "tokenized corpus, one sentence per line")->required();
  etrain->add_option("--out", o.out, "vectors to write")->required();
  etrain->add_option("--dim", o.train.dim, "vector dimension");
  etrain->add_option("--window", o.train.window, "context window");
  etrain->add_option("--prep-window", o.train.prep_window, "window around sense-tagged tokens");
  etrain->add_option("--negatives", o.train.negatives, "negative samples");
  etrain->add_option("--epochs", o.train.epochs, "passes over the corpus");
  etrain->add_option("--lr", o.train.initial_lr, "initial learning rate");
  etrain->add_option("--min-count", o.train.min_count, "minimum token count");
  etrain->add_option("--sample", o.train.subsample_threshold, "subsampling threshold (0 = off)");
  etrain->add_flag("--dynamic-window", o.train.dynamic_window, "randomly shrink windows");
  etrain->add_flag("--parallel", o.train.parallel, "hogwild training (not reproducible)");
  etrain->add_option("--seed", o.seed, "random seed");
  etrain->add_option("--jobs", o.jobs, "worker threads for --parallel")->check(CLI::PositiveNumber);

  auto* eval = app.add_subcommand("eval", "Evaluate sense embeddings");
  eval->require_subcommand(1);
  auto* analogy = eval->add_subcommand("analogy", "Relation approximation by vector addition");
  analogy->add_option("--embeddings", o.embeddings, "word vectors")->required();
  analogy->add_option("--pairs", o.pairs, "relation pairs file")->required();
  analogy->add_option("--prep", o.prep, "global preposition token");
  analogy->add_option("--senses", o.senses, "sense-tagged preposition token");
  analogy->add_option("--relation", o.relation, "evaluate one relation section only");
  analogy->add_option("--topk", o.topk, "neighbors checked")->check(CLI::PositiveNumber);
  analogy->add_flag("--holdout", o.holdout, "leave-one-out diff baseline");
  analogy->add_option("--out", o.out, "report TSV");
  auto* vpc = eval->add_subcommand("vpc", "Phrasal verb paraphrasing");
  vpc->add_option("--embeddings", o.embeddings, "word vectors")->required();
  vpc->add_option("--dataset", o.dataset, "VPC dataset TSV")->required();
  vpc->add_option("--model", o.model, "k-NN models used to pick the particle sense");
  vpc->add_option("--senses", o.senses, "use this sense token for every entry");
  vpc->add_option("--candidates", o.candidates, "whitespace-separated allowed paraphrases");
  vpc->add_option("--topk", o.topk, "candidates per phrase")->check(CLI::PositiveNumber);
  vpc->add_option("--out", o.out, "report TSV");

  std::vector<std::string> merged;
  try {
    merged = merge_config(args);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  std::vector<std::string> reversed(merged.rbegin(), merged.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*convert) return cmd_convert(o, out, err);
    if (*features) return cmd_features(o, out, err);
    if (*cfit) return cmd_cluster_fit(o, out, err);
    if (*ceval) return cmd_cluster_eval(o, out, err);
    if (*ktune) {
      return cmd_knn_tune(o, grid_from(o, k_opt->count() > 0, kl_opt->count() > 0, kr_opt->count() > 0),
                          out, err);
    }
    if (*keval) return cmd_knn_eval(o, out, err);
    if (*tag) return cmd_tag(o, out, err);
    if (*etrain) return cmd_embed_train(o, out, err);
    if (*analogy) return cmd_eval_analogy(o, out, err);
    if (*vpc) return cmd_eval_vpc(o, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  err << app.help();
  return 1;
}

}  // namespace psd
