#include "tabret/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>

#include "tabret/config.hpp"
#include "tabret/error.hpp"
#include "tabret/fixtures.hpp"
#include "tabret/pipeline.hpp"
#include "tabret/semantic.hpp"
#include "tabret/text.hpp"
#include "tabret/tuning.hpp"

namespace tabret {

namespace {

namespace fs = std::filesystem;

template <typename Body>
void write_file(const fs::path& path, Body&& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  body(out);
  out.flush();
  if (!out) throw Error("failed writing " + path.string());
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string dashed(std::string key) {
  for (auto& ch : key)
    if (ch == '_') ch = '-';
  return "--" + key;
}

fs::path feature_file(const RunConfig& cfg, const std::string& flag) {
  fs::path p = flag.empty() ? cfg.out_dir / "features.csv" : fs::path(flag);
  if (!fs::exists(p)) throw Error("feature file not found: " + p.string() + " (run `tabret features` first)");
  return p;
}

QuerySet optional_queries(const RunConfig& cfg) {
  if (cfg.queries.empty()) return {};
  if (!fs::exists(cfg.queries)) throw Error("queries file not found: " + cfg.queries.string());
  return load_queries(cfg.queries.string());
}

std::vector<std::size_t> report_cutoffs(const EvalOptions& eval) {
  auto cutoffs = eval.cutoffs;
  if (std::find(cutoffs.begin(), cutoffs.end(), eval.delta_cutoff) == cutoffs.end()) {
    cutoffs.push_back(eval.delta_cutoff);
  }
  return cutoffs;
}

/// Method rows in the given order with NDCG and p-value per cutoff.
void print_summary(std::ostream& out, const EvalReport& report, const std::vector<std::string>& order) {
  std::size_t width = 6;
  for (const auto& name : order) width = std::max(width, name.size());
  out << std::string(width, ' ');
  for (auto k : report.options.cutoffs) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "  %8s %7s", ("NDCG@" + std::to_string(k)).c_str(), "p");
    out << buf;
  }
  out << '\n';
  for (const auto& name : order) {
    const auto& m = report.methods.at(name);
    out << name << std::string(width - name.size(), ' ');
    for (auto k : report.options.cutoffs) {
      auto p = m.p_value.find(k);
      char buf[48];
      std::snprintf(buf, sizeof(buf), "  %8.4f %7s", m.mean.at(k), p == m.p_value.end() ? "-" : fixed4(p->second).c_str());
      out << buf;
    }
    out << '\n';
  }
}

void write_report_files(const fs::path& dir, const EvalReport& report) {
  write_file(dir / "report.tsv", [&](std::ostream& o) { write_report_tsv(o, report); });
  write_file(dir / "summary.json", [&](std::ostream& o) { write_report_json(o, report); });
  write_file(dir / "histogram.csv", [&](std::ostream& o) { write_histogram_csv(o, report); });
}

// ---------------------------------------------------------------------------
// index

int cmd_index(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto c = load_collection(cfg, {.judgments = false}, err);
  const auto table_path = cfg.out_dir / "table.idx";
  const auto entity_path = cfg.out_dir / "entity.idx";
  write_file(table_path, [&](std::ostream& o) { c.table_index.save(o); });
  write_file(entity_path, [&](std::ostream& o) { c.entity_index.save(o); });
  {
    std::ifstream in(table_path, std::ios::binary);
    if (FieldedIndex::load(in).num_docs() != c.table_index.num_docs()) throw Error("table snapshot did not verify");
  }
  out << "indexed " << c.table_index.num_docs() << " tables (" << c.table_index.field(kCatchAll).vocabulary_size()
      << " catch-all terms) and " << c.entity_index.num_docs() << " entities -> " << cfg.out_dir.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// search

int cmd_search(const RunConfig& cfg, const std::string& query, const std::string& query_id,
               const std::string& method, std::size_t k, std::ostream& out, std::ostream& err) {
  TableIndex index;
  const auto snapshot = cfg.out_dir / "table.idx";
  if (fs::exists(snapshot)) {
    std::ifstream in(snapshot, std::ios::binary);
    index = FieldedIndex::load(in);
  } else {
    if (cfg.corpus.empty()) throw Error("no index snapshot in " + cfg.out_dir.string() + " and no corpus configured");
    if (!fs::exists(cfg.corpus)) throw Error("corpus file not found: " + cfg.corpus.string());
    auto corpus = load_corpus(cfg.corpus.string());
    if (!corpus.report.warnings.empty()) {
      err << "warning: " << corpus.report.warnings.size() << " corpus records skipped\n";
    }
    index = build_table_index(corpus.corpus);
  }
  if (index.num_docs() == 0) throw Error("the table index is empty");

  Scorer scorer;
  if (method == "lm") {
    scorer = LmScorer{kCatchAll, cfg.lm_mu.value_or(default_mu(index.field(kCatchAll)))};
  } else {
    scorer = MlmScorer{mlm_weights_for(index, cfg)};
  }
  auto ranking = retrieve_topk(index, tokenize(query), scorer, k);
  ranking.query_id = query_id;
  write_trec_run(out, std::span<const Ranking>(&ranking, 1), "tabret-" + method);
  return 0;
}

// ---------------------------------------------------------------------------
// features

int cmd_features(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto c = load_collection(cfg, {}, err);
  const auto rows = compute_features(c, cfg, err);
  if (rows.empty()) throw Error("no judged pair matched the corpus; nothing to write");
  const auto path = cfg.out_dir / "features.csv";
  write_file(path, [&](std::ostream& o) { write_feature_csv(o, rows); });
  if (load_feature_csv(path.string()).size() != rows.size()) throw Error("feature file did not verify");

  std::set<std::string> queries;
  for (const auto& r : rows) queries.insert(r.query_id);
  out << "wrote " << rows.size() << " rows x " << kNumFeatures << " features for " << queries.size()
      << " queries -> " << path.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// train

int cmd_train(const RunConfig& cfg, const std::string& subset, const std::string& features_flag, std::ostream& out,
              std::ostream& err) {
  const auto columns = resolve_feature_subset(subset);
  const auto rows = load_feature_csv(feature_file(cfg, features_flag).string());
  const auto queries = optional_queries(cfg);
  const auto tag = subset_tag(subset);

  err << "cross-validating baseline (" << kNumBaselineFeatures << " features)\n";
  const auto base = train_subset(rows, "baseline", cfg);
  std::map<std::string, PerQueryScores> scores{{"baseline", base.per_query_ndcg}};
  CvResult result = base;
  if (tag != "baseline") {
    err << "cross-validating " << tag << " (" << columns.size() << " features)\n";
    result = train_subset(rows, subset, cfg);
    scores.emplace(tag, result.per_query_ndcg);
  }
  const auto report = analyze_scores(scores, queries, "baseline", cfg.eval);

  const auto pairs = LabeledPairs::from_rows(rows, columns);
  std::vector<double> y(pairs.grades.begin(), pairs.grades.end());
  auto forest_cfg = cfg.forest;
  forest_cfg.max_features = std::min(forest_cfg.max_features, pairs.x.cols);
  const auto model = train_forest(pairs.x, y, forest_cfg);

  const auto dir = cfg.out_dir / ("train-" + tag);
  write_file(dir / "run.txt", [&](std::ostream& o) { write_trec_run(o, result.rankings, tag); });
  write_report_files(dir, report);
  write_file(dir / "importance.tsv", [&](std::ostream& o) {
    std::vector<std::size_t> order(columns.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return result.importances[a] > result.importances[b]; });
    o << "feature\timportance\n";
    for (auto i : order) o << pairs.feature_names[i] << '\t' << result.importances[i] << '\n';
  });
  write_file(dir / "model.forest", [&](std::ostream& o) { model.save(o); });

  std::vector<std::string> order{"baseline"};
  if (tag != "baseline") order.push_back(tag);
  print_summary(out, report, order);
  out << "artifacts -> " << dir.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// report

std::vector<Ranking> cover_queries(std::vector<Ranking> run, const std::set<std::string>& judged) {
  std::vector<Ranking> kept;
  std::set<std::string> seen;
  for (auto& r : run) {
    if (judged.count(r.query_id)) {
      seen.insert(r.query_id);
      kept.push_back(std::move(r));
    }
  }
  for (const auto& q : judged) {
    if (!seen.count(q)) kept.push_back({q, {}});
  }
  return kept;
}

int report_external_runs(const RunConfig& cfg, const std::vector<std::string>& run_specs, std::string baseline,
                         std::ostream& out) {
  if (cfg.qrels.empty()) throw Error("setting 'qrels' is required to evaluate runs");
  if (!fs::exists(cfg.qrels)) throw Error("qrels file not found: " + cfg.qrels.string());
  const auto qrels = load_qrels(cfg.qrels.string());
  const auto queries = optional_queries(cfg);
  std::set<std::string> judged;
  for (const auto& [q, j] : qrels.all()) judged.insert(q);

  std::map<std::string, std::vector<Ranking>> runs;
  std::vector<std::string> order;
  for (const auto& spec : run_specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw Error("--run expects name=path, got '" + spec + "'");
    const auto name = spec.substr(0, eq);
    const auto path = spec.substr(eq + 1);
    if (!fs::exists(path)) throw Error("run file not found: " + path);
    if (!runs.emplace(name, cover_queries(load_trec_run(path), judged)).second) {
      throw Error("duplicate run name '" + name + "'");
    }
    order.push_back(name);
  }
  if (baseline.empty()) baseline = order.front();
  if (!runs.count(baseline)) throw Error("baseline '" + baseline + "' is not one of the runs");

  const auto report = analyze(runs, qrels, queries, baseline, cfg.eval);
  const auto dir = cfg.out_dir / "report";
  write_report_files(dir, report);
  print_summary(out, report, order);
  out << "artifacts -> " << dir.string() << '\n';
  return 0;
}

/// Per-query NDCG of top-k retrieval for every judged query.
PerQueryScores retrieval_scores(const TableIndex& index, const QuerySet& queries, const Qrels& qrels,
                                const Scorer& scorer, const RunConfig& cfg, std::vector<Ranking>& rankings) {
  PerQueryScores scores;
  const auto cutoffs = report_cutoffs(cfg.eval);
  const auto depth = std::max(cfg.search_k, *std::max_element(cutoffs.begin(), cutoffs.end()));
  for (const auto& [qid, judged] : qrels.all()) {
    const auto* q = queries.find(qid);
    if (!q) throw Error("query " + qid + " has judgments but no text");
    auto r = retrieve_topk(index, tokenize(q->text), scorer, depth);
    r.query_id = qid;
    for (auto k : cutoffs) scores[k][qid] = ndcg_at_k(r, qrels, k, cfg.eval.gain);
    rankings.push_back(std::move(r));
  }
  return scores;
}

int report_collection(const RunConfig& cfg, const std::string& features_flag, bool grid, std::ostream& out,
                      std::ostream& err) {
  const auto rows = load_feature_csv(feature_file(cfg, features_flag).string());
  const auto queries = optional_queries(cfg);
  const auto dir = cfg.out_dir / "report";
  const auto cutoffs = report_cutoffs(cfg.eval);

  std::map<std::string, PerQueryScores> scores;
  std::vector<std::string> method_rows;

  Qrels qrels;
  for (const auto& r : rows) qrels.set(r.query_id, r.table_id, r.grade);
  if (!cfg.corpus.empty() && queries.size() > 0) {
    if (!fs::exists(cfg.corpus)) throw Error("corpus file not found: " + cfg.corpus.string());
    err << "scoring lexical baselines\n";
    const auto corpus = load_corpus(cfg.corpus.string());
    const auto index = build_table_index(corpus.corpus);
    const double mu = cfg.lm_mu ? *cfg.lm_mu : sweep_mu(index, kCatchAll, queries, qrels, cfg.mu_grid);
    std::vector<Ranking> lm_run, mlm_run;
    scores["LM"] = retrieval_scores(index, queries, qrels, LmScorer{kCatchAll, mu}, cfg, lm_run);
    scores["MLM"] = retrieval_scores(index, queries, qrels, MlmScorer{mlm_weights_for(index, cfg)}, cfg, mlm_run);
    write_file(dir / "runs" / "LM.run", [&](std::ostream& o) { write_trec_run(o, lm_run, "LM"); });
    write_file(dir / "runs" / "MLM.run", [&](std::ostream& o) { write_trec_run(o, mlm_run, "MLM"); });
    method_rows = {"LM", "MLM"};
  }

  const std::vector<std::pair<std::string, std::string>> learned = {{"LTR", "baseline"}, {"STR", "all"}};
  for (const auto& [name, subset] : learned) {
    err << "cross-validating " << name << '\n';
    const auto cv = train_subset(rows, subset, cfg);
    scores[name] = cv.per_query_ndcg;
    write_file(dir / "runs" / (name + ".run"), [&](std::ostream& o) { write_trec_run(o, cv.rankings, name); });
    method_rows.push_back(name);
  }

  if (grid) {
    for (std::size_t r = 0; r < kNumRepresentations; ++r) {
      for (std::size_t m = 0; m < kNumMeasures; ++m) {
        const auto name = semantic_feature_name(static_cast<Representation>(r), static_cast<Measure>(m));
        err << "cross-validating baseline + " << name << '\n';
        scores[name] = train_subset(rows, name, cfg).per_query_ndcg;
      }
    }
  }

  const auto report = analyze_scores(scores, queries, "LTR", cfg.eval);
  write_report_files(dir, report);

  write_file(dir / "methods.tsv", [&](std::ostream& o) {
    o << "method";
    for (auto k : report.options.cutoffs) o << "\tNDCG@" << k << "\tp@" << k;
    o << '\n';
    for (const auto& name : method_rows) {
      const auto& m = report.methods.at(name);
      o << name;
      for (auto k : report.options.cutoffs) {
        auto p = m.p_value.find(k);
        o << '\t' << fixed4(m.mean.at(k)) << '\t' << (p == m.p_value.end() ? "-" : fixed4(p->second));
      }
      o << '\n';
    }
  });
  out << "Retrieval performance (p-values against LTR)\n";
  print_summary(out, report, method_rows);

  if (grid) {
    const std::array<std::size_t, 2> grid_cutoffs = {10, 20};
    auto cell = [&](Representation r, Measure m, std::size_t k) {
      const auto& method = report.methods.at(semantic_feature_name(r, m));
      auto it = method.mean.find(k);
      return it == method.mean.end() ? std::string("-") : fixed4(it->second);
    };
    write_file(dir / "feature_grid.tsv", [&](std::ostream& o) {
      o << "representation";
      for (auto* measure : kMeasureNames)
        for (auto k : grid_cutoffs) o << '\t' << measure << "@" << k;
      o << '\n';
      for (std::size_t r = 0; r < kNumRepresentations; ++r) {
        o << kRepresentationNames[r];
        for (std::size_t m = 0; m < kNumMeasures; ++m)
          for (auto k : grid_cutoffs) o << '\t' << cell(static_cast<Representation>(r), static_cast<Measure>(m), k);
        o << '\n';
      }
    });
    write_file(dir / "feature_grid_long.tsv", [&](std::ostream& o) {
      o << "representation\tmeasure";
      for (auto k : cutoffs) o << "\tNDCG@" << k << "\tp@" << k;
      o << '\n';
      for (std::size_t r = 0; r < kNumRepresentations; ++r) {
        for (std::size_t m = 0; m < kNumMeasures; ++m) {
          const auto& method =
              report.methods.at(semantic_feature_name(static_cast<Representation>(r), static_cast<Measure>(m)));
          o << kRepresentationNames[r] << '\t' << kMeasureNames[m];
          for (auto k : cutoffs) o << '\t' << fixed4(method.mean.at(k)) << '\t' << fixed4(method.p_value.at(k));
          o << '\n';
        }
      }
    });

    out << "\nBaseline + one semantic feature, NDCG@10 / NDCG@20\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%-10s", "");
    out << buf;
    for (auto* measure : kMeasureNames) {
      std::snprintf(buf, sizeof(buf), "  %-15s", measure);
      out << buf;
    }
    out << '\n';
    for (std::size_t r = 0; r < kNumRepresentations; ++r) {
      std::snprintf(buf, sizeof(buf), "%-10s", kRepresentationNames[r]);
      out << buf;
      for (std::size_t m = 0; m < kNumMeasures; ++m) {
        const auto a = cell(static_cast<Representation>(r), static_cast<Measure>(m), 10);
        const auto b = cell(static_cast<Representation>(r), static_cast<Measure>(m), 20);
        std::snprintf(buf, sizeof(buf), "  %-15s", (a + " / " + b).c_str());
        out << buf;
      }
      out << '\n';
    }
  }
  out << "artifacts -> " << dir.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// fixtures

int cmd_fixtures(const RunConfig& cfg, FixtureOptions opts, std::ostream& out) {
  opts.seed = cfg.seed;
  const auto data = generate_fixtures(opts);
  const auto config = write_fixtures(data, cfg.out_dir.string());
  out << "wrote " << data.corpus.size() << " tables, " << data.queries.size() << " queries, " << data.kb.size()
      << " entities, " << data.qrels.num_pairs() << " judgments -> " << config << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ad hoc table retrieval with semantic matching features", "tabret"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "Plain-text key = value settings file")->check(CLI::ExistingFile);
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flag_options;
  for (const auto& key : config_keys()) {
    flag_options[key] = app.add_option(dashed(key), flag_values[key], "Overrides the '" + key + "' setting")
                            ->group("Settings");
  }

  auto* index = app.add_subcommand("index", "Build and save the table and entity indices");

  auto* search = app.add_subcommand("search", "Rank tables for a keyword query (TREC run lines)");
  std::string query, query_id = "q", method = "mlm";
  std::optional<std::size_t> search_k;
  search->add_option("--query", query, "Query text")->required();
  search->add_option("--query-id", query_id, "Query id written in the run lines");
  search->add_option("--method", method, "Scorer: lm (catch-all field) or mlm")->check(CLI::IsMember({"lm", "mlm"}));
  search->add_option("--k", search_k, "Number of tables to return")->check(CLI::PositiveNumber);

  auto* features = app.add_subcommand("features", "Extract the 39-feature matrix for every judged pair");

  auto* train = app.add_subcommand("train", "Cross-validate the forest ranker on a feature subset");
  std::string subset = "all", features_flag;
  train->add_option("--subset", subset, "baseline, semantic, all, or feature names added to the baseline");
  train->add_option("--features", features_flag, "Feature CSV (default <out>/features.csv)");

  auto* report = app.add_subcommand("report", "Result tables, or an evaluation of existing run files");
  std::vector<std::string> run_specs;
  std::string baseline;
  bool no_grid = false;
  report->add_option("--features", features_flag, "Feature CSV (default <out>/features.csv)");
  report->add_option("--run", run_specs, "Evaluate a TREC run file, as name=path (repeatable)");
  report->add_option("--baseline", baseline, "Run name used as baseline with --run");
  report->add_flag("--no-grid", no_grid, "Skip the representation x measure grid");

  auto* fixtures = app.add_subcommand("fixtures", "Generate a synthetic collection with planted relevance");
  FixtureOptions fopts;
  fixtures->add_option("--tables", fopts.tables, "Number of tables")->check(CLI::PositiveNumber);
  fixtures->add_option("--queries", fopts.queries, "Number of queries")->check(CLI::PositiveNumber);
  fixtures->add_option("--entities", fopts.entities, "Number of KB entities")->check(CLI::PositiveNumber);
  fixtures->add_option("--semantic-fraction", fopts.semantic_fraction,
                       "Share of relevant tables without query words")
      ->check(CLI::Range(0.0, 1.0));
  fixtures->add_option("--word-dim", fopts.word_dim, "Word embedding dimension")->check(CLI::PositiveNumber);
  fixtures->add_option("--graph-dim", fopts.graph_dim, "Graph embedding dimension")->check(CLI::PositiveNumber);

  for (auto* sub : {index, search, features, train, report, fixtures}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    std::map<std::string, std::string> overrides;
    for (const auto& [key, opt] : flag_options)
      if (opt->count() > 0) overrides[key] = flag_values[key];
    const auto cfg =
        make_config(config_path.empty() ? std::nullopt : std::optional<fs::path>(config_path), overrides);

    if (*index) return cmd_index(cfg, out, err);
    if (*search) return cmd_search(cfg, query, query_id, method, search_k.value_or(cfg.search_k), out, err);
    if (*features) return cmd_features(cfg, out, err);
    if (*train) return cmd_train(cfg, subset, features_flag, out, err);
    if (*report) {
      if (!run_specs.empty()) return report_external_runs(cfg, run_specs, baseline, out);
      return report_collection(cfg, features_flag, !no_grid, out, err);
    }
    if (*fixtures) return cmd_fixtures(cfg, fopts, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace tabret
