#include "tabret/pipeline.hpp"

#include <cctype>
#include <filesystem>
#include <ostream>

#include "tabret/error.hpp"
#include "tabret/semantic.hpp"
#include "tabret/tuning.hpp"

namespace tabret {

namespace {

namespace fs = std::filesystem;

constexpr std::size_t kMaxWarningsShown = 20;

void report_warnings(const std::vector<std::string>& warnings, std::ostream& log) {
  for (std::size_t i = 0; i < warnings.size() && i < kMaxWarningsShown; ++i) log << "warning: " << warnings[i] << '\n';
  if (warnings.size() > kMaxWarningsShown) {
    log << "warning: ... " << (warnings.size() - kMaxWarningsShown) << " more\n";
  }
}

void require(const fs::path& p, const char* key) {
  if (p.empty()) throw Error(std::string("setting '") + key + "' is required for this command");
  if (!fs::exists(p)) throw Error(std::string(key) + " file not found: " + p.string());
}

void optional_path(const fs::path& p, const char* key) {
  if (!p.empty() && !fs::exists(p)) throw Error(std::string(key) + " file not found: " + p.string());
}

}  // namespace

void check_paths(const RunConfig& cfg, const CollectionNeeds& needs) {
  require(cfg.corpus, "corpus");
  require(cfg.kb, "kb");
  if (needs.judgments) {
    require(cfg.schema_stats, "schema_stats");
    require(cfg.queries, "queries");
    require(cfg.qrels, "qrels");
  } else {
    optional_path(cfg.schema_stats, "schema_stats");
    optional_path(cfg.queries, "queries");
    optional_path(cfg.qrels, "qrels");
  }
  optional_path(cfg.word_embeddings, "word_embeddings");
  optional_path(cfg.graph_embeddings, "graph_embeddings");
  optional_path(cfg.signals, "signals");
  optional_path(cfg.yrank, "yrank");
}

Collection load_collection(const RunConfig& cfg, const CollectionNeeds& needs, std::ostream& log) {
  check_paths(cfg, needs);
  Collection c;

  auto corpus = load_corpus(cfg.corpus.string());
  report_warnings(corpus.report.warnings, log);
  c.corpus = std::move(corpus.corpus);
  if (c.corpus.empty()) throw Error("corpus " + cfg.corpus.string() + " has no valid tables");

  auto kb = load_knowledge_base(cfg.kb.string());
  report_warnings(kb.report.warnings, log);
  c.kb = std::move(kb.kb);
  const auto links = resolve_entities(c.corpus, c.kb);
  if (links.demoted > 0) {
    log << "note: " << links.demoted << " of " << links.linked_cells << " linked cells point outside the KB\n";
  }

  std::unordered_map<std::string, PageSignals> signals;
  if (!cfg.signals.empty()) signals = load_page_signals(cfg.signals.string());
  attach_signals(c.corpus, signals);
  if (!cfg.word_embeddings.empty()) {
    c.words = load_embeddings(cfg.word_embeddings.string(), {std::nullopt, true});
  }
  if (!cfg.graph_embeddings.empty()) c.graph = load_embeddings(cfg.graph_embeddings.string());
  if (!cfg.schema_stats.empty()) c.schema_stats = load_schema_stats(cfg.schema_stats.string());
  if (!cfg.queries.empty()) c.queries = load_queries(cfg.queries.string());
  if (!cfg.qrels.empty()) c.qrels = load_qrels(cfg.qrels.string());
  if (!cfg.yrank.empty()) c.yrank = load_yrank(cfg.yrank.string());

  c.table_index = build_table_index(c.corpus);
  c.entity_index = build_entity_index(c.kb);
  return c;
}

FieldWeights mlm_weights_for(const TableIndex& index, const RunConfig& cfg) {
  static constexpr std::array<std::size_t, 5> kTextFields = {kPageTitle, kSectionTitle, kCaption, kHeadings, kBody};
  FieldWeights w = FieldWeights::uniform(index, kTextFields);
  if (cfg.mlm_weights) {
    if (cfg.mlm_weights->size() != kNumTableFields) {
      throw Error("mlm_weights needs " + std::to_string(kNumTableFields) + " values");
    }
    w.weights = *cfg.mlm_weights;
    w.validate(kNumTableFields);
  }
  return w;
}

std::vector<FeatureRow> compute_features(const Collection& c, const RunConfig& cfg, std::ostream& log) {
  const SemanticSpace space(c.kb, c.words ? &*c.words : nullptr, c.graph ? &*c.graph : nullptr);
  const EntityRetriever retriever(c.entity_index, cfg.entity_k);
  const SemanticMatcher matcher(space, retriever, c.table_index);
  FeatureInputs in;
  in.corpus = &c.corpus;
  in.table_index = &c.table_index;
  in.schema_stats = &c.schema_stats;
  in.yrank = &c.yrank;
  in.matcher = &matcher;
  in.mlm_weights = mlm_weights_for(c.table_index, cfg);
  if (cfg.tune_mlm) {
    in.mlm_weights = train_field_weights(c.table_index, c.queries, c.qrels, in.mlm_weights);
    log << "tuned MLM weights:";
    for (std::size_t f = 0; f < in.mlm_weights.weights.size(); ++f) {
      log << ' ' << c.table_index.field_name(f) << '=' << in.mlm_weights.weights[f];
    }
    log << '\n';
  }
  auto result = extract_features(c.queries, c.qrels, in);
  report_warnings(result.warnings, log);
  return std::move(result.rows);
}

CvOptions cv_options(const RunConfig& cfg) {
  CvOptions o;
  o.folds = cfg.folds;
  o.runs = cfg.runs;
  o.forest = cfg.forest;
  o.eval = cfg.eval;
  return o;
}

CvResult train_subset(std::span<const FeatureRow> rows, const std::string& subset, const RunConfig& cfg) {
  const auto columns = resolve_feature_subset(subset);
  return cross_validate(LabeledPairs::from_rows(rows, columns), cv_options(cfg));
}

std::string subset_tag(const std::string& subset) {
  std::string tag;
  for (char ch : subset) {
    const auto u = static_cast<unsigned char>(ch);
    tag.push_back(std::isalnum(u) || ch == '_' ? ch : '-');
  }
  return tag;
}

}  // namespace tabret
