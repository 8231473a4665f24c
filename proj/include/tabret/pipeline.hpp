#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tabret/config.hpp"
#include "tabret/corpus.hpp"
#include "tabret/features.hpp"
#include "tabret/index.hpp"
#include "tabret/ltr.hpp"

namespace tabret {

/// Every input of an experiment, loaded and cross-linked: cell entities not in
/// the KB are demoted, page signals attached, both indices built.
struct Collection {
  TableCorpus corpus;
  KnowledgeBase kb;
  std::optional<EmbeddingStore> words;
  std::optional<EmbeddingStore> graph;
  SchemaStats schema_stats;
  QuerySet queries;
  Qrels qrels;
  YRankTable yrank;
  TableIndex table_index;
  EntityIndex entity_index;
};

/// Which inputs a command needs; optional inputs are loaded only when set.
struct CollectionNeeds {
  bool judgments = true;
};

/// Throws Error naming the setting and path when a required path is unset or
/// missing, or a set optional path does not exist.
void check_paths(const RunConfig& cfg, const CollectionNeeds& needs);

/// Loads the collection; loader warnings go to `log`.
Collection load_collection(const RunConfig& cfg, const CollectionNeeds& needs, std::ostream& log);

/// MLM weights for the table index: configured, else uniform over the five
/// non-catch-all fields. Priors are the per-field defaults.
FieldWeights mlm_weights_for(const TableIndex& index, const RunConfig& cfg);

/// Feature rows for every judged pair. With tune_mlm the MLM feature uses
/// weights fitted by coordinate ascent on the judgments.
std::vector<FeatureRow> compute_features(const Collection& c, const RunConfig& cfg, std::ostream& log);

CvOptions cv_options(const RunConfig& cfg);

/// Cross-validated forest ranker on the named feature subset.
CvResult train_subset(std::span<const FeatureRow> rows, const std::string& subset, const RunConfig& cfg);

/// File-safe tag for a subset spec.
std::string subset_tag(const std::string& subset);

}  // namespace tabret
