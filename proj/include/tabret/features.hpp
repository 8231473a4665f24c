#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "tabret/corpus.hpp"
#include "tabret/index.hpp"
#include "tabret/retrieval.hpp"
#include "tabret/semantic.hpp"

namespace tabret {

inline constexpr std::size_t kNumQueryFeatures = 7;
inline constexpr std::size_t kNumTableFeatures = 9;
inline constexpr std::size_t kNumQueryTableFeatures = 7;
inline constexpr std::size_t kNumBaselineFeatures = kNumQueryFeatures + kNumTableFeatures + kNumQueryTableFeatures;
inline constexpr std::size_t kNumFeatures = kNumBaselineFeatures + kNumSemanticFeatures;

inline constexpr std::array<const char*, kNumBaselineFeatures> kBaselineFeatureNames = {
    // query
    "QLEN", "IDF_pageTitle", "IDF_sectionTitle", "IDF_caption", "IDF_headings", "IDF_body", "IDF_catchAll",
    // table
    "nRows", "nCols", "nNulls", "PMI", "inLinks", "outLinks", "pageViews", "tableImportance",
    "tablePageFraction",
    // query-table
    "hitsLC", "hitsSLC", "hitsB", "qInPgTitle", "qInTableTitle", "yRank", "MLM"};

/// Value used for yRank when the page was not among the search results.
inline constexpr double kMissingYRank = 21.0;

/// Full 39-name schema: baseline features then the semantic block.
const std::vector<std::string>& feature_names();

/// Position of a feature name in the schema.
std::optional<std::size_t> feature_index(const std::string& name);

/// QLEN followed by the summed IDF over the six table fields.
std::array<double, kNumQueryFeatures> query_features(std::span<const std::string> query_tokens,
                                                     const TableIndex& index);

/// Mean PMI over unordered pairs of distinct headings known to `stats`.
/// Fewer than two known headings, or empty stats, give 0; pairs that never
/// co-occur contribute 0.
double pmi(std::span<const std::string> headings, const SchemaStats& stats);

std::array<double, kNumTableFeatures> table_features(const Table& table, const SchemaStats& stats);

/// Inputs shared by every query-table feature computation.
struct QueryTableContext {
  const TableIndex* index = nullptr;
  const YRankTable* yrank = nullptr;
  FieldWeights mlm_weights;
};

std::array<double, kNumQueryTableFeatures> query_table_features(const std::string& query_id,
                                                                std::span<const std::string> query_tokens,
                                                                const Table& table, const QueryTableContext& ctx);

struct FeatureVector {
  std::array<double, kNumFeatures> values{};
};

/// One labeled row of the feature matrix.
struct FeatureRow {
  std::string query_id;
  std::string table_id;
  int grade = 0;
  FeatureVector features;
};

struct FeatureInputs {
  const TableCorpus* corpus = nullptr;
  const TableIndex* table_index = nullptr;
  const SchemaStats* schema_stats = nullptr;
  const YRankTable* yrank = nullptr;
  const SemanticMatcher* matcher = nullptr;
  FieldWeights mlm_weights;
};

struct FeatureExtractionResult {
  std::vector<FeatureRow> rows;
  std::vector<std::string> warnings;
};

/// One row per judged (query, table) pair, in qrels order. Pairs whose query
/// or table is unknown are skipped with a warning.
FeatureExtractionResult extract_features(const QuerySet& queries, const Qrels& qrels, const FeatureInputs& in);

/// CSV with header `queryId,tableId,grade,<39 names>`.
void write_feature_csv(std::ostream& out, const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> read_feature_csv(std::istream& in, const std::string& source_name);
std::vector<FeatureRow> load_feature_csv(const std::string& path);

/// Column indices for a subset: "baseline" (23), "semantic" (16), "all" (39),
/// or a comma-separated list of names added to the baseline set. A list
/// prefixed with "only:" selects exactly the named columns.
std::vector<std::size_t> resolve_feature_subset(const std::string& spec);

}  // namespace tabret
