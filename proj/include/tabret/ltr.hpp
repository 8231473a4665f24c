#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tabret/eval.hpp"
#include "tabret/features.hpp"
#include "tabret/forest.hpp"

namespace tabret {

/// Labeled query-table pairs restricted to a set of feature columns.
struct LabeledPairs {
  std::vector<std::string> query_ids;
  std::vector<std::string> table_ids;
  std::vector<int> grades;
  Matrix x;
  std::vector<std::string> feature_names;

  std::size_t size() const { return grades.size(); }

  /// Copies the chosen columns of the full feature schema.
  static LabeledPairs from_rows(std::span<const FeatureRow> rows, std::span<const std::size_t> columns);
};

struct CvOptions {
  std::size_t folds = 5;
  std::size_t runs = 5;
  ForestConfig forest;
  EvalOptions eval;
};

/// Which queries were trained on and tested in one fold of one run.
struct FoldAssignment {
  std::size_t run = 0;
  std::size_t fold = 0;
  std::vector<std::string> train_queries;
  std::vector<std::string> test_queries;
};

struct CvResult {
  /// Held-out rankings by predicted score averaged over runs.
  std::vector<Ranking> rankings;
  /// cutoff -> query -> NDCG averaged over runs.
  std::map<std::size_t, std::map<std::string, double>> per_query_ndcg;
  std::map<std::size_t, double> mean_ndcg;
  /// Per run: cutoff -> mean NDCG over queries.
  std::vector<std::map<std::size_t, double>> run_mean_ndcg;
  std::vector<FoldAssignment> assignments;
  /// Importances averaged over every fold forest.
  std::vector<double> importances;
};

/// Splits the sorted, distinct query ids into `folds` groups after a seeded
/// shuffle. Returns the fold number of each id, in the order given.
std::vector<std::size_t> assign_folds(std::span<const std::string> query_ids, std::size_t folds,
                                      std::uint64_t seed);

/// Query-level k-fold cross-validation of the pointwise forest ranker,
/// repeated `runs` times with different fold splits and forest seeds.
/// Throws when there are fewer distinct queries than folds.
CvResult cross_validate(const LabeledPairs& pairs, const CvOptions& options);

/// Qrels rebuilt from the labeled pairs.
Qrels qrels_of(const LabeledPairs& pairs);

}  // namespace tabret
