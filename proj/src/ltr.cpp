#include "tabret/ltr.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "tabret/error.hpp"
#include "tabret/random.hpp"

namespace tabret {

LabeledPairs LabeledPairs::from_rows(std::span<const FeatureRow> rows, std::span<const std::size_t> columns) {
  LabeledPairs p;
  const auto& names = tabret::feature_names();
  for (auto c : columns) {
    if (c >= kNumFeatures) throw Error("feature column out of range");
    p.feature_names.push_back(names[c]);
  }
  p.x = Matrix(rows.size(), columns.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    p.query_ids.push_back(rows[i].query_id);
    p.table_ids.push_back(rows[i].table_id);
    p.grades.push_back(rows[i].grade);
    for (std::size_t j = 0; j < columns.size(); ++j) p.x(i, j) = rows[i].features.values[columns[j]];
  }
  return p;
}

std::vector<std::size_t> assign_folds(std::span<const std::string> query_ids, std::size_t folds,
                                      std::uint64_t seed) {
  if (folds == 0) throw Error("need at least one fold");
  std::vector<std::size_t> order(query_ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  // Shuffle by sorted id so the split does not depend on input order.
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return query_ids[a] < query_ids[b]; });
  Rng rng(seed);
  shuffle(order, rng);
  std::vector<std::size_t> fold(query_ids.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) fold[order[pos]] = pos % folds;
  return fold;
}

Qrels qrels_of(const LabeledPairs& pairs) {
  Qrels q;
  for (std::size_t i = 0; i < pairs.size(); ++i) q.set(pairs.query_ids[i], pairs.table_ids[i], pairs.grades[i]);
  return q;
}

namespace {

Matrix select_rows(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), x.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = x.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Ranking rank_rows(const std::string& qid, const LabeledPairs& pairs, std::span<const std::size_t> rows,
                  const std::vector<double>& scores) {
  Ranking r;
  r.query_id = qid;
  for (auto i : rows) r.entries.push_back({pairs.table_ids[i], scores[i]});
  sort_ranking(r.entries);
  return r;
}

}  // namespace

CvResult cross_validate(const LabeledPairs& pairs, const CvOptions& options) {
  if (options.runs == 0) throw Error("need at least one cross-validation run");
  std::vector<std::string> queries;
  std::unordered_map<std::string, std::vector<std::size_t>> rows_of;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto [it, inserted] = rows_of.try_emplace(pairs.query_ids[i]);
    if (inserted) queries.push_back(pairs.query_ids[i]);
    it->second.push_back(i);
  }
  std::sort(queries.begin(), queries.end());
  if (queries.size() < options.folds || options.folds < 2) {
    throw Error("cross-validation needs at least " + std::to_string(std::max<std::size_t>(2, options.folds)) +
                " distinct queries, got " + std::to_string(queries.size()));
  }

  const Qrels qrels = qrels_of(pairs);
  auto cutoffs = options.eval.cutoffs;
  if (std::find(cutoffs.begin(), cutoffs.end(), options.eval.delta_cutoff) == cutoffs.end()) {
    cutoffs.push_back(options.eval.delta_cutoff);
  }

  CvResult result;
  std::vector<double> score_sum(pairs.size(), 0.0);
  result.importances.assign(pairs.x.cols, 0.0);
  std::size_t forests = 0;

  for (std::size_t run = 0; run < options.runs; ++run) {
    const auto fold_of = assign_folds(queries, options.folds, derive_seed(options.forest.seed, run));
    std::vector<double> scores(pairs.size(), 0.0);

    for (std::size_t fold = 0; fold < options.folds; ++fold) {
      FoldAssignment a;
      a.run = run;
      a.fold = fold;
      std::vector<std::size_t> train_rows, test_rows;
      for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        const bool test = fold_of[qi] == fold;
        (test ? a.test_queries : a.train_queries).push_back(queries[qi]);
        auto& dst = test ? test_rows : train_rows;
        const auto& rows = rows_of.at(queries[qi]);
        dst.insert(dst.end(), rows.begin(), rows.end());
      }

      std::vector<double> y;
      y.reserve(train_rows.size());
      for (auto i : train_rows) y.push_back(static_cast<double>(pairs.grades[i]));
      ForestConfig cfg = options.forest;
      cfg.seed = derive_seed(options.forest.seed, 1000003 * (run + 1) + fold);
      cfg.max_features = std::min(cfg.max_features, pairs.x.cols);
      const auto forest = train_forest(select_rows(pairs.x, train_rows), y, cfg);
      for (auto i : test_rows) scores[i] = forest.predict(pairs.x.row(i));
      const auto imp = forest.feature_importances();
      for (std::size_t f = 0; f < imp.size(); ++f) result.importances[f] += imp[f];
      ++forests;
      result.assignments.push_back(std::move(a));
    }

    std::map<std::size_t, double> run_mean;
    for (const auto& qid : queries) {
      const auto ranking = rank_rows(qid, pairs, rows_of.at(qid), scores);
      for (auto k : cutoffs) {
        const double v = ndcg_at_k(ranking, qrels, k, options.eval.gain);
        result.per_query_ndcg[k][qid] += v / static_cast<double>(options.runs);
        run_mean[k] += v / static_cast<double>(queries.size());
      }
    }
    result.run_mean_ndcg.push_back(std::move(run_mean));
    for (std::size_t i = 0; i < scores.size(); ++i) score_sum[i] += scores[i];
  }

  for (auto k : cutoffs) {
    double sum = 0.0;
    for (const auto& [qid, v] : result.per_query_ndcg[k]) sum += v;
    result.mean_ndcg[k] = sum / static_cast<double>(queries.size());
  }
  for (auto& v : result.importances) v /= static_cast<double>(forests);
  for (auto& v : score_sum) v /= static_cast<double>(options.runs);
  for (const auto& qid : queries) result.rankings.push_back(rank_rows(qid, pairs, rows_of.at(qid), score_sum));
  return result;
}

}  // namespace tabret
