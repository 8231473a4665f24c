#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tabret/corpus.hpp"
#include "tabret/retrieval.hpp"

namespace tabret {

/// Gain applied to a relevance grade: 2^g - 1 (default) or g.
enum class Gain { kExponential, kLinear };

Gain parse_gain(const std::string& name);
const char* gain_name(Gain g);

/// NDCG@k from grades in ranked order and the full set of judged grades of the
/// query. Discount is log2(rank + 1). Returns 0 when no judged grade is
/// positive.
double ndcg_at_k(std::span<const int> ranked_grades, std::span<const int> judged_grades, std::size_t k,
                 Gain gain = Gain::kExponential);

/// NDCG@k of a ranking against qrels; unjudged documents count as grade 0.
double ndcg_at_k(const Ranking& ranking, const Qrels& qrels, std::size_t k, Gain gain = Gain::kExponential);

/// Two-tailed paired t-test. Throws when sizes differ or n < 2. Zero-variance
/// differences give p = 1 if the mean difference is 0, else p = 0.
double paired_t_test(std::span<const double> a, std::span<const double> b);

/// Counts of per-query deltas in five bins:
/// (-inf,-0.25], (-0.25,-0.05], (-0.05,0.05), [0.05,0.25), [0.25,inf).
struct DeltaHistogram {
  static constexpr std::array<const char*, 5> kLabels = {"<=-0.25", "(-0.25,-0.05]", "(-0.05,0.05)",
                                                         "[0.05,0.25)", ">=0.25"};
  std::array<std::size_t, 5> counts{};

  void add(double delta);
};

struct EvalOptions {
  std::vector<std::size_t> cutoffs = {5, 10, 15, 20};
  /// Cutoff used for per-query deltas, histograms and subset means.
  std::size_t delta_cutoff = 20;
  Gain gain = Gain::kExponential;
};

struct MethodReport {
  std::string name;
  /// cutoff -> query id -> NDCG.
  std::map<std::size_t, std::map<std::string, double>> per_query;
  std::map<std::size_t, double> mean;
  /// cutoff -> p-value against the baseline (absent for the baseline itself).
  std::map<std::size_t, double> p_value;
  /// query id -> NDCG@delta_cutoff(method) - NDCG@delta_cutoff(baseline).
  std::map<std::string, double> delta;
  DeltaHistogram histogram;
  /// subset tag -> mean NDCG@delta_cutoff over that subset's queries.
  std::map<std::string, double> subset_mean;
};

struct EvalReport {
  std::string baseline;
  EvalOptions options;
  std::vector<std::string> query_ids;
  std::map<std::string, MethodReport> methods;
};

/// Evaluates every run against qrels and compares each with `baseline`.
/// All runs must cover the same query ids.
EvalReport analyze(const std::map<std::string, std::vector<Ranking>>& runs, const Qrels& qrels,
                   const QuerySet& queries, const std::string& baseline, const EvalOptions& options = {});

/// cutoff -> query id -> NDCG of one method.
using PerQueryScores = std::map<std::size_t, std::map<std::string, double>>;

/// Same report from precomputed per-query NDCG (for example averaged over
/// cross-validation runs). Every method needs every cutoff.
EvalReport analyze_scores(const std::map<std::string, PerQueryScores>& scores, const QuerySet& queries,
                          const std::string& baseline, const EvalOptions& options = {});

/// TREC run lines `queryId Q0 docId rank score tag`.
void write_trec_run(std::ostream& out, std::span<const Ranking> rankings, const std::string& tag);
std::vector<Ranking> read_trec_run(std::istream& in, const std::string& source_name);
std::vector<Ranking> load_trec_run(const std::string& path);

void write_report_tsv(std::ostream& out, const EvalReport& report);
void write_report_json(std::ostream& out, const EvalReport& report);
void write_histogram_csv(std::ostream& out, const EvalReport& report);

}  // namespace tabret
