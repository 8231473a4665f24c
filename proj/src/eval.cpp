#include "tabret/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "tabret/error.hpp"
#include "tabret/text.hpp"

namespace tabret {

namespace {

double gain_of(int grade, Gain gain) {
  if (grade <= 0) return 0.0;
  return gain == Gain::kExponential ? std::ldexp(1.0, grade) - 1.0 : static_cast<double>(grade);
}

double dcg(std::span<const int> grades, std::size_t k, Gain gain) {
  double sum = 0.0;
  const std::size_t n = std::min(k, grades.size());
  for (std::size_t i = 0; i < n; ++i) sum += gain_of(grades[i], gain) / std::log2(static_cast<double>(i) + 2.0);
  return sum;
}

}  // namespace

Gain parse_gain(const std::string& name) {
  if (name == "exponential" || name == "exp") return Gain::kExponential;
  if (name == "linear") return Gain::kLinear;
  throw Error("unknown NDCG gain '" + name + "' (expected exponential or linear)");
}

const char* gain_name(Gain g) { return g == Gain::kExponential ? "exponential" : "linear"; }

double ndcg_at_k(std::span<const int> ranked_grades, std::span<const int> judged_grades, std::size_t k,
                 Gain gain) {
  if (k == 0) throw Error("NDCG cutoff must be at least 1");
  std::vector<int> ideal(judged_grades.begin(), judged_grades.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double idcg = dcg(ideal, k, gain);
  if (idcg <= 0.0) return 0.0;
  return dcg(ranked_grades, k, gain) / idcg;
}

double ndcg_at_k(const Ranking& ranking, const Qrels& qrels, std::size_t k, Gain gain) {
  const auto& judged = qrels.judgments(ranking.query_id);
  std::vector<int> ranked;
  ranked.reserve(std::min(k, ranking.entries.size()));
  for (std::size_t i = 0; i < ranking.entries.size() && i < k; ++i) {
    auto it = judged.find(ranking.entries[i].id);
    ranked.push_back(it == judged.end() ? 0 : it->second);
  }
  std::vector<int> all;
  all.reserve(judged.size());
  for (const auto& [id, g] : judged) all.push_back(g);
  return ndcg_at_k(ranked, all, k, gain);
}

double paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("paired t-test needs equally long samples");
  const std::size_t n = a.size();
  if (n < 2) throw Error("paired t-test needs at least 2 pairs");
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) return mean == 0.0 ? 1.0 : 0.0;
  const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
  boost::math::students_t dist(static_cast<double>(n - 1));
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return std::clamp(p, 0.0, 1.0);
}

void DeltaHistogram::add(double delta) {
  std::size_t bin;
  if (delta <= -0.25) {
    bin = 0;
  } else if (delta <= -0.05) {
    bin = 1;
  } else if (delta < 0.05) {
    bin = 2;
  } else if (delta < 0.25) {
    bin = 3;
  } else {
    bin = 4;
  }
  ++counts[bin];
}

EvalReport analyze(const std::map<std::string, std::vector<Ranking>>& runs, const Qrels& qrels,
                   const QuerySet& queries, const std::string& baseline, const EvalOptions& options) {
  auto cutoffs = options.cutoffs;
  if (std::find(cutoffs.begin(), cutoffs.end(), options.delta_cutoff) == cutoffs.end()) {
    cutoffs.push_back(options.delta_cutoff);
  }
  std::map<std::string, PerQueryScores> scores;
  for (const auto& [name, rankings] : runs) {
    auto& per_query = scores[name];
    for (auto k : cutoffs) {
      auto& at_k = per_query[k];
      for (const auto& r : rankings) {
        if (!at_k.emplace(r.query_id, ndcg_at_k(r, qrels, k, options.gain)).second) {
          throw Error("run '" + name + "' ranks query " + r.query_id + " twice");
        }
      }
    }
  }
  return analyze_scores(scores, queries, baseline, options);
}

EvalReport analyze_scores(const std::map<std::string, PerQueryScores>& scores, const QuerySet& queries,
                          const std::string& baseline, const EvalOptions& options) {
  if (!scores.count(baseline)) throw Error("baseline run '" + baseline + "' not found");
  EvalReport report;
  report.baseline = baseline;
  report.options = options;
  auto cutoffs = options.cutoffs;
  if (std::find(cutoffs.begin(), cutoffs.end(), options.delta_cutoff) == cutoffs.end()) {
    cutoffs.push_back(options.delta_cutoff);
  }

  auto query_set = [&](const std::string& name, std::size_t k) {
    std::set<std::string> ids;
    auto it = scores.at(name).find(k);
    if (it == scores.at(name).end()) throw Error("run '" + name + "' has no scores at cutoff " + std::to_string(k));
    for (const auto& [qid, v] : it->second) ids.insert(qid);
    return ids;
  };
  const auto reference = query_set(baseline, options.delta_cutoff);
  for (const auto& [name, per_query] : scores) {
    for (auto k : cutoffs) {
      if (query_set(name, k) != reference) {
        throw Error("run '" + name + "' does not cover the same queries as '" + baseline + "'");
      }
    }
  }
  report.query_ids.assign(reference.begin(), reference.end());

  for (const auto& [name, per_query] : scores) {
    MethodReport m;
    m.name = name;
    for (auto k : cutoffs) {
      m.per_query[k] = per_query.at(k);
      double sum = 0.0;
      for (const auto& [qid, v] : m.per_query[k]) sum += v;
      m.mean[k] = reference.empty() ? 0.0 : sum / static_cast<double>(reference.size());
    }
    std::map<std::string, std::pair<double, std::size_t>> subset_acc;
    for (const auto& [qid, v] : m.per_query[options.delta_cutoff]) {
      if (const auto* q = queries.find(qid); q && !q->subset.empty()) {
        auto& acc = subset_acc[q->subset];
        acc.first += v;
        ++acc.second;
      }
    }
    for (const auto& [tag, acc] : subset_acc) m.subset_mean[tag] = acc.first / static_cast<double>(acc.second);
    report.methods.emplace(name, std::move(m));
  }

  const auto& base = report.methods.at(baseline);
  for (auto& [name, m] : report.methods) {
    for (const auto& qid : report.query_ids) {
      double d = m.per_query[options.delta_cutoff].at(qid) - base.per_query.at(options.delta_cutoff).at(qid);
      m.delta[qid] = d;
      m.histogram.add(d);
    }
    if (name == baseline || report.query_ids.size() < 2) continue;
    for (auto k : cutoffs) {
      std::vector<double> a, b;
      for (const auto& qid : report.query_ids) {
        a.push_back(m.per_query[k].at(qid));
        b.push_back(base.per_query.at(k).at(qid));
      }
      m.p_value[k] = paired_t_test(a, b);
    }
  }
  return report;
}

void write_trec_run(std::ostream& out, std::span<const Ranking> rankings, const std::string& tag) {
  for (const auto& r : rankings) {
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
      out << r.query_id << " Q0 " << r.entries[i].id << ' ' << (i + 1) << ' ' << std::setprecision(10)
          << r.entries[i].score << ' ' << tag << '\n';
    }
  }
}

std::vector<Ranking> read_trec_run(std::istream& in, const std::string& source_name) {
  std::map<std::string, std::vector<std::pair<long, ScoredDoc>>> by_query;
  std::vector<std::string> order;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto f = split_ws(line);
    if (f.size() < 5) throw ParseError(source_name, lineno, "expected 'queryId Q0 docId rank score tag'");
    long rank = 0;
    double score = 0.0;
    try {
      rank = std::stol(std::string(f[3]));
      score = std::stod(std::string(f[4]));
    } catch (const std::exception&) {
      throw ParseError(source_name, lineno, "bad rank or score");
    }
    std::string qid(f[0]);
    if (!by_query.count(qid)) order.push_back(qid);
    by_query[qid].push_back({rank, ScoredDoc{std::string(f[2]), score}});
  }
  std::vector<Ranking> out;
  for (const auto& qid : order) {
    auto& rows = by_query[qid];
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    Ranking r;
    r.query_id = qid;
    for (auto& [rank, doc] : rows) r.entries.push_back(std::move(doc));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Ranking> load_trec_run(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_trec_run(in, path);
}

void write_report_tsv(std::ostream& out, const EvalReport& report) {
  const auto& cutoffs = report.options.cutoffs;
  out << "# summary (gain=" << gain_name(report.options.gain) << ", baseline=" << report.baseline << ")\n";
  out << "method";
  for (auto k : cutoffs) out << "\tNDCG@" << k << "\tp@" << k;
  out << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& [name, m] : report.methods) {
    out << name;
    for (auto k : cutoffs) {
      out << '\t' << m.mean.at(k) << '\t';
      if (auto it = m.p_value.find(k); it != m.p_value.end()) {
        out << it->second;
      } else {
        out << '-';
      }
    }
    out << '\n';
  }

  out << "\n# subsets (NDCG@" << report.options.delta_cutoff << ")\nmethod\tsubset\tmean\n";
  for (const auto& [name, m] : report.methods)
    for (const auto& [tag, v] : m.subset_mean) out << name << '\t' << tag << '\t' << v << '\n';

  out << "\n# per-query NDCG@" << report.options.delta_cutoff << " delta vs " << report.baseline
      << "\nmethod\tquery\tndcg\tdelta\n";
  for (const auto& [name, m] : report.methods) {
    for (const auto& qid : report.query_ids) {
      out << name << '\t' << qid << '\t' << m.per_query.at(report.options.delta_cutoff).at(qid) << '\t'
          << m.delta.at(qid) << '\n';
    }
  }
  out.unsetf(std::ios::floatfield);
}

void write_report_json(std::ostream& out, const EvalReport& report) {
  nlohmann::json j;
  j["baseline"] = report.baseline;
  j["gain"] = gain_name(report.options.gain);
  j["cutoffs"] = report.options.cutoffs;
  j["deltaCutoff"] = report.options.delta_cutoff;
  j["queries"] = report.query_ids;
  for (const auto& [name, m] : report.methods) {
    nlohmann::json mj;
    for (const auto& [k, v] : m.mean) mj["ndcg"][std::to_string(k)] = v;
    for (const auto& [k, v] : m.p_value) mj["pValue"][std::to_string(k)] = v;
    mj["subsetMean"] = m.subset_mean;
    mj["histogram"] = m.histogram.counts;
    mj["delta"] = m.delta;
    j["methods"][name] = std::move(mj);
  }
  out << j.dump(2) << '\n';
}

void write_histogram_csv(std::ostream& out, const EvalReport& report) {
  out << "method";
  for (const auto* label : DeltaHistogram::kLabels) out << ',' << '"' << label << '"';
  out << '\n';
  for (const auto& [name, m] : report.methods) {
    out << name;
    for (auto c : m.histogram.counts) out << ',' << c;
    out << '\n';
  }
}

}  // namespace tabret
