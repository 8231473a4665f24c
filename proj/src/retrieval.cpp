#include "tabret/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "tabret/error.hpp"
#include "tabret/text.hpp"

namespace tabret {

namespace {

// Distinct query terms with their multiplicity, in first-occurrence order.
std::vector<std::pair<std::string_view, std::uint32_t>> term_counts(std::span<const std::string> tokens) {
  std::vector<std::pair<std::string_view, std::uint32_t>> out;
  for (const auto& t : tokens) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == t; });
    if (it == out.end()) {
      out.emplace_back(t, 1);
    } else {
      ++it->second;
    }
  }
  return out;
}

bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

double safe_log(double p) { return p > 0.0 ? std::log(p) : kLogProbFloor; }

double smoothed_prob(const FieldIndex& fi, const std::string& term, DocNum doc, double mu) {
  const double denom = static_cast<double>(fi.doc_length(doc)) + mu;
  if (denom <= 0.0) throw Error("document length plus mu is zero");
  const double bg = fi.total_terms() > 0
                        ? static_cast<double>(fi.collection_count(term)) / static_cast<double>(fi.total_terms())
                        : 0.0;
  return (static_cast<double>(fi.tf(term, doc)) + mu * bg) / denom;
}

}  // namespace

void FieldWeights::validate(std::size_t num_fields) const {
  if (weights.size() != num_fields || mu.size() != num_fields) {
    throw Error("field weights cover " + std::to_string(weights.size()) + " fields, index has " +
                std::to_string(num_fields));
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error("negative field weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error("field weights sum to " + std::to_string(sum) + ", not 1");
  for (double m : mu)
    if (!(m >= 0.0)) throw Error("negative smoothing parameter");
}

FieldWeights FieldWeights::uniform(const FieldedIndex& index, std::span<const std::size_t> fields) {
  FieldWeights fw;
  fw.weights.assign(index.num_fields(), 0.0);
  fw.mu.resize(index.num_fields());
  for (std::size_t f = 0; f < index.num_fields(); ++f) fw.mu[f] = default_mu(index.field(f));
  for (auto f : fields) fw.weights.at(f) = 1.0 / static_cast<double>(fields.size());
  return fw;
}

double default_mu(const FieldIndex& field) { return std::max(1.0, field.average_doc_length()); }

double score_lm(const FieldedIndex& index, std::span<const std::string> query_tokens, DocNum doc,
                std::size_t field, double mu) {
  if (mu < 0.0) throw Error("negative smoothing parameter");
  const auto& fi = index.field(field);
  if (static_cast<double>(fi.doc_length(doc)) + mu <= 0.0) throw Error("document length plus mu is zero");
  double score = 0.0;
  for (const auto& [term, count] : term_counts(query_tokens)) {
    score += count * safe_log(smoothed_prob(fi, std::string(term), doc, mu));
  }
  return score;
}

double score_mlm(const FieldedIndex& index, std::span<const std::string> query_tokens, DocNum doc,
                 const FieldWeights& weights) {
  double score = 0.0;
  for (const auto& [term, count] : term_counts(query_tokens)) {
    const std::string t(term);
    double p = 0.0;
    for (std::size_t f = 0; f < weights.weights.size(); ++f) {
      if (weights.weights[f] == 0.0) continue;
      p += weights.weights[f] * smoothed_prob(index.field(f), t, doc, weights.mu[f]);
    }
    score += count * safe_log(p);
  }
  return score;
}

void sort_ranking(std::vector<ScoredDoc>& entries) {
  std::sort(entries.begin(), entries.end(), ranks_before);
}

double score_document(const FieldedIndex& index, std::span<const std::string> query_tokens, DocNum doc,
                      const Scorer& scorer) {
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, LmScorer>) {
          return score_lm(index, query_tokens, doc, s.field, s.mu);
        } else {
          return score_mlm(index, query_tokens, doc, s.weights);
        }
      },
      scorer);
}

Ranking retrieve_topk(const FieldedIndex& index, std::span<const std::string> query_tokens,
                      const Scorer& scorer, std::size_t k) {
  if (k == 0) throw Error("k must be at least 1");
  Ranking ranking;
  if (query_tokens.empty()) return ranking;

  std::vector<std::size_t> fields;
  if (const auto* lm = std::get_if<LmScorer>(&scorer)) {
    fields.push_back(lm->field);
  } else {
    const auto& fw = std::get<MlmScorer>(scorer).weights;
    fw.validate(index.num_fields());
    for (std::size_t f = 0; f < fw.weights.size(); ++f)
      if (fw.weights[f] > 0.0) fields.push_back(f);
  }

  std::vector<DocNum> candidates;
  for (auto f : fields)
    for (const auto& tok : query_tokens)
      for (const auto& p : index.field(f).postings(tok)) candidates.push_back(p.doc);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  ranking.entries.reserve(candidates.size());
  for (auto d : candidates) ranking.entries.push_back({index.doc_id(d), score_document(index, query_tokens, d, scorer)});

  if (ranking.entries.size() > k) {
    std::partial_sort(ranking.entries.begin(), ranking.entries.begin() + static_cast<std::ptrdiff_t>(k),
                      ranking.entries.end(), ranks_before);
    ranking.entries.resize(k);
  } else {
    std::sort(ranking.entries.begin(), ranking.entries.end(), ranks_before);
  }
  return ranking;
}

EntityRetriever::EntityRetriever(const EntityIndex& index, std::size_t k) : index_(&index), k_(k) {
  if (k == 0) throw Error("entity retrieval k must be at least 1");
  std::vector<std::size_t> all(index.num_fields());
  std::iota(all.begin(), all.end(), 0);
  scorer_.weights = FieldWeights::uniform(index, all);
}

std::vector<std::string> EntityRetriever::retrieve(std::string_view text) const {
  auto tokens = tokenize(text);
  std::vector<std::string> out;
  if (tokens.empty() || index_->num_docs() == 0) return out;
  auto ranking = retrieve_topk(*index_, tokens, scorer_, k_);
  out.reserve(ranking.entries.size());
  for (auto& e : ranking.entries) out.push_back(std::move(e.id));
  return out;
}

}  // namespace tabret
