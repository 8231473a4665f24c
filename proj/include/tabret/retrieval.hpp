#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tabret/index.hpp"

namespace tabret {

/// Contribution of a query term that has zero probability under the document
/// model: ln(1e-12). Keeps scores finite.
inline constexpr double kLogProbFloor = -27.631021115928547;

/// Mixture weights and Dirichlet priors, one entry per index field. Fields with
/// weight 0 are ignored by the mixture.
struct FieldWeights {
  std::vector<double> weights;
  std::vector<double> mu;

  /// Throws unless sizes match `num_fields`, weights are non-negative and sum
  /// to 1 within 1e-9, and every mu is non-negative.
  void validate(std::size_t num_fields) const;

  /// Equal weight over `fields`, zero elsewhere; mu from default_mu.
  static FieldWeights uniform(const FieldedIndex& index, std::span<const std::size_t> fields);
};

/// Default Dirichlet prior for a field: its average document length, floored
/// at 1 so an empty field still has a defined smoothed model.
double default_mu(const FieldIndex& field);

/// Dirichlet-smoothed query likelihood of a single field:
/// sum over query terms of c(t;q) * ln((tf + mu*P(t|C)) / (|d| + mu)).
double score_lm(const FieldedIndex& index, std::span<const std::string> query_tokens, DocNum doc,
                std::size_t field, double mu);

/// Mixture of field language models: sum over query terms of
/// c(t;q) * ln(sum_f w_f * P(t | theta_{d,f})).
double score_mlm(const FieldedIndex& index, std::span<const std::string> query_tokens, DocNum doc,
                 const FieldWeights& weights);

struct ScoredDoc {
  std::string id;
  double score = 0.0;

  bool operator==(const ScoredDoc&) const = default;
};

/// Documents in descending score order; ties by ascending id.
struct Ranking {
  std::string query_id;
  std::vector<ScoredDoc> entries;
};

/// Orders entries by descending score, ascending id.
void sort_ranking(std::vector<ScoredDoc>& entries);

struct LmScorer {
  std::size_t field;
  double mu;
};

struct MlmScorer {
  FieldWeights weights;
};

using Scorer = std::variant<LmScorer, MlmScorer>;

double score_document(const FieldedIndex& index, std::span<const std::string> query_tokens, DocNum doc,
                      const Scorer& scorer);

/// Top-k documents containing at least one query term in a scored field.
/// An empty query yields an empty ranking; k must be at least 1.
Ranking retrieve_topk(const FieldedIndex& index, std::span<const std::string> query_tokens,
                      const Scorer& scorer, std::size_t k);

/// Entity retrieval with a uniform mixture over the five entity fields.
class EntityRetriever {
 public:
  static constexpr std::size_t kDefaultK = 10;

  explicit EntityRetriever(const EntityIndex& index, std::size_t k = kDefaultK);

  /// Ids of the top-k entities for `text`, best first. Empty text (after
  /// tokenization) returns nothing.
  std::vector<std::string> retrieve(std::string_view text) const;

  std::size_t k() const { return k_; }
  const EntityIndex& index() const { return *index_; }

 private:
  const EntityIndex* index_;
  MlmScorer scorer_;
  std::size_t k_;
};

inline std::vector<std::string> retrieve_entities(const EntityIndex& index, std::string_view text,
                                                  std::size_t k = EntityRetriever::kDefaultK) {
  return EntityRetriever(index, k).retrieve(text);
}

}  // namespace tabret
