#include "tabret/tuning.hpp"

#include <cmath>

#include "tabret/error.hpp"
#include "tabret/text.hpp"

namespace tabret {

double mean_retrieval_ndcg(const FieldedIndex& index, const QuerySet& queries, const Qrels& qrels,
                           const Scorer& scorer, std::size_t k, Gain gain) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& q : queries.queries()) {
    if (qrels.judgments(q.id).empty()) continue;
    auto tokens = tokenize(q.text);
    auto ranking = retrieve_topk(index, tokens, scorer, k);
    ranking.query_id = q.id;
    sum += ndcg_at_k(ranking, qrels, k, gain);
    ++n;
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

double sweep_mu(const FieldedIndex& index, std::size_t field, const QuerySet& queries, const Qrels& qrels,
                std::span<const double> grid) {
  if (grid.empty()) throw Error("empty mu grid");
  double best_mu = grid.front();
  double best = -1.0;
  for (double mu : grid) {
    double v = mean_retrieval_ndcg(index, queries, qrels, LmScorer{field, mu});
    if (v > best) {
      best = v;
      best_mu = mu;
    }
  }
  return best_mu;
}

FieldWeights train_field_weights(const FieldedIndex& index, const QuerySet& queries, const Qrels& qrels,
                                 FieldWeights start, const CoordinateAscentOptions& opts) {
  start.validate(index.num_fields());
  if (!(opts.step > 0.0 && opts.step <= 1.0)) throw Error("coordinate ascent step must be in (0,1]");
  std::vector<std::size_t> active;
  for (std::size_t f = 0; f < start.weights.size(); ++f)
    if (start.weights[f] > 0.0) active.push_back(f);

  auto objective = [&](const FieldWeights& w) {
    return mean_retrieval_ndcg(index, queries, qrels, MlmScorer{w}, opts.cutoff);
  };

  FieldWeights best = start;
  double best_score = objective(best);
  const auto steps = static_cast<std::size_t>(std::llround(1.0 / opts.step));

  for (std::size_t sweep = 0; sweep < opts.sweeps; ++sweep) {
    for (auto f : active) {
      for (std::size_t s = 0; s <= steps; ++s) {
        const double v = std::min(1.0, static_cast<double>(s) * opts.step);
        FieldWeights cand = best;
        double others = 0.0;
        for (auto g : active)
          if (g != f) others += best.weights[g];
        std::size_t n_others = active.size() - 1;
        if (n_others == 0 && v != 1.0) continue;
        for (auto g : active) {
          if (g == f) {
            cand.weights[g] = v;
          } else if (others > 0.0) {
            cand.weights[g] = best.weights[g] / others * (1.0 - v);
          } else {
            cand.weights[g] = (1.0 - v) / static_cast<double>(n_others);
          }
        }
        double score = objective(cand);
        if (score > best_score) {
          best_score = score;
          best = std::move(cand);
        }
      }
    }
  }
  return best;
}

}  // namespace tabret
