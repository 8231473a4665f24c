#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tabret/corpus.hpp"
#include "tabret/eval.hpp"
#include "tabret/retrieval.hpp"

namespace tabret {

inline const std::vector<double> kDefaultMuGrid = {10, 50, 100, 500, 1000, 2500, 5000};

/// Mean NDCG@k of top-k retrieval over every query that has judgments.
double mean_retrieval_ndcg(const FieldedIndex& index, const QuerySet& queries, const Qrels& qrels,
                           const Scorer& scorer, std::size_t k = 20, Gain gain = Gain::kExponential);

/// Grid value of mu maximizing single-field NDCG@20; the first best wins ties.
double sweep_mu(const FieldedIndex& index, std::size_t field, const QuerySet& queries, const Qrels& qrels,
                std::span<const double> grid = kDefaultMuGrid);

struct CoordinateAscentOptions {
  double step = 0.05;
  std::size_t sweeps = 3;
  std::size_t cutoff = 20;
};

/// Coordinate ascent on mean NDCG@cutoff over the weight simplex. Only fields
/// with a positive starting weight move. For each field every grid value
/// 0, step, ..., 1 is tried, the other active fields sharing the remainder in
/// proportion to their current weights. A move is kept only if it strictly
/// improves the objective.
FieldWeights train_field_weights(const FieldedIndex& index, const QuerySet& queries, const Qrels& qrels,
                                 FieldWeights start, const CoordinateAscentOptions& opts = {});

}  // namespace tabret
