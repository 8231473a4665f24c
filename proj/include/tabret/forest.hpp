#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace tabret {

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct ForestConfig {
  std::size_t num_trees = 1000;
  std::size_t max_features = 3;
  std::size_t min_samples_leaf = 1;
  bool bootstrap = true;
  std::uint64_t seed = 42;
  /// Worker threads for tree building; results do not depend on this.
  std::size_t threads = 1;
};

/// Binary regression tree. Rows go left when x[feature] <= threshold.
class RegressionTree {
 public:
  struct Node {
    // feature < 0 marks a leaf.
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double value = 0.0;
  };

  double predict(std::span<const double> x) const;
  std::span<const Node> nodes() const { return nodes_; }
  std::size_t num_leaves() const;

 private:
  friend class TreeGrower;
  friend class RegressionForest;
  std::vector<Node> nodes_;
};

class RegressionForest {
 public:
  std::size_t num_features() const { return num_features_; }
  std::span<const RegressionTree> trees() const { return trees_; }

  /// Mean of the per-tree predictions. Throws on a dimension mismatch.
  double predict(std::span<const double> x) const;

  /// Total variance reduction per feature, normalized to sum 1 (all zeros
  /// when no tree has a split).
  std::span<const double> feature_importances() const { return importances_; }

  /// Text snapshot, exact for every stored double.
  void save(std::ostream& out) const;
  static RegressionForest load(std::istream& in);

 private:
  friend RegressionForest train_forest(const Matrix&, std::span<const double>, const ForestConfig&);
  std::size_t num_features_ = 0;
  std::vector<RegressionTree> trees_;
  std::vector<double> importances_;
};

/// Bagged regression trees. At each node the best variance-reducing split is
/// searched over up to `max_features` randomly drawn features; features that
/// are constant in the node do not count towards that budget. Nodes are split
/// until pure or too small to leave `min_samples_leaf` rows per child. Tree t
/// draws from a stream seeded by (seed, t), so the forest is identical for any
/// thread count.
RegressionForest train_forest(const Matrix& x, std::span<const double> y, const ForestConfig& cfg);

}  // namespace tabret
