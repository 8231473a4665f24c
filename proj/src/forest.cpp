#include "tabret/forest.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>

#include "tabret/error.hpp"
#include "tabret/random.hpp"

namespace tabret {

double RegressionTree::predict(std::span<const double> x) const {
  std::uint32_t i = 0;
  while (nodes_[i].feature >= 0) {
    const auto& n = nodes_[i];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes_[i].value;
}

std::size_t RegressionTree::num_leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

class TreeGrower {
 public:
  TreeGrower(const Matrix& x, std::span<const double> y, const ForestConfig& cfg, std::uint64_t seed)
      : x_(x), y_(y), cfg_(cfg), rng_(seed) {}

  RegressionTree grow(std::vector<double>& importance) {
    const std::size_t n = x_.rows;
    std::vector<std::uint32_t> samples(n);
    if (cfg_.bootstrap) {
      for (auto& s : samples) s = static_cast<std::uint32_t>(uniform_index(rng_, n));
    } else {
      std::iota(samples.begin(), samples.end(), 0u);
    }

    RegressionTree tree;
    struct Pending {
      std::uint32_t node;
      std::size_t begin;
      std::size_t end;
    };
    std::vector<Pending> stack;
    tree.nodes_.emplace_back();
    stack.push_back({0, 0, samples.size()});

    features_.resize(x_.cols);
    while (!stack.empty()) {
      const auto cur = stack.back();
      stack.pop_back();
      const std::span<std::uint32_t> node_samples(samples.data() + cur.begin, cur.end - cur.begin);

      double sum = 0.0;
      bool pure = true;
      const double first = y_[node_samples[0]];
      for (auto s : node_samples) {
        sum += y_[s];
        pure = pure && y_[s] == first;
      }
      const double count = static_cast<double>(node_samples.size());
      tree.nodes_[cur.node].value = sum / count;
      if (pure || node_samples.size() < 2 * cfg_.min_samples_leaf) continue;

      auto split = find_split(node_samples, sum);
      if (!split.found) continue;

      auto mid = std::partition(node_samples.begin(), node_samples.end(), [&](std::uint32_t s) {
        return x_(s, split.feature) <= split.threshold;
      });
      const std::size_t left_size = static_cast<std::size_t>(mid - node_samples.begin());
      importance[split.feature] += std::max(0.0, split.gain);

      const auto left = static_cast<std::uint32_t>(tree.nodes_.size());
      tree.nodes_.emplace_back();
      tree.nodes_.emplace_back();
      auto& node = tree.nodes_[cur.node];
      node.feature = static_cast<std::int32_t>(split.feature);
      node.threshold = split.threshold;
      node.left = left;
      node.right = left + 1;
      stack.push_back({left + 1, cur.begin + left_size, cur.end});
      stack.push_back({left, cur.begin, cur.begin + left_size});
    }
    return tree;
  }

 private:
  struct Split {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain = 0.0;
  };

  Split find_split(std::span<const std::uint32_t> node_samples, double sum) {
    const std::size_t n = node_samples.size();
    const double parent = sum * sum / static_cast<double>(n);
    std::iota(features_.begin(), features_.end(), std::size_t{0});

    Split best;
    std::size_t examined = 0;
    for (std::size_t k = 0; k < features_.size() && examined < cfg_.max_features; ++k) {
      std::swap(features_[k], features_[k + uniform_index(rng_, features_.size() - k)]);
      const std::size_t f = features_[k];

      pairs_.clear();
      for (auto s : node_samples) pairs_.emplace_back(x_(s, f), y_[s]);
      std::sort(pairs_.begin(), pairs_.end());
      if (pairs_.front().first == pairs_.back().first) continue;
      ++examined;

      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += pairs_[i].second;
        if (pairs_[i].first == pairs_[i + 1].first) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (nl < cfg_.min_samples_leaf || nr < cfg_.min_samples_leaf) continue;
        const double right_sum = sum - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(nl) +
                            right_sum * right_sum / static_cast<double>(nr) - parent;
        double threshold = pairs_[i].first + (pairs_[i + 1].first - pairs_[i].first) / 2.0;
        if (!(threshold < pairs_[i + 1].first)) threshold = pairs_[i].first;
        const bool better = !best.found || gain > best.gain ||
                            (gain == best.gain &&
                             (f < best.feature || (f == best.feature && threshold < best.threshold)));
        if (better) best = {true, f, threshold, gain};
      }
    }
    return best;
  }

  const Matrix& x_;
  std::span<const double> y_;
  const ForestConfig& cfg_;
  Rng rng_;
  std::vector<std::size_t> features_;
  std::vector<std::pair<double, double>> pairs_;
};

RegressionForest train_forest(const Matrix& x, std::span<const double> y, const ForestConfig& cfg) {
  if (x.rows == 0 || x.cols == 0) throw Error("cannot train a forest on empty data");
  if (y.size() != x.rows) throw Error("target count does not match the number of rows");
  if (cfg.num_trees == 0) throw Error("forest needs at least one tree");
  if (cfg.max_features == 0 || cfg.max_features > x.cols) {
    throw Error("max features per split must be in [1, " + std::to_string(x.cols) + "]");
  }
  if (cfg.min_samples_leaf == 0) throw Error("min samples per leaf must be at least 1");

  RegressionForest forest;
  forest.num_features_ = x.cols;
  forest.trees_.resize(cfg.num_trees);
  std::vector<std::vector<double>> importance(cfg.num_trees, std::vector<double>(x.cols, 0.0));

  auto build = [&](std::size_t t) {
    TreeGrower grower(x, y, cfg, derive_seed(cfg.seed, t));
    forest.trees_[t] = grower.grow(importance[t]);
  };
  const std::size_t workers = std::clamp<std::size_t>(cfg.threads, 1, cfg.num_trees);
  if (workers == 1) {
    for (std::size_t t = 0; t < cfg.num_trees; ++t) build(t);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < cfg.num_trees; t += workers) build(t);
      });
    }
  }

  forest.importances_.assign(x.cols, 0.0);
  for (const auto& imp : importance)
    for (std::size_t f = 0; f < x.cols; ++f) forest.importances_[f] += imp[f];
  const double total = std::accumulate(forest.importances_.begin(), forest.importances_.end(), 0.0);
  if (total > 0.0)
    for (auto& v : forest.importances_) v /= total;
  return forest;
}

double RegressionForest::predict(std::span<const double> x) const {
  if (x.size() != num_features_) {
    throw Error("feature vector has " + std::to_string(x.size()) + " values, model expects " +
                std::to_string(num_features_));
  }
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(x);
  return sum / static_cast<double>(trees_.size());
}

namespace {

constexpr const char* kForestMagic = "tabret-forest";
constexpr int kForestVersion = 1;

std::string fmt(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw Error("bad number '" + s + "' in forest snapshot");
  return v;
}

}  // namespace

void RegressionForest::save(std::ostream& out) const {
  out << kForestMagic << ' ' << kForestVersion << '\n';
  out << num_features_ << ' ' << trees_.size() << '\n';
  for (std::size_t f = 0; f < importances_.size(); ++f) out << (f ? " " : "") << fmt(importances_[f]);
  out << '\n';
  for (const auto& t : trees_) {
    out << t.nodes_.size() << '\n';
    for (const auto& n : t.nodes_) {
      out << n.feature << ' ' << fmt(n.threshold) << ' ' << n.left << ' ' << n.right << ' ' << fmt(n.value)
          << '\n';
    }
  }
  if (!out) throw Error("failed writing forest snapshot");
}

RegressionForest RegressionForest::load(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kForestMagic) throw Error("not a forest snapshot");
  if (version != kForestVersion) throw Error("unsupported forest snapshot version " + std::to_string(version));
  RegressionForest forest;
  std::size_t ntrees = 0;
  if (!(in >> forest.num_features_ >> ntrees)) throw Error("truncated forest snapshot");
  std::string tok;
  forest.importances_.resize(forest.num_features_);
  for (auto& v : forest.importances_) {
    if (!(in >> tok)) throw Error("truncated forest snapshot");
    v = parse_double(tok);
  }
  forest.trees_.resize(ntrees);
  for (auto& t : forest.trees_) {
    std::size_t nn = 0;
    if (!(in >> nn) || nn == 0) throw Error("truncated forest snapshot");
    t.nodes_.resize(nn);
    for (std::size_t i = 0; i < nn; ++i) {
      auto& n = t.nodes_[i];
      std::string thr, val;
      if (!(in >> n.feature >> thr >> n.left >> n.right >> val)) throw Error("truncated forest snapshot");
      n.threshold = parse_double(thr);
      n.value = parse_double(val);
      // Children always follow their parent, which also rules out cycles.
      if (n.feature >= 0 && (static_cast<std::size_t>(n.feature) >= forest.num_features_ || n.left <= i ||
                             n.right <= i || n.left >= nn || n.right >= nn)) {
        throw Error("corrupt forest snapshot");
      }
    }
  }
  return forest;
}

}  // namespace tabret
