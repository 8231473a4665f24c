#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "tabret/error.hpp"
#include "tabret/forest.hpp"
#include "tabret/random.hpp"

using namespace tabret;

namespace {

struct Data {
  Matrix x;
  std::vector<double> y;
};

/// y = 3 * x1; x0 is noise, x2 is constant.
Data linear_data(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Data d{Matrix(n, 3), {}};
  for (std::size_t i = 0; i < n; ++i) {
    d.x(i, 0) = uniform_unit(rng);
    d.x(i, 1) = uniform_unit(rng);
    d.x(i, 2) = 5.0;
    d.y.push_back(3.0 * d.x(i, 1));
  }
  return d;
}

Data grade_data(std::size_t n, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Data d{Matrix(n, cols), {}};
  for (auto& v : d.x.data) v = static_cast<double>(uniform_index(rng, 10));
  for (std::size_t i = 0; i < n; ++i) d.y.push_back(static_cast<double>(uniform_index(rng, 3)));
  return d;
}

std::string snapshot(const RegressionForest& f) {
  std::ostringstream ss;
  f.save(ss);
  return ss.str();
}

}  // namespace

TEST_CASE("constant target gives single-leaf trees") {
  Matrix x(10, 2);
  for (std::size_t i = 0; i < 10; ++i) x(i, 0) = x(i, 1) = static_cast<double>(i);
  std::vector<double> y(10, 1.5);
  ForestConfig cfg;
  cfg.num_trees = 5;
  cfg.max_features = 2;
  auto f = train_forest(x, y, cfg);
  for (const auto& t : f.trees()) CHECK(t.num_leaves() == 1);
  const std::vector<double> probe{3.0, 100.0};
  CHECK(f.predict(probe) == 1.5);
  for (double v : f.feature_importances()) CHECK(v == 0.0);
}

TEST_CASE("importance concentrates on the informative feature") {
  auto d = linear_data(200, 1);
  ForestConfig cfg;
  cfg.num_trees = 50;
  auto f = train_forest(d.x, d.y, cfg);
  auto imp = f.feature_importances();
  CHECK(imp[1] > 0.9);
  CHECK(imp[2] == 0.0);
  CHECK(std::accumulate(imp.begin(), imp.end(), 0.0) == doctest::Approx(1.0));
}

TEST_CASE("constant features do not use up the feature budget") {
  // With one feature per split, a fully constant column must be skipped
  // rather than ending the search, so trees still fit the data.
  auto d = linear_data(50, 2);
  ForestConfig cfg;
  cfg.num_trees = 20;
  cfg.max_features = 1;
  cfg.bootstrap = false;
  auto f = train_forest(d.x, d.y, cfg);
  for (std::size_t i = 0; i < d.x.rows; ++i) CHECK(f.predict(d.x.row(i)) == doctest::Approx(d.y[i]));
  CHECK(f.feature_importances()[2] == 0.0);
}

TEST_CASE("without bootstrap a fully grown tree reproduces distinct training rows") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto d = grade_data(60, 4, seed);
    ForestConfig cfg;
    cfg.num_trees = 1;
    cfg.max_features = 2;
    cfg.bootstrap = false;
    cfg.seed = seed;
    auto f = train_forest(d.x, d.y, cfg);
    for (std::size_t i = 0; i < d.x.rows; ++i) {
      // Rows with identical features and different targets cannot be separated.
      bool duplicate = false;
      for (std::size_t j = 0; j < d.x.rows; ++j)
        duplicate = duplicate || (j != i && std::equal(d.x.row(i).begin(), d.x.row(i).end(), d.x.row(j).begin()) &&
                                  d.y[i] != d.y[j]);
      if (!duplicate) CHECK(f.predict(d.x.row(i)) == d.y[i]);
    }
  }
}

TEST_CASE("predictions are the mean of the trees and stay within the target range") {
  auto d = grade_data(80, 5, 3);
  ForestConfig cfg;
  cfg.num_trees = 7;
  auto f = train_forest(d.x, d.y, cfg);
  const auto [lo, hi] = std::minmax_element(d.y.begin(), d.y.end());
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> probe(5);
    for (auto& v : probe) v = uniform_real(rng, -2.0, 12.0);
    double sum = 0.0;
    for (const auto& t : f.trees()) sum += t.predict(probe);
    CHECK(f.predict(probe) == doctest::Approx(sum / 7.0).epsilon(1e-12));
    CHECK(f.predict(probe) >= *lo);
    CHECK(f.predict(probe) <= *hi);
  }
}

TEST_CASE("training is deterministic for any thread count") {
  auto d = grade_data(120, 6, 5);
  ForestConfig cfg;
  cfg.num_trees = 40;
  cfg.seed = 77;
  cfg.threads = 1;
  const auto one = snapshot(train_forest(d.x, d.y, cfg));
  CHECK(one == snapshot(train_forest(d.x, d.y, cfg)));
  for (std::size_t threads : {2u, 3u, 8u, 64u}) {
    cfg.threads = threads;
    CHECK(snapshot(train_forest(d.x, d.y, cfg)) == one);
  }
  cfg.seed = 78;
  cfg.threads = 1;
  CHECK(snapshot(train_forest(d.x, d.y, cfg)) != one);
}

TEST_CASE("split ties go to the smallest feature index") {
  auto d = linear_data(40, 6);
  for (std::size_t i = 0; i < d.x.rows; ++i) d.x(i, 0) = d.x(i, 1);
  ForestConfig cfg;
  cfg.num_trees = 10;
  cfg.max_features = 3;
  auto f = train_forest(d.x, d.y, cfg);
  for (const auto& t : f.trees())
    for (const auto& n : t.nodes()) CHECK(n.feature <= 0);
  CHECK(f.feature_importances()[0] == doctest::Approx(1.0));
}

TEST_CASE("min samples per leaf bounds the leaf count") {
  auto d = grade_data(64, 3, 8);
  ForestConfig cfg;
  cfg.num_trees = 3;
  cfg.bootstrap = false;
  cfg.min_samples_leaf = 8;
  auto f = train_forest(d.x, d.y, cfg);
  for (const auto& t : f.trees()) CHECK(t.num_leaves() <= 8);
}

TEST_CASE("forest snapshot round trip") {
  auto d = grade_data(50, 4, 9);
  ForestConfig cfg;
  cfg.num_trees = 5;
  auto f = train_forest(d.x, d.y, cfg);
  std::stringstream ss;
  f.save(ss);
  auto g = RegressionForest::load(ss);
  CHECK(g.num_features() == 4);
  CHECK(snapshot(g) == snapshot(f));
  CHECK(std::equal(f.feature_importances().begin(), f.feature_importances().end(),
                   g.feature_importances().begin()));
  for (std::size_t i = 0; i < d.x.rows; ++i) CHECK(g.predict(d.x.row(i)) == f.predict(d.x.row(i)));

  std::stringstream bad("not-a-forest 1\n");
  CHECK_THROWS_AS(RegressionForest::load(bad), Error);
  auto text = snapshot(f);
  std::stringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(RegressionForest::load(truncated), Error);
  std::stringstream version("tabret-forest 99\n");
  CHECK_THROWS_AS(RegressionForest::load(version), Error);
}

TEST_CASE("invalid forest inputs") {
  auto d = grade_data(10, 3, 1);
  ForestConfig cfg;
  cfg.num_trees = 2;
  CHECK_THROWS_AS(train_forest(Matrix{}, {}, cfg), Error);
  std::vector<double> short_y(d.y.begin(), d.y.end() - 1);
  CHECK_THROWS_AS(train_forest(d.x, short_y, cfg), Error);
  auto bad = cfg;
  bad.num_trees = 0;
  CHECK_THROWS_AS(train_forest(d.x, d.y, bad), Error);
  bad = cfg;
  bad.max_features = 0;
  CHECK_THROWS_AS(train_forest(d.x, d.y, bad), Error);
  bad.max_features = 4;
  CHECK_THROWS_AS(train_forest(d.x, d.y, bad), Error);
  bad = cfg;
  bad.min_samples_leaf = 0;
  CHECK_THROWS_AS(train_forest(d.x, d.y, bad), Error);
  auto f = train_forest(d.x, d.y, cfg);
  const std::vector<double> wrong(2, 0.0);
  CHECK_THROWS_AS(f.predict(wrong), Error);
}
