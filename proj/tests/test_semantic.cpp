#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "tabret/error.hpp"
#include "tabret/random.hpp"
#include "tabret/semantic.hpp"

using namespace tabret;
using tabret::testing::make_entity;
using tabret::testing::make_table;

namespace {

SemanticVector dense(std::vector<float> v, Representation rep = Representation::kWord) {
  SemanticVector s;
  s.representation = rep;
  s.dense = std::move(v);
  return s;
}

SemanticVector sparse(std::vector<std::string> dims, Representation rep = Representation::kEntity) {
  std::sort(dims.begin(), dims.end());
  SemanticVector s;
  s.representation = rep;
  s.sparse = std::move(dims);
  return s;
}

std::vector<SemanticVector> random_dense(Rng& rng, std::size_t n, std::size_t dim) {
  std::vector<SemanticVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<float> v(dim);
    for (auto& x : v) x = static_cast<float>(standard_normal(rng));
    out.push_back(dense(std::move(v)));
  }
  return out;
}

std::vector<SemanticVector> random_sparse(Rng& rng, std::size_t n) {
  std::vector<SemanticVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> dims;
    for (int d = 0; d < 8; ++d)
      if (uniform_index(rng, 3) == 0) dims.push_back("e" + std::to_string(d));
    if (dims.empty()) dims.push_back("e0");
    out.push_back(sparse(dims));
  }
  return out;
}

/// Cosine computed directly in double precision.
double oracle_cosine(const std::vector<float>& a, const std::vector<float>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += double(a[i]) * b[i];
    na += double(a[i]) * a[i];
    nb += double(b[i]) * b[i];
  }
  return dot / std::sqrt(na * nb);
}

struct SmallWorld {
  KnowledgeBase kb;
  EntityIndex entity_index;
  EmbeddingStore words{2};
  EmbeddingStore graph{2};

  SmallWorld() {
    kb.add(make_entity("e:brazil", {"Brazil"}, {"e:football"}, {"c:countries", "c:south_america"}));
    kb.add(make_entity("e:germany", {"Germany"}, {"e:football"}, {"c:countries"}));
    kb.add(make_entity("e:football", {"Football"}, {}, {"c:sports"}));
    kb.add(make_entity("e:nocat", {"Nowhere"}));
    entity_index = build_entity_index(kb);
    words.add("world", std::vector<float>{1, 0});
    words.add("cup", std::vector<float>{0, 1});
    words.add("zero", std::vector<float>{0, 0});
    graph.add("e:brazil", std::vector<float>{1, 1});
    graph.add("e:germany", std::vector<float>{1, -1});
  }
};

}  // namespace

TEST_CASE("word term extraction") {
  CHECK(extract_query_words("video games").terms == std::vector<std::string>{"video", "games"});
  CHECK(extract_query_words("a a b").size() == 2);
  auto t = make_table("t", "Ibanez", "Serial numbers", {"year"}, {{"bodyonly"}}, "section");
  CHECK(extract_table_words(t).terms == std::vector<std::string>{"ibanez", "serial", "numbers", "year"});
  CHECK_FALSE(extract_table_words(t).contains("bodyonly"));
  CHECK_FALSE(extract_table_words(t).contains("section"));
}

TEST_CASE("column entity rate and core column") {
  auto t = make_table("t", "", "", {"a", "b"}, {{"@e1|x", "@e5|p"}, {"@e2|y", "q"}, {"z", "r"}, {"@e3|w", "s"}});
  CHECK(column_entity_rate(t, 0) == doctest::Approx(0.75));
  CHECK(column_entity_rate(t, 1) == doctest::Approx(0.25));
  CHECK(core_column(t) == 0);

  auto right = make_table("r", "", "", {"a", "b"}, {{"@e1|x", "@e5|p"}, {"y", "@e6|q"}});
  CHECK(core_column(right) == 1);
  auto tie = make_table("tie", "", "", {"a", "b"}, {{"@e1|x", "y"}, {"x", "@e6|q"}});
  CHECK(core_column(tie) == 0);

  CHECK_THROWS_AS(core_column(make_table("e", "", "", {}, {})), Error);
  CHECK_THROWS_AS(core_column(make_table("h", "", "", {"a"}, {})), Error);
}

TEST_CASE("core column ignores header rows and is invariant to row order") {
  auto t = make_table("t", "", "", {"a", "b"}, {{"@e1|A", "@e2|B"}, {"x", "@e3|y"}, {"@e4|z", "w"}, {"v", "@e5|u"}});
  t.num_header_rows = 1;
  CHECK(core_column(t) == 1);
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    auto p = t;
    std::vector<TableRow> data(p.rows.begin() + 1, p.rows.end());
    shuffle(data, rng);
    std::copy(data.begin(), data.end(), p.rows.begin() + 1);
    CHECK(core_column(p) == core_column(t));
  }
}

TEST_CASE("table and query entity extraction") {
  SmallWorld w;
  EntityRetriever retriever(w.entity_index);
  auto t = make_table("t", "Germany", "Football and Brazil", {"team"}, {{"@e:brazil|Brazil"}, {"@e:brazil|Brazil"}});
  auto ents = extract_table_entities(t, retriever);
  CHECK(ents.kind == TermKind::kEntity);
  CHECK(ents.size() == 3);
  CHECK(std::count(ents.terms.begin(), ents.terms.end(), "e:brazil") == 1);
  CHECK(ents.contains("e:germany"));
  CHECK(ents.contains("e:football"));

  auto none = make_table("n", "", "", {"x"}, {{"plain"}});
  CHECK(extract_table_entities(none, retriever).empty());
  CHECK(extract_query_entities("germany", retriever).terms == std::vector<std::string>{"e:germany"});
  CHECK(extract_query_entities("", retriever).empty());
  CHECK(extract_query_entities("martian", retriever).empty());
}

TEST_CASE("embedding terms into the four spaces") {
  SmallWorld w;
  SemanticSpace space(w.kb, &w.words, &w.graph);

  auto brazil = *space.embed("e:brazil", TermKind::kEntity, Representation::kEntity);
  auto football = *space.embed("e:football", TermKind::kEntity, Representation::kEntity);
  CHECK(brazil.sparse == SparseVector{"e:brazil", "e:football"});
  CHECK(football.sparse == SparseVector{"e:brazil", "e:football", "e:germany"});

  auto cats = *space.embed("e:brazil", TermKind::kEntity, Representation::kCategory);
  CHECK(cats.sparse == SparseVector{"c:countries", "c:south_america"});
  CHECK_FALSE(space.embed("e:nocat", TermKind::kEntity, Representation::kCategory).has_value());
  CHECK_FALSE(space.embed("e:unknown", TermKind::kEntity, Representation::kEntity).has_value());

  CHECK(space.embed("world", TermKind::kWord, Representation::kWord)->dense == std::vector<float>{1, 0});
  CHECK_FALSE(space.embed("oov", TermKind::kWord, Representation::kWord).has_value());
  CHECK_FALSE(space.embed("zero", TermKind::kWord, Representation::kWord).has_value());
  CHECK(space.embed("e:brazil", TermKind::kEntity, Representation::kGraph).has_value());
  CHECK_FALSE(space.embed("e:football", TermKind::kEntity, Representation::kGraph).has_value());

  CHECK_THROWS_AS(space.embed("world", TermKind::kWord, Representation::kEntity), Error);
  CHECK_THROWS_AS(space.embed("e:brazil", TermKind::kEntity, Representation::kWord), Error);

  SemanticSpace bare(w.kb, nullptr, nullptr);
  CHECK_FALSE(bare.embed("world", TermKind::kWord, Representation::kWord).has_value());
}

TEST_CASE("early fusion examples") {
  std::vector<SemanticVector> a{dense({1, 0})}, b{dense({0, 1})};
  CHECK(early_fusion(a, a) == doctest::Approx(1.0));
  CHECK(early_fusion(a, b) == doctest::Approx(0.0));
  std::vector<SemanticVector> q{dense({1, 0}), dense({0, 1})};
  CHECK(early_fusion(q, a) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-7));
  CHECK(early_fusion({}, a) == 0.0);
  CHECK(early_fusion(a, {}) == 0.0);

  const std::vector<double> wq{3.0, 1.0};
  CHECK(early_fusion(q, a, wq) == doctest::Approx(3.0 / std::sqrt(10.0)).epsilon(1e-7));
  const std::vector<double> bad{1.0};
  CHECK_THROWS_AS(early_fusion(q, a, bad), Error);

  std::vector<SemanticVector> s1{sparse({"x", "y"})}, s2{sparse({"x", "y"})};
  CHECK(early_fusion(s1, s2) == doctest::Approx(1.0));
}

TEST_CASE("late fusion aggregation examples") {
  const std::vector<double> s{0.2, 0.9, -0.3};
  CHECK(aggregate(s, Aggregation::kMax) == doctest::Approx(0.9));
  CHECK(aggregate(s, Aggregation::kSum) == doctest::Approx(0.8));
  CHECK(aggregate(s, Aggregation::kAvg) == doctest::Approx(0.26667).epsilon(1e-4));
  CHECK(aggregate({}, Aggregation::kMax) == 0.0);
  std::vector<SemanticVector> a{dense({1, 2})};
  CHECK(late_fusion(a, {}, Aggregation::kSum) == 0.0);
}

TEST_CASE("fusion identities over random vector sets") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 5);
    const std::size_t m = 1 + uniform_index(rng, 5);
    const bool use_dense = trial % 2 == 0;
    auto q = use_dense ? random_dense(rng, n, 8) : random_sparse(rng, n);
    auto t = use_dense ? random_dense(rng, m, 8) : random_sparse(rng, m);
    const double mx = late_fusion(q, t, Aggregation::kMax);
    const double sum = late_fusion(q, t, Aggregation::kSum);
    const double avg = late_fusion(q, t, Aggregation::kAvg);
    CHECK(avg == sum / static_cast<double>(n * m));
    CHECK(mx >= avg);
    CHECK(avg >= -1.0);
    CHECK(avg <= 1.0);
    if (!use_dense) {
      for (double c : pairwise_cosines(q, t)) {
        CHECK(c >= 0.0);
        CHECK(c <= 1.0);
      }
      CHECK(early_fusion(q, t) == doctest::Approx(early_fusion(t, q)).epsilon(1e-12));
    }

    std::vector<SemanticVector> q1(q.begin(), q.begin() + 1), t1(t.begin(), t.begin() + 1);
    const double c = pairwise_cosines(q1, t1).at(0);
    CHECK(late_fusion(q1, t1, Aggregation::kMax) == c);
    CHECK(late_fusion(q1, t1, Aggregation::kSum) == c);
    CHECK(late_fusion(q1, t1, Aggregation::kAvg) == c);
    if (use_dense) CHECK(c == doctest::Approx(oracle_cosine(q1[0].dense, t1[0].dense)).epsilon(1e-9));
  }
}

TEST_CASE("cosine measures are invariant to a common positive scale") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    auto q = random_dense(rng, 1 + uniform_index(rng, 4), 16);
    auto t = random_dense(rng, 1 + uniform_index(rng, 4), 16);
    const float scale = static_cast<float>(uniform_real(rng, 0.1, 10.0));
    auto qs = q, ts = t;
    for (auto* side : {&qs, &ts})
      for (auto& v : *side)
        for (auto& x : v.dense) x *= scale;
    CHECK(early_fusion(qs, ts) == doctest::Approx(early_fusion(q, t)).epsilon(1e-5));
    CHECK(late_fusion(qs, ts, Aggregation::kMax) == doctest::Approx(late_fusion(q, t, Aggregation::kMax)).epsilon(1e-5));
    CHECK(late_fusion(qs, ts, Aggregation::kSum) == doctest::Approx(late_fusion(q, t, Aggregation::kSum)).epsilon(1e-5));
  }
}

TEST_CASE("sparse cosine") {
  CHECK(sparse_cosine({"a", "b"}, {"b", "c"}) == doctest::Approx(0.5));
  CHECK(sparse_cosine({}, {"a"}) == 0.0);
  CHECK(sparse_cosine({"a", "b", "c", "d"}, {"a"}) == doctest::Approx(0.5));
}

TEST_CASE("semantic feature names") {
  const auto names = semantic_feature_names();
  CHECK(names.size() == 16);
  CHECK(names.front() == "Entity_Early");
  CHECK(names[1] == "Entity_LateMax");
  CHECK(names.back() == "Graph_LateAvg");
  for (std::size_t r = 0; r < kNumRepresentations; ++r)
    for (std::size_t m = 0; m < kNumMeasures; ++m)
      CHECK(std::find(names.begin(), names.end(),
                      std::string(kRepresentationNames[r]) + "_" + kMeasureNames[m]) != names.end());
}

TEST_CASE("semantic feature block for a query-table pair") {
  SmallWorld w;
  SemanticSpace space(w.kb, &w.words, &w.graph);
  EntityRetriever retriever(w.entity_index);
  TableCorpus corpus;
  corpus.add(make_table("t1", "world", "", {"cup"}, {{"@e:brazil|Brazil"}}));
  corpus.add(make_table("t2", "other", "", {"x"}, {{"y"}}));
  auto index = build_table_index(corpus);
  SemanticMatcher matcher(space, retriever, index);

  SUBCASE("shared entity gives a full entity match") {
    auto block = matcher.features("brazil", corpus[0]);
    CHECK(block.values.size() == 16);
    CHECK(block.at(Representation::kEntity, Measure::kEarly) == doctest::Approx(1.0));
    CHECK(block.at(Representation::kCategory, Measure::kLateMax) == doctest::Approx(1.0));
    CHECK(block.at(Representation::kGraph, Measure::kLateAvg) == doctest::Approx(1.0));
    for (auto m : {Measure::kEarly, Measure::kLateMax, Measure::kLateSum, Measure::kLateAvg})
      CHECK(block.at(Representation::kWord, m) == 0.0);
  }
  SUBCASE("no query entities zeroes the entity-based features") {
    auto block = matcher.features("world cup", corpus[0]);
    for (auto rep : {Representation::kEntity, Representation::kCategory, Representation::kGraph})
      for (auto m : {Measure::kEarly, Measure::kLateMax, Measure::kLateSum, Measure::kLateAvg})
        CHECK(block.at(rep, m) == 0.0);
    CHECK(block.at(Representation::kWord, Measure::kLateMax) == doctest::Approx(1.0));
    CHECK(block.at(Representation::kWord, Measure::kLateSum) == doctest::Approx(2.0));
    CHECK(block.at(Representation::kWord, Measure::kLateAvg) == doctest::Approx(0.5));
    CHECK(block.at(Representation::kWord, Measure::kEarly) == doctest::Approx(1.0));
  }
  SUBCASE("word early fusion uses tf-idf weights on both sides") {
    // Table words {world, cup} each with tf 1 and equal idf; query "world
    // world cup" weighs world twice: cos((2,1),(1,1)) = 3 / sqrt(10).
    auto block = matcher.features("world world cup", corpus[0]);
    CHECK(block.at(Representation::kWord, Measure::kEarly) == doctest::Approx(3.0 / std::sqrt(10.0)).epsilon(1e-6));
  }
}
