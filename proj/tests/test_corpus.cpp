#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "tabret/corpus.hpp"
#include "tabret/error.hpp"

using namespace tabret;
using tabret::testing::make_entity;
using tabret::testing::make_table;

namespace {

const char* kThreeTables =
    R"({"id":"t1","pageTitle":"P","sectionTitle":"","caption":"C","headings":["a","b"],"rows":[[{"text":"x"},{"text":"y","entity":"e1"}]],"numHeaderRows":0})"
    "\n"
    R"({"id":"t2","pageTitle":"","caption":"","headings":[],"rows":[],"numHeaderRows":0})"
    "\n\n"
    R"({"id":"t3","pageTitle":"Q","caption":"","headings":["h"],"rows":[["plain"],[{"text":"z","entity":null}]]})"
    "\n";

}  // namespace

TEST_CASE("corpus loader reads valid records") {
  std::istringstream in(kThreeTables);
  auto load = read_corpus(in, "mem");
  CHECK(load.corpus.size() == 3);
  CHECK(load.report.loaded == 3);
  CHECK(load.report.skipped == 0);
  const auto& t1 = load.corpus[*load.corpus.find("t1")];
  REQUIRE(t1.rows.size() == 1);
  CHECK(t1.rows[0][1].entity == std::optional<std::string>("e1"));
  CHECK_FALSE(t1.rows[0][0].entity.has_value());
  const auto& t3 = load.corpus[*load.corpus.find("t3")];
  CHECK(t3.rows[0][0].text == "plain");
  CHECK_FALSE(t3.rows[1][0].entity.has_value());
}

TEST_CASE("corpus loader skips ragged, malformed and duplicate records with warnings") {
  std::istringstream in(
      R"({"id":"ok","headings":["a","b"],"rows":[[{"text":"1"},{"text":"2"}]]})"
      "\n"
      R"({"id":"ragged","rows":[[{"text":"1"},{"text":"2"},{"text":"3"}],[{"text":"1"},{"text":"2"}]]})"
      "\n"
      "{not json\n"
      R"({"id":"badhead","headings":["a"],"rows":[[{"text":"1"},{"text":"2"}]]})"
      "\n"
      R"({"id":"ok","rows":[]})"
      "\n");
  auto load = read_corpus(in, "mem");
  CHECK(load.corpus.size() == 1);
  CHECK(load.report.loaded == 1);
  CHECK(load.report.skipped == 4);
  REQUIRE(load.report.warnings.size() == 4);
  CHECK(load.report.warnings[0].find("mem:2") != std::string::npos);
  CHECK(load.report.warnings[0].find("ragged") != std::string::npos);
}

TEST_CASE("headings default to the last header row") {
  std::istringstream in(
      R"({"id":"t","rows":[[{"text":"Name"},{"text":"Year"}],[{"text":"a"},{"text":"1"}]],"numHeaderRows":1})");
  auto load = read_corpus(in, "mem");
  REQUIRE(load.corpus.size() == 1);
  const auto& t = load.corpus[0];
  CHECK(t.headings == std::vector<std::string>{"Name", "Year"});
  CHECK(t.num_data_rows() == 1);
}

TEST_CASE("unreadable corpus file is fatal") {
  CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.jsonl"), Error);
}

TEST_CASE("corpus round trip preserves tables") {
  std::istringstream in(kThreeTables);
  auto first = read_corpus(in, "mem");
  std::ostringstream out;
  write_corpus(out, first.corpus);
  std::istringstream again(out.str());
  auto second = read_corpus(again, "mem2");
  REQUIRE(second.corpus.size() == first.corpus.size());
  for (std::size_t i = 0; i < first.corpus.size(); ++i) CHECK(second.corpus[i] == first.corpus[i]);
}

TEST_CASE("catch_all_text order and empty parts") {
  auto t = make_table("t", "", "a", {"b"}, {{"c"}});
  CHECK(catch_all_text(t) == "a b c");
  CHECK(catch_all_text(make_table("e", "", "", {}, {})) == "");
  CHECK(catch_all_text(make_table("o", "p", "c", {}, {})) == "p c");
  auto full = make_table("f", "page", "cap", {"h1", "h2"}, {{"x", ""}, {"y", "z"}}, "sec");
  CHECK(catch_all_text(full) == "page sec cap h1 h2 x y z");
}

TEST_CASE("catch_all_text contains every non-empty cell text") {
  auto t = make_table("t", "Title", "Caption", {"h1", "h2", "h3"},
                      {{"alpha beta", "", "gamma"}, {"delta", "epsilon zeta", ""}});
  const auto text = catch_all_text(t);
  for (const auto& row : t.data_rows())
    for (const auto& cell : row)
      if (!cell.text.empty()) CHECK(text.find(cell.text) != std::string::npos);
}

TEST_CASE("header rows are excluded from data rows and catch-all body") {
  auto t = make_table("t", "", "", {"name"}, {{"name"}, {"v"}});
  t.num_header_rows = 1;
  CHECK(t.num_data_rows() == 1);
  CHECK(catch_all_text(t) == "name v");
}

TEST_CASE("resolve_entities demotes links outside the KB and is idempotent") {
  KnowledgeBase kb;
  kb.add(make_entity("e1", {"One"}));
  TableCorpus corpus;
  corpus.add(make_table("t1", "", "", {"a", "b"}, {{"@e1|One", "@e9|Nine"}}));
  corpus.add(make_table("t2", "", "", {"a"}, {{"plain"}}));
  const auto before_t2 = corpus[1];

  auto stats = resolve_entities(corpus, kb);
  CHECK(stats.linked_cells == 2);
  CHECK(stats.resolved == 1);
  CHECK(stats.demoted == 1);
  CHECK(corpus[0].rows[0][0].entity == std::optional<std::string>("e1"));
  CHECK_FALSE(corpus[0].rows[0][1].entity.has_value());
  CHECK(corpus[0].rows[0][1].text == "Nine");
  CHECK(corpus[1] == before_t2);

  const auto once = corpus[0];
  auto again = resolve_entities(corpus, kb);
  CHECK(again.demoted == 0);
  CHECK(corpus[0] == once);
}

TEST_CASE("knowledge base keeps dangling links and derives in-links") {
  KnowledgeBase kb;
  CHECK(kb.add(make_entity("a", {"A"}, {"b", "ghost"})));
  CHECK(kb.add(make_entity("b", {"B"})));
  CHECK_FALSE(kb.add(make_entity("a", {"dup"})));
  CHECK(kb.find("a")->out_links.count("ghost") == 1);
  CHECK(kb.in_links("b") == std::set<std::string>{"a"});
  CHECK(kb.in_links("ghost") == std::set<std::string>{"a"});
  CHECK(kb.in_links("nobody").empty());
}

TEST_CASE("knowledge base JSON round trip") {
  KnowledgeBase kb;
  auto r = make_entity("dbp:X", {"X", "Ex"}, {"dbp:Y"}, {"cat:1"});
  r.categories_text = {"things"};
  r.attributes = {"big"};
  r.similar_entity_names = {"Y"};
  r.related_entity_names = {"Z"};
  kb.add(r);
  std::ostringstream out;
  write_knowledge_base(out, kb);
  std::istringstream in(out.str());
  auto back = read_knowledge_base(in, "mem");
  REQUIRE(back.kb.size() == 1);
  CHECK(back.kb.records()[0] == r);
}

TEST_CASE("knowledge base records missing text fields load as empty") {
  std::istringstream in(R"({"id":"e"})");
  auto load = read_knowledge_base(in, "mem");
  REQUIRE(load.kb.size() == 1);
  CHECK(load.kb.records()[0].names.empty());
  CHECK(load.kb.records()[0].attributes.empty());
}

TEST_CASE("embedding loader") {
  SUBCASE("two lines of three floats") {
    std::istringstream in("a 1 2 3\nb 4 5 6\n");
    auto s = read_embeddings(in, "mem");
    CHECK(s.dimension() == 3);
    CHECK(s.size() == 2);
    auto v = *s.find("b");
    CHECK(v[2] == 6.0f);
  }
  SUBCASE("header is consumed") {
    std::istringstream in("2 3\na 1 2 3\nb 4 5 6\n");
    auto s = read_embeddings(in, "mem");
    CHECK(s.dimension() == 3);
    CHECK(s.size() == 2);
    CHECK_FALSE(s.find("2").has_value());
  }
  SUBCASE("dimension mismatch names the line") {
    std::istringstream in("a 1 2 3\nb 4 5\n");
    try {
      read_embeddings(in, "vecs");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(std::string(e.what()).find("vecs") != std::string::npos);
    }
  }
  SUBCASE("expected dimension enforced") {
    std::istringstream in("a 1 2 3\n");
    CHECK_THROWS_AS(read_embeddings(in, "mem", {4, false}), ParseError);
  }
  SUBCASE("duplicates keep the first vector") {
    std::istringstream in("a 1 1\na 2 2\n");
    auto s = read_embeddings(in, "mem");
    CHECK(s.size() == 1);
    CHECK((*s.find("a"))[0] == 1.0f);
  }
  SUBCASE("case folding for word stores") {
    std::istringstream in("Paris 1 0\n");
    auto s = read_embeddings(in, "mem", {std::nullopt, true});
    CHECK(s.find("paris").has_value());
  }
}

TEST_CASE("schema stats counts") {
  SchemaStats s;
  s.add_schema({"B", "a"}, 2);
  s.add_schema({"a"}, 2);
  s.add_schema({"a", "A "}, 1);
  CHECK(s.total_count() == 5);
  CHECK(s.heading_count("a") == 5);
  CHECK(s.heading_count("b") == 2);
  CHECK(s.joint_count("a", "b") == 2);
  CHECK(s.joint_count("b", "a") == 2);
  CHECK(s.joint_count("a", "zzz") == 0);
  CHECK(s.num_schemas() == 2);

  std::istringstream in("a|b\t2\na\t2\n");
  auto r = read_schema_stats(in, "mem");
  CHECK(r.total_count() == 4);
  CHECK(r.heading_count("b") == 2);
  std::istringstream bad("a|b 2\n");
  CHECK_THROWS_AS(read_schema_stats(bad, "mem"), ParseError);
}

TEST_CASE("queries and qrels") {
  std::istringstream q("q1\tQS-1\tworld cup\nq2\tQS-2\tvideo games\n");
  auto qs = read_queries(q, "mem");
  CHECK(qs.size() == 2);
  CHECK(qs.find("q2")->text == "video games");
  CHECK(qs.find("q2")->subset == "QS-2");

  std::istringstream r("q1 0 t1 2\nq1 0 t2 0\nq2 0 t1 1\n");
  auto qrels = read_qrels(r, "mem");
  CHECK(qrels.num_pairs() == 3);
  CHECK(qrels.grade("q1", "t1") == std::optional<int>(2));
  CHECK_FALSE(qrels.grade("q1", "t9").has_value());
  CHECK(qrels.judgments("nope").empty());

  std::ostringstream out;
  write_qrels(out, qrels);
  std::istringstream back(out.str());
  CHECK(read_qrels(back, "mem").all() == qrels.all());

  std::istringstream bad("q1 0 t1 3\n");
  CHECK_THROWS_AS(read_qrels(bad, "mem"), ParseError);
  Qrels direct;
  CHECK_THROWS_AS(direct.set("q", "t", -1), Error);
}

TEST_CASE("page signals attach with defaults") {
  std::istringstream in("t1\t5\t6\t700\t4\t1000\n");
  auto signals = read_page_signals(in, "mem");
  TableCorpus corpus;
  corpus.add(make_table("t1", "", "", {}, {}));
  corpus.add(make_table("t2", "", "", {}, {}));
  attach_signals(corpus, signals);
  CHECK(corpus[0].signals == PageSignals{5, 6, 700, 4, 1000});
  CHECK(corpus[1].signals == PageSignals{});
  CHECK(corpus[1].signals.tables_on_page == 1);
}

TEST_CASE("yrank sidecar") {
  std::istringstream in("q1\tt1\t3\n");
  auto y = read_yrank(in, "mem");
  CHECK(y.rank("q1", "t1") == std::optional<std::uint32_t>(3));
  CHECK_FALSE(y.rank("q1", "t2").has_value());
  std::istringstream bad("q1\tt1\t0\n");
  CHECK_THROWS_AS(read_yrank(bad, "mem"), ParseError);
}
