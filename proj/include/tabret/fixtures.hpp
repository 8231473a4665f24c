#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "tabret/corpus.hpp"

namespace tabret {

struct FixtureOptions {
  std::size_t tables = 200;
  std::size_t queries = 20;
  std::size_t entities = 60;
  /// Share of each query's relevant tables written without any query word.
  double semantic_fraction = 0.5;
  std::size_t word_dim = 300;
  std::size_t graph_dim = 200;
  std::uint64_t seed = 42;
};

/// A desk-scale collection with planted relevance.
///
/// Queries come in pairs per topic. Every topic owns a block of entities that
/// link to each other and share categories, two word lists (query words and
/// synonyms) whose embeddings sit near a common topic direction, and a block of
/// tables. Half of a topic's tables are its judged relevant pool: their core
/// column holds the topic's entities, and the "semantic" share of them is
/// titled with synonyms only, so no query word occurs anywhere in the table.
/// The other half are distractors for the next topic's queries: they carry
/// that topic's query words in a heading and in body cells but list entities
/// of their own topic.
struct FixtureData {
  TableCorpus corpus;
  KnowledgeBase kb;
  EmbeddingStore words;
  EmbeddingStore graph;
  std::vector<std::pair<std::vector<std::string>, std::uint64_t>> schemas;
  QuerySet queries;
  Qrels qrels;
  std::unordered_map<std::string, PageSignals> signals;
  std::vector<std::tuple<std::string, std::string, std::uint32_t>> yrank;
  /// (query id, table id) of every planted relevant pair whose table shares no
  /// word with the query.
  std::vector<std::pair<std::string, std::string>> semantic_pairs;
};

FixtureData generate_fixtures(const FixtureOptions& opts);

/// Writes every fixture file plus `tabret.conf` pointing at them. Returns the
/// config path.
std::string write_fixtures(const FixtureData& data, const std::string& out_dir);

}  // namespace tabret
