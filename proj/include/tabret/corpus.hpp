#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tabret {

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

struct TableCell {
  std::string text;
  std::optional<std::string> entity;

  bool operator==(const TableCell&) const = default;
};

using TableRow = std::vector<TableCell>;

/// Page-level signals from the offline sidecar. Defaults apply when a table has
/// no entry.
struct PageSignals {
  std::uint64_t in_links = 0;
  std::uint64_t out_links = 0;
  std::uint64_t page_views = 0;
  std::uint64_t tables_on_page = 1;
  std::uint64_t page_size_chars = 0;

  bool operator==(const PageSignals&) const = default;
};

struct Table {
  std::string id;
  std::string page_title;
  std::string section_title;
  std::string caption;
  std::vector<std::string> headings;
  /// The full grid; the first `num_header_rows` rows are heading rows.
  std::vector<TableRow> rows;
  std::size_t num_header_rows = 0;
  PageSignals signals;

  std::size_t num_columns() const { return rows.empty() ? headings.size() : rows.front().size(); }
  std::span<const TableRow> data_rows() const {
    return std::span<const TableRow>(rows).subspan(std::min(num_header_rows, rows.size()));
  }
  std::size_t num_data_rows() const { return data_rows().size(); }

  bool operator==(const Table&) const = default;
};

/// Checks the structural invariants. Returns an empty string when the table is
/// valid, otherwise a description of the first violation.
std::string validate_table(const Table& table);

/// Whitespace-joined page title, section title, caption, headings and data
/// cell texts, in that order. Empty parts are skipped.
std::string catch_all_text(const Table& table);

class TableCorpus {
 public:
  TableCorpus() = default;

  /// Adds a table. Returns false (and leaves the corpus unchanged) if a table
  /// with the same id exists.
  bool add(Table table);

  std::span<const Table> tables() const { return tables_; }
  std::span<Table> tables() { return tables_; }
  std::size_t size() const { return tables_.size(); }
  bool empty() const { return tables_.empty(); }
  const Table& operator[](std::size_t i) const { return tables_[i]; }

  /// Position of the table with `id`, if any.
  std::optional<std::size_t> find(const std::string& id) const;

 private:
  std::vector<Table> tables_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// Outcome of a tolerant loader: counts plus one message per skipped record.
struct LoadReport {
  std::size_t loaded = 0;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

struct CorpusLoad {
  TableCorpus corpus;
  LoadReport report;
};

/// Reads a JSON Lines corpus. Unreadable file throws; malformed or invalid
/// records are skipped with a warning.
CorpusLoad load_corpus(const std::string& path);
CorpusLoad read_corpus(std::istream& in, const std::string& source_name);

/// Inverse of the corpus reader; signals are not serialized.
void write_corpus(std::ostream& out, const TableCorpus& corpus);

// ---------------------------------------------------------------------------
// Knowledge base
// ---------------------------------------------------------------------------

struct EntityRecord {
  std::string id;
  std::vector<std::string> names;
  std::vector<std::string> categories_text;
  std::vector<std::string> attributes;
  std::vector<std::string> similar_entity_names;
  std::vector<std::string> related_entity_names;
  std::set<std::string> categories;
  std::set<std::string> out_links;

  bool operator==(const EntityRecord&) const = default;
};

class KnowledgeBase {
 public:
  bool add(EntityRecord record);

  const EntityRecord* find(const std::string& id) const;
  bool contains(const std::string& id) const { return find(id) != nullptr; }
  std::span<const EntityRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  /// Ids of entities with a link to `id`. Empty for unknown ids.
  const std::set<std::string>& in_links(const std::string& id) const;

 private:
  std::vector<EntityRecord> records_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, std::set<std::string>> in_links_;
};

struct KnowledgeBaseLoad {
  KnowledgeBase kb;
  LoadReport report;
};

KnowledgeBaseLoad load_knowledge_base(const std::string& path);
KnowledgeBaseLoad read_knowledge_base(std::istream& in, const std::string& source_name);
void write_knowledge_base(std::ostream& out, const KnowledgeBase& kb);

struct ResolutionStats {
  std::size_t linked_cells = 0;
  std::size_t resolved = 0;
  std::size_t demoted = 0;
};

/// Clears every cell entity that has no record in `kb`; the cell text stays.
ResolutionStats resolve_entities(TableCorpus& corpus, const KnowledgeBase& kb);

// ---------------------------------------------------------------------------
// Embeddings
// ---------------------------------------------------------------------------

class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dimension = 0) : dimension_(dimension) {}

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return keys_.size(); }

  /// Inserts a vector. The first insertion of a token wins; returns false for
  /// duplicates. Throws when the length does not match the dimension.
  bool add(const std::string& token, std::span<const float> vec);

  std::optional<std::span<const float>> find(const std::string& token) const;

  std::span<const std::string> tokens() const { return keys_; }

 private:
  std::size_t dimension_;
  std::vector<float> data_;
  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::size_t> rows_;
};

struct EmbeddingLoadOptions {
  /// Required dimension; any mismatch is fatal.
  std::optional<std::size_t> expected_dim;
  /// Lowercase keys on load (word stores; entity-id stores keep case).
  bool fold_case = false;
};

/// Reads `token v1 ... vd` lines, optionally preceded by a `count dim` header.
/// Any dimension mismatch throws ParseError naming the line.
EmbeddingStore load_embeddings(const std::string& path, const EmbeddingLoadOptions& opts = {});
EmbeddingStore read_embeddings(std::istream& in, const std::string& source_name,
                               const EmbeddingLoadOptions& opts = {});

// ---------------------------------------------------------------------------
// Heading co-occurrence statistics
// ---------------------------------------------------------------------------

class SchemaStats {
 public:
  /// Adds `frequency` occurrences of a schema. Labels are normalized and
  /// deduplicated.
  void add_schema(const std::vector<std::string>& headings, std::uint64_t frequency);

  std::uint64_t total_count() const { return total_; }
  std::uint64_t heading_count(const std::string& normalized_heading) const;
  /// Summed frequency of schemas containing both labels.
  std::uint64_t joint_count(const std::string& a, const std::string& b) const;
  bool empty() const { return total_ == 0; }
  std::size_t num_schemas() const { return schema_freq_.size(); }

 private:
  std::map<std::vector<std::string>, std::size_t> schema_index_;
  std::vector<std::uint64_t> schema_freq_;
  std::unordered_map<std::string, std::uint64_t> heading_counts_;
  std::unordered_map<std::string, std::vector<std::size_t>> heading_schemas_;
  std::uint64_t total_ = 0;
};

/// TSV `h1|h2|...<TAB>frequency`.
SchemaStats load_schema_stats(const std::string& path);
SchemaStats read_schema_stats(std::istream& in, const std::string& source_name);

// ---------------------------------------------------------------------------
// Queries, judgments and page-level sidecars
// ---------------------------------------------------------------------------

struct Query {
  std::string id;
  std::string subset;
  std::string text;
};

class QuerySet {
 public:
  bool add(Query q);
  std::span<const Query> queries() const { return queries_; }
  const Query* find(const std::string& id) const;
  std::size_t size() const { return queries_.size(); }

 private:
  std::vector<Query> queries_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// TSV `queryId<TAB>subset<TAB>text`.
QuerySet load_queries(const std::string& path);
QuerySet read_queries(std::istream& in, const std::string& source_name);

/// Graded judgments on the {0,1,2} scale, ordered by query id then table id.
class Qrels {
 public:
  void set(const std::string& query_id, const std::string& table_id, int grade);
  /// Grade of a judged pair; unjudged pairs are nullopt.
  std::optional<int> grade(const std::string& query_id, const std::string& table_id) const;
  /// All judgments of a query (empty map for unknown queries).
  const std::map<std::string, int>& judgments(const std::string& query_id) const;
  const std::map<std::string, std::map<std::string, int>>& all() const { return grades_; }
  std::size_t num_pairs() const;

 private:
  std::map<std::string, std::map<std::string, int>> grades_;
};

/// TREC qrels `queryId 0 tableId grade`. Grades outside {0,1,2} are fatal.
Qrels load_qrels(const std::string& path);
Qrels read_qrels(std::istream& in, const std::string& source_name);
void write_qrels(std::ostream& out, const Qrels& qrels);

/// TSV `tableId inLinks outLinks pageViews tablesOnPage pageSizeChars`.
std::unordered_map<std::string, PageSignals> load_page_signals(const std::string& path);
std::unordered_map<std::string, PageSignals> read_page_signals(std::istream& in,
                                                               const std::string& source_name);
/// Copies signals onto tables; tables without an entry get the defaults.
void attach_signals(TableCorpus& corpus, const std::unordered_map<std::string, PageSignals>& signals);

/// Offline search-engine ranks of a table's page per query.
class YRankTable {
 public:
  void set(const std::string& query_id, const std::string& table_id, std::uint32_t rank);
  std::optional<std::uint32_t> rank(const std::string& query_id, const std::string& table_id) const;
  std::size_t size() const { return ranks_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, std::uint32_t> ranks_;
};

/// TSV `queryId tableId rank`.
YRankTable load_yrank(const std::string& path);
YRankTable read_yrank(std::istream& in, const std::string& source_name);

}  // namespace tabret
