#include "tabret/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "tabret/error.hpp"
#include "tabret/text.hpp"

namespace tabret {

using nlohmann::json;

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return in;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_float(std::string_view s, float& out) {
  std::string buf(s);
  char* end = nullptr;
  out = std::strtof(buf.c_str(), &end);
  return end == buf.c_str() + buf.size() && !buf.empty();
}

bool blank(const std::string& line) { return trim(line).empty(); }

std::vector<std::string> string_list(const json& j, const char* key) {
  std::vector<std::string> out;
  if (auto it = j.find(key); it != j.end() && !it->is_null()) {
    for (const auto& v : *it) out.push_back(v.get<std::string>());
  }
  return out;
}

std::string string_field(const json& j, const char* key) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) return it->get<std::string>();
  return {};
}

Table table_from_json(const json& j) {
  Table t;
  t.id = j.at("id").get<std::string>();
  t.page_title = string_field(j, "pageTitle");
  t.section_title = string_field(j, "sectionTitle");
  t.caption = string_field(j, "caption");
  t.headings = string_list(j, "headings");
  if (auto it = j.find("rows"); it != j.end()) {
    for (const auto& row : *it) {
      TableRow r;
      for (const auto& cell : row) {
        TableCell c;
        if (cell.is_string()) {
          c.text = cell.get<std::string>();
        } else {
          c.text = string_field(cell, "text");
          if (auto e = cell.find("entity"); e != cell.end() && !e->is_null()) {
            auto id = e->get<std::string>();
            if (!id.empty()) c.entity = std::move(id);
          }
        }
        r.push_back(std::move(c));
      }
      t.rows.push_back(std::move(r));
    }
  }
  if (auto it = j.find("numHeaderRows"); it != j.end() && !it->is_null()) {
    t.num_header_rows = it->get<std::size_t>();
  }
  // Heading labels may be given only as a heading row.
  if (t.headings.empty() && t.num_header_rows > 0 && t.num_header_rows <= t.rows.size()) {
    for (const auto& cell : t.rows[t.num_header_rows - 1]) t.headings.push_back(cell.text);
  }
  return t;
}

json table_to_json(const Table& t) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::array();
    for (const auto& c : row) {
      json cell = {{"text", c.text}};
      if (c.entity) cell["entity"] = *c.entity;
      r.push_back(std::move(cell));
    }
    rows.push_back(std::move(r));
  }
  return json{{"id", t.id},
              {"pageTitle", t.page_title},
              {"sectionTitle", t.section_title},
              {"caption", t.caption},
              {"headings", t.headings},
              {"rows", std::move(rows)},
              {"numHeaderRows", t.num_header_rows}};
}

}  // namespace

// ---------------------------------------------------------------------------

std::string validate_table(const Table& table) {
  if (table.id.empty()) return "missing table id";
  const std::size_t cols = table.num_columns();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].size() != cols) {
      return "row " + std::to_string(r) + " has " + std::to_string(table.rows[r].size()) +
             " cells, expected " + std::to_string(cols);
    }
  }
  if (!table.headings.empty() && table.headings.size() != cols) {
    return "headings count " + std::to_string(table.headings.size()) + " does not match " +
           std::to_string(cols) + " columns";
  }
  if (table.num_header_rows > table.rows.size()) return "numHeaderRows exceeds row count";
  if (table.signals.tables_on_page == 0) return "tablesOnPage must be >= 1";
  return {};
}

std::string catch_all_text(const Table& table) {
  std::string out;
  auto append = [&out](const std::string& s) {
    if (s.empty()) return;
    if (!out.empty()) out.push_back(' ');
    out += s;
  };
  append(table.page_title);
  append(table.section_title);
  append(table.caption);
  for (const auto& h : table.headings) append(h);
  for (const auto& row : table.data_rows())
    for (const auto& cell : row) append(cell.text);
  return out;
}

bool TableCorpus::add(Table table) {
  auto [it, inserted] = by_id_.emplace(table.id, tables_.size());
  if (!inserted) return false;
  tables_.push_back(std::move(table));
  return true;
}

std::optional<std::size_t> TableCorpus::find(const std::string& id) const {
  if (auto it = by_id_.find(id); it != by_id_.end()) return it->second;
  return std::nullopt;
}

CorpusLoad read_corpus(std::istream& in, const std::string& source_name) {
  CorpusLoad result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    auto skip = [&](const std::string& why) {
      ++result.report.skipped;
      result.report.warnings.push_back(source_name + ":" + std::to_string(lineno) + ": " + why);
    };
    Table t;
    try {
      t = table_from_json(json::parse(line));
    } catch (const std::exception& e) {
      skip(std::string("malformed record: ") + e.what());
      continue;
    }
    if (auto why = validate_table(t); !why.empty()) {
      skip("table " + t.id + " rejected: " + why);
      continue;
    }
    auto id = t.id;
    if (!result.corpus.add(std::move(t))) {
      skip("duplicate table id " + id);
      continue;
    }
    ++result.report.loaded;
  }
  return result;
}

CorpusLoad load_corpus(const std::string& path) {
  auto in = open_input(path);
  return read_corpus(in, path);
}

void write_corpus(std::ostream& out, const TableCorpus& corpus) {
  for (const auto& t : corpus.tables()) out << table_to_json(t).dump() << '\n';
}

// ---------------------------------------------------------------------------

bool KnowledgeBase::add(EntityRecord record) {
  auto [it, inserted] = by_id_.emplace(record.id, records_.size());
  if (!inserted) return false;
  for (const auto& target : record.out_links) in_links_[target].insert(record.id);
  records_.push_back(std::move(record));
  return true;
}

const EntityRecord* KnowledgeBase::find(const std::string& id) const {
  if (auto it = by_id_.find(id); it != by_id_.end()) return &records_[it->second];
  return nullptr;
}

const std::set<std::string>& KnowledgeBase::in_links(const std::string& id) const {
  static const std::set<std::string> kEmpty;
  if (auto it = in_links_.find(id); it != in_links_.end()) return it->second;
  return kEmpty;
}

KnowledgeBaseLoad read_knowledge_base(std::istream& in, const std::string& source_name) {
  KnowledgeBaseLoad result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    auto skip = [&](const std::string& why) {
      ++result.report.skipped;
      result.report.warnings.push_back(source_name + ":" + std::to_string(lineno) + ": " + why);
    };
    EntityRecord rec;
    try {
      auto j = json::parse(line);
      rec.id = j.at("id").get<std::string>();
      rec.names = string_list(j, "names");
      rec.categories_text = string_list(j, "categoriesText");
      rec.attributes = string_list(j, "attributes");
      rec.similar_entity_names = string_list(j, "similarEntityNames");
      rec.related_entity_names = string_list(j, "relatedEntityNames");
      for (auto& c : string_list(j, "categories")) rec.categories.insert(std::move(c));
      for (auto& l : string_list(j, "outLinks")) rec.out_links.insert(std::move(l));
    } catch (const std::exception& e) {
      skip(std::string("malformed record: ") + e.what());
      continue;
    }
    if (rec.id.empty()) {
      skip("missing entity id");
      continue;
    }
    auto id = rec.id;
    if (!result.kb.add(std::move(rec))) {
      skip("duplicate entity id " + id);
      continue;
    }
    ++result.report.loaded;
  }
  return result;
}

KnowledgeBaseLoad load_knowledge_base(const std::string& path) {
  auto in = open_input(path);
  return read_knowledge_base(in, path);
}

void write_knowledge_base(std::ostream& out, const KnowledgeBase& kb) {
  for (const auto& r : kb.records()) {
    json j{{"id", r.id},
           {"names", r.names},
           {"categoriesText", r.categories_text},
           {"attributes", r.attributes},
           {"similarEntityNames", r.similar_entity_names},
           {"relatedEntityNames", r.related_entity_names},
           {"categories", r.categories},
           {"outLinks", r.out_links}};
    out << j.dump() << '\n';
  }
}

ResolutionStats resolve_entities(TableCorpus& corpus, const KnowledgeBase& kb) {
  ResolutionStats stats;
  for (auto& table : corpus.tables()) {
    for (auto& row : table.rows) {
      for (auto& cell : row) {
        if (!cell.entity) continue;
        ++stats.linked_cells;
        if (kb.contains(*cell.entity)) {
          ++stats.resolved;
        } else {
          cell.entity.reset();
          ++stats.demoted;
        }
      }
    }
  }
  return stats;
}

// ---------------------------------------------------------------------------

bool EmbeddingStore::add(const std::string& token, std::span<const float> vec) {
  if (vec.size() != dimension_) {
    throw Error("embedding for '" + token + "' has " + std::to_string(vec.size()) +
                " values, expected " + std::to_string(dimension_));
  }
  auto [it, inserted] = rows_.emplace(token, keys_.size());
  if (!inserted) return false;
  keys_.push_back(token);
  data_.insert(data_.end(), vec.begin(), vec.end());
  return true;
}

std::optional<std::span<const float>> EmbeddingStore::find(const std::string& token) const {
  auto it = rows_.find(token);
  if (it == rows_.end()) return std::nullopt;
  return std::span<const float>(data_).subspan(it->second * dimension_, dimension_);
}

EmbeddingStore read_embeddings(std::istream& in, const std::string& source_name,
                               const EmbeddingLoadOptions& opts) {
  std::optional<std::size_t> dim = opts.expected_dim;
  std::optional<EmbeddingStore> store;
  if (dim) store.emplace(*dim);
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  std::vector<float> values;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    auto fields = split_ws(line);
    if (first) {
      first = false;
      std::size_t count = 0, header_dim = 0;
      if (fields.size() == 2 && parse_number(fields[0], count) && parse_number(fields[1], header_dim)) {
        if (header_dim == 0) throw ParseError(source_name, lineno, "header declares dimension 0");
        if (dim && *dim != header_dim) {
          throw ParseError(source_name, lineno,
                           "header dimension " + std::to_string(header_dim) + " does not match expected " +
                               std::to_string(*dim));
        }
        dim = header_dim;
        if (!store) store.emplace(*dim);
        continue;
      }
    }
    if (fields.size() < 2) throw ParseError(source_name, lineno, "expected a token followed by values");
    const std::size_t n = fields.size() - 1;
    if (!dim) {
      dim = n;
      store.emplace(n);
    }
    if (n != *dim) {
      throw ParseError(source_name, lineno,
                       "vector has " + std::to_string(n) + " values, expected " + std::to_string(*dim));
    }
    values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!parse_float(fields[i + 1], values[i])) {
        throw ParseError(source_name, lineno, "bad number '" + std::string(fields[i + 1]) + "'");
      }
    }
    std::string token(fields[0]);
    if (opts.fold_case) {
      std::transform(token.begin(), token.end(), token.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    }
    store->add(token, values);
  }
  if (!store) return EmbeddingStore(dim.value_or(0));
  return std::move(*store);
}

EmbeddingStore load_embeddings(const std::string& path, const EmbeddingLoadOptions& opts) {
  auto in = open_input(path);
  return read_embeddings(in, path, opts);
}

// ---------------------------------------------------------------------------

void SchemaStats::add_schema(const std::vector<std::string>& headings, std::uint64_t frequency) {
  std::vector<std::string> labels;
  for (const auto& h : headings) {
    auto n = normalize_label(h);
    if (!n.empty()) labels.push_back(std::move(n));
  }
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  if (labels.empty() || frequency == 0) return;

  auto [it, inserted] = schema_index_.emplace(labels, schema_freq_.size());
  if (inserted) {
    schema_freq_.push_back(0);
    for (const auto& l : labels) heading_schemas_[l].push_back(it->second);
  }
  schema_freq_[it->second] += frequency;
  for (const auto& l : labels) heading_counts_[l] += frequency;
  total_ += frequency;
}

std::uint64_t SchemaStats::heading_count(const std::string& h) const {
  if (auto it = heading_counts_.find(h); it != heading_counts_.end()) return it->second;
  return 0;
}

std::uint64_t SchemaStats::joint_count(const std::string& a, const std::string& b) const {
  auto ia = heading_schemas_.find(a);
  auto ib = heading_schemas_.find(b);
  if (ia == heading_schemas_.end() || ib == heading_schemas_.end()) return 0;
  if (a == b) return heading_count(a);
  // Schema ids are appended in increasing order, so both lists are sorted.
  const auto& la = ia->second;
  const auto& lb = ib->second;
  std::uint64_t sum = 0;
  std::size_t i = 0, j = 0;
  while (i < la.size() && j < lb.size()) {
    if (la[i] < lb[j]) {
      ++i;
    } else if (lb[j] < la[i]) {
      ++j;
    } else {
      sum += schema_freq_[la[i]];
      ++i;
      ++j;
    }
  }
  return sum;
}

SchemaStats read_schema_stats(std::istream& in, const std::string& source_name) {
  SchemaStats stats;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw ParseError(source_name, lineno, "expected headings<TAB>frequency");
    std::uint64_t freq = 0;
    if (!parse_number(std::string_view(line).substr(tab + 1), freq)) {
      throw ParseError(source_name, lineno, "bad frequency");
    }
    std::vector<std::string> headings;
    for (auto h : split(std::string_view(line).substr(0, tab), '|')) headings.emplace_back(h);
    stats.add_schema(headings, freq);
  }
  return stats;
}

SchemaStats load_schema_stats(const std::string& path) {
  auto in = open_input(path);
  return read_schema_stats(in, path);
}

// ---------------------------------------------------------------------------

bool QuerySet::add(Query q) {
  auto [it, inserted] = by_id_.emplace(q.id, queries_.size());
  if (!inserted) return false;
  queries_.push_back(std::move(q));
  return true;
}

const Query* QuerySet::find(const std::string& id) const {
  if (auto it = by_id_.find(id); it != by_id_.end()) return &queries_[it->second];
  return nullptr;
}

QuerySet read_queries(std::istream& in, const std::string& source_name) {
  QuerySet qs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = split(line, '\t');
    if (fields.size() < 3) throw ParseError(source_name, lineno, "expected queryId<TAB>subset<TAB>text");
    Query q{std::string(trim(fields[0])), std::string(trim(fields[1])), std::string(fields[2])};
    for (std::size_t i = 3; i < fields.size(); ++i) (q.text += ' ') += fields[i];
    if (!qs.add(std::move(q))) throw ParseError(source_name, lineno, "duplicate query id");
  }
  return qs;
}

QuerySet load_queries(const std::string& path) {
  auto in = open_input(path);
  return read_queries(in, path);
}

void Qrels::set(const std::string& query_id, const std::string& table_id, int grade) {
  if (grade < 0 || grade > 2) throw Error("grade " + std::to_string(grade) + " outside {0,1,2}");
  grades_[query_id][table_id] = grade;
}

std::optional<int> Qrels::grade(const std::string& query_id, const std::string& table_id) const {
  auto q = grades_.find(query_id);
  if (q == grades_.end()) return std::nullopt;
  auto t = q->second.find(table_id);
  if (t == q->second.end()) return std::nullopt;
  return t->second;
}

const std::map<std::string, int>& Qrels::judgments(const std::string& query_id) const {
  static const std::map<std::string, int> kEmpty;
  if (auto q = grades_.find(query_id); q != grades_.end()) return q->second;
  return kEmpty;
}

std::size_t Qrels::num_pairs() const {
  std::size_t n = 0;
  for (const auto& [q, m] : grades_) n += m.size();
  return n;
}

Qrels read_qrels(std::istream& in, const std::string& source_name) {
  Qrels qrels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    auto f = split_ws(line);
    int grade = 0;
    if (f.size() != 4 || !parse_number(f[3], grade)) {
      throw ParseError(source_name, lineno, "expected 'queryId 0 tableId grade'");
    }
    if (grade < 0 || grade > 2) throw ParseError(source_name, lineno, "grade outside {0,1,2}");
    qrels.set(std::string(f[0]), std::string(f[2]), grade);
  }
  return qrels;
}

Qrels load_qrels(const std::string& path) {
  auto in = open_input(path);
  return read_qrels(in, path);
}

void write_qrels(std::ostream& out, const Qrels& qrels) {
  for (const auto& [q, m] : qrels.all())
    for (const auto& [t, g] : m) out << q << " 0 " << t << ' ' << g << '\n';
}

std::unordered_map<std::string, PageSignals> read_page_signals(std::istream& in,
                                                               const std::string& source_name) {
  std::unordered_map<std::string, PageSignals> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    auto f = split_ws(line);
    PageSignals s;
    if (f.size() != 6 || !parse_number(f[1], s.in_links) || !parse_number(f[2], s.out_links) ||
        !parse_number(f[3], s.page_views) || !parse_number(f[4], s.tables_on_page) ||
        !parse_number(f[5], s.page_size_chars)) {
      throw ParseError(source_name, lineno,
                       "expected 'tableId inLinks outLinks pageViews tablesOnPage pageSizeChars'");
    }
    if (s.tables_on_page == 0) throw ParseError(source_name, lineno, "tablesOnPage must be >= 1");
    out.insert_or_assign(std::string(f[0]), s);
  }
  return out;
}

std::unordered_map<std::string, PageSignals> load_page_signals(const std::string& path) {
  auto in = open_input(path);
  return read_page_signals(in, path);
}

void attach_signals(TableCorpus& corpus, const std::unordered_map<std::string, PageSignals>& signals) {
  for (auto& t : corpus.tables()) {
    auto it = signals.find(t.id);
    t.signals = it == signals.end() ? PageSignals{} : it->second;
  }
}

void YRankTable::set(const std::string& query_id, const std::string& table_id, std::uint32_t rank) {
  ranks_[{query_id, table_id}] = rank;
}

std::optional<std::uint32_t> YRankTable::rank(const std::string& query_id, const std::string& table_id) const {
  if (auto it = ranks_.find({query_id, table_id}); it != ranks_.end()) return it->second;
  return std::nullopt;
}

YRankTable read_yrank(std::istream& in, const std::string& source_name) {
  YRankTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    auto f = split_ws(line);
    std::uint32_t rank = 0;
    if (f.size() != 3 || !parse_number(f[2], rank) || rank == 0) {
      throw ParseError(source_name, lineno, "expected 'queryId tableId rank' with rank >= 1");
    }
    table.set(std::string(f[0]), std::string(f[1]), rank);
  }
  return table;
}

YRankTable load_yrank(const std::string& path) {
  auto in = open_input(path);
  return read_yrank(in, path);
}

}  // namespace tabret
