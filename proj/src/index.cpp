#include "tabret/index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "tabret/error.hpp"
#include "tabret/text.hpp"

namespace tabret {

namespace {

constexpr char kMagic[8] = {'T', 'A', 'B', 'R', 'E', 'T', 'I', 'X'};
constexpr std::uint32_t kSnapshotVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw Error("truncated index snapshot");
  return v;
}

std::string get_string(std::istream& in) {
  auto n = get<std::uint32_t>(in);
  std::string s(n, '\0');
  if (n && !in.read(s.data(), n)) throw Error("truncated index snapshot");
  return s;
}

}  // namespace

std::span<const Posting> FieldIndex::postings(const std::string& term) const {
  if (auto it = terms_.find(term); it != terms_.end()) return it->second.postings;
  return {};
}

std::uint32_t FieldIndex::tf(const std::string& term, DocNum doc) const {
  auto plist = postings(term);
  auto it = std::lower_bound(plist.begin(), plist.end(), doc,
                             [](const Posting& p, DocNum d) { return p.doc < d; });
  return (it != plist.end() && it->doc == doc) ? it->tf : 0;
}

std::uint64_t FieldIndex::collection_count(const std::string& term) const {
  if (auto it = terms_.find(term); it != terms_.end()) return it->second.collection_count;
  return 0;
}

double FieldIndex::average_doc_length() const {
  if (doc_lengths_.empty()) return 0.0;
  return static_cast<double>(total_terms_) / static_cast<double>(doc_lengths_.size());
}

std::vector<std::string> FieldIndex::sorted_terms() const {
  std::vector<std::string> out;
  out.reserve(terms_.size());
  for (const auto& [t, e] : terms_) out.push_back(t);
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<std::size_t> FieldedIndex::field_id(std::string_view name) const {
  for (std::size_t f = 0; f < field_names_.size(); ++f)
    if (field_names_[f] == name) return f;
  return std::nullopt;
}

std::optional<DocNum> FieldedIndex::doc_number(const std::string& id) const {
  if (auto it = doc_numbers_.find(id); it != doc_numbers_.end()) return it->second;
  return std::nullopt;
}

double FieldedIndex::idf(std::size_t f, const std::string& term) const {
  if (num_docs() == 0) throw Error("idf on an empty index");
  const auto n_t = fields_[f].doc_freq(term);
  const double df = n_t == 0 ? 0.5 : static_cast<double>(n_t);
  return std::log(static_cast<double>(num_docs()) / df);
}

double FieldedIndex::collection_prob(std::size_t f, const std::string& term) const {
  const auto& fi = fields_[f];
  if (fi.total_terms() == 0) throw Error("collection probability on empty field " + field_names_[f]);
  return static_cast<double>(fi.collection_count(term)) / static_cast<double>(fi.total_terms());
}

void FieldedIndex::save(std::ostream& out) const {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kSnapshotVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(field_names_.size()));
  for (const auto& n : field_names_) put_string(out, n);
  put<std::uint64_t>(out, doc_ids_.size());
  for (const auto& id : doc_ids_) put_string(out, id);
  for (const auto& fi : fields_) {
    for (auto len : fi.doc_lengths_) put<std::uint32_t>(out, len);
    auto terms = fi.sorted_terms();
    put<std::uint64_t>(out, terms.size());
    for (const auto& t : terms) {
      const auto& e = fi.terms_.at(t);
      put_string(out, t);
      put<std::uint64_t>(out, e.collection_count);
      put<std::uint64_t>(out, e.postings.size());
      for (const auto& p : e.postings) {
        put<std::uint32_t>(out, p.doc);
        put<std::uint32_t>(out, p.tf);
      }
    }
  }
  if (!out) throw Error("failed writing index snapshot");
}

FieldedIndex FieldedIndex::load(std::istream& in) {
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error("not an index snapshot");
  }
  if (auto v = get<std::uint32_t>(in); v != kSnapshotVersion) {
    throw Error("unsupported index snapshot version " + std::to_string(v));
  }
  FieldedIndex idx;
  const auto nfields = get<std::uint32_t>(in);
  for (std::uint32_t f = 0; f < nfields; ++f) idx.field_names_.push_back(get_string(in));
  const auto ndocs = get<std::uint64_t>(in);
  for (std::uint64_t d = 0; d < ndocs; ++d) {
    idx.doc_ids_.push_back(get_string(in));
    idx.doc_numbers_.emplace(idx.doc_ids_.back(), static_cast<DocNum>(d));
  }
  idx.fields_.resize(nfields);
  for (auto& fi : idx.fields_) {
    fi.doc_lengths_.resize(ndocs);
    for (auto& len : fi.doc_lengths_) len = get<std::uint32_t>(in);
    const auto nterms = get<std::uint64_t>(in);
    for (std::uint64_t i = 0; i < nterms; ++i) {
      auto term = get_string(in);
      FieldIndex::TermEntry e;
      e.collection_count = get<std::uint64_t>(in);
      e.postings.resize(get<std::uint64_t>(in));
      for (auto& p : e.postings) {
        p.doc = get<std::uint32_t>(in);
        p.tf = get<std::uint32_t>(in);
      }
      fi.total_terms_ += e.collection_count;
      fi.terms_.emplace(std::move(term), std::move(e));
    }
  }
  return idx;
}

IndexBuilder::IndexBuilder(std::vector<std::string> field_names) {
  index_.fields_.resize(field_names.size());
  index_.field_names_ = std::move(field_names);
}

void IndexBuilder::add_document(const std::string& id, std::span<const std::vector<std::string>> field_tokens) {
  if (field_tokens.size() != index_.fields_.size()) throw Error("field count mismatch for document " + id);
  const auto doc = static_cast<DocNum>(index_.doc_ids_.size());
  if (!index_.doc_numbers_.emplace(id, doc).second) throw Error("duplicate document id " + id);
  index_.doc_ids_.push_back(id);

  for (std::size_t f = 0; f < field_tokens.size(); ++f) {
    auto& fi = index_.fields_[f];
    const auto& tokens = field_tokens[f];
    fi.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
    fi.total_terms_ += tokens.size();
    for (const auto& tok : tokens) {
      auto& entry = fi.terms_[tok];
      ++entry.collection_count;
      // Documents arrive in increasing order, so only the last posting can match.
      if (entry.postings.empty() || entry.postings.back().doc != doc) {
        entry.postings.push_back({doc, 1});
      } else {
        ++entry.postings.back().tf;
      }
    }
  }
}

FieldedIndex IndexBuilder::finish() && { return std::move(index_); }

std::array<std::vector<std::string>, kNumTableFields> table_field_tokens(const Table& table) {
  std::array<std::vector<std::string>, kNumTableFields> f;
  tokenize_into(table.page_title, f[kPageTitle]);
  tokenize_into(table.section_title, f[kSectionTitle]);
  tokenize_into(table.caption, f[kCaption]);
  for (const auto& h : table.headings) tokenize_into(h, f[kHeadings]);
  for (const auto& row : table.data_rows())
    for (const auto& cell : row) tokenize_into(cell.text, f[kBody]);
  auto& all = f[kCatchAll];
  for (std::size_t i = 0; i < kCatchAll; ++i) all.insert(all.end(), f[i].begin(), f[i].end());
  return f;
}

TableIndex build_table_index(const TableCorpus& corpus) {
  IndexBuilder builder(std::vector<std::string>(kTableFieldNames.begin(), kTableFieldNames.end()));
  for (const auto& table : corpus.tables()) {
    auto fields = table_field_tokens(table);
    builder.add_document(table.id, fields);
  }
  return std::move(builder).finish();
}

EntityIndex build_entity_index(const KnowledgeBase& kb) {
  IndexBuilder builder(std::vector<std::string>(kEntityFieldNames.begin(), kEntityFieldNames.end()));
  std::array<std::vector<std::string>, kNumEntityFields> fields;
  for (const auto& rec : kb.records()) {
    for (auto& f : fields) f.clear();
    for (const auto& s : rec.names) tokenize_into(s, fields[kNames]);
    for (const auto& s : rec.categories_text) tokenize_into(s, fields[kCategoriesText]);
    for (const auto& s : rec.attributes) tokenize_into(s, fields[kAttributes]);
    for (const auto& s : rec.similar_entity_names) tokenize_into(s, fields[kSimilarEntityNames]);
    for (const auto& s : rec.related_entity_names) tokenize_into(s, fields[kRelatedEntityNames]);
    builder.add_document(rec.id, fields);
  }
  return std::move(builder).finish();
}

}  // namespace tabret
