#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tabret/corpus.hpp"

namespace tabret {

using DocNum = std::uint32_t;

struct Posting {
  DocNum doc;
  std::uint32_t tf;

  bool operator==(const Posting&) const = default;
};

/// Term statistics of one field. Postings are sorted by document number.
class FieldIndex {
 public:
  std::span<const Posting> postings(const std::string& term) const;
  std::uint32_t tf(const std::string& term, DocNum doc) const;
  std::uint64_t collection_count(const std::string& term) const;
  std::size_t doc_freq(const std::string& term) const { return postings(term).size(); }
  std::uint32_t doc_length(DocNum doc) const { return doc_lengths_[doc]; }
  std::uint64_t total_terms() const { return total_terms_; }
  std::size_t vocabulary_size() const { return terms_.size(); }
  double average_doc_length() const;

  /// Terms in lexicographic order.
  std::vector<std::string> sorted_terms() const;

 private:
  friend class IndexBuilder;
  friend class FieldedIndex;

  struct TermEntry {
    std::vector<Posting> postings;
    std::uint64_t collection_count = 0;
  };
  std::unordered_map<std::string, TermEntry> terms_;
  std::vector<std::uint32_t> doc_lengths_;
  std::uint64_t total_terms_ = 0;
};

/// Immutable multi-field inverted index over a fixed document set.
class FieldedIndex {
 public:
  std::size_t num_docs() const { return doc_ids_.size(); }
  std::size_t num_fields() const { return fields_.size(); }
  const std::string& field_name(std::size_t f) const { return field_names_[f]; }
  std::span<const std::string> field_names() const { return field_names_; }
  std::optional<std::size_t> field_id(std::string_view name) const;
  const FieldIndex& field(std::size_t f) const { return fields_[f]; }

  const std::string& doc_id(DocNum d) const { return doc_ids_[d]; }
  std::optional<DocNum> doc_number(const std::string& id) const;

  /// ln(N / n_t), with n_t = 0.5 for terms absent from the field. Throws on an
  /// empty index.
  double idf(std::size_t f, const std::string& term) const;

  /// Maximum-likelihood background probability of `term` in field `f`.
  /// Throws when the field holds no terms.
  double collection_prob(std::size_t f, const std::string& term) const;

  /// Versioned binary snapshot. Terms are written in sorted order so equal
  /// indices produce identical bytes.
  void save(std::ostream& out) const;
  static FieldedIndex load(std::istream& in);

 private:
  friend class IndexBuilder;

  std::vector<std::string> field_names_;
  std::vector<FieldIndex> fields_;
  std::vector<std::string> doc_ids_;
  std::unordered_map<std::string, DocNum> doc_numbers_;
};

class IndexBuilder {
 public:
  explicit IndexBuilder(std::vector<std::string> field_names);

  /// `field_tokens[f]` holds the tokens of field f, in order.
  void add_document(const std::string& id, std::span<const std::vector<std::string>> field_tokens);

  FieldedIndex finish() &&;

 private:
  FieldedIndex index_;
};

// Table index: six fields.
using TableIndex = FieldedIndex;
enum TableField : std::size_t {
  kPageTitle = 0,
  kSectionTitle,
  kCaption,
  kHeadings,
  kBody,
  kCatchAll,
  kNumTableFields
};
inline constexpr std::array<const char*, kNumTableFields> kTableFieldNames = {
    "pageTitle", "sectionTitle", "caption", "headings", "body", "catchAll"};

/// Per-field token lists of a table. Body covers data rows only; catchAll is
/// the concatenation of the other five.
std::array<std::vector<std::string>, kNumTableFields> table_field_tokens(const Table& table);

TableIndex build_table_index(const TableCorpus& corpus);

// Entity index: the five fielded-entity fields.
using EntityIndex = FieldedIndex;
enum EntityField : std::size_t {
  kNames = 0,
  kCategoriesText,
  kAttributes,
  kSimilarEntityNames,
  kRelatedEntityNames,
  kNumEntityFields
};
inline constexpr std::array<const char*, kNumEntityFields> kEntityFieldNames = {
    "names", "categories", "attributes", "similarEntityNames", "relatedEntityNames"};

EntityIndex build_entity_index(const KnowledgeBase& kb);

}  // namespace tabret
