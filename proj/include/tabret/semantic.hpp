#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tabret/corpus.hpp"
#include "tabret/index.hpp"
#include "tabret/retrieval.hpp"

namespace tabret {

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

enum class TermKind { kWord, kEntity };

/// Distinct terms of one kind, in first-seen order.
struct TermSet {
  TermKind kind = TermKind::kWord;
  std::vector<std::string> terms;

  /// Appends `term` unless already present.
  void insert(const std::string& term);
  bool contains(const std::string& term) const;
  std::size_t size() const { return terms.size(); }
  bool empty() const { return terms.empty(); }
};

/// Unique query tokens.
TermSet extract_query_words(std::string_view query_text);

/// Unique tokens of the page title, caption and headings. Body and section
/// title are not used.
TermSet extract_table_words(const Table& table);

/// Fraction of data rows whose cell in column `col` carries an entity.
double column_entity_rate(const Table& table, std::size_t col);

/// Column with the highest entity rate; ties go to the leftmost column.
/// Throws when the table has no columns or no data rows.
std::size_t core_column(const Table& table);

/// Core-column entities united with the entities retrieved for the page title
/// and for the caption.
TermSet extract_table_entities(const Table& table, const EntityRetriever& retriever);

/// Entities retrieved for the query text.
TermSet extract_query_entities(std::string_view query_text, const EntityRetriever& retriever);

// ---------------------------------------------------------------------------
// Semantic vectors
// ---------------------------------------------------------------------------

enum class Representation { kEntity = 0, kCategory, kWord, kGraph };
inline constexpr std::size_t kNumRepresentations = 4;
inline constexpr std::array<const char*, kNumRepresentations> kRepresentationNames = {"Entity", "Category",
                                                                                      "Word", "Graph"};

enum class Measure { kEarly = 0, kLateMax, kLateSum, kLateAvg };
inline constexpr std::size_t kNumMeasures = 4;
inline constexpr std::array<const char*, kNumMeasures> kMeasureNames = {"Early", "LateMax", "LateSum",
                                                                        "LateAvg"};

enum class Aggregation { kMax, kSum, kAvg };

/// Binary sparse vector: sorted, distinct dimension ids. Every listed
/// dimension has value 1.
using SparseVector = std::vector<std::string>;

struct SemanticVector {
  Representation representation = Representation::kEntity;
  SparseVector sparse;       // bag-of-entities / bag-of-categories
  std::vector<float> dense;  // word / graph embeddings

  bool is_dense() const {
    return representation == Representation::kWord || representation == Representation::kGraph;
  }
};

/// Cosine of two binary sparse vectors: |a ∩ b| / sqrt(|a| |b|).
double sparse_cosine(const SparseVector& a, const SparseVector& b);

/// Term-to-vector mapping over the knowledge base and the embedding stores.
/// Either store may be absent; lookups in it then yield no vector.
class SemanticSpace {
 public:
  SemanticSpace(const KnowledgeBase& kb, const EmbeddingStore* words, const EmbeddingStore* graph);

  /// Vector of `term` in `rep`, or nullopt when the term has no (non-zero)
  /// representation there. Word terms map only to kWord, entity terms only to
  /// the other three; any other combination throws.
  std::optional<SemanticVector> embed(const std::string& term, TermKind kind, Representation rep) const;

  const KnowledgeBase& kb() const { return *kb_; }

 private:
  const KnowledgeBase* kb_;
  const EmbeddingStore* words_;
  const EmbeddingStore* graph_;
};

// ---------------------------------------------------------------------------
// Similarity measures
// ---------------------------------------------------------------------------

/// Aggregate of a set of pairwise scores. Empty input gives 0.
double aggregate(std::span<const double> scores, Aggregation aggr);

/// All cos(q_i, t_j), row-major over i. Vectors of one call share a kind.
std::vector<double> pairwise_cosines(std::span<const SemanticVector> query_vecs,
                                     std::span<const SemanticVector> table_vecs);

/// Aggregated pairwise cosines; 0 when either side is empty.
double late_fusion(std::span<const SemanticVector> query_vecs, std::span<const SemanticVector> table_vecs,
                   Aggregation aggr);

/// Cosine of the two centroids. Without weights the centroid is the plain
/// mean; with weights it is sum_i w_i v_i. 0 when either side is empty.
double early_fusion(std::span<const SemanticVector> query_vecs, std::span<const SemanticVector> table_vecs,
                    std::span<const double> query_weights = {}, std::span<const double> table_weights = {});

// ---------------------------------------------------------------------------
// Feature block
// ---------------------------------------------------------------------------

inline constexpr std::size_t kNumSemanticFeatures = kNumRepresentations * kNumMeasures;

/// Feature name `<Representation>_<Measure>`, e.g. Entity_Early.
std::string semantic_feature_name(Representation rep, Measure m);
/// All 16 names in block order (representation major).
std::array<std::string, kNumSemanticFeatures> semantic_feature_names();

struct SemanticFeatureBlock {
  std::array<double, kNumSemanticFeatures> values{};

  double& at(Representation rep, Measure m) {
    return values[static_cast<std::size_t>(rep) * kNumMeasures + static_cast<std::size_t>(m)];
  }
  double at(Representation rep, Measure m) const {
    return values[static_cast<std::size_t>(rep) * kNumMeasures + static_cast<std::size_t>(m)];
  }
};

/// Vectors of one side (query or table) in each representation. Word vectors
/// carry TF-IDF weights for early fusion.
struct SemanticProfile {
  std::array<std::vector<SemanticVector>, kNumRepresentations> vectors;
  std::vector<double> word_weights;
  TermSet words;
  TermSet entities;
};

/// Computes the 16 semantic features for query-table pairs. Word TF-IDF uses
/// term counts within each side's own text and IDF of the table catch-all
/// field.
class SemanticMatcher {
 public:
  SemanticMatcher(const SemanticSpace& space, const EntityRetriever& retriever, const TableIndex& table_index);

  SemanticProfile query_profile(std::string_view query_text) const;
  SemanticProfile table_profile(const Table& table) const;

  SemanticFeatureBlock features(const SemanticProfile& query, const SemanticProfile& table) const;
  SemanticFeatureBlock features(std::string_view query_text, const Table& table) const {
    return features(query_profile(query_text), table_profile(table));
  }

 private:
  void fill_vectors(SemanticProfile& profile, const std::vector<std::string>& word_tokens) const;

  const SemanticSpace* space_;
  const EntityRetriever* retriever_;
  const TableIndex* table_index_;
};

}  // namespace tabret
