#include "tabret/semantic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "tabret/error.hpp"
#include "tabret/simd.hpp"
#include "tabret/text.hpp"

namespace tabret {

// ---------------------------------------------------------------------------
// Terms

void TermSet::insert(const std::string& term) {
  if (!contains(term)) terms.push_back(term);
}

bool TermSet::contains(const std::string& term) const {
  return std::find(terms.begin(), terms.end(), term) != terms.end();
}

TermSet extract_query_words(std::string_view query_text) {
  TermSet out{TermKind::kWord, {}};
  for (const auto& t : tokenize(query_text)) out.insert(t);
  return out;
}

namespace {

std::vector<std::string> table_word_tokens(const Table& table) {
  std::vector<std::string> tokens;
  tokenize_into(table.page_title, tokens);
  tokenize_into(table.caption, tokens);
  for (const auto& h : table.headings) tokenize_into(h, tokens);
  return tokens;
}

}  // namespace

TermSet extract_table_words(const Table& table) {
  TermSet out{TermKind::kWord, {}};
  for (const auto& t : table_word_tokens(table)) out.insert(t);
  return out;
}

double column_entity_rate(const Table& table, std::size_t col) {
  const auto rows = table.data_rows();
  if (rows.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& row : rows)
    if (col < row.size() && row[col].entity) ++hits;
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

std::size_t core_column(const Table& table) {
  if (table.num_columns() == 0 || table.num_data_rows() == 0) {
    throw Error("core column of table " + table.id + " is undefined: no columns or no data rows");
  }
  std::size_t best = 0;
  double best_rate = -1.0;
  for (std::size_t c = 0; c < table.num_columns(); ++c) {
    double rate = column_entity_rate(table, c);
    if (rate > best_rate) {
      best_rate = rate;
      best = c;
    }
  }
  return best;
}

TermSet extract_table_entities(const Table& table, const EntityRetriever& retriever) {
  TermSet out{TermKind::kEntity, {}};
  if (table.num_columns() > 0 && table.num_data_rows() > 0) {
    const auto col = core_column(table);
    for (const auto& row : table.data_rows())
      if (row[col].entity) out.insert(*row[col].entity);
  }
  for (const auto& e : retriever.retrieve(table.page_title)) out.insert(e);
  for (const auto& e : retriever.retrieve(table.caption)) out.insert(e);
  return out;
}

TermSet extract_query_entities(std::string_view query_text, const EntityRetriever& retriever) {
  TermSet out{TermKind::kEntity, {}};
  for (const auto& e : retriever.retrieve(query_text)) out.insert(e);
  return out;
}

// ---------------------------------------------------------------------------
// Vectors

double sparse_cosine(const SparseVector& a, const SparseVector& b) {
  if (a.empty() || b.empty()) return 0.0;
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(common) / std::sqrt(static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

SemanticSpace::SemanticSpace(const KnowledgeBase& kb, const EmbeddingStore* words, const EmbeddingStore* graph)
    : kb_(&kb), words_(words), graph_(graph) {}

std::optional<SemanticVector> SemanticSpace::embed(const std::string& term, TermKind kind,
                                                   Representation rep) const {
  const bool word_space = rep == Representation::kWord;
  if ((kind == TermKind::kWord) != word_space) {
    throw Error("term '" + term + "' of the wrong kind for the " +
                kRepresentationNames[static_cast<std::size_t>(rep)] + " representation");
  }
  SemanticVector v;
  v.representation = rep;
  switch (rep) {
    case Representation::kEntity: {
      const auto* rec = kb_->find(term);
      if (!rec) return std::nullopt;
      v.sparse.push_back(term);
      v.sparse.insert(v.sparse.end(), rec->out_links.begin(), rec->out_links.end());
      const auto& in = kb_->in_links(term);
      v.sparse.insert(v.sparse.end(), in.begin(), in.end());
      std::sort(v.sparse.begin(), v.sparse.end());
      v.sparse.erase(std::unique(v.sparse.begin(), v.sparse.end()), v.sparse.end());
      return v;
    }
    case Representation::kCategory: {
      const auto* rec = kb_->find(term);
      if (!rec || rec->categories.empty()) return std::nullopt;
      v.sparse.assign(rec->categories.begin(), rec->categories.end());
      return v;
    }
    case Representation::kWord:
    case Representation::kGraph: {
      const auto* store = word_space ? words_ : graph_;
      if (!store) return std::nullopt;
      auto found = store->find(term);
      if (!found) return std::nullopt;
      v.dense.assign(found->begin(), found->end());
      if (simd::dot(v.dense, v.dense) <= 0.0) return std::nullopt;
      return v;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Measures

double aggregate(std::span<const double> scores, Aggregation aggr) {
  if (scores.empty()) return 0.0;
  switch (aggr) {
    case Aggregation::kMax:
      return *std::max_element(scores.begin(), scores.end());
    case Aggregation::kSum:
    case Aggregation::kAvg: {
      double sum = 0.0;
      for (double s : scores) sum += s;
      return aggr == Aggregation::kSum ? sum : sum / static_cast<double>(scores.size());
    }
  }
  return 0.0;
}

std::vector<double> pairwise_cosines(std::span<const SemanticVector> query_vecs,
                                     std::span<const SemanticVector> table_vecs) {
  std::vector<double> out;
  if (query_vecs.empty() || table_vecs.empty()) return out;
  out.reserve(query_vecs.size() * table_vecs.size());
  if (!query_vecs.front().is_dense()) {
    for (const auto& q : query_vecs)
      for (const auto& t : table_vecs) out.push_back(sparse_cosine(q.sparse, t.sparse));
    return out;
  }
  // Norms once per vector; the n*m dot products dominate.
  auto norms = [](std::span<const SemanticVector> vs) {
    std::vector<double> n;
    n.reserve(vs.size());
    for (const auto& v : vs) n.push_back(std::sqrt(simd::dot(v.dense, v.dense)));
    return n;
  };
  const auto qn = norms(query_vecs);
  const auto tn = norms(table_vecs);
  for (std::size_t i = 0; i < query_vecs.size(); ++i) {
    for (std::size_t j = 0; j < table_vecs.size(); ++j) {
      const double denom = qn[i] * tn[j];
      double c = denom > 0.0 ? simd::dot(query_vecs[i].dense, table_vecs[j].dense) / denom : 0.0;
      out.push_back(std::clamp(c, -1.0, 1.0));
    }
  }
  return out;
}

double late_fusion(std::span<const SemanticVector> query_vecs, std::span<const SemanticVector> table_vecs,
                   Aggregation aggr) {
  auto scores = pairwise_cosines(query_vecs, table_vecs);
  return aggregate(scores, aggr);
}

namespace {

std::vector<float> dense_centroid(std::span<const SemanticVector> vecs, std::span<const double> weights) {
  std::vector<float> c(vecs.front().dense.size(), 0.0f);
  const float uniform = 1.0f / static_cast<float>(vecs.size());
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    const float w = weights.empty() ? uniform : static_cast<float>(weights[i]);
    if (vecs[i].dense.size() != c.size()) throw Error("dense vectors of different dimension");
    simd::axpy(w, vecs[i].dense, c);
  }
  return c;
}

std::map<std::string, double> sparse_centroid(std::span<const SemanticVector> vecs,
                                               std::span<const double> weights) {
  std::map<std::string, double> c;
  const double uniform = 1.0 / static_cast<double>(vecs.size());
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    const double w = weights.empty() ? uniform : weights[i];
    for (const auto& d : vecs[i].sparse) c[d] += w;
  }
  return c;
}

double map_cosine(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [k, v] : a) na += v * v;
  for (const auto& [k, v] : b) nb += v * v;
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  for (const auto& [k, v] : small)
    if (auto it = large.find(k); it != large.end()) dot += v * it->second;
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

}  // namespace

double early_fusion(std::span<const SemanticVector> query_vecs, std::span<const SemanticVector> table_vecs,
                    std::span<const double> query_weights, std::span<const double> table_weights) {
  if (query_vecs.empty() || table_vecs.empty()) return 0.0;
  if ((!query_weights.empty() && query_weights.size() != query_vecs.size()) ||
      (!table_weights.empty() && table_weights.size() != table_vecs.size())) {
    throw Error("early fusion weights do not match the vectors");
  }
  if (query_vecs.front().is_dense()) {
    return simd::cosine(dense_centroid(query_vecs, query_weights), dense_centroid(table_vecs, table_weights));
  }
  return map_cosine(sparse_centroid(query_vecs, query_weights), sparse_centroid(table_vecs, table_weights));
}

// ---------------------------------------------------------------------------
// Feature block

std::string semantic_feature_name(Representation rep, Measure m) {
  return std::string(kRepresentationNames[static_cast<std::size_t>(rep)]) + "_" +
         kMeasureNames[static_cast<std::size_t>(m)];
}

std::array<std::string, kNumSemanticFeatures> semantic_feature_names() {
  std::array<std::string, kNumSemanticFeatures> out;
  for (std::size_t r = 0; r < kNumRepresentations; ++r)
    for (std::size_t m = 0; m < kNumMeasures; ++m)
      out[r * kNumMeasures + m] = semantic_feature_name(static_cast<Representation>(r), static_cast<Measure>(m));
  return out;
}

SemanticMatcher::SemanticMatcher(const SemanticSpace& space, const EntityRetriever& retriever,
                                 const TableIndex& table_index)
    : space_(&space), retriever_(&retriever), table_index_(&table_index) {}

void SemanticMatcher::fill_vectors(SemanticProfile& profile, const std::vector<std::string>& word_tokens) const {
  std::unordered_map<std::string, std::size_t> tf;
  for (const auto& t : word_tokens) ++tf[t];
  const bool have_index = table_index_->num_docs() > 0;

  auto& words = profile.vectors[static_cast<std::size_t>(Representation::kWord)];
  for (const auto& w : profile.words.terms) {
    auto v = space_->embed(w, TermKind::kWord, Representation::kWord);
    if (!v) continue;
    words.push_back(std::move(*v));
    const double idf = have_index ? table_index_->idf(kCatchAll, w) : 1.0;
    profile.word_weights.push_back(static_cast<double>(tf[w]) * idf);
  }
  for (auto rep : {Representation::kEntity, Representation::kCategory, Representation::kGraph}) {
    auto& out = profile.vectors[static_cast<std::size_t>(rep)];
    for (const auto& e : profile.entities.terms)
      if (auto v = space_->embed(e, TermKind::kEntity, rep)) out.push_back(std::move(*v));
  }
}

SemanticProfile SemanticMatcher::query_profile(std::string_view query_text) const {
  SemanticProfile p;
  p.words = extract_query_words(query_text);
  p.entities = extract_query_entities(query_text, *retriever_);
  fill_vectors(p, tokenize(query_text));
  return p;
}

SemanticProfile SemanticMatcher::table_profile(const Table& table) const {
  SemanticProfile p;
  p.words = extract_table_words(table);
  p.entities = extract_table_entities(table, *retriever_);
  fill_vectors(p, table_word_tokens(table));
  return p;
}

SemanticFeatureBlock SemanticMatcher::features(const SemanticProfile& query, const SemanticProfile& table) const {
  SemanticFeatureBlock block;
  for (std::size_t r = 0; r < kNumRepresentations; ++r) {
    const auto rep = static_cast<Representation>(r);
    const auto& qv = query.vectors[r];
    const auto& tv = table.vectors[r];
    if (qv.empty() || tv.empty()) continue;
    if (rep == Representation::kWord) {
      block.at(rep, Measure::kEarly) = early_fusion(qv, tv, query.word_weights, table.word_weights);
    } else {
      block.at(rep, Measure::kEarly) = early_fusion(qv, tv);
    }
    const auto scores = pairwise_cosines(qv, tv);
    block.at(rep, Measure::kLateMax) = aggregate(scores, Aggregation::kMax);
    block.at(rep, Measure::kLateSum) = aggregate(scores, Aggregation::kSum);
    block.at(rep, Measure::kLateAvg) = aggregate(scores, Aggregation::kAvg);
  }
  return block;
}

}  // namespace tabret
