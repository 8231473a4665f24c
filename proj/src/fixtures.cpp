#include "tabret/fixtures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "tabret/error.hpp"
#include "tabret/random.hpp"
#include "tabret/text.hpp"

namespace tabret {

namespace {

constexpr std::array<const char*, 12> kGenericHeadings = {"name",  "year",  "notes", "rank",   "country", "score",
                                                          "total", "date",  "type",  "location", "club",  "position"};

constexpr std::size_t kQueryWordsPerTopic = 3;
constexpr std::size_t kSynonymsPerTopic = 4;
constexpr std::size_t kFillerWords = 40;
constexpr std::size_t kDistractorsPerQuery = 5;
constexpr std::size_t kRandomPerQuery = 15;

class WordFactory {
 public:
  explicit WordFactory(Rng& rng) : rng_(rng) {
    for (const auto* g : kGenericHeadings) used_.insert(g);
  }

  std::string make() {
    static constexpr std::string_view kCons = "bdfgklmnprstvz";
    static constexpr std::string_view kVow = "aeiou";
    while (true) {
      std::string w;
      const auto syllables = 3 + uniform_index(rng_, 2);
      for (std::size_t i = 0; i < syllables; ++i) {
        w.push_back(kCons[uniform_index(rng_, kCons.size())]);
        w.push_back(kVow[uniform_index(rng_, kVow.size())]);
      }
      if (used_.insert(w).second) return w;
    }
  }

 private:
  Rng& rng_;
  std::set<std::string> used_;
};

std::vector<float> random_direction(Rng& rng, std::size_t dim) {
  std::vector<float> v(dim);
  for (auto& x : v) x = static_cast<float>(standard_normal(rng));
  return v;
}

std::vector<float> near(const std::vector<float>& center, double noise, Rng& rng) {
  std::vector<float> v(center.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(center[i] + noise * standard_normal(rng));
  return v;
}

// Rounded to the precision written to disk so the in-memory stores match what
// a reload produces.
std::vector<float> rounded(std::vector<float> v) {
  for (auto& x : v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.5f", static_cast<double>(x));
    x = std::strtof(buf, nullptr);
  }
  return v;
}

std::string join(const std::vector<std::string>& words, std::size_t from, std::size_t count) {
  std::string out;
  for (std::size_t i = from; i < from + count && i < words.size(); ++i) {
    if (!out.empty()) out.push_back(' ');
    out += words[i];
  }
  return out;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

struct Topic {
  std::vector<std::string> query_words;
  std::vector<std::string> synonyms;
  std::vector<std::string> entities;  // ids
  std::vector<std::string> entity_names;
  std::vector<std::size_t> candidate_tables;  // corpus positions of the relevant pool
  std::vector<std::size_t> distractor_tables; // own-topic tables carrying the next topic's words
  std::vector<std::size_t> lexical;           // subset of candidates with query words
};

}  // namespace

FixtureData generate_fixtures(const FixtureOptions& opts) {
  if (opts.tables == 0 || opts.queries == 0 || opts.entities == 0) throw Error("fixture scale must be positive");
  if (opts.word_dim == 0 || opts.graph_dim == 0) throw Error("embedding dimensions must be positive");
  if (!(opts.semantic_fraction >= 0.0 && opts.semantic_fraction <= 1.0)) {
    throw Error("semantic fraction must be in [0,1]");
  }

  Rng rng(opts.seed);
  WordFactory words(rng);
  FixtureData data{{}, {}, EmbeddingStore(opts.word_dim), EmbeddingStore(opts.graph_dim), {}, {}, {}, {}, {}, {}};

  const std::size_t num_topics = std::max<std::size_t>(1, (opts.queries + 1) / 2);
  if (opts.entities < num_topics) throw Error("need at least one entity per topic");
  std::vector<Topic> topics(num_topics);

  // Vocabulary and word embeddings.
  std::vector<std::string> filler;
  for (std::size_t i = 0; i < kFillerWords; ++i) filler.push_back(words.make());
  for (auto& t : topics) {
    for (std::size_t i = 0; i < kQueryWordsPerTopic; ++i) t.query_words.push_back(words.make());
    for (std::size_t i = 0; i < kSynonymsPerTopic; ++i) t.synonyms.push_back(words.make());
  }
  for (auto& t : topics) {
    const auto center = random_direction(rng, opts.word_dim);
    for (const auto& w : t.query_words) data.words.add(w, rounded(near(center, 0.5, rng)));
    for (const auto& w : t.synonyms) data.words.add(w, rounded(near(center, 0.5, rng)));
  }
  for (const auto* g : kGenericHeadings) data.words.add(g, rounded(random_direction(rng, opts.word_dim)));
  for (const auto& w : filler) data.words.add(w, rounded(random_direction(rng, opts.word_dim)));

  // Knowledge base: entities dealt round-robin to topics.
  for (std::size_t e = 0; e < opts.entities; ++e) {
    auto& t = topics[e % num_topics];
    auto name = capitalize(words.make());
    t.entities.push_back("dbp:" + name);
    t.entity_names.push_back(name);
  }
  std::size_t dangling = 0;
  for (std::size_t k = 0; k < num_topics; ++k) {
    auto& t = topics[k];
    const auto center = random_direction(rng, opts.graph_dim);
    const std::size_t n = t.entities.size();
    for (std::size_t i = 0; i < n; ++i) {
      EntityRecord r;
      r.id = t.entities[i];
      r.names = {t.entity_names[i]};
      r.categories_text = {join(t.query_words, 0, t.query_words.size())};
      r.attributes = {join(t.synonyms, 0, t.synonyms.size())};
      r.categories = {"cat:topic" + std::to_string(k), "cat:topic" + std::to_string(k) + "_group" +
                                                           std::to_string(i % 2)};
      if (n > 1) {
        r.out_links.insert(t.entities[(i + 1) % n]);
        r.out_links.insert(t.entities[uniform_index(rng, n)]);
        r.out_links.erase(r.id);
      }
      if (i % 4 == 3) r.out_links.insert("dbp:Dangling" + std::to_string(dangling++));
      for (const auto& l : r.out_links) {
        auto it = std::find(t.entities.begin(), t.entities.end(), l);
        if (it != t.entities.end()) r.similar_entity_names.push_back(t.entity_names[it - t.entities.begin()]);
      }
      if (n > 2) r.related_entity_names = {t.entity_names[(i + 2) % n]};
      data.kb.add(std::move(r));
      data.graph.add(t.entities[i], rounded(near(center, 0.5, rng)));
    }
  }

  // Tables.
  const std::size_t per_topic = opts.tables / num_topics;
  const std::size_t pool = std::max<std::size_t>(1, (per_topic + 1) / 2);
  const auto lexical_count =
      static_cast<std::size_t>(std::llround(static_cast<double>(pool) * (1.0 - opts.semantic_fraction)));

  for (std::size_t i = 0; i < opts.tables; ++i) {
    const std::size_t k = i % num_topics;
    const std::size_t p = i / num_topics;
    auto& t = topics[k];
    const auto& next = topics[(k + 1) % num_topics];
    const bool candidate = p < pool;
    const bool lexical = candidate && p < lexical_count;
    const bool distractor = !candidate && num_topics > 1;

    char id[16];
    std::snprintf(id, sizeof(id), "T%04zu", i + 1);
    Table table;
    table.id = id;
    const auto& f1 = filler[uniform_index(rng, filler.size())];
    const auto& f2 = filler[uniform_index(rng, filler.size())];
    if (lexical) {
      table.page_title = join(t.query_words, 0, 2) + " " + f1;
      table.caption = t.query_words[2] + " " + f2;
    } else {
      const auto s = uniform_index(rng, t.synonyms.size());
      table.page_title = t.synonyms[s] + " " + t.synonyms[(s + 1) % t.synonyms.size()] + " " + f1;
      table.caption = t.synonyms[(s + 2) % t.synonyms.size()] + " " + f2;
    }
    table.section_title = filler[uniform_index(rng, filler.size())];

    std::vector<std::string> generic(kGenericHeadings.begin() + 1, kGenericHeadings.end());
    shuffle(generic, rng);
    table.headings = {"name", generic[0], distractor ? next.query_words[0] : generic[1]};

    table.rows.push_back({});
    for (const auto& h : table.headings) table.rows.back().push_back({h, std::nullopt});
    table.num_header_rows = 1;

    const std::size_t nrows = 4 + uniform_index(rng, 4);
    for (std::size_t r = 0; r < nrows; ++r) {
      TableRow row;
      const auto e = uniform_index(rng, t.entities.size());
      TableCell core{t.entity_names[e], t.entities[e]};
      if (i % 7 == 0 && r == 0) core = {capitalize(f2), "dbp:Unlinked" + std::to_string(i)};
      if (r % 3 == 2 && uniform_index(rng, 2) == 0) core.entity.reset();
      row.push_back(std::move(core));
      row.push_back({std::to_string(1950 + uniform_index(rng, 70)), std::nullopt});
      std::string third;
      if (distractor && r < 2) {
        third = next.query_words[1 + r % 2];
      } else if (uniform_index(rng, 10) != 0) {
        third = filler[uniform_index(rng, filler.size())];
      }
      row.push_back({std::move(third), std::nullopt});
      table.rows.push_back(std::move(row));
    }

    if (i % 10 != 9) {
      PageSignals s;
      s.in_links = uniform_index(rng, 500);
      s.out_links = uniform_index(rng, 300);
      s.page_views = uniform_index(rng, 100000);
      s.tables_on_page = 1 + uniform_index(rng, 5);
      s.page_size_chars = 2000 + uniform_index(rng, 48000);
      data.signals.emplace(table.id, s);
    }
    data.schemas.emplace_back(table.headings, 1 + uniform_index(rng, 20));

    const auto pos = data.corpus.size();
    if (candidate) {
      t.candidate_tables.push_back(pos);
      if (lexical) t.lexical.push_back(pos);
    } else if (distractor) {
      topics[(k + 1) % num_topics].distractor_tables.push_back(pos);
    }
    data.corpus.add(std::move(table));
  }
  for (std::size_t i = 0; i < 30; ++i) {
    std::vector<std::string> generic(kGenericHeadings.begin(), kGenericHeadings.end());
    shuffle(generic, rng);
    data.schemas.emplace_back(std::vector<std::string>(generic.begin(), generic.begin() + 3),
                              1 + uniform_index(rng, 50));
  }

  // Queries and judgments.
  for (std::size_t qi = 0; qi < opts.queries; ++qi) {
    const std::size_t k = std::min(qi / 2, num_topics - 1);
    auto& t = topics[k];
    char qid[16];
    std::snprintf(qid, sizeof(qid), "q%02zu", qi + 1);
    const std::size_t first = (qi % 2) == 0 ? 0 : 1;
    data.queries.add({qid, qi % 2 == 0 ? "QS-1" : "QS-2", join(t.query_words, first, 2)});

    std::vector<std::pair<std::string, std::uint32_t>> engine_hits;
    for (auto pos : t.candidate_tables) {
      const auto& id = data.corpus[pos].id;
      data.qrels.set(qid, id, 1 + static_cast<int>(uniform_index(rng, 2)));
      if (std::find(t.lexical.begin(), t.lexical.end(), pos) != t.lexical.end()) {
        engine_hits.emplace_back(id, 0);
      } else {
        data.semantic_pairs.emplace_back(qid, id);
      }
    }
    auto distractors = t.distractor_tables;
    shuffle(distractors, rng);
    distractors.resize(std::min(distractors.size(), kDistractorsPerQuery));
    for (auto pos : distractors) {
      data.qrels.set(qid, data.corpus[pos].id, 0);
      engine_hits.emplace_back(data.corpus[pos].id, 0);
    }
    std::set<std::size_t> excluded(t.candidate_tables.begin(), t.candidate_tables.end());
    excluded.insert(t.distractor_tables.begin(), t.distractor_tables.end());
    std::vector<std::size_t> others;
    for (std::size_t pos = 0; pos < data.corpus.size(); ++pos)
      if (!excluded.count(pos)) others.push_back(pos);
    shuffle(others, rng);
    for (std::size_t j = 0; j < std::min(kRandomPerQuery, others.size()); ++j) {
      data.qrels.set(qid, data.corpus[others[j]].id, 0);
    }
    shuffle(engine_hits, rng);
    for (std::size_t r = 0; r < engine_hits.size(); ++r) {
      data.yrank.emplace_back(qid, engine_hits[r].first, static_cast<std::uint32_t>(r + 1));
    }
  }
  return data;
}

std::string write_fixtures(const FixtureData& data, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto open = [&](const char* name) {
    std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (fs::path(out_dir) / name).string());
    return out;
  };
  auto write_vectors = [](std::ofstream& out, const EmbeddingStore& store) {
    char buf[32];
    for (const auto& tok : store.tokens()) {
      out << tok;
      const auto vec = *store.find(tok);
      for (float x : vec) {
        std::snprintf(buf, sizeof(buf), " %.5f", static_cast<double>(x));
        out << buf;
      }
      out << '\n';
    }
  };

  {
    auto out = open("corpus.jsonl");
    write_corpus(out, data.corpus);
  }
  {
    auto out = open("kb.jsonl");
    write_knowledge_base(out, data.kb);
  }
  {
    auto out = open("words.vec");
    out << data.words.size() << ' ' << data.words.dimension() << '\n';
    write_vectors(out, data.words);
  }
  {
    auto out = open("graph.vec");
    write_vectors(out, data.graph);
  }
  {
    std::map<std::vector<std::string>, std::uint64_t> merged;
    for (const auto& [headings, freq] : data.schemas) {
      std::vector<std::string> labels;
      for (const auto& h : headings) labels.push_back(normalize_label(h));
      std::sort(labels.begin(), labels.end());
      labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
      merged[labels] += freq;
    }
    auto out = open("acsdb.tsv");
    for (const auto& [labels, freq] : merged) {
      for (std::size_t i = 0; i < labels.size(); ++i) out << (i ? "|" : "") << labels[i];
      out << '\t' << freq << '\n';
    }
  }
  {
    auto out = open("queries.tsv");
    for (const auto& q : data.queries.queries()) out << q.id << '\t' << q.subset << '\t' << q.text << '\n';
  }
  {
    auto out = open("qrels.txt");
    write_qrels(out, data.qrels);
  }
  {
    std::map<std::string, PageSignals> sorted(data.signals.begin(), data.signals.end());
    auto out = open("signals.tsv");
    for (const auto& [id, s] : sorted) {
      out << id << '\t' << s.in_links << '\t' << s.out_links << '\t' << s.page_views << '\t' << s.tables_on_page
          << '\t' << s.page_size_chars << '\n';
    }
  }
  {
    auto out = open("yrank.tsv");
    for (const auto& [q, t, r] : data.yrank) out << q << '\t' << t << '\t' << r << '\n';
  }
  const auto config = (fs::path(out_dir) / "tabret.conf").string();
  {
    auto out = open("tabret.conf");
    out << "# generated fixture collection\n"
           "corpus = corpus.jsonl\n"
           "kb = kb.jsonl\n"
           "word_embeddings = words.vec\n"
           "graph_embeddings = graph.vec\n"
           "schema_stats = acsdb.tsv\n"
           "queries = queries.tsv\n"
           "qrels = qrels.txt\n"
           "signals = signals.tsv\n"
           "yrank = yrank.tsv\n";
  }
  return config;
}

}  // namespace tabret
