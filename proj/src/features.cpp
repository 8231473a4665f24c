#include "tabret/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

#include "tabret/error.hpp"
#include "tabret/text.hpp"

namespace tabret {

const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n(kBaselineFeatureNames.begin(), kBaselineFeatureNames.end());
    for (auto& s : semantic_feature_names()) n.push_back(s);
    return n;
  }();
  return names;
}

std::optional<std::size_t> feature_index(const std::string& name) {
  const auto& names = feature_names();
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

std::array<double, kNumQueryFeatures> query_features(std::span<const std::string> query_tokens,
                                                     const TableIndex& index) {
  std::array<double, kNumQueryFeatures> f{};
  f[0] = static_cast<double>(query_tokens.size());
  for (std::size_t field = 0; field < kNumTableFields; ++field) {
    double sum = 0.0;
    for (const auto& t : query_tokens) sum += index.idf(field, t);
    f[1 + field] = sum;
  }
  return f;
}

double pmi(std::span<const std::string> headings, const SchemaStats& stats) {
  if (stats.empty()) return 0.0;
  std::vector<std::string> known;
  for (const auto& h : headings) {
    auto n = normalize_label(h);
    if (!n.empty() && stats.heading_count(n) > 0) known.push_back(std::move(n));
  }
  std::sort(known.begin(), known.end());
  known.erase(std::unique(known.begin(), known.end()), known.end());
  if (known.size() < 2) return 0.0;

  const double total = static_cast<double>(stats.total_count());
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < known.size(); ++i) {
    const double pa = static_cast<double>(stats.heading_count(known[i])) / total;
    for (std::size_t j = i + 1; j < known.size(); ++j, ++pairs) {
      const auto joint = stats.joint_count(known[i], known[j]);
      if (joint == 0) continue;
      const double pb = static_cast<double>(stats.heading_count(known[j])) / total;
      sum += std::log((static_cast<double>(joint) / total) / (pa * pb));
    }
  }
  return sum / static_cast<double>(pairs);
}

std::array<double, kNumTableFeatures> table_features(const Table& table, const SchemaStats& stats) {
  std::array<double, kNumTableFeatures> f{};
  std::size_t nulls = 0;
  for (const auto& row : table.data_rows())
    for (const auto& cell : row)
      if (trim(cell.text).empty()) ++nulls;

  const auto& s = table.signals;
  f[0] = static_cast<double>(table.num_data_rows());
  f[1] = static_cast<double>(table.num_columns());
  f[2] = static_cast<double>(nulls);
  f[3] = pmi(table.headings, stats);
  f[4] = static_cast<double>(s.in_links);
  f[5] = static_cast<double>(s.out_links);
  f[6] = static_cast<double>(s.page_views);
  f[7] = 1.0 / static_cast<double>(std::max<std::uint64_t>(1, s.tables_on_page));
  if (s.page_size_chars == 0) {
    f[8] = 1.0;
  } else {
    // The table always occupies some of its page, so the ratio stays in (0,1].
    const auto chars = std::max<std::size_t>(1, catch_all_text(table).size());
    f[8] = std::min(1.0, static_cast<double>(chars) / static_cast<double>(s.page_size_chars));
  }
  return f;
}

namespace {

std::size_t column_hits(const Table& table, std::size_t col, const std::set<std::string>& terms) {
  if (col >= table.num_columns()) return 0;
  std::size_t hits = 0;
  for (const auto& row : table.data_rows())
    for (const auto& tok : tokenize(row[col].text)) hits += terms.count(tok);
  return hits;
}

double title_ratio(const std::string& title, const std::set<std::string>& terms, std::size_t qlen) {
  if (qlen == 0) return 0.0;
  auto tokens = tokenize(title);
  std::set<std::string> present(tokens.begin(), tokens.end());
  std::size_t found = 0;
  for (const auto& t : terms) found += present.count(t);
  return std::min(1.0, static_cast<double>(found) / static_cast<double>(qlen));
}

}  // namespace

std::array<double, kNumQueryTableFeatures> query_table_features(const std::string& query_id,
                                                                std::span<const std::string> query_tokens,
                                                                const Table& table, const QueryTableContext& ctx) {
  std::array<double, kNumQueryTableFeatures> f{};
  const std::set<std::string> terms(query_tokens.begin(), query_tokens.end());

  f[0] = static_cast<double>(column_hits(table, 0, terms));
  f[1] = static_cast<double>(column_hits(table, 1, terms));
  std::size_t body = 0;
  for (std::size_t c = 0; c < table.num_columns(); ++c) body += column_hits(table, c, terms);
  f[2] = static_cast<double>(body);
  f[3] = title_ratio(table.page_title, terms, query_tokens.size());
  f[4] = title_ratio(table.caption, terms, query_tokens.size());

  f[5] = kMissingYRank;
  if (ctx.yrank) {
    if (auto r = ctx.yrank->rank(query_id, table.id)) f[5] = static_cast<double>(*r);
  }

  f[6] = 0.0;
  if (ctx.index && !query_tokens.empty()) {
    auto doc = ctx.index->doc_number(table.id);
    if (!doc) throw Error("table " + table.id + " is not in the index");
    f[6] = score_mlm(*ctx.index, query_tokens, *doc, ctx.mlm_weights);
  }
  return f;
}

FeatureExtractionResult extract_features(const QuerySet& queries, const Qrels& qrels, const FeatureInputs& in) {
  if (!in.corpus || !in.table_index || !in.schema_stats) throw Error("feature extraction inputs incomplete");
  in.mlm_weights.validate(in.table_index->num_fields());

  FeatureExtractionResult result;
  QueryTableContext ctx{in.table_index, in.yrank, in.mlm_weights};

  std::unordered_map<std::size_t, std::array<double, kNumTableFeatures>> table_cache;
  std::unordered_map<std::size_t, SemanticProfile> profile_cache;

  for (const auto& [qid, judged] : qrels.all()) {
    const auto* query = queries.find(qid);
    if (!query) {
      result.warnings.push_back("qrels query " + qid + " has no query text; skipped");
      continue;
    }
    const auto tokens = tokenize(query->text);
    const auto qf = query_features(tokens, *in.table_index);
    SemanticProfile qprofile;
    if (in.matcher) qprofile = in.matcher->query_profile(query->text);

    for (const auto& [tid, grade] : judged) {
      auto pos = in.corpus->find(tid);
      if (!pos) {
        result.warnings.push_back("qrels table " + tid + " (query " + qid + ") not in corpus; skipped");
        continue;
      }
      const auto& table = (*in.corpus)[*pos];
      auto tf_it = table_cache.find(*pos);
      if (tf_it == table_cache.end()) tf_it = table_cache.emplace(*pos, table_features(table, *in.schema_stats)).first;

      FeatureRow row;
      row.query_id = qid;
      row.table_id = tid;
      row.grade = grade;
      auto& v = row.features.values;
      std::copy(qf.begin(), qf.end(), v.begin());
      std::copy(tf_it->second.begin(), tf_it->second.end(), v.begin() + kNumQueryFeatures);
      const auto qtf = query_table_features(qid, tokens, table, ctx);
      std::copy(qtf.begin(), qtf.end(), v.begin() + kNumQueryFeatures + kNumTableFeatures);

      if (in.matcher) {
        auto pit = profile_cache.find(*pos);
        if (pit == profile_cache.end()) pit = profile_cache.emplace(*pos, in.matcher->table_profile(table)).first;
        const auto block = in.matcher->features(qprofile, pit->second);
        std::copy(block.values.begin(), block.values.end(), v.begin() + kNumBaselineFeatures);
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

namespace {

void put_double(std::ostream& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

}  // namespace

void write_feature_csv(std::ostream& out, const std::vector<FeatureRow>& rows) {
  out << "queryId,tableId,grade";
  for (const auto& n : feature_names()) out << ',' << n;
  out << '\n';
  for (const auto& r : rows) {
    out << r.query_id << ',' << r.table_id << ',' << r.grade;
    for (double v : r.features.values) {
      out << ',';
      put_double(out, v);
    }
    out << '\n';
  }
}

std::vector<FeatureRow> read_feature_csv(std::istream& in, const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source_name, 1, "empty feature file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split(line, ',');
  const auto& names = feature_names();
  if (header.size() != 3 + names.size()) {
    throw ParseError(source_name, 1, "expected " + std::to_string(3 + names.size()) + " columns");
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (header[3 + i] != names[i]) {
      throw ParseError(source_name, 1, "column " + std::to_string(4 + i) + " is '" + std::string(header[3 + i]) +
                                           "', expected '" + names[i] + "'");
    }
  }
  std::vector<FeatureRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto f = split(line, ',');
    if (f.size() != header.size()) throw ParseError(source_name, lineno, "wrong number of columns");
    FeatureRow r;
    r.query_id = std::string(f[0]);
    r.table_id = std::string(f[1]);
    auto [p, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), r.grade);
    if (ec != std::errc() || r.grade < 0 || r.grade > 2) throw ParseError(source_name, lineno, "bad grade");
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      auto s = f[3 + i];
      auto [q, ec2] = std::from_chars(s.data(), s.data() + s.size(), r.features.values[i]);
      if (ec2 != std::errc() || q != s.data() + s.size()) {
        throw ParseError(source_name, lineno, "bad value for " + names[i]);
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<FeatureRow> load_feature_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_feature_csv(in, path);
}

std::vector<std::size_t> resolve_feature_subset(const std::string& spec) {
  std::vector<std::size_t> cols;
  auto range = [&cols](std::size_t from, std::size_t to) {
    for (std::size_t i = from; i < to; ++i) cols.push_back(i);
  };
  if (spec == "baseline") {
    range(0, kNumBaselineFeatures);
  } else if (spec == "semantic") {
    range(kNumBaselineFeatures, kNumFeatures);
  } else if (spec == "all") {
    range(0, kNumFeatures);
  } else {
    std::string_view list = spec;
    const bool only = list.starts_with("only:");
    if (only) {
      list.remove_prefix(5);
    } else {
      range(0, kNumBaselineFeatures);
    }
    for (auto name : split(list, ',')) {
      name = trim(name);
      if (name.empty()) continue;
      auto idx = feature_index(std::string(name));
      if (!idx) throw Error("unknown feature '" + std::string(name) + "'");
      if (std::find(cols.begin(), cols.end(), *idx) == cols.end()) cols.push_back(*idx);
    }
    if (cols.empty()) throw Error("empty feature subset");
  }
  return cols;
}

}  // namespace tabret
