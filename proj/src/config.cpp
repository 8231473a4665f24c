#include "tabret/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>

#include "tabret/error.hpp"
#include "tabret/text.hpp"

namespace tabret {

namespace {

namespace fs = std::filesystem;

template <typename T>
T parse_number(const std::string& key, std::string_view s) {
  s = trim(s);
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw Error("bad value '" + std::string(s) + "' for " + key);
  }
  return v;
}

std::size_t parse_positive(const std::string& key, std::string_view s) {
  auto v = parse_number<std::size_t>(key, s);
  if (v == 0) throw Error(key + " must be at least 1");
  return v;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, std::string_view s) {
  std::vector<T> out;
  for (auto part : split(s, ',')) out.push_back(parse_number<T>(key, part));
  if (out.empty()) throw Error(key + " needs at least one value");
  return out;
}

bool parse_bool(const std::string& key, std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw Error("bad value '" + std::string(s) + "' for " + key + " (expected true or false)");
}

fs::path resolve(const std::string& value, const fs::path& base) {
  fs::path p(value);
  return p.is_absolute() || base.empty() ? p : base / p;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&, const fs::path&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  auto path_setter = [](fs::path RunConfig::*member) {
    return Setter([member](RunConfig& c, const std::string&, const std::string& v, const fs::path& base) {
      c.*member = resolve(v, base);
    });
  };
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"corpus", path_setter(&RunConfig::corpus)},
      {"kb", path_setter(&RunConfig::kb)},
      {"word_embeddings", path_setter(&RunConfig::word_embeddings)},
      {"graph_embeddings", path_setter(&RunConfig::graph_embeddings)},
      {"schema_stats", path_setter(&RunConfig::schema_stats)},
      {"queries", path_setter(&RunConfig::queries)},
      {"qrels", path_setter(&RunConfig::qrels)},
      {"signals", path_setter(&RunConfig::signals)},
      {"yrank", path_setter(&RunConfig::yrank)},
      {"out", path_setter(&RunConfig::out_dir)},
      {"mu_grid",
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.mu_grid = parse_list<double>(k, v);
       }},
      {"lm_mu",
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.lm_mu = parse_number<double>(k, v);
       }},
      {"mlm_weights",
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.mlm_weights = parse_list<double>(k, v);
       }},
      {"tune_mlm",
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.tune_mlm = parse_bool(k, v);
       }},
      {"entity_k",
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.entity_k = parse_positive(k, v);
       }},
      {"search_k",
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.search_k = parse_positive(k, v);
       }},
      {"trees",
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.forest.num_trees = parse_positive(k, v);
       }},
      {"max_features",
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.forest.max_features = parse_positive(k, v);
       }},
      {"min_samples_leaf",
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.forest.min_samples_leaf = parse_positive(k, v);
       }},
      {"threads",
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.forest.threads = parse_positive(k, v);
       }},
      {"folds",
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.folds = parse_positive(k, v);
       }},
      {"runs",
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.runs = parse_positive(k, v);
       }},
      {"gain",
       [](RunConfig& c, const std::string&, const std::string& v, const fs::path&) {
         c.eval.gain = parse_gain(std::string(trim(v)));
       }},
      {"cutoffs",
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.eval.cutoffs = parse_list<std::size_t>(k, v);
         for (auto x : c.eval.cutoffs)
           if (x == 0) throw Error("cutoffs must be positive");
       }},
      {"delta_cutoff",
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.eval.delta_cutoff = parse_positive(k, v);
       }},
      {"seed",
       [](RunConfig& c, const std::string& k, const std::string& v, const fs::path&) {
         c.seed = parse_number<std::uint64_t>(k, v);
       }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, setter] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value, const fs::path& base_dir) {
  for (const auto& [name, setter] : setters()) {
    if (name == key) {
      setter(cfg, key, std::string(trim(value)), base_dir);
      return;
    }
  }
  throw Error("unknown setting '" + key + "'");
}

std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    std::string_view body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError(path.string(), lineno, "expected key = value");
    std::string key(trim(body.substr(0, eq)));
    std::string value(trim(body.substr(eq + 1)));
    if (key.empty()) throw ParseError(path.string(), lineno, "empty key");
    if (!out.emplace(key, value).second) throw ParseError(path.string(), lineno, "duplicate key '" + key + "'");
  }
  return out;
}

RunConfig make_config(const std::optional<fs::path>& config_path,
                      const std::map<std::string, std::string>& overrides) {
  RunConfig cfg;
  if (config_path) {
    const auto base = config_path->parent_path();
    for (const auto& [k, v] : read_config_file(*config_path)) {
      try {
        apply_setting(cfg, k, v, base);
      } catch (const ParseError&) {
        throw;
      } catch (const Error& e) {
        throw Error(config_path->string() + ": " + e.what());
      }
    }
  }
  for (const auto& [k, v] : overrides) apply_setting(cfg, k, v, {});
  cfg.forest.seed = cfg.seed;
  return cfg;
}

}  // namespace tabret
