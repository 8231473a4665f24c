#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tabret/eval.hpp"
#include "tabret/forest.hpp"

namespace tabret {

/// Settings of one experiment. Paths are stored resolved: relative paths in a
/// config file are taken relative to that file, relative paths given as flags
/// relative to the working directory.
struct RunConfig {
  std::filesystem::path corpus;
  std::filesystem::path kb;
  std::filesystem::path word_embeddings;
  std::filesystem::path graph_embeddings;
  std::filesystem::path schema_stats;
  std::filesystem::path queries;
  std::filesystem::path qrels;
  std::filesystem::path signals;
  std::filesystem::path yrank;
  std::filesystem::path out_dir = "out";

  std::vector<double> mu_grid = {10, 50, 100, 500, 1000, 2500, 5000};
  /// Dirichlet prior of the single-field LM scorer; swept over mu_grid when
  /// unset and judgments are available, otherwise the field default.
  std::optional<double> lm_mu;
  /// MLM weights over the six table fields; uniform over the five
  /// non-catch-all fields when unset.
  std::optional<std::vector<double>> mlm_weights;
  bool tune_mlm = false;
  std::size_t entity_k = 10;
  std::size_t search_k = 20;

  ForestConfig forest;
  std::size_t folds = 5;
  std::size_t runs = 5;
  EvalOptions eval;
  std::uint64_t seed = 42;
};

/// Names of every settable key, in documentation order.
const std::vector<std::string>& config_keys();

/// Applies one `key = value` setting. Relative paths resolve against
/// `base_dir`. Throws Error on an unknown key or a malformed value.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value,
                   const std::filesystem::path& base_dir);

/// Reads `key = value` lines ('#' starts a comment). Throws ParseError on a
/// line without '=' or with a duplicate key.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Defaults, then the config file (if any), then the flag overrides.
RunConfig make_config(const std::optional<std::filesystem::path>& config_path,
                      const std::map<std::string, std::string>& overrides);

}  // namespace tabret
