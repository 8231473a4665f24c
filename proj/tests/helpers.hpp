#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "tabret/corpus.hpp"

namespace tabret::testing {

/// Data rows of plain text cells; "@id|text" makes a linked cell.
inline Table make_table(std::string id, std::string page_title, std::string caption,
                        std::vector<std::string> headings, const std::vector<std::vector<std::string>>& rows,
                        std::string section_title = {}) {
  Table t;
  t.id = std::move(id);
  t.page_title = std::move(page_title);
  t.section_title = std::move(section_title);
  t.caption = std::move(caption);
  t.headings = std::move(headings);
  for (const auto& r : rows) {
    TableRow row;
    for (const auto& c : r) {
      if (!c.empty() && c[0] == '@') {
        auto bar = c.find('|');
        row.push_back({c.substr(bar + 1), c.substr(1, bar - 1)});
      } else {
        row.push_back({c, std::nullopt});
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline EntityRecord make_entity(std::string id, std::vector<std::string> names,
                                std::vector<std::string> out_links = {}, std::vector<std::string> categories = {}) {
  EntityRecord r;
  r.id = std::move(id);
  r.names = std::move(names);
  r.out_links.insert(out_links.begin(), out_links.end());
  r.categories.insert(categories.begin(), categories.end());
  return r;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("tabret-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace tabret::testing
