#pragma once

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace testsupport {

namespace fs = std::filesystem;

inline fs::path fixture_dir() { return fs::path(CHARTKIT_FIXTURE_DIR); }

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "chartkit") {
    std::string templ = (fs::temp_directory_path() / (tag + "-XXXXXX")).string();
    if (::mkdtemp(templ.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = templ;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& p) const { return path_ / p; }

 private:
  fs::path path_;
};

inline void write_text(const fs::path& p, const std::string& contents) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << contents;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<nlohmann::json> read_jsonl(const fs::path& p) {
  std::vector<nlohmann::json> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(nlohmann::json::parse(line));
  }
  return rows;
}

// Tables and seeds for pipeline runs: `tables` CSV files of 4 rows and
// 3 columns, one single-chart bar seed and one multi-chart line seed.
struct SynthFixture {
  fs::path tables;
  fs::path seeds;
  fs::path chart_types;
};

inline SynthFixture make_synth_fixture(const fs::path& root, std::size_t tables) {
  SynthFixture f{root / "tables", root / "seeds", root / "chart_types.txt"};
  fs::create_directories(f.tables);
  for (std::size_t t = 0; t < tables; ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "t%03zu", t);
    std::ostringstream csv;
    csv << "Item,Alpha,Beta\n";
    for (std::size_t r = 0; r < 4; ++r) {
      csv << "row" << r << "," << (t * 7 + r * 3 + 2) << "," << (t * 5 + r * 11 + 1) << "\n";
    }
    write_text(f.tables / (std::string(name) + ".csv"), csv.str());
    write_text(f.tables / (std::string(name) + ".caption.txt"), "Synthetic table " + std::to_string(t) + ".\n");
  }
  write_text(f.seeds / "bar_single.py",
             "# chart_type: bar\n# arity: single\nimport matplotlib.pyplot as plt\n"
             "fig, ax = plt.subplots()\nax.bar(['a', 'b'], [1, 2])\nfig.savefig(OUTPUT_PATH)\n");
  write_text(f.seeds / "line_multi.py",
             "# chart_type: multi_line\n# arity: multi\nimport matplotlib.pyplot as plt\n"
             "fig, axes = plt.subplots(1, 2)\naxes[0].plot([1, 2, 3])\naxes[1].plot([3, 1, 2])\n"
             "fig.savefig(OUTPUT_PATH)\n");
  write_text(f.chart_types, "# test taxonomy\nbar\nmulti_line\nscatter\n");
  return f;
}

}  // namespace testsupport
