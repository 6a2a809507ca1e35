#pragma once

// Synthesis inputs: curated tables, hand-written seed plotting code and the
// configured chart-type taxonomy.
//
// On disk a table is a .csv or .tsv file; its caption lives in a sidecar
// "<stem>.caption.txt" next to it. A seed is a .py file whose leading comment
// block declares its metadata:
//
//     # chart_type: grouped_bar
//     # arity: multi

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace chartkit::synth {

enum class Arity { Single, Multi };

std::string_view to_string(Arity a);  // "single" | "multi"
Arity parse_arity(std::string_view s);

struct TableSource {
  std::string id;
  std::string caption;
  std::vector<std::vector<std::string>> cells;  // row-major; row 0 is the header
  std::string origin;

  std::size_t rows() const { return cells.size(); }
  std::size_t cols() const { return cells.empty() ? 0 : cells.front().size(); }
  void validate() const;  // >= 2 rows, >= 2 columns, rectangular
};

// Parses delimiter-separated text; double-quoted fields may contain the
// delimiter and "" escapes.
std::vector<std::vector<std::string>> parse_delimited(std::string_view text, char delim);

TableSource load_table(const std::filesystem::path& path);
// All .csv/.tsv files of a directory, ordered by file name.
std::vector<TableSource> load_tables(const std::filesystem::path& dir);

// Column-aligned rendering with '|' separators.
std::string render_table(const TableSource& table);

class ChartTypes {
 public:
  ChartTypes() = default;
  explicit ChartTypes(std::vector<std::string> tags);

  // One tag per line; blank lines and '#' comments ignored.
  static ChartTypes load(const std::filesystem::path& path);

  bool contains(std::string_view tag) const;
  const std::vector<std::string>& tags() const { return tags_; }

 private:
  std::vector<std::string> tags_;
};

struct SeedCode {
  std::string id;
  std::string chart_type;
  Arity arity = Arity::Single;
  std::string code;
};

SeedCode parse_seed(std::string id, std::string_view source, const ChartTypes& types);
std::vector<SeedCode> load_seeds(const std::filesystem::path& dir, const ChartTypes& types);

}  // namespace chartkit::synth
