#include "chartkit/synth/sources.hpp"

#include <algorithm>
#include <set>

#include "chartkit/error.hpp"
#include "chartkit/text.hpp"

namespace chartkit::synth {

namespace fs = std::filesystem;

std::string_view to_string(Arity a) { return a == Arity::Single ? "single" : "multi"; }

Arity parse_arity(std::string_view s) {
  const auto t = text::to_lower_ascii(text::trim(s));
  if (t == "single") return Arity::Single;
  if (t == "multi") return Arity::Multi;
  throw ConfigError("unknown arity '" + std::string(s) + "' (expected single or multi)");
}

void TableSource::validate() const {
  if (cells.size() < 2) throw ConfigError("table '" + id + "' needs at least 2 rows");
  const auto width = cells.front().size();
  if (width < 2) throw ConfigError("table '" + id + "' needs at least 2 columns");
  for (const auto& row : cells) {
    if (row.size() != width) throw ConfigError("table '" + id + "' is not rectangular");
  }
}

std::vector<std::vector<std::string>> parse_delimited(std::string_view src, char delim) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_has_content = false;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const char c = src[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < src.size() && src[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      row_has_content = true;
    } else if (c == delim) {
      row.push_back(std::string(text::trim(field)));
      field.clear();
      row_has_content = true;
    } else if (c == '\n') {
      if (row_has_content || !text::is_blank(field)) {
        row.push_back(std::string(text::trim(field)));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      row_has_content = false;
    } else if (c != '\r') {
      field.push_back(c);
      if (c != ' ' && c != '\t') row_has_content = true;
    }
  }
  if (row_has_content || !text::is_blank(field)) {
    row.push_back(std::string(text::trim(field)));
    rows.push_back(std::move(row));
  }
  return rows;
}

TableSource load_table(const fs::path& path) {
  const auto ext = path.extension().string();
  const char delim = ext == ".tsv" ? '\t' : ',';
  TableSource t;
  t.id = path.stem().string();
  t.origin = path.filename().string();
  t.cells = parse_delimited(text::read_file(path.string()), delim);
  const auto caption = path.parent_path() / (t.id + ".caption.txt");
  if (fs::exists(caption)) t.caption = std::string(text::trim(text::read_file(caption.string())));
  t.validate();
  return t;
}

std::vector<TableSource> load_tables(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("table directory does not exist: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".csv" || ext == ".tsv")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<TableSource> tables;
  std::set<std::string> ids;
  for (const auto& f : files) {
    auto t = load_table(f);
    if (!ids.insert(t.id).second) throw ConfigError("duplicate table id: " + t.id);
    tables.push_back(std::move(t));
  }
  return tables;
}

std::string render_table(const TableSource& table) {
  std::vector<std::size_t> width(table.cols(), 0);
  for (const auto& row : table.cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], text::decode_utf8(row[c]).size());
  }
  std::string out;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const auto& row = table.cells[r];
    out += "|";
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += ' ';
      out += row[c];
      out.append(width[c] - text::decode_utf8(row[c]).size(), ' ');
      out += " |";
    }
    out += '\n';
    if (r == 0) {
      out += "|";
      for (auto w : width) out += std::string(w + 2, '-') + "|";
      out += '\n';
    }
  }
  return out;
}

ChartTypes::ChartTypes(std::vector<std::string> tags) : tags_(std::move(tags)) {}

ChartTypes ChartTypes::load(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw ConfigError("chart type list not found: " + path.string());
  std::vector<std::string> tags;
  for (const auto& line : text::split_lines(text::read_file(path.string()))) {
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (std::find(tags.begin(), tags.end(), t) != tags.end()) throw ConfigError("duplicate chart type: " + std::string(t));
    tags.emplace_back(t);
  }
  if (tags.empty()) throw ConfigError("chart type list is empty: " + path.string());
  return ChartTypes(std::move(tags));
}

bool ChartTypes::contains(std::string_view tag) const {
  return std::find(tags_.begin(), tags_.end(), tag) != tags_.end();
}

SeedCode parse_seed(std::string id, std::string_view source, const ChartTypes& types) {
  SeedCode seed;
  seed.id = std::move(id);
  seed.code = std::string(source);
  bool have_type = false;
  bool have_arity = false;
  for (const auto& line : text::split_lines(source)) {
    const auto t = text::trim(line);
    if (t.empty()) continue;
    if (t.front() != '#') break;
    const auto body = text::trim(t.substr(1));
    const auto colon = body.find(':');
    if (colon == std::string_view::npos) continue;
    const auto key = text::trim(body.substr(0, colon));
    const auto value = text::trim(body.substr(colon + 1));
    if (key == "chart_type") {
      seed.chart_type = std::string(value);
      have_type = true;
    } else if (key == "arity") {
      seed.arity = parse_arity(value);
      have_arity = true;
    }
  }
  if (!have_type || !have_arity) {
    throw ConfigError("seed '" + seed.id + "' must declare '# chart_type:' and '# arity:' in its header");
  }
  if (!types.contains(seed.chart_type)) {
    throw ConfigError("seed '" + seed.id + "' uses unknown chart type '" + seed.chart_type + "'");
  }
  return seed;
}

std::vector<SeedCode> load_seeds(const fs::path& dir, const ChartTypes& types) {
  if (!fs::is_directory(dir)) throw ConfigError("seed directory does not exist: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".py") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<SeedCode> seeds;
  for (const auto& f : files) seeds.push_back(parse_seed(f.stem().string(), text::read_file(f.string()), types));
  return seeds;
}

}  // namespace chartkit::synth
