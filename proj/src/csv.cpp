#include "litlvm/csv.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "litlvm/errors.hpp"

namespace litlvm {

std::string format_double(double v) {
  if (!std::isfinite(v)) throw NumericError("cannot write a non-finite value");
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::size_t CsvTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError("missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Split one record. Double quotes protect commas; "" is a literal quote.
std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::string(trim(cell)));
      cell.clear();
    } else {
      cell += c;
    }
  }
  if (quoted) throw DataError("unterminated quote");
  out.push_back(std::string(trim(cell)));
  return out;
}

bool is_missing_marker(std::string_view s) {
  static constexpr std::array<std::string_view, 8> markers{"",     "NA",  "na",  "N/A",
                                                           "NaN",  "nan", "null", "?"};
  return std::find(markers.begin(), markers.end(), s) != markers.end();
}

std::string quote_if_needed(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

CsvTable parse_csv(std::string_view text, std::string_view source) {
  const std::string where(source);
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    if (!trim(line).empty()) lines.push_back(line);
    start = end + 1;
  }
  if (lines.empty()) throw DataError(where + ": empty file");

  CsvTable table;
  table.header = split_record(lines[0]);
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c].empty()) throw DataError(where + ": empty column name at position " + std::to_string(c + 1));
    if (std::count(table.header.begin(), table.header.end(), table.header[c]) > 1) {
      throw DataError(where + ": duplicate column '" + table.header[c] + "'");
    }
  }

  const auto cols = static_cast<Eigen::Index>(table.header.size());
  table.values.resize(static_cast<Eigen::Index>(lines.size() - 1), cols);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::vector<std::string> cells = split_record(lines[r]);
    const std::string row_tag = where + ": line " + std::to_string(r + 1);
    if (cells.size() != table.header.size()) {
      throw DataError(row_tag + " has " + std::to_string(cells.size()) + " fields, expected " +
                      std::to_string(table.header.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      if (is_missing_marker(cell)) {
        throw DataError(row_tag + ": missing value in column '" + table.header[c] + "'");
      }
      double v = 0.0;
      const char* first = cell.data();
      if (*first == '+') ++first;
      const auto res = std::from_chars(first, cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw DataError(row_tag + ": column '" + table.header[c] + "' has non-numeric value '" +
                        cell + "'");
      }
      table.values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return table;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
  return parse_csv(read_text(path), path.string());
}

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw DimensionError("row has " + std::to_string(cells.size()) + " cells for " +
                         std::to_string(header_.size()) + " columns");
  }
  rows_.push_back(std::move(cells));
}

void CsvWriter::add_row(std::span<const double> values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  add_row(std::move(cells));
}

std::string CsvWriter::str() const {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out += ',';
      out += quote_if_needed(cells[c]);
    }
    out += '\n';
  };
  emit(header_);
  for (const auto& row : rows_) emit(row);
  return out;
}

void CsvWriter::save(const std::filesystem::path& path) const { write_text(path, str()); }

Matrix select_columns(const CsvTable& table, std::span<const std::string> names) {
  Matrix out(table.values.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) =
        table.values.col(static_cast<Eigen::Index>(table.column(names[j])));
  }
  return out;
}

Dataset dataset_from_table(const CsvTable& table, const DatasetColumns& cols) {
  std::vector<std::string> targets;
  if (cols.task == TaskKind::survival) {
    targets = {cols.time, cols.event};
  } else {
    targets = {cols.target};
  }
  for (const auto& t : targets) table.column(t);

  Dataset data;
  data.task = cols.task;
  if (cols.features.empty()) {
    for (const auto& name : table.header) {
      if (std::find(targets.begin(), targets.end(), name) == targets.end()) {
        data.feature_names.push_back(name);
      }
    }
  } else {
    data.feature_names = cols.features;
    for (const auto& name : data.feature_names) {
      if (std::find(targets.begin(), targets.end(), name) != targets.end()) {
        throw DataError("column '" + name + "' is both a feature and a target");
      }
    }
  }
  if (data.feature_names.empty()) throw DataError("no feature columns");

  data.X = select_columns(table, data.feature_names);
  if (cols.task == TaskKind::survival) {
    data.time = table.values.col(static_cast<Eigen::Index>(table.column(cols.time)));
    data.event = table.values.col(static_cast<Eigen::Index>(table.column(cols.event)));
  } else {
    data.y = table.values.col(static_cast<Eigen::Index>(table.column(cols.target)));
  }
  if (data.n() == 0) throw DataError("dataset has no rows");
  data.validate();
  return data;
}

Dataset load_dataset(const std::filesystem::path& path, const DatasetColumns& cols) {
  return dataset_from_table(read_csv(path), cols);
}

CsvWriter dataset_writer(const Dataset& data, const DatasetColumns& cols) {
  std::vector<std::string> header = data.feature_names;
  if (header.empty()) {
    for (std::size_t j = 0; j < data.p(); ++j) header.push_back("x" + std::to_string(j + 1));
  }
  if (data.task == TaskKind::survival) {
    header.push_back(cols.time);
    header.push_back(cols.event);
  } else {
    header.push_back(cols.target);
  }
  CsvWriter writer(std::move(header));
  std::vector<double> row;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    row.assign(data.X.row(r).data(), data.X.row(r).data() + data.X.cols());
    if (data.task == TaskKind::survival) {
      row.push_back(data.time[r]);
      row.push_back(data.event[r]);
    } else {
      row.push_back(data.y[r]);
    }
    writer.add_row(std::span<const double>(row));
  }
  return writer;
}

void save_dataset(const std::filesystem::path& path, const Dataset& data,
                  const DatasetColumns& cols) {
  dataset_writer(data, cols).save(path);
}

}  // namespace litlvm
