#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "litlvm/core.hpp"

namespace litlvm {

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

// Numeric table with a header row. Empty cells and NA/NaN markers are
// rejected as missing values; there is no imputation.
struct CsvTable {
  std::vector<std::string> header;
  Matrix values;

  // Column position by name; throws DataError naming the column.
  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text, std::string_view source = "<memory>");

// Rows of preformatted cells. Cells are quoted only when they need it.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  void add_row(std::span<const double> values);

  std::string str() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Which columns hold targets and features. Empty `features` means every
// column that is not a target, in file order.
struct DatasetColumns {
  TaskKind task = TaskKind::regression;
  std::string target = "y";
  std::string time = "time";
  std::string event = "event";
  std::vector<std::string> features;
};

// Columns picked by name, in the order of `names`.
Matrix select_columns(const CsvTable& table, std::span<const std::string> names);

Dataset dataset_from_table(const CsvTable& table, const DatasetColumns& cols);
Dataset load_dataset(const std::filesystem::path& path, const DatasetColumns& cols);

// Feature columns in order, then y (or time, event).
CsvWriter dataset_writer(const Dataset& data, const DatasetColumns& cols = {});
void save_dataset(const std::filesystem::path& path, const Dataset& data,
                  const DatasetColumns& cols = {});

// Text helpers shared by the writers.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace litlvm
