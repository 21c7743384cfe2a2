#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "photostat/cli/experiment.hpp"

namespace photostat::cli {

/// A table cell. Strings carry markers such as "undefined" or "diverged".
using Cell = std::variant<double, std::int64_t, std::string>;

inline const std::string kUndefined = "undefined";
inline const std::string kDiverged = "diverged";

struct Column {
  std::string name;
  std::vector<Cell> cells;
};

class ResultTable {
 public:
  Json metadata = Json::object();

  void add_column(std::string name, std::vector<Cell> cells);
  template <class T>
  void add_column(std::string name, const std::vector<T>& values) {
    std::vector<Cell> cells;
    cells.reserve(values.size());
    for (const auto& v : values) cells.emplace_back(v);
    add_column(std::move(name), std::move(cells));
  }

  const std::vector<Column>& columns() const { return columns_; }
  const Column& column(const std::string& name) const;
  std::size_t rows() const { return columns_.empty() ? 0 : columns_.front().cells.size(); }

  /// "# "-prefixed JSON metadata, then a header row and one line per row.
  /// Doubles are written with 17 significant digits.
  std::string to_csv() const;
  /// {"metadata": ..., "columns": {name: [...]}}
  std::string to_json() const;

 private:
  std::vector<Column> columns_;
};

std::string format_cell(const Cell& cell);

/// Parses the data rows of a CSV written by to_csv() into name -> cells;
/// numeric-looking cells become doubles (or integers without '.', 'e', 'n').
ResultTable parse_csv_table(const std::string& text);

}  // namespace photostat::cli
