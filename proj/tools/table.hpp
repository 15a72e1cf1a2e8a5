#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace dbmk::cli {

using Cell = std::variant<std::int64_t, double, std::string, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

  void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

// CSV: metadata as leading "# key: value" lines, then a header row; doubles
// with 17 significant digits.
void write_csv(std::ostream& os, const Table& t);
// JSON: {"metadata": ..., "columns": [...], "rows": [{...}, ...]}.
void write_json(std::ostream& os, const Table& t);

std::string format_double(double v);

}  // namespace dbmk::cli
