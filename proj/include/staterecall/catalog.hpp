#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace staterecall {

struct CatalogRow {
  std::map<std::string, std::string> cells;

  [[nodiscard]] const std::string& at(const std::string& column) const { return cells.at(column); }
  friend bool operator==(const CatalogRow&, const CatalogRow&) = default;
};

/// Immutable table of exoplanet attributes. `target_column` holds the
/// numeric attribute bound to variables; `retrieve_column` holds the unique
/// identity returned as the answer.
struct Catalog {
  std::vector<std::string> columns;
  std::vector<CatalogRow> rows;
  std::string target_column;
  std::string retrieve_column;

  [[nodiscard]] std::size_t size() const { return rows.size(); }
  [[nodiscard]] double target_value(std::size_t row) const;
};

/// Parses RFC 4180-style CSV (header row, quoted fields, LF or CRLF).
std::vector<std::vector<std::string>> parse_csv(std::istream& in);

Catalog load_catalog(const std::filesystem::path& path, const std::string& target_column,
                     const std::string& retrieve_column);
Catalog load_catalog(std::istream& in, const std::string& target_column,
                     const std::string& retrieve_column);

/// Strict decimal parse of a whole cell (surrounding blanks allowed); false if
/// not a finite number.
bool parse_finite_decimal(const std::string& text, double& out);

}  // namespace staterecall
