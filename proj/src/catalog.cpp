#include "staterecall/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include "staterecall/error.hpp"

namespace staterecall {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

bool parse_finite_decimal(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out, std::chars_format::general);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

double Catalog::target_value(std::size_t row) const {
  double v = 0.0;
  parse_finite_decimal(rows.at(row).at(target_column), v);
  return v;
}

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  char c = 0;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // a blank line yields a single empty field; skip it
    if (!(record.size() == 1 && record.front().empty())) records.push_back(std::move(record));
    record.clear();
  };

  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) throw Error(ErrorCode::MalformedCsv, "stray quote inside field");
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::MalformedCsv, "unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

Catalog load_catalog(std::istream& in, const std::string& target_column,
                     const std::string& retrieve_column) {
  auto records = parse_csv(in);
  if (records.empty()) throw Error(ErrorCode::EmptyCatalog, "no header row");

  Catalog cat;
  for (auto& name : records.front()) cat.columns.push_back(trim(name));
  cat.target_column = target_column;
  cat.retrieve_column = retrieve_column;

  for (const auto& required : {target_column, retrieve_column}) {
    if (std::find(cat.columns.begin(), cat.columns.end(), required) == cat.columns.end()) {
      throw Error(ErrorCode::MissingColumn, "column '" + required + "' not in header");
    }
  }
  if (std::set<std::string>(cat.columns.begin(), cat.columns.end()).size() != cat.columns.size()) {
    throw Error(ErrorCode::MalformedCsv, "duplicate column names in header");
  }

  std::set<std::string> identities;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& fields = records[r];
    if (fields.size() != cat.columns.size()) {
      throw Error(ErrorCode::MalformedCsv, "line " + std::to_string(r + 1) + " has " +
                                               std::to_string(fields.size()) + " fields, expected " +
                                               std::to_string(cat.columns.size()));
    }
    CatalogRow row;
    for (std::size_t c = 0; c < fields.size(); ++c) row.cells[cat.columns[c]] = trim(fields[c]);

    const auto& identity = row.cells[retrieve_column];
    if (!identities.insert(identity).second) {
      throw Error(ErrorCode::DuplicateIdentity, "'" + identity + "' appears more than once");
    }
    double v = 0.0;
    if (!parse_finite_decimal(row.cells[target_column], v)) {
      throw Error(ErrorCode::NonNumericTarget,
                  "'" + row.cells[target_column] + "' for " + identity);
    }
    cat.rows.push_back(std::move(row));
  }
  if (cat.rows.empty()) throw Error(ErrorCode::EmptyCatalog, "header only");
  return cat;
}

Catalog load_catalog(const std::filesystem::path& path, const std::string& target_column,
                     const std::string& retrieve_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open catalog " + path.string());
  return load_catalog(in, target_column, retrieve_column);
}

}  // namespace staterecall
