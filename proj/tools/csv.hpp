#pragma once

#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace umw::cli {

/// Malformed input text; carries a 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Header row plus string cells; every record has the header's width.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> lines;  // source line where each row starts

  /// Throws ParseError naming the available columns.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

/// RFC 4180: comma separator, double-quote quoting with "" escapes, CRLF or LF
/// line ends, quoted fields may span lines. Blank lines are skipped. A UTF-8
/// byte-order mark is ignored.
CsvTable parse_csv(std::istream& in);
CsvTable parse_csv_string(const std::string& text);

/// Strict decimal parse with '.' separator; nullopt for empty or NA cells.
/// Throws ParseError for anything else that is not a finite number.
std::optional<double> parse_cell(const std::string& cell, int line, const std::string& column);

}  // namespace umw::cli
