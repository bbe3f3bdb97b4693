#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace umw::cli {

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return j;
  }
  std::string have;
  for (const auto& h : header) have += (have.empty() ? "" : ", ") + h;
  throw ParseError("column '" + name + "' not found (columns: " + have + ")");
}

bool CsvTable::has_column(const std::string& name) const {
  for (const auto& h : header) {
    if (h == name) return true;
  }
  return false;
}

CsvTable parse_csv(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_csv_string(text);
}

CsvTable parse_csv_string(const std::string& raw) {
  std::string_view text(raw);
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<std::vector<std::string>> records;
  std::vector<int> starts;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;      // inside a quoted field
  bool was_quoted = false;  // current field began with a quote
  bool any = false;         // current record has content
  int line = 1;
  int record_line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = record.size() == 1 && record[0].empty() && !any;
    if (!blank) {
      records.push_back(std::move(record));
      starts.push_back(record_line);
    }
    record.clear();
    any = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      if (!field.empty() || was_quoted) {
        throw ParseError("line " + std::to_string(line) + ": stray quote inside unquoted field");
      }
      quoted = true;
      was_quoted = true;
      any = true;
    } else if (c == ',') {
      end_field();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
      ++line;
      record_line = line;
    } else {
      if (was_quoted) {
        throw ParseError("line " + std::to_string(line) + ": characters after closing quote");
      }
      field.push_back(c);
      any = true;
    }
  }
  if (quoted) throw ParseError("line " + std::to_string(record_line) + ": unterminated quoted field");
  if (any || !field.empty() || !record.empty()) end_record();

  if (records.empty()) throw ParseError("empty CSV: a header row is required");
  CsvTable t;
  t.header = std::move(records.front());
  for (auto& h : t.header) {
    const auto b = h.find_first_not_of(" \t");
    const auto e = h.find_last_not_of(" \t");
    h = b == std::string::npos ? std::string() : h.substr(b, e - b + 1);
  }
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (t.header[j].empty()) throw ParseError("line 1: empty column name at position " + std::to_string(j + 1));
    for (std::size_t k = 0; k < j; ++k) {
      if (t.header[k] == t.header[j]) throw ParseError("line 1: duplicate column '" + t.header[j] + "'");
    }
  }
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size()) {
      throw ParseError("line " + std::to_string(starts[r]) + ": expected " + std::to_string(t.header.size()) +
                       " fields, found " + std::to_string(records[r].size()));
    }
    t.rows.push_back(std::move(records[r]));
    t.lines.push_back(starts[r]);
  }
  return t;
}

std::optional<double> parse_cell(const std::string& cell, int line, const std::string& column) {
  const auto b = cell.find_first_not_of(" \t");
  if (b == std::string::npos) return std::nullopt;
  const auto e = cell.find_last_not_of(" \t");
  const std::string s = cell.substr(b, e - b + 1);
  if (s == "NA" || s == "NaN" || s == "nan") return std::nullopt;
  const char* first = s.data();
  if (*first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError("line " + std::to_string(line) + ", column '" + column + "': '" + s + "' is not a number");
  }
  return v;
}

}  // namespace umw::cli
