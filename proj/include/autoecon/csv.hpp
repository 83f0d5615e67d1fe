#pragma once

#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "autoecon/errors.hpp"

namespace autoecon {

// Comma-separated tables with a mandatory header row and RFC-style quoting
// (fields containing commas, quotes, or newlines are wrapped in double
// quotes; embedded quotes are doubled). Decimal point is always '.'.
class CsvTable {
 public:
  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> header)
      : header_(std::move(header)) {
    rebuild_index();
  }

  const std::vector<std::string>& header() const { return header_; }
  std::size_t row_count() const { return rows_.size(); }
  const std::vector<std::string>& row(std::size_t i) const { return rows_[i]; }

  bool has_column(const std::string& name) const {
    return col_index_.count(name) > 0;
  }

  std::size_t column(const std::string& name) const {
    auto it = col_index_.find(name);
    if (it == col_index_.end()) {
      throw ParseError("missing column '" + name + "'");
    }
    return it->second;
  }

  const std::string& cell(std::size_t row, const std::string& name) const {
    return rows_[row][column(name)];
  }

  // Empty cells parse as NaN so callers can represent missing data.
  double cell_double(std::size_t row, const std::string& name) const {
    const std::string& s = cell(row, name);
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    try {
      std::size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ParseError("column '" + name + "' row " + std::to_string(row + 1) +
                       ": non-numeric value '" + s + "'");
    }
  }

  void add_row(std::vector<std::string> fields) {
    if (fields.size() != header_.size()) {
      throw ParseError("row has " + std::to_string(fields.size()) +
                       " fields, header has " + std::to_string(header_.size()));
    }
    rows_.push_back(std::move(fields));
  }

  static std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
  }

  static CsvTable parse_text(const std::string& text) {
    CsvTable t;
    std::size_t pos = 0;
    long line_no = 1;
    bool first = true;
    while (pos < text.size()) {
      std::vector<std::string> fields = parse_record(text, pos, line_no);
      if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
      if (first) {
        t.header_ = std::move(fields);
        t.rebuild_index();
        first = false;
      } else {
        if (fields.size() != t.header_.size()) {
          throw ParseError("field count mismatch", line_no - 1);
        }
        t.rows_.push_back(std::move(fields));
      }
    }
    if (first) throw ParseError("empty CSV: header row is mandatory");
    return t;
  }

  static CsvTable load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    try {
      return parse_text(ss.str());
    } catch (ParseError& e) {
      throw ParseError(std::string(e.what()) + " in '" + path + "'",
                       e.line_number);
    }
  }

  std::string to_text() const {
    std::ostringstream out;
    write_record(out, header_);
    for (const auto& r : rows_) write_record(out, r);
    return out.str();
  }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot write '" + path + "'");
    f << to_text();
  }

 private:
  void rebuild_index() {
    col_index_.clear();
    for (std::size_t i = 0; i < header_.size(); ++i) col_index_[header_[i]] = i;
  }

  static void write_record(std::ostream& out,
                           const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out << ',';
      const std::string& f = fields[i];
      bool quote = f.find_first_of(",\"\n\r") != std::string::npos;
      if (!quote) {
        out << f;
      } else {
        out << '"';
        for (char c : f) {
          if (c == '"') out << '"';
          out << c;
        }
        out << '"';
      }
    }
    out << '\n';
  }

  static std::vector<std::string> parse_record(const std::string& text,
                                               std::size_t& pos,
                                               long& line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    while (pos < text.size()) {
      char c = text[pos];
      if (quoted) {
        if (c == '"') {
          if (pos + 1 < text.size() && text[pos + 1] == '"') {
            cur += '"';
            pos += 2;
          } else {
            quoted = false;
            ++pos;
          }
        } else {
          if (c == '\n') ++line_no;
          cur += c;
          ++pos;
        }
        continue;
      }
      if (c == '"' && cur.empty()) {
        quoted = true;
        ++pos;
      } else if (c == ',') {
        fields.push_back(std::move(cur));
        cur.clear();
        ++pos;
      } else if (c == '\r') {
        ++pos;
      } else if (c == '\n') {
        ++pos;
        ++line_no;
        fields.push_back(std::move(cur));
        return fields;
      } else {
        cur += c;
        ++pos;
      }
    }
    if (quoted) throw ParseError("unterminated quoted field", line_no);
    fields.push_back(std::move(cur));
    return fields;
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::map<std::string, std::size_t> col_index_;
};

}  // namespace autoecon
