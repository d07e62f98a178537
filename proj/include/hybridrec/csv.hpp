// Minimal RFC-4180 CSV reader/writer: quoted fields, "" escapes,
// embedded commas/newlines, CRLF tolerant.
#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "hybridrec/errors.hpp"

namespace hybridrec {

class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // Reads one record. Returns false on clean EOF. `line()` reports the
  // line the record started on (1-based) for error messages.
  bool next(std::vector<std::string>& fields) {
    fields.clear();
    int c = in_.get();
    if (c == EOF) return false;
    record_line_ = line_;
    std::string field;
    bool in_quotes = false;
    bool quoted_field = false;
    while (true) {
      if (c == EOF) {
        if (in_quotes)
          throw MalformedRecord("unterminated quoted field starting at line " +
                                std::to_string(record_line_));
        fields.push_back(std::move(field));
        return true;
      }
      char ch = static_cast<char>(c);
      if (in_quotes) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            field.push_back('"');
            in_.get();
          } else {
            in_quotes = false;
          }
        } else {
          if (ch == '\n') ++line_;
          field.push_back(ch);
        }
      } else if (ch == '"' && field.empty() && !quoted_field) {
        in_quotes = true;
        quoted_field = true;
      } else if (ch == ',') {
        fields.push_back(std::move(field));
        field.clear();
        quoted_field = false;
      } else if (ch == '\n') {
        ++line_;
        if (!field.empty() && field.back() == '\r') field.pop_back();
        fields.push_back(std::move(field));
        return true;
      } else {
        field.push_back(ch);
      }
      c = in_.get();
    }
  }

  std::size_t line() const { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 1;
};

inline std::string csv_escape(const std::string& field) {
  bool needs_quotes = field.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs_quotes) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void csv_write_row(std::ostream& out,
                          const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.put(',');
    out << csv_escape(fields[i]);
  }
  out.put('\n');
}

}  // namespace hybridrec
