#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cmix/errors.hpp"

namespace cmix::csv {

/// RFC-4180 record reader: quoted fields, doubled quotes, CRLF or LF line
/// ends, embedded newlines inside quotes.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Reads one record into `fields`. Returns false at end of input.
  bool next(std::vector<std::string>& fields) {
    fields.clear();
    int c = in_.get();
    if (c == EOF) return false;
    std::string field;
    bool in_quotes = false;
    ++line_;
    while (true) {
      if (c == EOF) {
        if (in_quotes) throw ParseError("line " + std::to_string(line_) + ": unterminated quote");
        fields.push_back(std::move(field));
        return true;
      }
      if (in_quotes) {
        if (c == '"') {
          int n = in_.get();
          if (n == '"') {
            field.push_back('"');
          } else {
            in_quotes = false;
            if (n != EOF) in_.unget();
          }
        } else {
          if (c == '\n') ++line_;
          field.push_back(static_cast<char>(c));
        }
      } else if (c == '"') {
        if (!field.empty())
          throw ParseError("line " + std::to_string(line_) + ": quote inside unquoted field");
        in_quotes = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else if (c == '\r') {
        int n = in_.get();
        if (n != '\n' && n != EOF) in_.unget();
        fields.push_back(std::move(field));
        return true;
      } else if (c == '\n') {
        fields.push_back(std::move(field));
        return true;
      } else {
        field.push_back(static_cast<char>(c));
      }
      c = in_.get();
    }
  }

  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

inline std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

inline void write_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << quote(fields[i]);
  }
  os << '\n';
}

}  // namespace cmix::csv
