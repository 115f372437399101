#ifndef VCHAIN_CSV_HPP
#define VCHAIN_CSV_HPP

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "vchain/error.hpp"

namespace vchain::csv {

/// RFC-4180 reader: comma-delimited, double-quote quoting with "" escapes,
/// quoted fields may span lines, LF or CRLF record terminators. A UTF-8 BOM
/// at the very start of the stream is skipped.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {
    if (in_.peek() == 0xEF) {
      char bom[3];
      in_.read(bom, 3);
      if (!(static_cast<unsigned char>(bom[1]) == 0xBB && static_cast<unsigned char>(bom[2]) == 0xBF)) {
        throw ParseError("invalid byte order mark", 1);
      }
    }
  }

  /// Reads the next record into `fields`. Returns false at end of stream.
  /// Blank lines are skipped.
  bool next(std::vector<std::string>& fields) {
    for (;;) {
      fields.clear();
      if (in_.peek() == std::char_traits<char>::eof()) return false;
      record_line_ = line_ + 1;
      std::string field;
      bool quoted = false;
      bool after_quote = false;
      bool any = false;
      for (;;) {
        int c = in_.get();
        if (c == std::char_traits<char>::eof()) {
          if (quoted) throw ParseError("unterminated quoted field", record_line_);
          if (any || !field.empty()) fields.push_back(std::move(field));
          ++line_;
          break;
        }
        char ch = static_cast<char>(c);
        if (quoted) {
          if (ch == '"') {
            if (in_.peek() == '"') {
              in_.get();
              field.push_back('"');
            } else {
              quoted = false;
              after_quote = true;
            }
          } else {
            if (ch == '\n') ++line_;
            field.push_back(ch);
          }
          continue;
        }
        if (ch == ',') {
          fields.push_back(std::move(field));
          field.clear();
          after_quote = false;
          any = true;
        } else if (ch == '\n' || ch == '\r') {
          if (ch == '\r' && in_.peek() == '\n') in_.get();
          ++line_;
          if (any || !field.empty() || after_quote) fields.push_back(std::move(field));
          break;
        } else if (ch == '"') {
          if (!field.empty() || after_quote) throw ParseError("stray quote inside unquoted field", record_line_);
          quoted = true;
          any = true;
        } else {
          if (after_quote) throw ParseError("characters after closing quote", record_line_);
          field.push_back(ch);
        }
      }
      if (!fields.empty()) return true;
    }
  }

  /// Physical line on which the last returned record started.
  std::size_t line() const noexcept { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << quote(fields[i]);
  }
  out << '\n';
}

/// Maps header names to column positions.
class Header {
 public:
  Header() = default;
  explicit Header(std::vector<std::string> names) : names_(std::move(names)) {
    for (auto& n : names_) {
      while (!n.empty() && (n.back() == ' ' || n.back() == '\t')) n.pop_back();
      while (!n.empty() && (n.front() == ' ' || n.front() == '\t')) n.erase(n.begin());
    }
  }

  /// Column index of `name`, or -1.
  long find(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == name) return static_cast<long>(i);
    }
    return -1;
  }

  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  std::vector<std::string> names_;
};

}  // namespace vchain::csv

#endif  // VCHAIN_CSV_HPP
