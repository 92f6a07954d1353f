#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

#include "warpspec/error.hpp"

namespace warpspec {

/// 17 significant digits: every double survives a format/parse round trip.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// One CSV field: a number or a raw token.
struct Field {
  std::string text;
  Field(double v) : text(format_number(v)) {}
  Field(int v) : text(std::to_string(v)) {}
  Field(long v) : text(std::to_string(v)) {}
  Field(std::size_t v) : text(std::to_string(v)) {}
  Field(bool v) : text(v ? "true" : "false") {}
  Field(const char* s) : text(s) {}
  Field(std::string s) : text(std::move(s)) {}
};

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void row(std::initializer_list<Field> fields) { row(std::vector<Field>(fields)); }

  void row(const std::vector<Field>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i].text;
    }
    out_ << '\n';
  }

  /// Section marker used by multi-table reports.
  void section(const std::string& name) { out_ << "# " << name << '\n'; }
  void blank() { out_ << '\n'; }

 private:
  std::ostream& out_;
};

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  return out;
}

}  // namespace warpspec
