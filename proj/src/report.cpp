#include "subell/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace subell {

std::string format_real(Real v) {
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void ReportWriter::section(const std::string& name) { current_ = name; }

void ReportWriter::put(const std::string& key, Real value) {
  entries_.push_back({current_, key, format_real(value)});
}

void ReportWriter::put_int(const std::string& key, long long value) {
  entries_.push_back({current_, key, std::to_string(value)});
}

void ReportWriter::put_bool(const std::string& key, bool value) {
  entries_.push_back({current_, key, value ? "true" : "false"});
}

void ReportWriter::put_str(const std::string& key, const std::string& value) {
  entries_.push_back({current_, key, value});
}

std::string ReportWriter::str() const {
  std::string out;
  std::string open;
  for (const auto& e : entries_) {
    if (e[0] != open) {
      if (!out.empty())
        out += "\n";
      out += "[" + e[0] + "]\n";
      open = e[0];
    }
    out += e[1] + " = " + e[2] + "\n";
  }
  return out;
}

std::string field_csv(const Grid& grid, const Vector& values) {
  std::string out = grid.dim() == 2 ? "x,y,value\n" : "x,value\n";
  for (Index i = 0; i < grid.n_nodes(); ++i) {
    out += format_real(grid.coords(i, 0));
    if (grid.dim() == 2) {
      out += ",";
      out += format_real(grid.coords(i, 1));
    }
    out += ",";
    out += format_real(values[i]);
    out += "\n";
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw std::runtime_error("cannot write " + path);
  f << content;
}

} // namespace subell
