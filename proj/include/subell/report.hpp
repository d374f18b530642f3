#pragma once

#include "subell/core.hpp"
#include "subell/geometry.hpp"

#include <array>
#include <string>
#include <vector>

namespace subell {

/// 17-significant-digit decimal rendering shared by reports and CSV dumps.
std::string format_real(Real v);

/// Ordered `key = value` report with [section] headers. Emission order is the
/// serialization order, so identical runs serialize byte-identically.
class ReportWriter {
public:
  void section(const std::string& name);
  void put(const std::string& key, Real value);
  void put_int(const std::string& key, long long value);
  void put_bool(const std::string& key, bool value);
  void put_str(const std::string& key, const std::string& value);

  std::string str() const;
  const std::vector<std::array<std::string, 3>>& entries() const { return entries_; }

private:
  std::string current_;
  std::vector<std::array<std::string, 3>> entries_; // section, key, value
};

/// CSV field dump: header `x[,y],value`, one row per node in node-index order.
std::string field_csv(const Grid& grid, const Vector& values);
void write_text_file(const std::string& path, const std::string& content);

} // namespace subell
