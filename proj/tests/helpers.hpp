#pragma once

#include <limits>
#include <string>
#include <vector>

#include "exportscore/panel.hpp"

namespace test_helpers {

// wrap a column-major numeric matrix in a FirmPanel (one synthetic firm-year
// per row) so model code can be exercised without CSV plumbing
inline exportscore::dataset::FirmPanel matrix_panel(
    const std::vector<std::vector<double>>& cols,
    const std::vector<std::vector<std::uint8_t>>& missing = {}) {
  using namespace exportscore::dataset;
  FirmPanel p;
  const std::size_t n = cols.empty() ? 0 : cols[0].size();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    NumericColumn c;
    c.name = "x" + std::to_string(j + 1);
    c.role = ColumnRole::numeric;
    c.values = cols[j];
    c.missing = missing.empty() ? std::vector<std::uint8_t>(n, 0) : missing[j];
    for (std::size_t i = 0; i < n; ++i) {
      if (c.missing[i]) c.values[i] = std::numeric_limits<double>::quiet_NaN();
    }
    p.numeric.push_back(std::move(c));
  }
  for (std::size_t i = 0; i < n; ++i) {
    p.firm_ids.push_back("F" + std::to_string(i + 1));
    p.years.push_back(2015);
  }
  return p;
}

}  // namespace test_helpers
