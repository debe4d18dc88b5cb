#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace exportscore {

// Per-observation probability scores keyed by firm and year; the substrate
// shared by model predictions, metrics, and scoring.
struct PredictionTable {
  std::vector<std::string> firm_ids;
  std::vector<int> years;
  std::vector<double> scores;
  std::vector<std::size_t> panel_rows;  // source row indices, for joins
  std::size_t n_dropped = 0;            // complete-case models: rows not scored

  std::size_t size() const { return scores.size(); }
};

}  // namespace exportscore
