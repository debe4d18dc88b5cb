#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "exportscore/panel.hpp"
#include "exportscore/prediction.hpp"

namespace exportscore::scoring {

// Exporting score, distance to export status, and ten risk classes built on
// symmetric score segments of length 0.1 ([0.4, 0.5) is class five; the top
// bin [0.9, 1] is closed).
struct ScoreTable {
  std::vector<std::string> firm_ids;
  std::vector<int> years;
  std::vector<double> scores;
  std::vector<double> distances;  // 1 - score, exactly
  std::vector<int> risk_classes;  // 1..10
  std::vector<std::size_t> panel_rows;

  std::size_t size() const { return scores.size(); }
};

int risk_class_of(double score);

ScoreTable score(const PredictionTable& predictions);

// Premia regression: log outcome on risk-class dummies (class 1 omitted),
// log-employment size, year, industry, and region fixed effects, with
// firm-clustered standard errors.
struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
};

struct PremiaModel {
  std::string outcome;
  double intercept = 0.0;
  double intercept_se = 0.0;
  int reference_class = 1;                  // class 1 when present in the data
  std::map<int, Coefficient> risk_effects;  // by class, reference omitted
  Coefficient size_slope;
  std::vector<Coefficient> year_effects;
  std::vector<Coefficient> industry_effects;
  std::vector<Coefficient> region_effects;
  std::size_t n_obs = 0;
  std::size_t n_clusters = 0;
  std::size_t n_dropped = 0;  // non-positive outcome or missing regressor rows
  double r_squared = 0.0;
};

struct PremiaOptions {
  std::string outcome_column;        // strictly positive; log is taken
  std::string size_column = "number_of_employees";  // log employment control
  bool include_exporters = true;     // filter flag: score all firms or only
                                     // non-exporters (label 0 rows)
};

PremiaModel fit_premia(const dataset::FirmPanel& panel, const ScoreTable& scores,
                       const PremiaOptions& options,
                       const std::vector<std::int8_t>* labels = nullptr);

// Euro levels per risk class and percentage gaps: level(r) = exp(b0 + theta_r)
// with theta_1 = 0; gap(r->s) = level(s)/level(r) - 1.
struct PremiaRow {
  int risk_class = 0;
  double theta = 0.0;
  double level = 0.0;
  double gap_vs_class1 = 0.0;
};

struct PremiaTable {
  std::string outcome;
  std::vector<PremiaRow> rows;

  double level(int risk_class) const;
  double gap(int from_class, int to_class) const;
};

PremiaTable premia_table(const PremiaModel& model);

}  // namespace exportscore::scoring
