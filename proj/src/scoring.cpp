#include "exportscore/scoring.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "exportscore/common.hpp"

namespace exportscore::scoring {

int risk_class_of(double score) {
  if (score >= 1.0) return 10;  // score = 1.0 belongs to the closed top bin
  if (score < 0.0) fail(ErrorKind::parameter, "score below 0");
  return int(score / 0.1) + 1;
}

ScoreTable score(const PredictionTable& predictions) {
  ScoreTable t;
  t.firm_ids = predictions.firm_ids;
  t.years = predictions.years;
  t.scores = predictions.scores;
  t.panel_rows = predictions.panel_rows;
  t.distances.resize(t.scores.size());
  t.risk_classes.resize(t.scores.size());
  for (std::size_t i = 0; i < t.scores.size(); ++i) {
    double s = t.scores[i];
    if (!(s >= 0.0 && s <= 1.0)) fail(ErrorKind::parameter, "score outside [0, 1]");
    t.distances[i] = 1.0 - s;
    t.risk_classes[i] = risk_class_of(s);
  }
  return t;
}

PremiaModel fit_premia(const dataset::FirmPanel& panel, const ScoreTable& scores,
                       const PremiaOptions& options, const std::vector<std::int8_t>* labels) {
  int outcome_col = panel.find_numeric(options.outcome_column);
  if (outcome_col < 0)
    fail(ErrorKind::schema, "unknown outcome column \"" + options.outcome_column + "\"");
  int size_col = panel.find_numeric(options.size_column);
  if (size_col < 0)
    fail(ErrorKind::schema, "unknown size column \"" + options.size_column + "\"");
  int region_col = panel.find_categorical("region");
  int industry_col = panel.find_categorical("industry");
  if (region_col < 0 || industry_col < 0)
    fail(ErrorKind::schema, "premia regression needs region and industry columns");

  const auto& outcome = panel.numeric[outcome_col];
  const auto& size_c = panel.numeric[size_col];
  const auto& region = panel.categorical[region_col];
  const auto& industry = panel.categorical[industry_col];

  struct Obs {
    double log_y;
    double log_size;
    int risk;
    int year;
    std::string industry;
    std::string region;
    std::string firm;
  };
  std::vector<Obs> obs;
  std::size_t dropped = 0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    std::size_t r = scores.panel_rows[k];
    if (r >= panel.n_rows()) fail(ErrorKind::alignment, "score row outside panel");
    if (labels && !options.include_exporters) {
      if ((*labels)[r] != 0) continue;  // keep non-exporters only
    }
    bool usable = !outcome.missing[r] && outcome.values[r] > 0.0 && !size_c.missing[r] &&
                  size_c.values[r] > 0.0 && !region.values[r].empty() &&
                  !industry.values[r].empty();
    if (!usable) {
      ++dropped;
      continue;
    }
    obs.push_back({std::log(outcome.values[r]), std::log(size_c.values[r]),
                   scores.risk_classes[k], panel.years[r], industry.values[r], region.values[r],
                   panel.firm_ids[r]});
  }
  if (obs.size() < 3) fail(ErrorKind::parameter, "too few usable rows for the premia regression");

  // dummy levels present in the data; reference categories: risk class 1 (or
  // the smallest present), earliest year, lexicographically first industry
  // and region
  std::set<int> risk_levels, year_levels;
  std::set<std::string> industry_levels, region_levels;
  for (const auto& o : obs) {
    risk_levels.insert(o.risk);
    year_levels.insert(o.year);
    industry_levels.insert(o.industry);
    region_levels.insert(o.region);
  }
  std::vector<int> risk_dummies(risk_levels.begin(), risk_levels.end());
  const int reference_class = risk_dummies.front();  // class 1 when present
  risk_dummies.erase(risk_dummies.begin());
  std::vector<int> year_dummies(year_levels.begin(), year_levels.end());
  year_dummies.erase(year_dummies.begin());
  std::vector<std::string> industry_dummies(industry_levels.begin(), industry_levels.end());
  industry_dummies.erase(industry_dummies.begin());
  std::vector<std::string> region_dummies(region_levels.begin(), region_levels.end());
  region_dummies.erase(region_dummies.begin());

  const std::size_t n = obs.size();
  const std::size_t k_cols = 2 + risk_dummies.size() + year_dummies.size() +
                             industry_dummies.size() + region_dummies.size();
  std::vector<std::string> col_names;
  col_names.reserve(k_cols);
  col_names.push_back("(intercept)");
  for (int c : risk_dummies) col_names.push_back("risk_" + std::to_string(c));
  col_names.push_back("log_size");
  for (int y : year_dummies) col_names.push_back("year_" + std::to_string(y));
  for (const auto& s : industry_dummies) col_names.push_back("industry_" + s);
  for (const auto& s : region_dummies) col_names.push_back("region_" + s);

  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, k_cols);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Obs& o = obs[i];
    std::size_t c = 0;
    X(i, c++) = 1.0;
    for (int rc : risk_dummies) X(i, c++) = o.risk == rc ? 1.0 : 0.0;
    X(i, c++) = o.log_size;
    for (int yy : year_dummies) X(i, c++) = o.year == yy ? 1.0 : 0.0;
    for (const auto& s : industry_dummies) X(i, c++) = o.industry == s ? 1.0 : 0.0;
    for (const auto& s : region_dummies) X(i, c++) = o.region == s ? 1.0 : 0.0;
    y(i) = o.log_y;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < Eigen::Index(k_cols)) {
    // name the first column the pivoting pushed past the numerical rank
    auto perm = qr.colsPermutation().indices();
    std::string offender = col_names[perm(qr.rank())];
    fail(ErrorKind::collinearity, "singular design: column \"" + offender +
                                      "\" is collinear with the preceding regressors");
  }
  Eigen::VectorXd beta = qr.solve(y);
  Eigen::VectorXd resid = y - X * beta;

  // cluster-robust covariance with the standard finite-cluster correction
  std::map<std::string, std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters[obs[i].firm].push_back(i);
  const double g = double(clusters.size());
  if (g < 2) fail(ErrorKind::parameter, "clustered errors need at least 2 firms");

  Eigen::MatrixXd xtx_inv =
      (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(k_cols, k_cols));
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k_cols, k_cols);
  for (const auto& [firm, idx] : clusters) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(k_cols);
    for (std::size_t i : idx) s += X.row(i).transpose() * resid(i);
    meat += s * s.transpose();
  }
  double correction = (g / (g - 1.0)) * (double(n) - 1.0) / (double(n) - double(k_cols));
  Eigen::MatrixXd vcov = correction * xtx_inv * meat * xtx_inv;

  PremiaModel model;
  model.outcome = options.outcome_column;
  model.reference_class = reference_class;
  model.n_obs = n;
  model.n_clusters = clusters.size();
  model.n_dropped = dropped;

  double tss = (y.array() - y.mean()).square().sum();
  model.r_squared = tss > 0 ? 1.0 - resid.squaredNorm() / tss : 0.0;

  std::size_t c = 0;
  model.intercept = beta(c);
  model.intercept_se = std::sqrt(vcov(c, c));
  ++c;
  for (int rc : risk_dummies) {
    model.risk_effects[rc] = {"risk_" + std::to_string(rc), beta(c), std::sqrt(vcov(c, c))};
    ++c;
  }
  model.size_slope = {"log_size", beta(c), std::sqrt(vcov(c, c))};
  ++c;
  for (int yy : year_dummies) {
    model.year_effects.push_back({"year_" + std::to_string(yy), beta(c), std::sqrt(vcov(c, c))});
    ++c;
  }
  for (const auto& s : industry_dummies) {
    model.industry_effects.push_back({"industry_" + s, beta(c), std::sqrt(vcov(c, c))});
    ++c;
  }
  for (const auto& s : region_dummies) {
    model.region_effects.push_back({"region_" + s, beta(c), std::sqrt(vcov(c, c))});
    ++c;
  }
  return model;
}

double PremiaTable::level(int risk_class) const {
  for (const auto& r : rows)
    if (r.risk_class == risk_class) return r.level;
  fail(ErrorKind::parameter, "risk class " + std::to_string(risk_class) + " absent from table");
}

double PremiaTable::gap(int from_class, int to_class) const {
  return level(to_class) / level(from_class) - 1.0;
}

PremiaTable premia_table(const PremiaModel& model) {
  PremiaTable t;
  t.outcome = model.outcome;
  PremiaRow base;
  base.risk_class = model.reference_class;
  base.theta = 0.0;
  base.level = std::exp(model.intercept);
  base.gap_vs_class1 = 0.0;
  t.rows.push_back(base);
  for (const auto& [rc, coef] : model.risk_effects) {
    PremiaRow row;
    row.risk_class = rc;
    row.theta = coef.estimate;
    row.level = std::exp(model.intercept + coef.estimate);
    row.gap_vs_class1 = std::exp(coef.estimate) - 1.0;
    t.rows.push_back(row);
  }
  return t;
}

}  // namespace exportscore::scoring
