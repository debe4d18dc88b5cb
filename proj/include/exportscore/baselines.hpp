#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exportscore/panel.hpp"
#include "exportscore/prediction.hpp"

namespace exportscore::baselines {

// The four comparison models train and predict on complete cases only; rows
// with any missing predictor are dropped and the count reported.
struct FitDiagnostics {
  bool converged = true;
  int iterations = 0;
  bool separation_warning = false;
  std::size_t n_dropped = 0;  // incomplete rows removed before fitting
  std::size_t n_used = 0;
};

// ---------------------------------------------------------------------------
// Logistic regression (IRLS)
// ---------------------------------------------------------------------------

struct LogitModel {
  std::vector<std::string> predictor_names;
  double intercept = 0.0;
  std::vector<double> coefficients;
  FitDiagnostics diagnostics;

  double linear_predictor(const std::vector<double>& x) const;
  double predict_one(const std::vector<double>& x) const;
};

LogitModel fit_logit(const dataset::DataView& rows, const std::vector<int>& labels);

// ---------------------------------------------------------------------------
// LASSO logit: coordinate descent over a log-spaced lambda grid, predictors
// standardized internally, lambda selected by EBIC
// ---------------------------------------------------------------------------

struct LassoConfig {
  int grid_size = 100;
  double lambda_min_ratio = 1e-2;  // EBIC never selects the dense low-lambda tail
  double ebic_gamma = 0.5;
  std::vector<double> lambda_grid;  // explicit grid overrides the log-spaced one
};

struct LassoPathPoint {
  double lambda = 0.0;
  int df = 0;  // nonzero slopes
  double loglik = 0.0;
  double ebic = 0.0;
};

struct LassoFit {
  LogitModel model;  // coefficients on the original scale
  std::vector<std::string> selected;
  double selected_lambda = 0.0;
  double lambda_max = 0.0;
  std::vector<LassoPathPoint> path;
};

LassoFit fit_lasso_logit(const dataset::DataView& rows, const std::vector<int>& labels,
                         const LassoConfig& config);

// ---------------------------------------------------------------------------
// Classification trees
// ---------------------------------------------------------------------------

// Flat binary tree; x_j <= cut goes left. prob is the leaf's positive share.
struct TreeNode {
  int pred = -1;
  double cut = 0.0;
  int left = -1, right = -1;
  double prob = 0.0;
  long n = 0, n_pos = 0;

  bool is_leaf() const { return pred < 0; }
};

double tree_predict(const std::vector<TreeNode>& nodes, const std::vector<double>& x);
int tree_depth(const std::vector<TreeNode>& nodes);

struct CartConfig {
  int min_node = 5;   // minimum rows per leaf
  bool prune = true;  // cost-complexity pruning via internal cross-validation
  int cv_folds = 5;
};

struct CartModel {
  std::vector<std::string> predictor_names;
  std::vector<TreeNode> nodes;
  double selected_alpha = 0.0;
  FitDiagnostics diagnostics;

  double predict_one(const std::vector<double>& x) const { return tree_predict(nodes, x); }
};

CartModel fit_cart(const dataset::DataView& rows, const std::vector<int>& labels,
                   const CartConfig& config = {});

// ---------------------------------------------------------------------------
// Random forest
// ---------------------------------------------------------------------------

struct ForestConfig {
  int n_trees = 500;
  int mtry = 0;  // 0 = floor(sqrt(p))
  int min_node = 1;
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

struct ForestModel {
  std::vector<std::string> predictor_names;
  std::vector<std::vector<TreeNode>> trees;
  ForestConfig config;
  double oob_accuracy = 0.0;  // NaN when bootstrap is off
  FitDiagnostics diagnostics;

  double predict_one(const std::vector<double>& x) const;  // share of trees voting 1
};

ForestModel fit_forest(const dataset::DataView& rows, const std::vector<int>& labels,
                       const ForestConfig& config = {});

// ---------------------------------------------------------------------------
// Prediction (complete-case rows only; incomplete rows dropped with count)
// ---------------------------------------------------------------------------

PredictionTable predict(const LogitModel& model, const dataset::DataView& rows);
PredictionTable predict(const CartModel& model, const dataset::DataView& rows);
PredictionTable predict(const ForestModel& model, const dataset::DataView& rows);

}  // namespace exportscore::baselines
