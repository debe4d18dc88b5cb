#include "exportscore/baselines.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "exportscore/common.hpp"

namespace exportscore::baselines {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

struct Design {
  std::vector<std::vector<double>> x;  // column-major, complete cases only
  std::vector<int> y;
  std::vector<std::size_t> kept;  // positions within the view
  std::size_t n_dropped = 0;
  std::vector<std::string> names;

  std::size_t n() const { return y.size(); }
  std::size_t p() const { return x.size(); }
};

Design complete_cases(const dataset::DataView& rows, const std::vector<int>& labels) {
  if (labels.size() != rows.n_rows())
    fail(ErrorKind::alignment, "labels do not align with rows");
  Design d;
  d.names = rows.col_names();
  d.x.resize(rows.n_cols());
  for (std::size_t i = 0; i < rows.n_rows(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) fail(ErrorKind::parameter, "labels must be 0/1");
    if (!rows.row_complete(i)) {
      ++d.n_dropped;
      continue;
    }
    for (std::size_t j = 0; j < rows.n_cols(); ++j) d.x[j].push_back(rows.value(i, j));
    d.y.push_back(labels[i]);
    d.kept.push_back(i);
  }
  return d;
}

void require_two_classes(const std::vector<int>& y) {
  long n1 = std::count(y.begin(), y.end(), 1);
  if (n1 < 1 || n1 == long(y.size()))
    fail(ErrorKind::degenerate_outcome, "training labels contain a single class");
}

}  // namespace

double LogitModel::linear_predictor(const std::vector<double>& x) const {
  double eta = intercept;
  for (std::size_t j = 0; j < coefficients.size(); ++j) eta += coefficients[j] * x[j];
  return eta;
}

double LogitModel::predict_one(const std::vector<double>& x) const {
  return sigmoid(linear_predictor(x));
}

LogitModel fit_logit(const dataset::DataView& rows, const std::vector<int>& labels) {
  Design d = complete_cases(rows, labels);
  if (d.n() == 0) fail(ErrorKind::missing_data, "no complete-case rows to fit on");
  require_two_classes(d.y);

  const std::size_t n = d.n(), p = d.p();
  Eigen::MatrixXd X(n, p + 1);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (std::size_t j = 0; j < p; ++j) X(i, j + 1) = d.x[j][i];
    y(i) = d.y[i];
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
  double ybar = y.mean();
  beta(0) = std::log(ybar / (1.0 - ybar));

  const int max_iter = 100;
  const double tol = 1e-8;
  bool converged = false;
  int iter = 0;
  Eigen::VectorXd eta = X * beta;
  for (; iter < max_iter; ++iter) {
    Eigen::VectorXd mu(n), w(n), zeta(n);
    for (std::size_t i = 0; i < n; ++i) {
      double m = sigmoid(eta(i));
      m = std::min(std::max(m, 1e-10), 1.0 - 1e-10);
      mu(i) = m;
      w(i) = m * (1.0 - m);
      zeta(i) = eta(i) + (y(i) - m) / w(i);
    }
    Eigen::MatrixXd Xw = w.asDiagonal() * X;
    Eigen::MatrixXd xtx = X.transpose() * Xw;
    Eigen::VectorXd xtz = X.transpose() * (w.asDiagonal() * zeta);
    Eigen::VectorXd beta_new = xtx.ldlt().solve(xtz);
    double delta = (beta_new - beta).cwiseAbs().maxCoeff();
    beta = beta_new;
    eta = X * beta;
    if (delta < tol) {
      converged = true;
      ++iter;
      break;
    }
  }

  LogitModel model;
  model.predictor_names = d.names;
  model.intercept = beta(0);
  model.coefficients.assign(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) model.coefficients[j] = beta(j + 1);
  model.diagnostics.converged = converged;
  model.diagnostics.iterations = iter;
  model.diagnostics.n_dropped = d.n_dropped;
  model.diagnostics.n_used = n;

  // a diverging fit that classifies every row with a positive margin points
  // at perfect separation
  if (!converged) {
    bool all_margin = true;
    for (std::size_t i = 0; i < n; ++i) {
      if ((2.0 * y(i) - 1.0) * eta(i) <= 0.0) {
        all_margin = false;
        break;
      }
    }
    model.diagnostics.separation_warning = all_margin;
  }
  return model;
}

// ---------------------------------------------------------------------------
// LASSO logit
// ---------------------------------------------------------------------------

LassoFit fit_lasso_logit(const dataset::DataView& rows, const std::vector<int>& labels,
                         const LassoConfig& config) {
  if (config.grid_size < 1) fail(ErrorKind::config, "lasso: grid_size must be >= 1");
  if (config.ebic_gamma < 0.0 || config.ebic_gamma > 1.0)
    fail(ErrorKind::config, "lasso: ebic gamma must lie in [0, 1]");

  Design d = complete_cases(rows, labels);
  if (d.n() == 0) fail(ErrorKind::missing_data, "no complete-case rows to fit on");
  require_two_classes(d.y);
  const std::size_t n = d.n(), p = d.p();

  // standardize to mean 0, sd 1; constant columns stay excluded
  std::vector<double> mean(p, 0.0), sd(p, 0.0);
  std::vector<std::vector<double>> xs(p, std::vector<double>(n));
  std::vector<bool> active_col(p, false);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < n; ++i) mean[j] += d.x[j][i];
    mean[j] /= double(n);
    for (std::size_t i = 0; i < n; ++i) {
      double c = d.x[j][i] - mean[j];
      sd[j] += c * c;
    }
    sd[j] = std::sqrt(sd[j] / double(n));
    if (sd[j] > 0.0) {
      active_col[j] = true;
      for (std::size_t i = 0; i < n; ++i) xs[j][i] = (d.x[j][i] - mean[j]) / sd[j];
    }
  }

  double ybar = std::accumulate(d.y.begin(), d.y.end(), 0.0) / double(n);
  double lambda_max = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    if (!active_col[j]) continue;
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i) g += xs[j][i] * (d.y[i] - ybar);
    lambda_max = std::max(lambda_max, std::abs(g) / double(n));
  }

  std::vector<double> grid = config.lambda_grid;
  if (grid.empty()) {
    grid.resize(config.grid_size);
    if (config.grid_size == 1) {
      grid[0] = lambda_max;
    } else {
      double log_hi = std::log(lambda_max);
      double log_lo = std::log(lambda_max * config.lambda_min_ratio);
      for (int k = 0; k < config.grid_size; ++k)
        grid[k] = std::exp(log_hi + (log_lo - log_hi) * double(k) / double(config.grid_size - 1));
    }
  }

  std::vector<double> beta(p, 0.0);
  double beta0 = std::log(ybar / (1.0 - ybar));

  auto fit_one_lambda = [&](double lambda) {
    const int outer_max = 200;
    const double outer_tol = 1e-9;
    std::vector<double> w(n), z(n), resid(n);
    for (int outer = 0; outer < outer_max; ++outer) {
      double max_outer_delta = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double eta = beta0;
        for (std::size_t j = 0; j < p; ++j)
          if (beta[j] != 0.0) eta += xs[j][i] * beta[j];
        double mu = sigmoid(eta);
        mu = std::min(std::max(mu, 1e-10), 1.0 - 1e-10);
        w[i] = mu * (1.0 - mu);
        z[i] = eta + (d.y[i] - mu) / w[i];
        resid[i] = z[i] - eta;
      }
      double wsum = std::accumulate(w.begin(), w.end(), 0.0);

      const double cd_tol = 1e-11;
      auto update_coord = [&](std::size_t j) {
        double num = 0.0, den = 0.0;
        const auto& col = xs[j];
        for (std::size_t i = 0; i < n; ++i) {
          num += w[i] * col[i] * (resid[i] + col[i] * beta[j]);
          den += w[i] * col[i] * col[i];
        }
        num /= double(n);
        den /= double(n);
        double bnew = 0.0;
        if (num > lambda) bnew = (num - lambda) / den;
        else if (num < -lambda) bnew = (num + lambda) / den;
        double diff = bnew - beta[j];
        if (diff != 0.0) {
          for (std::size_t i = 0; i < n; ++i) resid[i] -= col[i] * diff;
          beta[j] = bnew;
        }
        return std::abs(diff);
      };
      auto update_intercept = [&] {
        double rsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) rsum += w[i] * resid[i];
        double d0 = rsum / wsum;
        if (d0 != 0.0) {
          beta0 += d0;
          for (std::size_t i = 0; i < n; ++i) resid[i] -= d0;
        }
        return std::abs(d0);
      };
      // converge on the active set, then one full sweep to admit entrants
      for (int round = 0; round < 100; ++round) {
        for (int sweep = 0; sweep < 10000; ++sweep) {
          double max_delta = update_intercept();
          for (std::size_t j = 0; j < p; ++j) {
            if (!active_col[j] || beta[j] == 0.0) continue;
            max_delta = std::max(max_delta, update_coord(j));
          }
          max_outer_delta = std::max(max_outer_delta, max_delta);
          if (max_delta < cd_tol) break;
        }
        double full_delta = update_intercept();
        bool admitted = false;
        for (std::size_t j = 0; j < p; ++j) {
          if (!active_col[j]) continue;
          bool was_zero = beta[j] == 0.0;
          double d = update_coord(j);
          full_delta = std::max(full_delta, d);
          admitted = admitted || (was_zero && beta[j] != 0.0);
        }
        max_outer_delta = std::max(max_outer_delta, full_delta);
        if (!admitted && full_delta < cd_tol) break;
      }
      if (max_outer_delta < outer_tol) break;
    }
  };

  auto loglik_at = [&]() {
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double eta = beta0;
      for (std::size_t j = 0; j < p; ++j)
        if (beta[j] != 0.0) eta += xs[j][i] * beta[j];
      ll += d.y[i] * eta - softplus(eta);
    }
    return ll;
  };

  LassoFit out;
  out.lambda_max = lambda_max;
  double best_ebic = std::numeric_limits<double>::infinity();
  std::vector<double> best_beta;
  double best_beta0 = 0.0;

  for (double lambda : grid) {
    fit_one_lambda(lambda);
    LassoPathPoint pt;
    pt.lambda = lambda;
    for (std::size_t j = 0; j < p; ++j) pt.df += beta[j] != 0.0;
    pt.loglik = loglik_at();
    pt.ebic = -2.0 * pt.loglik + double(pt.df) * std::log(double(n)) +
              2.0 * config.ebic_gamma * double(pt.df) * std::log(double(p));
    out.path.push_back(pt);
    if (pt.ebic < best_ebic) {
      best_ebic = pt.ebic;
      best_beta = beta;
      best_beta0 = beta0;
      out.selected_lambda = lambda;
    }
  }

  // report on the original scale
  LogitModel& model = out.model;
  model.predictor_names = d.names;
  model.coefficients.assign(p, 0.0);
  double intercept_shift = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    if (!active_col[j] || best_beta[j] == 0.0) continue;
    model.coefficients[j] = best_beta[j] / sd[j];
    intercept_shift += best_beta[j] * mean[j] / sd[j];
    out.selected.push_back(d.names[j]);
  }
  model.intercept = best_beta0 - intercept_shift;
  model.diagnostics.n_dropped = d.n_dropped;
  model.diagnostics.n_used = n;
  return out;
}

// ---------------------------------------------------------------------------
// Tree growing shared by CART and the forest
// ---------------------------------------------------------------------------

double tree_predict(const std::vector<TreeNode>& nodes, const std::vector<double>& x) {
  int i = 0;
  while (!nodes[i].is_leaf()) i = x[nodes[i].pred] <= nodes[i].cut ? nodes[i].left : nodes[i].right;
  return nodes[i].prob;
}

int tree_depth(const std::vector<TreeNode>& nodes) {
  std::vector<std::pair<int, int>> stack{{0, 0}};
  int best = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes[i].is_leaf()) {
      stack.push_back({nodes[i].left, d + 1});
      stack.push_back({nodes[i].right, d + 1});
    }
  }
  return best;
}

namespace {

struct GrowParams {
  int min_node = 5;
  int mtry = 0;  // 0 = all predictors
  Rng* rng = nullptr;
};

int grow_node(const Design& d, std::vector<int>& rows, const GrowParams& gp,
              std::vector<TreeNode>& out) {
  int self = int(out.size());
  out.push_back({});
  long n = long(rows.size());
  long n_pos = 0;
  for (int i : rows) n_pos += d.y[i];
  out[self].n = n;
  out[self].n_pos = n_pos;
  out[self].prob = double(n_pos) / double(n);

  bool impure = n_pos > 0 && n_pos < n;
  if (!impure || n < 2 * gp.min_node) return self;

  // candidate predictors, ascending for deterministic tie-breaks
  std::vector<int> cand;
  const int p = int(d.p());
  if (gp.mtry <= 0 || gp.mtry >= p) {
    cand.resize(p);
    std::iota(cand.begin(), cand.end(), 0);
  } else {
    std::vector<int> all(p);
    std::iota(all.begin(), all.end(), 0);
    for (int k = 0; k < gp.mtry; ++k) {
      std::size_t j = k + gp.rng->below(p - k);
      std::swap(all[k], all[j]);
    }
    cand.assign(all.begin(), all.begin() + gp.mtry);
    std::sort(cand.begin(), cand.end());
  }

  // maximize sum over children of (pos^2 + neg^2)/n_child; Gini decrease is
  // never negative, so any valid split of an impure node is acceptable
  double parent_score =
      (double(n_pos) * n_pos + double(n - n_pos) * (n - n_pos)) / double(n);
  double best_score = parent_score - 1e-9;
  int best_pred = -1;
  double best_cut = 0.0;

  std::vector<std::pair<double, int>> vals;
  vals.reserve(rows.size());
  for (int j : cand) {
    vals.clear();
    for (int i : rows) vals.push_back({d.x[j][i], d.y[i]});
    std::sort(vals.begin(), vals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    long pos_l = 0;
    for (long k = 1; k < n; ++k) {
      pos_l += vals[k - 1].second;
      if (vals[k].first == vals[k - 1].first) continue;
      long nl = k, nr = n - k;
      if (nl < gp.min_node || nr < gp.min_node) continue;
      long neg_l = nl - pos_l;
      long pos_r = n_pos - pos_l, neg_r = nr - pos_r;
      double score = (double(pos_l) * pos_l + double(neg_l) * neg_l) / double(nl) +
                     (double(pos_r) * pos_r + double(neg_r) * neg_r) / double(nr);
      if (score > best_score + 1e-12) {
        best_score = score;
        best_pred = j;
        best_cut = 0.5 * (vals[k - 1].first + vals[k].first);
      }
    }
  }
  if (best_pred < 0) return self;

  std::vector<int> left_rows, right_rows;
  left_rows.reserve(rows.size());
  right_rows.reserve(rows.size());
  for (int i : rows)
    (d.x[best_pred][i] <= best_cut ? left_rows : right_rows).push_back(i);
  rows.clear();
  rows.shrink_to_fit();

  out[self].pred = best_pred;
  out[self].cut = best_cut;
  int li = grow_node(d, left_rows, gp, out);
  int ri = grow_node(d, right_rows, gp, out);
  out[self].left = li;
  out[self].right = ri;
  return self;
}

std::vector<TreeNode> grow_tree(const Design& d, std::vector<int> rows, const GrowParams& gp) {
  std::vector<TreeNode> out;
  grow_node(d, rows, gp, out);
  return out;
}

long miscls(const TreeNode& nd) { return std::min(nd.n_pos, nd.n - nd.n_pos); }

// collapse every internal node whose weakest-link value is <= alpha
// (children first); returns (subtree misclassification, leaf count)
std::pair<long, long> prune_at(std::vector<TreeNode>& t, int i, double alpha) {
  TreeNode& nd = t[i];
  if (nd.is_leaf()) return {miscls(nd), 1};
  auto [rl, ll] = prune_at(t, nd.left, alpha);
  auto [rr, lr] = prune_at(t, nd.right, alpha);
  long r_sub = rl + rr;
  long leaves = ll + lr;
  double g = (double(miscls(nd)) - double(r_sub)) / double(leaves - 1);
  if (g <= alpha + 1e-12) {
    nd.pred = -1;
    nd.left = nd.right = -1;
    return {miscls(nd), 1};
  }
  return {r_sub, leaves};
}

int compact(const std::vector<TreeNode>& src, int i, std::vector<TreeNode>& dst) {
  int self = int(dst.size());
  dst.push_back(src[i]);
  if (!src[i].is_leaf()) {
    dst[self].left = compact(src, src[i].left, dst);
    dst[self].right = compact(src, src[i].right, dst);
  }
  return self;
}

std::vector<TreeNode> pruned_copy(const std::vector<TreeNode>& tree, double alpha) {
  std::vector<TreeNode> work = tree;
  prune_at(work, 0, alpha);
  std::vector<TreeNode> out;
  compact(work, 0, out);
  return out;
}

// weakest-link alpha sequence of a grown tree
std::vector<double> alpha_sequence(const std::vector<TreeNode>& tree) {
  std::vector<double> alphas{0.0};
  std::vector<TreeNode> work = tree;
  for (;;) {
    // find min g over internal nodes of the current working tree
    double gmin = std::numeric_limits<double>::infinity();
    // recursive scan
    std::function<std::pair<long, long>(int)> scan = [&](int i) -> std::pair<long, long> {
      TreeNode& nd = work[i];
      if (nd.is_leaf()) return {miscls(nd), 1L};
      auto [rl, ll] = scan(nd.left);
      auto [rr, lr] = scan(nd.right);
      long r_sub = rl + rr, leaves = ll + lr;
      double g = (double(miscls(nd)) - double(r_sub)) / double(leaves - 1);
      gmin = std::min(gmin, g);
      return {r_sub, leaves};
    };
    if (work[0].is_leaf()) break;
    scan(0);
    if (!std::isfinite(gmin)) break;
    if (gmin > alphas.back()) alphas.push_back(gmin);
    prune_at(work, 0, gmin);
  }
  return alphas;
}

}  // namespace

CartModel fit_cart(const dataset::DataView& rows, const std::vector<int>& labels,
                   const CartConfig& config) {
  Design d = complete_cases(rows, labels);
  if (d.n() == 0) fail(ErrorKind::missing_data, "no complete-case rows to fit on");

  std::vector<int> all(d.n());
  std::iota(all.begin(), all.end(), 0);
  GrowParams gp;
  gp.min_node = config.min_node;
  std::vector<TreeNode> full = grow_tree(d, all, gp);

  CartModel model;
  model.predictor_names = d.names;
  model.diagnostics.n_dropped = d.n_dropped;
  model.diagnostics.n_used = d.n();

  bool can_cv = config.prune && !full[0].is_leaf() && long(d.n()) >= config.cv_folds &&
                config.cv_folds >= 2;
  if (!can_cv) {
    model.nodes = std::move(full);
    return model;
  }

  // candidate alphas: geometric midpoints of the weakest-link sequence, plus
  // a point past the end that collapses to the root
  std::vector<double> seq = alpha_sequence(full);
  std::vector<double> candidates{0.0};
  for (std::size_t k = 0; k + 1 < seq.size(); ++k)
    candidates.push_back(std::sqrt(std::max(seq[k], 1e-12) * seq[k + 1]));
  if (seq.size() > 1) candidates.push_back(seq.back() * (1.0 + 1e-9));

  // 5-fold cross-validated misclassification per candidate, one-SE rule
  Rng rng(derive_seed(0xCA27u, "cart-cv"));
  std::vector<int> fold_of(d.n());
  {
    std::vector<int> idx(d.n());
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    for (std::size_t k = 0; k < idx.size(); ++k)
      fold_of[idx[k]] = int(k % std::size_t(config.cv_folds));
  }

  std::vector<long> cv_errors(candidates.size(), 0);
  for (int f = 0; f < config.cv_folds; ++f) {
    std::vector<int> train_rows, test_rows;
    for (std::size_t i = 0; i < d.n(); ++i)
      (fold_of[i] == f ? test_rows : train_rows).push_back(int(i));
    if (train_rows.empty() || test_rows.empty()) continue;
    std::vector<TreeNode> fold_tree = grow_tree(d, train_rows, gp);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      std::vector<TreeNode> pruned = pruned_copy(fold_tree, candidates[c]);
      for (int i : test_rows) {
        std::vector<double> x(d.p());
        for (std::size_t j = 0; j < d.p(); ++j) x[j] = d.x[j][i];
        int pred = tree_predict(pruned, x) > 0.5 ? 1 : 0;
        cv_errors[c] += pred != d.y[i];
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t c = 1; c < candidates.size(); ++c)
    if (cv_errors[c] < cv_errors[best]) best = c;
  double err_min = double(cv_errors[best]) / double(d.n());
  double se = std::sqrt(std::max(err_min * (1.0 - err_min), 0.0) / double(d.n()));
  std::size_t chosen = best;
  for (std::size_t c = candidates.size(); c-- > 0;) {
    if (double(cv_errors[c]) / double(d.n()) <= err_min + se) {
      chosen = c;
      break;  // candidates ascend in alpha; take the largest admissible
    }
  }

  model.selected_alpha = candidates[chosen];
  model.nodes = pruned_copy(full, model.selected_alpha);
  return model;
}

double ForestModel::predict_one(const std::vector<double>& x) const {
  long votes = 0;
  for (const auto& t : trees) votes += tree_predict(t, x) > 0.5;
  return double(votes) / double(trees.size());
}

ForestModel fit_forest(const dataset::DataView& rows, const std::vector<int>& labels,
                       const ForestConfig& config) {
  if (config.n_trees < 1) fail(ErrorKind::config, "forest: n_trees must be >= 1");
  Design d = complete_cases(rows, labels);
  if (d.n() == 0) fail(ErrorKind::missing_data, "no complete-case rows to fit on");

  ForestModel model;
  model.predictor_names = d.names;
  model.config = config;
  if (model.config.mtry <= 0)
    model.config.mtry = std::max(1, int(std::floor(std::sqrt(double(d.p())))));
  if (model.config.mtry > int(d.p()))
    fail(ErrorKind::config, "forest: mtry exceeds predictor count");
  model.diagnostics.n_dropped = d.n_dropped;
  model.diagnostics.n_used = d.n();
  model.trees.resize(config.n_trees);

  std::vector<std::vector<std::uint8_t>> in_bag(config.n_trees,
                                                std::vector<std::uint8_t>(d.n(), 0));
  parallel_for(std::size_t(config.n_trees), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t t = lo; t < hi; ++t) {
      Rng rng(derive_seed(config.seed, "forest-tree", t));
      std::vector<int> rows_t;
      rows_t.reserve(d.n());
      if (config.bootstrap) {
        for (std::size_t i = 0; i < d.n(); ++i) {
          int r = int(rng.below(d.n()));
          rows_t.push_back(r);
          in_bag[t][r] = 1;
        }
      } else {
        rows_t.resize(d.n());
        std::iota(rows_t.begin(), rows_t.end(), 0);
        std::fill(in_bag[t].begin(), in_bag[t].end(), 1);
      }
      GrowParams gp;
      gp.min_node = config.min_node;
      gp.mtry = model.config.mtry;
      gp.rng = &rng;
      model.trees[t] = grow_tree(d, std::move(rows_t), gp);
    }
  });

  // out-of-bag accuracy by majority vote over trees that skipped the row
  if (config.bootstrap) {
    long evaluated = 0, correct = 0;
    std::vector<double> x(d.p());
    for (std::size_t i = 0; i < d.n(); ++i) {
      long votes = 0, nt = 0;
      for (std::size_t j = 0; j < d.p(); ++j) x[j] = d.x[j][i];
      for (int t = 0; t < config.n_trees; ++t) {
        if (in_bag[t][i]) continue;
        ++nt;
        votes += tree_predict(model.trees[t], x) > 0.5;
      }
      if (nt == 0) continue;
      ++evaluated;
      int pred = double(votes) / double(nt) > 0.5 ? 1 : 0;
      correct += pred == d.y[i];
    }
    model.oob_accuracy = evaluated ? double(correct) / double(evaluated)
                                   : std::numeric_limits<double>::quiet_NaN();
  } else {
    model.oob_accuracy = std::numeric_limits<double>::quiet_NaN();
  }
  return model;
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

namespace {

template <typename ScoreFn>
PredictionTable predict_complete_cases(const std::vector<std::string>& model_names,
                                       const dataset::DataView& rows, ScoreFn&& score) {
  std::vector<std::size_t> source(model_names.size());
  for (std::size_t j = 0; j < model_names.size(); ++j) {
    bool found = false;
    for (std::size_t c = 0; c < rows.n_cols(); ++c) {
      if (rows.col_name(c) == model_names[j]) {
        source[j] = c;
        found = true;
        break;
      }
    }
    if (!found)
      fail(ErrorKind::schema, "prediction rows lack predictor \"" + model_names[j] + "\"");
  }

  PredictionTable out;
  std::vector<double> x(model_names.size());
  for (std::size_t i = 0; i < rows.n_rows(); ++i) {
    bool complete = true;
    for (std::size_t j = 0; j < source.size(); ++j) {
      if (rows.missing(i, source[j])) {
        complete = false;
        break;
      }
      x[j] = rows.value(i, source[j]);
    }
    if (!complete) {
      ++out.n_dropped;
      continue;
    }
    std::size_t pr = rows.rows[i];
    out.firm_ids.push_back(rows.panel->firm_ids[pr]);
    out.years.push_back(rows.panel->years[pr]);
    out.scores.push_back(score(x));
    out.panel_rows.push_back(pr);
  }
  return out;
}

}  // namespace

PredictionTable predict(const LogitModel& model, const dataset::DataView& rows) {
  return predict_complete_cases(model.predictor_names, rows,
                                [&](const std::vector<double>& x) { return model.predict_one(x); });
}

PredictionTable predict(const CartModel& model, const dataset::DataView& rows) {
  return predict_complete_cases(model.predictor_names, rows,
                                [&](const std::vector<double>& x) { return model.predict_one(x); });
}

PredictionTable predict(const ForestModel& model, const dataset::DataView& rows) {
  return predict_complete_cases(model.predictor_names, rows,
                                [&](const std::vector<double>& x) { return model.predict_one(x); });
}

}  // namespace exportscore::baselines
