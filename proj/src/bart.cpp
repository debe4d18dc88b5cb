#include "exportscore/bart.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace exportscore::bart {

void BartConfig::validate() const {
  if (q < 1) fail(ErrorKind::config, "bart: q must be >= 1");
  if (!(beta > 0.0 && beta < 1.0)) fail(ErrorKind::config, "bart: beta must lie in (0,1)");
  if (eta < 0.0) fail(ErrorKind::config, "bart: eta must be >= 0");
  if (d <= 0.0) fail(ErrorKind::config, "bart: d must be > 0");
  if (sigma2 != 1.0) fail(ErrorKind::config, "bart: sigma2 is fixed at 1 for the probit link");
  if (burn_in < 0 || post_burn < 1)
    fail(ErrorKind::config, "bart: need burn_in >= 0 and post_burn >= 1");
  const auto& p = proposal_probs;
  if (!(p.grow > 0.0 && p.prune > 0.0 && p.change > 0.0))
    fail(ErrorKind::config, "bart: proposal probabilities must be positive");
  if (std::abs(p.grow + p.prune + p.change - 1.0) > 1e-8)
    fail(ErrorKind::config, "bart: proposal probabilities must sum to 1");
}

LeafPosterior leaf_posterior(std::size_t n, double residual_sum, double sigma2, double sigma_q2) {
  double a = double(n) / sigma2 + 1.0 / sigma_q2;
  LeafPosterior p;
  p.variance = 1.0 / a;
  p.mean = p.variance * residual_sum / sigma2;
  return p;
}

double draw_latent(int y, double fit, Rng& rng) {
  return rng.truncated_normal_unit_var(fit, y == 1);
}

double FrozenTree::predict(std::span<const double> x, std::span<const std::uint8_t> miss) const {
  std::int32_t i = 0;
  for (;;) {
    const FrozenNode& nd = nodes[i];
    if (nd.kind == RuleKind::leaf) return nd.value;
    bool go_left;
    if (nd.kind == RuleKind::missingness) {
      go_left = miss[nd.predictor] != 0;
    } else if (miss[nd.predictor]) {
      go_left = nd.missing_direction == MissingDirection::left;
    } else {
      go_left = x[nd.predictor] <= nd.cutpoint;
    }
    i = go_left ? nd.left : nd.right;
  }
}

int FrozenTree::depth() const {
  // preorder layout: depth derived by walking
  if (nodes.empty()) return 0;
  int max_depth = 0;
  struct Item {
    std::int32_t node;
    int depth;
  };
  std::vector<Item> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    max_depth = std::max(max_depth, d);
    const FrozenNode& nd = nodes[i];
    if (nd.kind != RuleKind::leaf) {
      stack.push_back({nd.left, d + 1});
      stack.push_back({nd.right, d + 1});
    }
  }
  return max_depth;
}

double BartModel::predict_row(std::span<const double> x,
                              std::span<const std::uint8_t> miss) const {
  double acc = 0.0;
  for (const auto& ensemble : draws) {
    double sum = 0.0;
    for (const auto& tree : ensemble) sum += tree.predict(x, miss);
    acc += norm_cdf(sum);
  }
  return acc / double(draws.size());
}

// ---------------------------------------------------------------------------
// Sampler internals
// ---------------------------------------------------------------------------

namespace {

struct MNode {
  RuleKind kind = RuleKind::leaf;
  int pred = -1;
  double cut = 0.0;
  MissingDirection mdir = MissingDirection::left;
  double value = 0.0;
  int left = -1, right = -1, parent = -1;
  int depth = 0;
  std::vector<int> obs;  // resident observations (meaningful at leaves)
};

struct MutableTree {
  std::vector<MNode> nodes;
  std::vector<int> free_slots;
  int root = 0;

  int alloc() {
    if (!free_slots.empty()) {
      int i = free_slots.back();
      free_slots.pop_back();
      nodes[i] = MNode{};
      return i;
    }
    nodes.push_back(MNode{});
    return int(nodes.size()) - 1;
  }
  void release(int i) {
    nodes[i].obs.clear();
    nodes[i].obs.shrink_to_fit();
    free_slots.push_back(i);
  }

  void collect(int i, std::vector<int>& leaves, std::vector<int>& nogs,
               std::vector<int>& internals) const {
    const MNode& nd = nodes[i];
    if (nd.kind == RuleKind::leaf) {
      leaves.push_back(i);
      return;
    }
    internals.push_back(i);
    if (nodes[nd.left].kind == RuleKind::leaf && nodes[nd.right].kind == RuleKind::leaf)
      nogs.push_back(i);
    collect(nd.left, leaves, nogs, internals);
    collect(nd.right, leaves, nogs, internals);
  }
};

// A proposed split rule; pseudo-cutpoint index == n_cutpoints means a
// missingness split.
struct Rule {
  RuleKind kind = RuleKind::numeric;
  int pred = -1;
  double cut = 0.0;
  MissingDirection mdir = MissingDirection::left;
};

class Sampler {
 public:
  Sampler(const dataset::DataView& train, const std::vector<int>& labels,
          const BartConfig& config)
      : cfg_(config), rng_(derive_seed(config.seed, "bart-fit")), n_(train.n_rows()),
        p_(train.n_cols()), y_(labels) {
    cfg_.validate();
    if (labels.size() != n_) fail(ErrorKind::alignment, "labels do not align with training rows");

    long n1 = 0, n0 = 0;
    for (int y : labels) {
      if (y != 0 && y != 1) fail(ErrorKind::parameter, "labels must be 0/1");
      (y == 1 ? n1 : n0)++;
    }
    if (n1 < 2 || n0 < 2)
      fail(ErrorKind::degenerate_outcome, "bart: need at least 2 rows of each class");

    // dense column-major copy of the training block
    x_.assign(p_, std::vector<double>(n_));
    miss_.assign(p_, std::vector<std::uint8_t>(n_));
    had_missing_.assign(p_, 0);
    for (std::size_t j = 0; j < p_; ++j) {
      for (std::size_t i = 0; i < n_; ++i) {
        bool m = train.missing(i, j);
        miss_[j][i] = m;
        x_[j][i] = m ? 0.0 : train.value(i, j);
        had_missing_[j] |= m;
      }
      if (had_missing_[j] && !cfg_.mia_enabled)
        fail(ErrorKind::missing_data,
             "bart: training rows contain missing cells but MIA is disabled "
             "(column \"" + train.col_name(j) + "\")");
    }
    names_ = train.col_names();

    // cutpoint pools: observed unique values per predictor; predictors with
    // missing training values gain one pseudo-cutpoint for missingness splits
    pools_.resize(p_);
    pool_sizes_.resize(p_);
    for (std::size_t j = 0; j < p_; ++j) {
      std::vector<double> vals;
      vals.reserve(n_);
      for (std::size_t i = 0; i < n_; ++i)
        if (!miss_[j][i]) vals.push_back(x_[j][i]);
      std::sort(vals.begin(), vals.end());
      vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
      pools_[j] = std::move(vals);
      pool_sizes_[j] = pools_[j].size() + ((cfg_.mia_enabled && had_missing_[j]) ? 1 : 0);
      if (pool_sizes_[j] > 0) proposable_.push_back(int(j));
    }

    sigma_q2_ = cfg_.sigma_q() * cfg_.sigma_q();
  }

  BartModel run() {
    trees_.assign(cfg_.q, MutableTree{});
    tree_fit_.assign(cfg_.q, std::vector<double>(n_, 0.0));
    for (auto& t : trees_) {
      t.nodes.resize(1);
      t.nodes[0].obs.resize(n_);
      for (std::size_t i = 0; i < n_; ++i) t.nodes[0].obs[i] = int(i);
    }
    allfit_.assign(n_, 0.0);
    z_.assign(n_, 0.0);
    resid_.assign(n_, 0.0);

    BartModel model;
    model.config = cfg_;
    model.predictor_names = names_;
    model.had_missing = had_missing_;
    model.draws.reserve(cfg_.post_burn);

    const int total = cfg_.burn_in + cfg_.post_burn;
    for (int iter = 0; iter < total; ++iter) {
      if (!cfg_.prior_only) {
        for (std::size_t i = 0; i < n_; ++i)
          z_[i] = rng_.truncated_normal_unit_var(allfit_[i], y_[i] == 1);
      }
      for (int t = 0; t < cfg_.q; ++t) sweep_tree(t);
      if (iter >= cfg_.burn_in) {
        model.draws.push_back(snapshot());
        double mean_fit = 0.0;
        for (double f : allfit_) mean_fit += f;
        model.trace.push_back(mean_fit / double(n_));
      }
    }
    return model;
  }

 private:
  double leaf_marginal(std::size_t n, double s) const {
    // per-leaf factor of the integrated likelihood, constants dropped
    double a = double(n) / cfg_.sigma2 + 1.0 / sigma_q2_;
    double b = s / cfg_.sigma2;
    return -0.5 * std::log(sigma_q2_ * a) + b * b / (2.0 * a);
  }

  bool route_left(const MNode& nd, int i, const Rule* override_rule) const {
    RuleKind kind = nd.kind;
    int pred = nd.pred;
    double cut = nd.cut;
    MissingDirection mdir = nd.mdir;
    if (override_rule) {
      kind = override_rule->kind;
      pred = override_rule->pred;
      cut = override_rule->cut;
      mdir = override_rule->mdir;
    }
    if (kind == RuleKind::missingness) return miss_[pred][i] != 0;
    if (miss_[pred][i]) return mdir == MissingDirection::left;
    return x_[pred][i] <= cut;
  }

  // uniform over predictor then pool entry; the proposal distribution equals
  // the rule prior, so rule probabilities cancel out of every MH ratio
  bool propose_rule(Rule& rule) {
    if (proposable_.empty()) return false;
    int j = proposable_[rng_.below(proposable_.size())];
    std::size_t idx = rng_.below(pool_sizes_[j]);
    rule.pred = j;
    if (idx == pools_[j].size()) {
      rule.kind = RuleKind::missingness;
    } else {
      rule.kind = RuleKind::numeric;
      rule.cut = pools_[j][idx];
      if (cfg_.mia_enabled)
        rule.mdir = rng_.bernoulli(0.5) ? MissingDirection::right : MissingDirection::left;
    }
    return true;
  }

  void sweep_tree(int t) {
    MutableTree& tree = trees_[t];
    if (!cfg_.prior_only) {
      const auto& fit = tree_fit_[t];
      for (std::size_t i = 0; i < n_; ++i) resid_[i] = z_[i] - allfit_[i] + fit[i];
    }

    double u = rng_.uniform();
    if (u < cfg_.proposal_probs.grow) {
      try_grow(tree);
    } else if (u < cfg_.proposal_probs.grow + cfg_.proposal_probs.prune) {
      try_prune(tree);
    } else {
      try_change(tree);
    }

    draw_leaf_values(tree);
    refresh_fit(t);
  }

  void try_grow(MutableTree& tree) {
    std::vector<int> leaves, nogs, internals;
    tree.collect(tree.root, leaves, nogs, internals);

    int leaf_id = leaves[rng_.below(leaves.size())];
    Rule rule;
    if (!propose_rule(rule)) return;

    MNode& leaf = tree.nodes[leaf_id];
    std::vector<int> left_obs, right_obs;
    left_obs.reserve(leaf.obs.size());
    right_obs.reserve(leaf.obs.size());
    double s_left = 0.0, s_right = 0.0;
    MNode probe;  // rule carried via override
    for (int i : leaf.obs) {
      if (route_left(probe, i, &rule)) {
        left_obs.push_back(i);
        s_left += resid_[i];
      } else {
        right_obs.push_back(i);
        s_right += resid_[i];
      }
    }
    if (left_obs.empty() || right_obs.empty()) return;  // childless side: rejected outright

    double p_split = cfg_.split_prior(leaf.depth);
    double p_split_child = cfg_.split_prior(leaf.depth + 1);
    double log_prior = std::log(p_split) + 2.0 * std::log(1.0 - p_split_child) -
                       std::log(1.0 - p_split);

    double log_lik = 0.0;
    if (!cfg_.prior_only) {
      log_lik = leaf_marginal(left_obs.size(), s_left) + leaf_marginal(right_obs.size(), s_right) -
                leaf_marginal(leaf.obs.size(), s_left + s_right);
    }

    // #no-grandchild nodes after growing: the grown leaf becomes one; its
    // parent stops being one when the sibling is also a leaf
    int nog_after = int(nogs.size()) + 1;
    if (leaf.parent >= 0) {
      const MNode& par = tree.nodes[leaf.parent];
      int sibling = par.left == leaf_id ? par.right : par.left;
      if (tree.nodes[sibling].kind == RuleKind::leaf) nog_after -= 1;
    }

    double log_trans = std::log(cfg_.proposal_probs.prune) - std::log(double(nog_after)) -
                       std::log(cfg_.proposal_probs.grow) + std::log(double(leaves.size()));

    if (std::log(rng_.uniform()) >= log_prior + log_lik + log_trans) return;

    int li = tree.alloc();
    int ri = tree.alloc();
    MNode& nd = tree.nodes[leaf_id];  // realloc-safe refetch
    nd.kind = rule.kind;
    nd.pred = rule.pred;
    nd.cut = rule.cut;
    nd.mdir = rule.mdir;
    nd.left = li;
    nd.right = ri;
    tree.nodes[li].parent = leaf_id;
    tree.nodes[ri].parent = leaf_id;
    tree.nodes[li].depth = nd.depth + 1;
    tree.nodes[ri].depth = nd.depth + 1;
    tree.nodes[li].obs = std::move(left_obs);
    tree.nodes[ri].obs = std::move(right_obs);
    nd.obs.clear();
    nd.obs.shrink_to_fit();
  }

  void try_prune(MutableTree& tree) {
    std::vector<int> leaves, nogs, internals;
    tree.collect(tree.root, leaves, nogs, internals);
    if (nogs.empty()) return;  // stump: nothing to prune

    int nd_id = nogs[rng_.below(nogs.size())];
    MNode& nd = tree.nodes[nd_id];
    const MNode& left = tree.nodes[nd.left];
    const MNode& right = tree.nodes[nd.right];

    double s_left = 0.0, s_right = 0.0;
    for (int i : left.obs) s_left += resid_[i];
    for (int i : right.obs) s_right += resid_[i];

    double p_split = cfg_.split_prior(nd.depth);
    double p_split_child = cfg_.split_prior(nd.depth + 1);
    double log_prior = -(std::log(p_split) + 2.0 * std::log(1.0 - p_split_child) -
                         std::log(1.0 - p_split));

    double log_lik = 0.0;
    if (!cfg_.prior_only) {
      log_lik = leaf_marginal(left.obs.size() + right.obs.size(), s_left + s_right) -
                leaf_marginal(left.obs.size(), s_left) - leaf_marginal(right.obs.size(), s_right);
    }

    int leaves_after = int(leaves.size()) - 1;
    double log_trans = std::log(cfg_.proposal_probs.grow) - std::log(double(leaves_after)) -
                       std::log(cfg_.proposal_probs.prune) + std::log(double(nogs.size()));

    if (std::log(rng_.uniform()) >= log_prior + log_lik + log_trans) return;

    std::vector<int> merged;
    merged.reserve(left.obs.size() + right.obs.size());
    merged.insert(merged.end(), left.obs.begin(), left.obs.end());
    merged.insert(merged.end(), right.obs.begin(), right.obs.end());
    tree.release(nd.left);
    tree.release(nd.right);
    nd.kind = RuleKind::leaf;
    nd.pred = -1;
    nd.left = nd.right = -1;
    nd.obs = std::move(merged);
  }

  // gather per-leaf observation lists under `top` when `top` carries
  // override_rule instead of its own rule
  void reroute(const MutableTree& tree, int node_id, int top, const Rule* override_rule,
               const std::vector<int>& obs, std::vector<std::pair<int, std::vector<int>>>& out)
      const {
    const MNode& nd = tree.nodes[node_id];
    if (nd.kind == RuleKind::leaf) {
      out.push_back({node_id, obs});
      return;
    }
    std::vector<int> l, r;
    const Rule* rule = node_id == top ? override_rule : nullptr;
    for (int i : obs) (route_left(nd, i, rule) ? l : r).push_back(i);
    reroute(tree, nd.left, top, override_rule, l, out);
    reroute(tree, nd.right, top, override_rule, r, out);
  }

  void try_change(MutableTree& tree) {
    std::vector<int> leaves, nogs, internals;
    tree.collect(tree.root, leaves, nogs, internals);
    if (internals.empty()) return;

    int nd_id = internals[rng_.below(internals.size())];
    Rule rule;
    if (!propose_rule(rule)) return;

    // observations under the changed node = union of its leaves' residents
    std::vector<int> under;
    std::vector<int> sub_leaves, sub_nogs, sub_internals;
    tree.collect(nd_id, sub_leaves, sub_nogs, sub_internals);
    for (int l : sub_leaves)
      under.insert(under.end(), tree.nodes[l].obs.begin(), tree.nodes[l].obs.end());

    std::vector<std::pair<int, std::vector<int>>> new_assign;
    reroute(tree, nd_id, nd_id, &rule, under, new_assign);
    for (const auto& [leaf, obs] : new_assign)
      if (obs.empty()) return;  // empty leaf: rejected

    double log_lik = 0.0;
    if (!cfg_.prior_only) {
      double old_sum = 0.0, new_sum = 0.0;
      for (int l : sub_leaves) {
        double s = 0.0;
        for (int i : tree.nodes[l].obs) s += resid_[i];
        old_sum += leaf_marginal(tree.nodes[l].obs.size(), s);
      }
      for (const auto& [leaf, obs] : new_assign) {
        double s = 0.0;
        for (int i : obs) s += resid_[i];
        new_sum += leaf_marginal(obs.size(), s);
      }
      log_lik = new_sum - old_sum;
    }

    // same structure, symmetric rule proposal: prior and transition cancel
    if (std::log(rng_.uniform()) >= log_lik) return;

    MNode& nd = tree.nodes[nd_id];
    nd.kind = rule.kind;
    nd.pred = rule.pred;
    nd.cut = rule.cut;
    nd.mdir = rule.mdir;
    for (auto& [leaf, obs] : new_assign) tree.nodes[leaf].obs = std::move(obs);
  }

  void draw_leaf_values(MutableTree& tree) {
    std::vector<int> leaves, nogs, internals;
    tree.collect(tree.root, leaves, nogs, internals);
    for (int l : leaves) {
      MNode& leaf = tree.nodes[l];
      double s = 0.0;
      std::size_t n = 0;
      if (!cfg_.prior_only) {
        for (int i : leaf.obs) s += resid_[i];
        n = leaf.obs.size();
      }
      LeafPosterior post = leaf_posterior(n, s, cfg_.sigma2, sigma_q2_);
      leaf.value = rng_.normal(post.mean, std::sqrt(post.variance));
    }
  }

  void refresh_fit(int t) {
    MutableTree& tree = trees_[t];
    auto& fit = tree_fit_[t];
    std::vector<int> leaves, nogs, internals;
    tree.collect(tree.root, leaves, nogs, internals);
    for (int l : leaves) {
      const MNode& leaf = tree.nodes[l];
      for (int i : leaf.obs) {
        allfit_[i] += leaf.value - fit[i];
        fit[i] = leaf.value;
      }
    }
  }

  std::vector<FrozenTree> snapshot() const {
    std::vector<FrozenTree> out;
    out.reserve(trees_.size());
    for (const auto& tree : trees_) {
      FrozenTree ft;
      freeze(tree, tree.root, ft);
      out.push_back(std::move(ft));
    }
    return out;
  }

  static std::int32_t freeze(const MutableTree& tree, int node_id, FrozenTree& out) {
    const MNode& nd = tree.nodes[node_id];
    std::int32_t self = std::int32_t(out.nodes.size());
    out.nodes.push_back({});
    FrozenNode fn;
    fn.kind = nd.kind;
    fn.predictor = nd.pred;
    fn.cutpoint = nd.cut;
    fn.missing_direction = nd.mdir;
    fn.value = nd.value;
    if (nd.kind != RuleKind::leaf) {
      fn.left = freeze(tree, nd.left, out);
      fn.right = freeze(tree, nd.right, out);
    }
    out.nodes[self] = fn;
    return self;
  }

  BartConfig cfg_;
  Rng rng_;
  std::size_t n_, p_;
  std::vector<int> y_;
  std::vector<std::vector<double>> x_;
  std::vector<std::vector<std::uint8_t>> miss_;
  std::vector<std::uint8_t> had_missing_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> pools_;
  std::vector<std::size_t> pool_sizes_;
  std::vector<int> proposable_;
  double sigma_q2_ = 1.0;

  std::vector<MutableTree> trees_;
  std::vector<std::vector<double>> tree_fit_;
  std::vector<double> allfit_, z_, resid_;
};

}  // namespace

BartModel fit(const dataset::DataView& train, const std::vector<int>& labels,
              const BartConfig& config) {
  Sampler sampler(train, labels, config);
  return sampler.run();
}

PredictionTable predict(const BartModel& model, const dataset::DataView& rows) {
  // map model predictors onto view columns by name
  std::unordered_map<std::string, std::size_t> view_cols;
  for (std::size_t j = 0; j < rows.n_cols(); ++j) view_cols[rows.col_name(j)] = j;
  std::vector<std::size_t> source(model.predictor_names.size());
  for (std::size_t j = 0; j < model.predictor_names.size(); ++j) {
    auto it = view_cols.find(model.predictor_names[j]);
    if (it == view_cols.end())
      fail(ErrorKind::schema, "prediction rows lack predictor \"" + model.predictor_names[j] + "\"");
    source[j] = it->second;
  }

  const std::size_t n = rows.n_rows();
  const std::size_t p = source.size();
  PredictionTable out;
  out.firm_ids.resize(n);
  out.years.resize(n);
  out.scores.resize(n);
  out.panel_rows = rows.rows;
  for (std::size_t i = 0; i < n; ++i) {
    out.firm_ids[i] = rows.panel->firm_ids[rows.rows[i]];
    out.years[i] = rows.panel->years[rows.rows[i]];
  }

  if (!model.config.mia_enabled) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        if (rows.missing(i, source[j]))
          fail(ErrorKind::missing_data,
               "prediction rows contain missing cells but MIA is disabled");
      }
    }
  }

  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> x(p);
    std::vector<std::uint8_t> miss(p);
    for (std::size_t i = lo; i < hi; ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        miss[j] = rows.missing(i, source[j]);
        x[j] = miss[j] ? 0.0 : rows.value(i, source[j]);
      }
      out.scores[i] = model.predict_row(x, miss);
    }
  });
  return out;
}

std::vector<double> vip(const BartModel& model) {
  std::vector<double> counts(model.predictor_names.size(), 0.0);
  double total = 0.0;
  for (const auto& ensemble : model.draws) {
    for (const auto& tree : ensemble) {
      tree.for_each_split([&](const FrozenNode& nd) {
        counts[nd.predictor] += 1.0;
        total += 1.0;
      });
    }
  }
  if (total > 0.0)
    for (double& c : counts) c /= total;
  return counts;
}

}  // namespace exportscore::bart
