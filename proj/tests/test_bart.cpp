#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>

#include "exportscore/bart.hpp"
#include "exportscore/common.hpp"
#include "exportscore/metrics.hpp"
#include "exportscore/synth.hpp"
#include "helpers.hpp"

using namespace exportscore;
using namespace exportscore::bart;
using test_helpers::matrix_panel;

namespace {

// posterior mean/variance by Simpson quadrature on the unnormalized density;
// independent of the conjugate formulas it checks
struct QuadPosterior {
  double mean, variance;
};

QuadPosterior quadrature_posterior(const std::vector<double>& resid, double sigma2,
                                   double sigma_q2) {
  double s = std::accumulate(resid.begin(), resid.end(), 0.0);
  double n = double(resid.size());
  // generous window centred on a rough location estimate
  double rough = s / (n + sigma2 / sigma_q2);
  double spread = 12.0 * std::sqrt(1.0 / (n / sigma2 + 1.0 / sigma_q2));
  double lo = rough - spread, hi = rough + spread;
  const int grid = 16000;  // even
  double h = (hi - lo) / grid;

  auto log_density = [&](double mu) {
    double ll = -mu * mu / (2.0 * sigma_q2);
    for (double r : resid) ll -= (r - mu) * (r - mu) / (2.0 * sigma2);
    return ll;
  };
  double log_max = -1e300;
  for (int i = 0; i <= grid; ++i) log_max = std::max(log_max, log_density(lo + i * h));

  double z = 0.0, m1 = 0.0, m2 = 0.0;
  for (int i = 0; i <= grid; ++i) {
    double mu = lo + i * h;
    double w = (i == 0 || i == grid) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    double f = w * std::exp(log_density(mu) - log_max);
    z += f;
    m1 += f * mu;
    m2 += f * mu * mu;
  }
  double mean = m1 / z;
  return {mean, m2 / z - mean * mean};
}

dataset::FirmPanel two_signal_panel(int n, Rng& rng, std::vector<int>& labels) {
  std::vector<std::vector<double>> cols(3, std::vector<double>(n));
  labels.resize(n);
  for (int i = 0; i < n; ++i) {
    cols[0][i] = rng.normal();
    cols[1][i] = rng.normal();
    cols[2][i] = rng.normal();
    double eta = 1.4 * cols[0][i] - 1.0 * cols[1][i];
    labels[i] = rng.bernoulli(norm_cdf(eta));
  }
  return matrix_panel(cols);
}

}  // namespace

TEST_CASE("config: prior constants from the depth and leaf-scale formulas") {
  BartConfig cfg;
  CHECK(cfg.split_prior(0) == doctest::Approx(0.95).epsilon(1e-15));
  CHECK(cfg.split_prior(1) == doctest::Approx(0.2375).epsilon(1e-12));
  cfg.q = 50;
  CHECK(cfg.sigma_q() == doctest::Approx(0.2121320344).epsilon(1e-9));
  auto bad_beta = [] {
    BartConfig c;
    c.beta = 1.5;
    c.validate();
  };
  auto bad_sigma = [] {
    BartConfig c;
    c.sigma2 = 2.0;
    c.validate();
  };
  auto bad_probs = [] {
    BartConfig c;
    c.proposal_probs = {0.5, 0.5, 0.5};
    c.validate();
  };
  CHECK_THROWS_AS(bad_beta(), Error);
  CHECK_THROWS_AS(bad_sigma(), Error);
  CHECK_THROWS_AS(bad_probs(), Error);
}

TEST_CASE("leaf posterior: worked conjugate cases") {
  LeafPosterior empty = leaf_posterior(0, 0.0, 1.0, 0.04);
  CHECK(empty.mean == 0.0);
  CHECK(empty.variance == doctest::Approx(0.04).epsilon(1e-15));

  LeafPosterior one = leaf_posterior(1, 0.8, 1.0, 1.0);
  CHECK(one.mean == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(one.variance == doctest::Approx(0.5).epsilon(1e-15));

  // likelihood dominance: the posterior mean approaches the residual mean
  LeafPosterior big = leaf_posterior(100000, 100000 * 0.37, 1.0, 0.04);
  CHECK(big.mean == doctest::Approx(0.37).epsilon(1e-4));
}

TEST_CASE("leaf posterior agrees with quadrature") {
  Rng rng(2024);
  for (int rep = 0; rep < 150; ++rep) {
    int n = int(rng.below(30));
    std::vector<double> resid(n);
    for (auto& r : resid) r = rng.uniform(-3.0, 3.0);
    double sigma2 = 1.0;
    double sigma_q = rng.uniform(0.05, 2.0);
    LeafPosterior p = leaf_posterior(resid.size(), std::accumulate(resid.begin(), resid.end(), 0.0),
                                     sigma2, sigma_q * sigma_q);
    QuadPosterior q = quadrature_posterior(resid, sigma2, sigma_q * sigma_q);
    CHECK(std::abs(p.mean - q.mean) <= 1e-8);
    CHECK(std::abs(p.variance - q.variance) <= 1e-8);
  }
}

TEST_CASE("draw_latent: truncation side and analytic moments") {
  Rng rng(77);
  double sum1 = 0.0, sum0 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double z1 = draw_latent(1, 0.0, rng);
    double z0 = draw_latent(0, 0.0, rng);
    CHECK(z1 > 0.0);
    CHECK(z0 < 0.0);
    sum1 += z1;
    sum0 += z0;
  }
  double expect = std::sqrt(2.0 / M_PI);
  CHECK(sum1 / n == doctest::Approx(expect).epsilon(0.012));
  CHECK(sum0 / n == doctest::Approx(-expect).epsilon(0.012));
  CHECK(draw_latent(1, -30.0, rng) > 0.0);  // deep truncation stays on the right side
  CHECK(draw_latent(1, -40.0, rng) > 0.0);  // beyond double tails: sign still guaranteed
  CHECK(draw_latent(0, 40.0, rng) < 0.0);
}

TEST_CASE("prediction: hand-built ensembles reproduce the probit link") {
  BartModel m;
  m.config.post_burn = 1;
  m.predictor_names = {"x1"};
  m.had_missing = {0};

  FrozenTree zero_leaf;
  zero_leaf.nodes.push_back({});  // single leaf, value 0
  m.draws = {{zero_leaf}};
  std::vector<double> x{0.3};
  std::vector<std::uint8_t> miss{0};
  CHECK(m.predict_row(x, miss) == doctest::Approx(0.5).epsilon(1e-15));

  m.draws[0][0].nodes[0].value = 1.2816;
  CHECK(m.predict_row(x, miss) == doctest::Approx(0.900).epsilon(1e-3));
}

TEST_CASE("routing: numeric, missingness, and missing-direction rules") {
  FrozenTree t;
  FrozenNode root;
  root.kind = RuleKind::numeric;
  root.predictor = 0;
  root.cutpoint = 1.0;
  root.missing_direction = MissingDirection::right;
  root.left = 1;
  root.right = 2;
  t.nodes = {root, {}, {}};
  t.nodes[1].value = -1.0;
  t.nodes[2].value = +1.0;

  std::vector<double> x{0.5};
  std::vector<std::uint8_t> obs{0}, mis{1};
  CHECK(t.predict(x, obs) == -1.0);  // 0.5 <= 1 goes left
  x[0] = 1.0;
  CHECK(t.predict(x, obs) == -1.0);  // boundary goes left
  x[0] = 1.5;
  CHECK(t.predict(x, obs) == +1.0);
  CHECK(t.predict(x, mis) == +1.0);  // missing follows missing_direction

  t.nodes[0].kind = RuleKind::missingness;
  CHECK(t.predict(x, mis) == -1.0);  // missingness rule: missing goes left
  CHECK(t.predict(x, obs) == +1.0);
}

TEST_CASE("fit: degenerate labels and missing data without MIA are errors") {
  auto panel = matrix_panel({{1.0, 2.0, 3.0, 4.0}});
  auto view = dataset::make_view(panel);
  BartConfig cfg;
  cfg.burn_in = 1;
  cfg.post_burn = 1;
  try {
    fit(view, {1, 1, 1, 1}, cfg);
    FAIL("expected degenerate-outcome error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate_outcome);
  }

  auto holed = matrix_panel({{1.0, 2.0, 3.0, 4.0}}, {{0, 1, 0, 0}});
  auto holed_view = dataset::make_view(holed);
  cfg.mia_enabled = false;
  try {
    fit(holed_view, {0, 1, 0, 1}, cfg);
    FAIL("expected missing-data error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::missing_data);
  }
}

TEST_CASE("fit: seed determinism is bit-exact") {
  Rng rng(5);
  std::vector<int> labels;
  auto panel = two_signal_panel(200, rng, labels);
  auto view = dataset::make_view(panel);
  BartConfig cfg;
  cfg.q = 10;
  cfg.burn_in = 30;
  cfg.post_burn = 40;
  cfg.seed = 99;
  BartModel a = fit(view, labels, cfg);
  BartModel b = fit(view, labels, cfg);
  PredictionTable pa = predict(a, view);
  PredictionTable pb = predict(b, view);
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(std::memcmp(&pa.scores[i], &pb.scores[i], sizeof(double)) == 0);
  }
}

TEST_CASE("fit: learns a monotone signal and scores stay inside (0,1)") {
  Rng rng(31);
  std::vector<int> labels;
  auto panel = two_signal_panel(500, rng, labels);
  auto view = dataset::make_view(panel);
  BartConfig cfg;
  cfg.q = 25;
  cfg.burn_in = 100;
  cfg.post_burn = 150;
  cfg.seed = 7;
  BartModel m = fit(view, labels, cfg);
  PredictionTable pred = predict(m, view);
  for (double s : pred.scores) {
    CHECK(s > 0.0);
    CHECK(s < 1.0);
  }
  CHECK(metrics::roc_auc(pred.scores, labels) > 0.80);
}

TEST_CASE("fit under MIA: rows with any missingness pattern reach a leaf") {
  Rng rng(13);
  const int n = 300;
  std::vector<std::vector<double>> cols(4, std::vector<double>(n));
  std::vector<std::vector<std::uint8_t>> miss(4, std::vector<std::uint8_t>(n, 0));
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    double eta = 0.0;
    for (int j = 0; j < 4; ++j) {
      cols[j][i] = rng.normal();
      if (j < 2) eta += (j ? -1.1 : 1.3) * cols[j][i];
      miss[j][i] = rng.bernoulli(0.3);
    }
    labels[i] = rng.bernoulli(norm_cdf(eta));
  }
  auto panel = matrix_panel(cols, miss);
  auto view = dataset::make_view(panel);
  BartConfig cfg;
  cfg.q = 15;
  cfg.burn_in = 50;
  cfg.post_burn = 60;
  cfg.seed = 3;
  BartModel m = fit(view, labels, cfg);

  auto all_missing = matrix_panel({{0.0}, {0.0}, {0.0}, {0.0}},
                                  {{1}, {1}, {1}, {1}});
  PredictionTable p = predict(m, dataset::make_view(all_missing));
  REQUIRE(p.size() == 1);
  CHECK(std::isfinite(p.scores[0]));
  CHECK(p.scores[0] > 0.0);
  CHECK(p.scores[0] < 1.0);
}

TEST_CASE("predict: unknown predictor name is a schema error") {
  Rng rng(5);
  std::vector<int> labels;
  auto panel = two_signal_panel(120, rng, labels);
  auto view = dataset::make_view(panel);
  BartConfig cfg;
  cfg.q = 5;
  cfg.burn_in = 5;
  cfg.post_burn = 5;
  BartModel m = fit(view, labels, cfg);
  m.predictor_names[0] = "not_there";
  CHECK_THROWS_AS(predict(m, view), Error);
}

TEST_CASE("vip: constructed ensemble and normalization on a fitted model") {
  BartModel m;
  m.predictor_names = {"a", "b"};
  m.had_missing = {0, 0};
  FrozenTree three_on_a;
  // root(a) -> [split(a) -> leaf, leaf], [split(a) -> leaf, leaf]
  three_on_a.nodes.resize(7);
  three_on_a.nodes[0] = {RuleKind::numeric, 0, 0.0, MissingDirection::left, 0.0, 1, 4};
  three_on_a.nodes[1] = {RuleKind::numeric, 0, -1.0, MissingDirection::left, 0.0, 2, 3};
  three_on_a.nodes[4] = {RuleKind::numeric, 0, 1.0, MissingDirection::left, 0.0, 5, 6};
  FrozenTree one_on_b;
  one_on_b.nodes.resize(3);
  one_on_b.nodes[0] = {RuleKind::numeric, 1, 0.0, MissingDirection::left, 0.0, 1, 2};
  m.draws = {{three_on_a, one_on_b}};
  auto v = vip(m);
  CHECK(v[0] == doctest::Approx(0.75));
  CHECK(v[1] == doctest::Approx(0.25));

  // a missingness split counts with its predictor
  m.draws[0][1].nodes[0].kind = RuleKind::missingness;
  v = vip(m);
  CHECK(v[1] == doctest::Approx(0.25));

  // degenerate single-predictor ensemble
  m.draws = {{three_on_a}};
  v = vip(m);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == 0.0);

  Rng rng(9);
  std::vector<int> labels;
  auto panel = two_signal_panel(250, rng, labels);
  BartConfig cfg;
  cfg.q = 20;
  cfg.burn_in = 40;
  cfg.post_burn = 50;
  BartModel fitted = fit(dataset::make_view(panel), labels, cfg);
  auto fv = vip(fitted);
  CHECK(std::accumulate(fv.begin(), fv.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("prior recovery: leaf draws with no data match N(0, sigma_q^2)") {
  BartConfig cfg;
  cfg.q = 50;
  double sq2 = cfg.sigma_q() * cfg.sigma_q();
  Rng rng(55);
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    LeafPosterior p = leaf_posterior(0, 0.0, cfg.sigma2, sq2);
    double v = rng.normal(p.mean, std::sqrt(p.variance));
    sum += v;
    sum2 += v * v;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(1).scale(0.005));
  CHECK(sum2 / n == doctest::Approx(sq2).epsilon(0.02));
}

// ---------------------------------------------------------------------------
// Detailed-balance smoke test: with the likelihood switched off, the chain's
// stationary tree distribution must match the generative prior restricted to
// trees whose every leaf holds at least one of the 6 training rows.
// ---------------------------------------------------------------------------

namespace {

struct PriorSampler {
  const BartConfig& cfg;
  const std::vector<double>& pool;  // cutpoints of the single predictor
  const std::vector<double>& x;     // 6 data values
  Rng& rng;

  // returns depth, or -1 when a leaf went empty (resample)
  int sample_depth() {
    std::vector<double> rows = x;
    return grow(rows, 0);
  }

  int grow(std::vector<double>& rows, int depth) {
    if (rows.empty()) return -1;
    if (!rng.bernoulli(cfg.split_prior(depth))) return depth;
    double cut = pool[rng.below(pool.size())];
    std::vector<double> l, r;
    for (double v : rows) (v <= cut ? l : r).push_back(v);
    if (l.empty() || r.empty()) return -1;
    int dl = grow(l, depth + 1);
    if (dl < 0) return -1;
    int dr = grow(r, depth + 1);
    if (dr < 0) return -1;
    return std::max(dl, dr);
  }
};

}  // namespace

TEST_CASE("prior-only chain reproduces the depth prior's implied distribution") {
  std::vector<double> xs{1, 2, 3, 4, 5, 6};
  auto panel = matrix_panel({xs});
  auto view = dataset::make_view(panel);
  std::vector<int> labels{0, 1, 0, 1, 0, 1};

  BartConfig cfg;
  cfg.q = 1;
  cfg.mia_enabled = false;
  cfg.prior_only = true;
  cfg.burn_in = 2000;
  cfg.post_burn = 60000;
  cfg.seed = 4242;
  BartModel m = fit(view, labels, cfg);

  std::map<int, double> chain_hist;
  for (const auto& ensemble : m.draws) chain_hist[ensemble[0].depth()] += 1.0;
  for (auto& [d, c] : chain_hist) c /= double(m.draws.size());

  Rng rng(777);
  PriorSampler prior{cfg, xs, xs, rng};
  std::map<int, double> prior_hist;
  const int n_prior = 200000;
  int accepted = 0;
  while (accepted < n_prior) {
    int d = prior.sample_depth();
    if (d < 0) continue;
    prior_hist[d] += 1.0;
    ++accepted;
  }
  for (auto& [d, c] : prior_hist) c /= double(n_prior);

  double tv = 0.0;
  std::map<int, double> all;
  for (const auto& [d, c] : chain_hist) all[d] += 0;
  for (const auto& [d, c] : prior_hist) all[d] += 0;
  for (const auto& [d, unused] : all) {
    double a = chain_hist.count(d) ? chain_hist[d] : 0.0;
    double b = prior_hist.count(d) ? prior_hist[d] : 0.0;
    tv += std::abs(a - b);
  }
  tv *= 0.5;
  INFO("total variation distance: ", tv);
  CHECK(tv < 0.05);
}
