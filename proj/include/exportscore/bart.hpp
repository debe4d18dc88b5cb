#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "exportscore/common.hpp"
#include "exportscore/panel.hpp"
#include "exportscore/prediction.hpp"

namespace exportscore::bart {

struct ProposalProbs {
  double grow = 0.28;
  double prune = 0.28;
  double change = 0.44;
};

struct BartConfig {
  int q = 50;              // tree count
  double eta = 2.0;        // depth-penalty exponent
  double beta = 0.95;      // base split probability
  double d = 2.0;          // leaf-prior scale divisor
  double sigma2 = 1.0;     // error variance, fixed at 1 for the probit link
  int burn_in = 250;
  int post_burn = 1000;
  bool mia_enabled = true;
  std::uint64_t seed = 0;
  ProposalProbs proposal_probs;
  bool prior_only = false;  // test hook: structural moves target the prior alone

  double sigma_q() const { return 3.0 / (d * std::sqrt(double(q))); }
  double split_prior(int depth) const { return beta * std::pow(1.0 + depth, -eta); }
  void validate() const;
};

enum class RuleKind : std::uint8_t { leaf, numeric, missingness };
enum class MissingDirection : std::uint8_t { left, right };

// Numeric rules route x_j <= cut left, x_j > cut right, and a missing x_j to
// missing_direction; missingness rules route missing left, observed right.
struct FrozenNode {
  RuleKind kind = RuleKind::leaf;
  std::int32_t predictor = -1;
  double cutpoint = 0.0;
  MissingDirection missing_direction = MissingDirection::left;
  double value = 0.0;          // leaves
  std::int32_t left = -1, right = -1;
};

struct FrozenTree {
  std::vector<FrozenNode> nodes;  // preorder, root at index 0

  double predict(std::span<const double> x, std::span<const std::uint8_t> miss) const;
  int depth() const;
  template <typename Fn>
  void for_each_split(Fn&& fn) const {
    for (const auto& nd : nodes)
      if (nd.kind != RuleKind::leaf) fn(nd);
  }
};

struct BartModel {
  BartConfig config;
  std::vector<std::string> predictor_names;
  std::vector<std::uint8_t> had_missing;           // per predictor, on training data
  std::vector<std::vector<FrozenTree>> draws;      // post_burn ensembles of q trees
  std::vector<double> trace;                       // per retained draw: mean training fit

  // mean over retained draws of Phi(sum of tree outputs); strictly in (0,1)
  double predict_row(std::span<const double> x, std::span<const std::uint8_t> miss) const;
};

// Conjugate normal-normal update for a leaf holding n residuals with sum s:
// variance = 1/(n/sigma2 + 1/sigma_q2), mean = variance * s / sigma2.
struct LeafPosterior {
  double mean = 0.0;
  double variance = 0.0;
};
LeafPosterior leaf_posterior(std::size_t n, double residual_sum, double sigma2, double sigma_q2);

inline LeafPosterior leaf_posterior(std::span<const double> residuals, double sigma2,
                                    double sigma_q2) {
  double s = 0.0;
  for (double r : residuals) s += r;
  return leaf_posterior(residuals.size(), s, sigma2, sigma_q2);
}

// Albert-Chib latent draw: N(fit, 1) truncated to (0, inf) if y = 1 and to
// (-inf, 0) if y = 0, via inverse CDF on the truncated interval.
double draw_latent(int y, double fit, Rng& rng);

BartModel fit(const dataset::DataView& train, const std::vector<int>& labels,
              const BartConfig& config);

PredictionTable predict(const BartModel& model, const dataset::DataView& rows);

// Variable inclusion proportions: the fraction of all split rules across all
// retained draws that use each predictor (missingness rules count with their
// predictor). Sums to 1 for any ensemble containing at least one split.
std::vector<double> vip(const BartModel& model);

}  // namespace exportscore::bart
