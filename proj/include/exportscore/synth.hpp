#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exportscore/panel.hpp"

namespace exportscore::synth {

enum class Layout {
  financial,  // the 52-predictor financial-accounts panel (ratios included)
  generic,    // plain x1..xp columns with a linear probit truth
};

enum class MissingnessKind { mcar, mnar };

struct MissingnessSpec {
  MissingnessKind kind = MissingnessKind::mcar;
  double rate = 0.0;            // average missing probability per maskable cell
  double informativeness = 3.0; // mnar: weight of the export latent in the mask
  double size_link = 1.0;       // mnar: weight of firm size; rate falls as size grows
};

struct GeneratorSpec {
  Layout layout = Layout::financial;
  int n_firms = 1000;
  int first_year = 2010;
  int n_years = 8;
  int p = 52;                        // generic layout only; financial is fixed
  std::vector<double> coefficients;  // probit scale; empty = layout default
  double intercept = 0.0;
  double interaction_weight = 0.0;   // generic: weight on x1*x2
  MissingnessSpec missingness;
  double noise_scale = 1.0;
  int n_regions = 12;
  int n_industries = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GeneratedPanel {
  dataset::FirmPanel panel;                // derived predictors included
  std::vector<double> true_probabilities;  // per row, P(Y=1 | latent state)
};

GeneratedPanel generate(const GeneratorSpec& spec);

// Per-row mask probability of the mnar regime; exposed so the monotonicity
// properties can be checked directly.
double mnar_missing_probability(const MissingnessSpec& m, double size_factor,
                                double centered_latent);

// Requested shares of the five exporting-pattern categories.
struct PatternMix {
  double constant_exporter = 0.0;
  double non_exporter = 0.0;
  double switching_exporter = 0.0;
  double switching_non_exporter = 0.0;
  double discontinuous = 0.0;

  double sum() const {
    return constant_exporter + non_exporter + switching_exporter + switching_non_exporter +
           discontinuous;
  }
};

// Exact allocation: category counts are the largest-remainder rounding of
// mix * n_firms, and every generated label path classifies back into its
// requested category.
GeneratedPanel pattern_generate(const GeneratorSpec& spec, const PatternMix& mix);

}  // namespace exportscore::synth
