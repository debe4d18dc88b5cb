#include "exportscore/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "exportscore/common.hpp"

namespace exportscore::synth {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) {
  p = std::min(std::max(p, 1e-6), 1.0 - 1e-6);
  return std::log(p / (1.0 - p));
}

std::string region_code(int r) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "R%02d", r + 1);
  return buf;
}

std::string industry_code(int s) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "C%02d", s + 10);
  return buf;
}

struct FirmState {
  double f_size = 0.0, f_prod = 0.0, f_fin = 0.0;
  int region = 0, industry = 0;
  int incorporation_year = 0;
  int flags[5] = {0, 0, 0, 0, 0};  // corporate control, patents, consolidated, in/out fdi
};

FirmState draw_firm(const GeneratorSpec& spec, Rng& rng) {
  FirmState f;
  f.f_size = rng.normal();
  f.f_prod = rng.normal();
  f.f_fin = rng.normal();
  f.region = int(rng.below(spec.n_regions));
  f.industry = int(rng.below(spec.n_industries));
  f.incorporation_year = spec.first_year - 1 - int(rng.below(39));
  f.flags[0] = rng.bernoulli(sigmoid(0.6 * f.f_size - 0.3));
  f.flags[1] = rng.bernoulli(sigmoid(0.9 * f.f_prod - 1.4));
  f.flags[2] = rng.bernoulli(sigmoid(0.8 * f.f_size - 1.6));
  f.flags[3] = rng.bernoulli(sigmoid(0.7 * f.f_size - 1.8));
  f.flags[4] = rng.bernoulli(sigmoid(0.8 * f.f_size + 0.3 * f.f_prod - 2.0));
  return f;
}

// export-propensity latent of the financial layout; region/industry carry
// mild deterministic shifts so the competitiveness diagnostics have structure
double financial_latent(const GeneratorSpec& spec, const FirmState& f, int year) {
  double c_size = 0.9, c_prod = 0.7, c_fin = 0.4, c_inter = 0.25;
  if (spec.coefficients.size() >= 4) {
    c_size = spec.coefficients[0];
    c_prod = spec.coefficients[1];
    c_fin = spec.coefficients[2];
    c_inter = spec.coefficients[3];
  }
  double reg_eff =
      spec.n_regions > 1 ? 0.5 * (double(f.region) / double(spec.n_regions - 1) - 0.5) : 0.0;
  double ind_eff = spec.n_industries > 1
                       ? 0.4 * (double(f.industry) / double(spec.n_industries - 1) - 0.5)
                       : 0.0;
  double year_eff = 0.02 * double(year - spec.first_year);
  return spec.intercept - 0.35 + c_size * f.f_size + c_prod * f.f_prod + c_fin * f.f_fin +
         c_inter * f.f_size * f.f_prod + 0.35 * f.flags[4] + 0.25 * f.flags[3] +
         0.15 * f.flags[1] + reg_eff + ind_eff + year_eff;
}

struct PanelBuilder {
  dataset::FirmPanel panel;
  std::vector<double> truth;

  explicit PanelBuilder(const dataset::PanelSchema& schema) {
    for (const auto& c : schema.columns) {
      if (c.role == dataset::ColumnRole::categorical) {
        panel.categorical.push_back({c.name, {}});
      } else {
        panel.numeric.push_back({c.name, c.role, {}, {}});
      }
    }
    panel.has_export_revenue = true;
    panel.has_total_revenue = true;
  }

  void push_value(const std::string& name, double v) {
    int i = panel.find_numeric(name);
    panel.numeric[i].values.push_back(v);
    panel.numeric[i].missing.push_back(0);
  }
  void push_cat(const std::string& name, const std::string& v) {
    panel.categorical[panel.find_categorical(name)].values.push_back(v);
  }
};

// one firm-year of financial accounts; all money columns are log-normal
// around the latent size/productivity/health factors
void emit_financial_row(PanelBuilder& b, const GeneratorSpec& spec, const FirmState& f,
                        const std::string& firm_id, int year, int label, double truth,
                        Rng& rng) {
  auto& p = b.panel;
  p.firm_ids.push_back(firm_id);
  p.years.push_back(year);
  b.truth.push_back(truth);

  const double ns = spec.noise_scale;
  auto z = [&] { return ns * rng.normal(); };

  double employees = std::max(1.0, std::round(std::exp(3.2 + 1.1 * f.f_size + 0.25 * z())));
  double total_assets = std::exp(13.0 + 1.4 * f.f_size + 0.35 * f.f_fin + 0.3 * z());
  double fixed_assets = 0.42 * total_assets * std::exp(0.25 * z());
  double intangibles = 0.06 * total_assets * std::exp(0.5 * z());
  double depreciation = 0.08 * fixed_assets * std::exp(0.2 * z());
  double value_added = std::exp(11.3 + 1.25 * f.f_size + 0.75 * f.f_prod + 0.3 * z());
  double ebitda = 0.28 * value_added * std::exp(0.3 * z());
  double ebit = ebitda - depreciation;
  double op_revenue = std::exp(13.6 + 1.35 * f.f_size + 0.5 * f.f_prod + 0.25 * z());
  double sales = op_revenue * std::exp(0.05 * z());
  double material_costs = 0.55 * op_revenue * std::exp(0.15 * z());
  double wage_costs = employees * std::exp(10.1 + 0.35 * f.f_prod + 0.15 * z());
  double cash_flow = ebitda * (0.65 + 0.25 * z());
  double cash = 0.12 * total_assets * std::exp(0.5 * z() + 0.3 * f.f_fin);
  double st_debt = 0.22 * total_assets * std::exp(0.35 * z() - 0.35 * f.f_fin);
  double lt_debt = 0.20 * total_assets * std::exp(0.40 * z() - 0.30 * f.f_fin);
  double interest_expenses = 0.045 * (st_debt + lt_debt) * std::exp(0.2 * z());
  double interest_paid = interest_expenses * std::exp(0.1 * z());
  double fin_expenses = interest_expenses * std::exp(0.15 * z()) + 0.001 * total_assets;
  double fin_revenues = 0.004 * total_assets * std::exp(0.6 * z());
  double current_assets = 0.38 * total_assets * std::exp(0.25 * z());
  double stocks = 0.32 * current_assets * std::exp(0.35 * z());
  double debtors = 0.30 * current_assets * std::exp(0.3 * z());
  double current_liabilities = 0.30 * total_assets * std::exp(0.3 * z() - 0.25 * f.f_fin);
  double creditors = 0.45 * current_liabilities * std::exp(0.25 * z());
  double working_capital = current_assets - current_liabilities;
  double shareholders = 0.38 * total_assets * std::exp(0.3 * z() + 0.4 * f.f_fin);
  double taxation = 0.26 * std::max(ebit, 0.0) * std::exp(0.2 * z());
  double tfp = std::exp(0.75 * f.f_prod + 0.25 * z());
  double markup = 1.0 + 0.35 * std::exp(0.3 * f.f_prod + 0.2 * z());

  b.push_value("fixed_assets", fixed_assets);
  b.push_value("depreciation", depreciation);
  b.push_value("value_added", value_added);
  b.push_value("number_of_employees", employees);
  b.push_value("ebit", ebit);
  b.push_value("ebitda", ebitda);
  b.push_value("interest_expenses", interest_expenses);
  b.push_value("interest_paid", interest_paid);
  b.push_value("cash_flow", cash_flow);
  b.push_value("total_assets", total_assets);
  b.push_value("shareholders_funds", shareholders);
  b.push_value("short_term_debt", st_debt);
  b.push_value("long_term_debt", lt_debt);
  b.push_value("current_assets", current_assets);
  b.push_value("stocks", stocks);
  b.push_value("current_liabilities", current_liabilities);
  b.push_value("costs_of_employees", wage_costs);
  b.push_value("financial_expenses", fin_expenses);
  b.push_value("operating_revenue", op_revenue);
  b.push_value("material_costs", material_costs);
  b.push_value("creditors", creditors);
  b.push_value("debtors", debtors);
  b.push_value("taxation", taxation);
  b.push_value("financial_revenues", fin_revenues);
  b.push_value("working_capital", working_capital);
  b.push_value("sales", sales);
  b.push_value("intangible_fixed_assets", intangibles);
  b.push_value("cash", cash);
  b.push_value("tfp", tfp);
  b.push_value("markup", markup);
  b.push_value("corporate_control", f.flags[0]);
  b.push_value("patents", f.flags[1]);
  b.push_value("consolidated_accounts", f.flags[2]);
  b.push_value("inward_fdi", f.flags[3]);
  b.push_value("outward_fdi", f.flags[4]);
  b.push_value("incorporation_year", f.incorporation_year);
  b.push_cat("region", region_code(f.region));
  b.push_cat("industry", industry_code(f.industry));

  double total_revenue = op_revenue * std::exp(0.02 * z());
  double export_revenue = 0.0;
  if (label == 1) {
    double share = sigmoid(0.8 * norm_quantile(truth) + 0.6 * rng.normal());
    export_revenue = std::max(total_revenue * share * 0.85, 1.0);
  }
  p.export_revenue.push_back(export_revenue);
  p.export_revenue_missing.push_back(0);
  p.total_revenue.push_back(total_revenue);
  p.total_revenue_missing.push_back(0);
}

// Missingness is a row-level filing event: an incomplete firm-year hides a
// random subset of its accounts. The event probability carries the signal
// (size-linked and latent-linked under mnar); which columns vanish is noise.
void apply_missingness(dataset::FirmPanel& panel, const GeneratorSpec& spec,
                       const std::vector<double>& size_factor,
                       const std::vector<double>& centered_latent, Rng& rng) {
  const auto& m = spec.missingness;
  if (m.rate <= 0.0) return;
  std::vector<dataset::NumericColumn*> maskable;
  for (auto& col : panel.numeric) {
    if (col.role == dataset::ColumnRole::numeric) maskable.push_back(&col);
  }
  if (maskable.empty()) return;
  const std::size_t n = panel.n_rows();
  for (std::size_t r = 0; r < n; ++r) {
    double prob = m.kind == MissingnessKind::mcar
                      ? m.rate
                      : mnar_missing_probability(m, size_factor[r], centered_latent[r]);
    if (rng.uniform() >= prob) continue;
    bool any = false;
    for (auto* col : maskable) {
      if (rng.bernoulli(0.35)) {
        col->values[r] = kNaN;
        col->missing[r] = 1;
        any = true;
      }
    }
    if (!any) {
      auto* col = maskable[rng.below(maskable.size())];
      col->values[r] = kNaN;
      col->missing[r] = 1;
    }
  }
}

}  // namespace

double mnar_missing_probability(const MissingnessSpec& m, double size_factor,
                                double centered_latent) {
  return sigmoid(logit(m.rate) - m.size_link * size_factor - m.informativeness * centered_latent);
}

void GeneratorSpec::validate() const {
  if (n_firms < 1 || n_years < 1) fail(ErrorKind::spec, "need n_firms >= 1 and n_years >= 1");
  if (layout == Layout::generic && p < 1) fail(ErrorKind::spec, "generic layout needs p >= 1");
  if (layout == Layout::financial && p != 52)
    fail(ErrorKind::spec, "financial layout has a fixed 52-predictor battery");
  if (layout == Layout::financial && !coefficients.empty() && coefficients.size() < 4)
    fail(ErrorKind::spec, "financial layout takes 4 coefficients (size, productivity, health, interaction)");
  if (missingness.rate < 0.0 || missingness.rate >= 1.0)
    fail(ErrorKind::spec, "missingness rate must lie in [0, 1)");
  if (n_regions < 1 || n_industries < 1) fail(ErrorKind::spec, "need >= 1 region and industry");
}

GeneratedPanel generate(const GeneratorSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, "synth-generate"));

  GeneratedPanel out;
  std::vector<double> size_factor, centered_latent;

  if (spec.layout == Layout::financial) {
    PanelBuilder b(dataset::financial_schema(false));
    std::vector<double> latents;
    for (int i = 0; i < spec.n_firms; ++i) {
      FirmState f = draw_firm(spec, rng);
      char id[24];
      std::snprintf(id, sizeof(id), "F%06d", i + 1);
      for (int t = 0; t < spec.n_years; ++t) {
        int year = spec.first_year + t;
        double eta = financial_latent(spec, f, year);
        double truth = norm_cdf(eta);
        int label = rng.bernoulli(truth);
        emit_financial_row(b, spec, f, id, year, label, truth, rng);
        size_factor.push_back(f.f_size);
        latents.push_back(eta);
      }
    }
    double mean_eta = std::accumulate(latents.begin(), latents.end(), 0.0) / latents.size();
    centered_latent.resize(latents.size());
    for (std::size_t r = 0; r < latents.size(); ++r) centered_latent[r] = latents[r] - mean_eta;
    apply_missingness(b.panel, spec, size_factor, centered_latent, rng);
    out.panel = dataset::derive_predictors(b.panel);
    out.true_probabilities = std::move(b.truth);
  } else {
    dataset::PanelSchema schema;
    for (int j = 0; j < spec.p; ++j)
      schema.columns.push_back({"x" + std::to_string(j + 1), dataset::ColumnRole::numeric});
    schema.columns.push_back({"region", dataset::ColumnRole::categorical});
    schema.columns.push_back({"industry", dataset::ColumnRole::categorical});
    PanelBuilder b(schema);

    std::vector<double> coef = spec.coefficients;
    if (coef.empty()) {
      coef.assign(spec.p, 0.0);
      for (int j = 0; j < std::min(spec.p, 5); ++j)
        coef[j] = (j % 2 ? -1.0 : 1.0) * (1.0 - 0.15 * j);
    }
    if (int(coef.size()) != spec.p)
      fail(ErrorKind::spec, "coefficient vector length must equal p");

    // three latent factors induce cross-correlated predictors
    std::vector<std::array<double, 3>> loadings(spec.p);
    for (int j = 0; j < spec.p; ++j)
      loadings[j] = {0.6 * rng.normal(), 0.4 * rng.normal(), 0.3 * rng.normal()};

    std::vector<double> latents;
    std::vector<double> x(spec.p);
    for (int i = 0; i < spec.n_firms; ++i) {
      double f1 = rng.normal(), f2 = rng.normal(), f3 = rng.normal();
      char id[24];
      std::snprintf(id, sizeof(id), "F%06d", i + 1);
      for (int t = 0; t < spec.n_years; ++t) {
        int year = spec.first_year + t;
        double eta = spec.intercept;
        for (int j = 0; j < spec.p; ++j) {
          x[j] = loadings[j][0] * f1 + loadings[j][1] * f2 + loadings[j][2] * f3 +
                 spec.noise_scale * 0.7 * rng.normal();
          eta += coef[j] * x[j];
        }
        eta += spec.interaction_weight * (spec.p >= 2 ? x[0] * x[1] : 0.0);
        double truth = norm_cdf(eta);
        int label = rng.bernoulli(truth);

        b.panel.firm_ids.push_back(id);
        b.panel.years.push_back(year);
        b.truth.push_back(truth);
        for (int j = 0; j < spec.p; ++j) b.push_value("x" + std::to_string(j + 1), x[j]);
        b.push_cat("region", region_code(i % spec.n_regions));
        b.push_cat("industry", industry_code(i % spec.n_industries));
        double total_revenue = std::exp(12.0 + 0.5 * f1 + 0.2 * rng.normal());
        double export_revenue = label ? total_revenue * (0.2 + 0.6 * rng.uniform()) : 0.0;
        b.panel.export_revenue.push_back(export_revenue);
        b.panel.export_revenue_missing.push_back(0);
        b.panel.total_revenue.push_back(total_revenue);
        b.panel.total_revenue_missing.push_back(0);

        size_factor.push_back(f1);
        latents.push_back(eta);
      }
    }
    double mean_eta = std::accumulate(latents.begin(), latents.end(), 0.0) / latents.size();
    centered_latent.resize(latents.size());
    for (std::size_t r = 0; r < latents.size(); ++r) centered_latent[r] = latents[r] - mean_eta;
    apply_missingness(b.panel, spec, size_factor, centered_latent, rng);
    out.panel = std::move(b.panel);
    out.true_probabilities = std::move(b.truth);
  }

  double prevalence = 0.0;
  for (std::size_t r = 0; r < out.panel.n_rows(); ++r)
    prevalence += out.panel.export_revenue[r] > 0.0;
  prevalence /= double(out.panel.n_rows());
  if (prevalence <= 0.05 || prevalence >= 0.95)
    fail(ErrorKind::spec, "implied export prevalence " + csv::format_double(prevalence, 4) +
                              " outside (0.05, 0.95)");
  return out;
}

// ---------------------------------------------------------------------------
// Pattern-controlled generation
// ---------------------------------------------------------------------------

namespace {

std::vector<int> largest_remainder_counts(const std::vector<double>& shares, int total) {
  std::vector<int> counts(shares.size());
  std::vector<std::pair<double, int>> remainders;
  int assigned = 0;
  for (std::size_t c = 0; c < shares.size(); ++c) {
    double exact = shares[c] * total;
    counts[c] = int(std::floor(exact + 1e-9));
    assigned += counts[c];
    remainders.push_back({exact - counts[c], int(c)});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int k = 0; k < total - assigned; ++k) ++counts[remainders[k % remainders.size()].second];
  return counts;
}

int count_zero_runs(const std::vector<int>& path) {
  int runs = 0;
  bool in_run = false;
  for (int v : path) {
    if (v == 0 && !in_run) {
      ++runs;
      in_run = true;
    } else if (v == 1) {
      in_run = false;
    }
  }
  return runs;
}

std::vector<int> discontinuous_path(int t, Rng& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<int> path(t);
    int ones = 0;
    for (int k = 0; k < t; ++k) {
      path[k] = rng.bernoulli(0.5);
      ones += path[k];
    }
    if (ones >= 1 && ones < t && count_zero_runs(path) >= 2) return path;
  }
  std::vector<int> path(t, 0);  // deterministic fallback: 1,0,1,0,...,0
  path[0] = 1;
  path[2] = 1;
  return path;
}

}  // namespace

GeneratedPanel pattern_generate(const GeneratorSpec& spec, const PatternMix& mix) {
  spec.validate();
  if (std::abs(mix.sum() - 1.0) > 1e-9)
    fail(ErrorKind::spec, "pattern mix proportions must sum to 1");
  const int t = spec.n_years;
  std::vector<double> shares = {mix.constant_exporter, mix.switching_exporter,
                                mix.switching_non_exporter, mix.discontinuous, mix.non_exporter};
  std::vector<int> counts = largest_remainder_counts(shares, spec.n_firms);
  if (counts[1] > 0 && t < 2)
    fail(ErrorKind::spec, "switching exporters need at least 2 years");
  if (counts[2] > 0 && t < 2)
    fail(ErrorKind::spec, "switching non-exporters need at least 2 years");
  if (counts[3] > 0 && t < 3)
    fail(ErrorKind::spec, "discontinuous exporters need at least 3 years");

  Rng rng(derive_seed(spec.seed, "synth-pattern"));
  PanelBuilder b(dataset::financial_schema(false));

  int firm_no = 0;
  auto emit_firm = [&](const std::vector<int>& path) {
    FirmState f = draw_firm(spec, rng);
    double ones = std::accumulate(path.begin(), path.end(), 0.0) / double(t);
    f.f_size += 1.2 * (ones - 0.5);  // exporters look bigger, as in the real panel
    f.f_prod += 0.8 * (ones - 0.5);
    char id[24];
    std::snprintf(id, sizeof(id), "F%06d", ++firm_no);
    for (int k = 0; k < t; ++k) {
      int year = spec.first_year + k;
      double truth = norm_cdf(financial_latent(spec, f, year));
      emit_financial_row(b, spec, f, id, year, path[k], truth, rng);
    }
  };

  for (int c = 0; c < counts[0]; ++c) emit_firm(std::vector<int>(t, 1));
  for (int c = 0; c < counts[1]; ++c) {
    std::vector<int> path(t, 0);
    int start = 1 + int(rng.below(t - 1));  // uniform over 2nd..last year
    for (int k = start; k < t; ++k) path[k] = 1;
    emit_firm(path);
  }
  for (int c = 0; c < counts[2]; ++c) {
    std::vector<int> path(t, 1);
    int stop = 1 + int(rng.below(t - 1));
    for (int k = stop; k < t; ++k) path[k] = 0;
    emit_firm(path);
  }
  for (int c = 0; c < counts[3]; ++c) emit_firm(discontinuous_path(t, rng));
  for (int c = 0; c < counts[4]; ++c) emit_firm(std::vector<int>(t, 0));

  GeneratedPanel out;
  out.panel = dataset::derive_predictors(b.panel);
  out.true_probabilities = std::move(b.truth);
  return out;
}

}  // namespace exportscore::synth
