#include "exportscore/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "exportscore/analytics.hpp"
#include "exportscore/bart.hpp"
#include "exportscore/baselines.hpp"
#include "exportscore/common.hpp"
#include "exportscore/metrics.hpp"
#include "exportscore/model_io.hpp"
#include "exportscore/scoring.hpp"
#include "exportscore/synth.hpp"

namespace exportscore::cli {

namespace {

namespace fs = std::filesystem;
using model_io::AnyModel;
using model_io::ModelKind;

std::string fmt(double v) { return csv::format_double(v); }

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

void ensure_parent_dir(const std::string& path) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void echo_resolved_config(const RunConfig& cfg) {
  std::string path = cfg.path("resolved_config");
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  out << cfg.resolved.dump(2) << "\n";
}

void write_table(const RunConfig& cfg, const std::string& path, const csv::Table& t) {
  ensure_parent_dir(path);
  csv::write_file(path, cfg.csv_comment_lines(), t);
}

dataset::FirmPanel load_panel(const RunConfig& cfg) {
  dataset::FirmPanel panel = dataset::ingest_csv(cfg.path("panel"), cfg.schema());
  if (cfg.derive()) panel = dataset::derive_predictors(panel);
  return panel;
}

std::vector<int> labels_for_rows(const dataset::LabelSet& labels,
                                 const std::vector<std::size_t>& rows,
                                 std::vector<std::size_t>* kept_rows) {
  std::vector<int> y;
  for (std::size_t r : rows) {
    if (labels.labels[r] < 0) continue;
    y.push_back(labels.labels[r]);
    if (kept_rows) kept_rows->push_back(r);
  }
  return y;
}

// fit the configured model kind on the given training rows
// restrict the model matrix to a named predictor subset (empty = all)
dataset::DataView apply_subset(dataset::DataView view, const std::vector<std::string>& subset) {
  if (subset.empty()) return view;
  std::vector<int> keep;
  for (const auto& name : subset) {
    int col = view.panel->find_numeric(name);
    bool in_view = false;
    for (int c : view.cols) in_view = in_view || c == col;
    if (col < 0 || !in_view)
      fail(ErrorKind::config, "predictor_subset names unknown predictor \"" + name + "\"");
    keep.push_back(col);
  }
  view.cols = std::move(keep);
  return view;
}

AnyModel fit_any(const RunConfig& cfg, const dataset::FirmPanel& panel,
                 const std::vector<std::size_t>& train_rows, const dataset::LabelSet& labels,
                 std::uint64_t fit_seed, std::ostream& log) {
  std::vector<std::size_t> rows;
  std::vector<int> y = labels_for_rows(labels, train_rows, &rows);

  const std::string kind = cfg.model_kind();
  const auto& mj = cfg.resolved.at("model");
  const auto subset = mj.at("predictor_subset").get<std::vector<std::string>>();
  AnyModel model;

  if (kind == "bart_mia" || kind == "bart") {
    bart::BartConfig bc;
    const auto& bj = mj.at("bart");
    bc.q = bj.at("q").get<int>();
    bc.eta = bj.at("eta").get<double>();
    bc.beta = bj.at("beta").get<double>();
    bc.d = bj.at("d").get<double>();
    bc.burn_in = bj.at("burn_in").get<int>();
    bc.post_burn = bj.at("post_burn").get<int>();
    bc.proposal_probs = {bj.at("grow").get<double>(), bj.at("prune").get<double>(),
                         bj.at("change").get<double>()};
    bc.mia_enabled = kind == "bart_mia";
    bc.seed = fit_seed;

    auto view = apply_subset(dataset::make_view(panel, rows), subset);
    if (!bc.mia_enabled && mj.at("complete_case").get<bool>()) {
      // opt-in complete-case protocol; without it the sampler's own
      // missing-data contract decides
      std::vector<std::size_t> cc_rows;
      std::vector<int> cc_y;
      for (std::size_t i = 0; i < view.n_rows(); ++i) {
        if (view.row_complete(i)) {
          cc_rows.push_back(rows[i]);
          cc_y.push_back(y[i]);
        }
      }
      log << "bart complete-case training rows: " << cc_rows.size() << " of " << rows.size()
          << "\n";
      view = apply_subset(dataset::make_view(panel, cc_rows), subset);
      y = std::move(cc_y);
    }
    model.kind = ModelKind::bart;
    model.bart = bart::fit(view, y, bc);
    return model;
  }

  auto view = apply_subset(dataset::make_view(panel, rows), subset);
  if (kind == "logit") {
    model.kind = ModelKind::logit;
    model.logit = baselines::fit_logit(view, y);
  } else if (kind == "lasso_logit") {
    baselines::LassoConfig lc;
    const auto& lj = mj.at("lasso");
    lc.grid_size = lj.at("grid_size").get<int>();
    lc.lambda_min_ratio = lj.at("lambda_min_ratio").get<double>();
    lc.ebic_gamma = lj.at("ebic_gamma").get<double>();
    model.kind = ModelKind::lasso_logit;
    model.lasso = baselines::fit_lasso_logit(view, y, lc);
  } else if (kind == "cart") {
    baselines::CartConfig cc;
    const auto& cj = mj.at("cart");
    cc.min_node = cj.at("min_node").get<int>();
    cc.prune = cj.at("prune").get<bool>();
    cc.cv_folds = cj.at("cv_folds").get<int>();
    model.kind = ModelKind::cart;
    model.cart = baselines::fit_cart(view, y, cc);
  } else if (kind == "forest") {
    baselines::ForestConfig fc;
    const auto& fj = mj.at("forest");
    fc.n_trees = fj.at("n_trees").get<int>();
    fc.mtry = fj.at("mtry").get<int>();
    fc.min_node = fj.at("min_node").get<int>();
    fc.bootstrap = fj.at("bootstrap").get<bool>();
    fc.seed = fit_seed;
    model.kind = ModelKind::forest;
    model.forest = baselines::fit_forest(view, y, fc);
  } else {
    fail(ErrorKind::config, "unknown model.kind \"" + kind + "\"");
  }
  return model;
}

// non-MIA models only score complete-case rows; mirror that for plain bart
PredictionTable safe_predict(const AnyModel& model, const dataset::FirmPanel& panel,
                             const std::vector<std::size_t>& rows) {
  if (model.kind == ModelKind::bart && !model.bart.config.mia_enabled) {
    auto view = dataset::make_view(panel, rows);
    std::vector<std::size_t> cc_rows;
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < view.n_rows(); ++i)
      (view.row_complete(i) ? (void)cc_rows.push_back(rows[i]) : (void)++dropped);
    PredictionTable out = bart::predict(model.bart, dataset::make_view(panel, cc_rows));
    out.n_dropped = dropped;
    return out;
  }
  return model.predict(dataset::make_view(panel, rows));
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

void cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  synth::GeneratorSpec spec = cfg.synth_spec();
  synth::GeneratedPanel gen =
      cfg.has_pattern_mix() ? synth::pattern_generate(spec, cfg.pattern_mix())
                            : synth::generate(spec);

  ensure_parent_dir(cfg.path("panel"));
  csv::write_file(cfg.path("panel"), cfg.csv_comment_lines(), dataset::to_table(gen.panel));

  csv::Table truth;
  truth.header = {"firm_id", "year", "p_true"};
  for (std::size_t r = 0; r < gen.panel.n_rows(); ++r) {
    truth.rows.push_back({gen.panel.firm_ids[r], std::to_string(gen.panel.years[r]),
                          fmt(gen.true_probabilities[r])});
  }
  write_table(cfg, cfg.path("truth"), truth);
  log << "simulated " << gen.panel.n_rows() << " firm-year rows -> " << cfg.path("panel") << "\n";
}

// ---------------------------------------------------------------------------
// train / predict
// ---------------------------------------------------------------------------

void cmd_train(const RunConfig& cfg, std::ostream& log) {
  dataset::FirmPanel panel = load_panel(cfg);
  dataset::LabelSet labels = dataset::label(panel, cfg.label_definition());
  dataset::Partition part =
      dataset::make_partition(panel, cfg.partition_fraction(), derive_seed(cfg.seed(), "split"));
  AnyModel model =
      fit_any(cfg, panel, part.train_rows(panel), labels, derive_seed(cfg.seed(), "fit"), log);
  ensure_parent_dir(cfg.path("model"));
  model_io::save_model(model, cfg.path("model"));
  log << "trained " << model.display_name() << " on " << part.train_firm_ids.size()
      << " firms -> " << cfg.path("model") << "\n";
}

void cmd_predict(const RunConfig& cfg, std::ostream& log) {
  dataset::FirmPanel panel = load_panel(cfg);
  AnyModel model = model_io::load_model(cfg.path("model"));
  std::vector<std::size_t> all(panel.n_rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  PredictionTable pred = safe_predict(model, panel, all);

  csv::Table t;
  t.header = {"firm_id", "year", "score"};
  for (std::size_t i = 0; i < pred.size(); ++i)
    t.rows.push_back({pred.firm_ids[i], std::to_string(pred.years[i]), fmt(pred.scores[i])});
  write_table(cfg, cfg.path("predictions"), t);
  log << "scored " << pred.size() << " rows (" << pred.n_dropped << " dropped) -> "
      << cfg.path("predictions") << "\n";
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct AlignedScores {
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<std::size_t> panel_rows;
};

AlignedScores align_with_labels(const PredictionTable& pred, const dataset::LabelSet& labels) {
  AlignedScores out;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    std::size_t r = pred.panel_rows[i];
    if (labels.labels[r] < 0) continue;
    out.scores.push_back(pred.scores[i]);
    out.labels.push_back(labels.labels[r]);
    out.panel_rows.push_back(r);
  }
  return out;
}

std::vector<std::string> report_header() {
  return {"model",  "group",   "fold", "specificity", "sensitivity",
          "balanced_accuracy", "roc_auc", "pr_auc", "n_obs"};
}

std::vector<std::string> report_row(const std::string& model, const std::string& group, int fold,
                                    const metrics::MetricsReport& r) {
  return {model,
          group,
          std::to_string(fold),
          fmt_opt(r.specificity),
          fmt_opt(r.sensitivity),
          fmt_opt(r.balanced_accuracy),
          fmt_opt(r.roc_auc),
          fmt_opt(r.pr_auc),
          std::to_string(r.n_obs)};
}

// group keys for the per-pattern accuracy views; pattern categories come with
// start/stop/count detail subgroups
std::vector<std::string> grouping_keys(const dataset::FirmPanel& panel,
                                       const dataset::LabelSet& labels,
                                       const std::vector<std::size_t>& rows,
                                       const std::string& group_by) {
  std::vector<std::string> keys(rows.size());
  if (group_by == "year") {
    for (std::size_t i = 0; i < rows.size(); ++i)
      keys[i] = std::to_string(panel.years[rows[i]]);
    return keys;
  }
  auto patterns = dataset::classify_patterns(panel, labels);
  std::map<std::string, const dataset::PatternClass*> by_firm;
  for (const auto& pc : patterns) by_firm[pc.firm_id] = &pc;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto* pc = by_firm.at(panel.firm_ids[rows[i]]);
    if (group_by == "bm") {
      keys[i] = dataset::to_string(pc->bm_class);
    } else {
      keys[i] = dataset::to_string(pc->category);
    }
  }
  return keys;
}

std::vector<std::string> detail_keys(const dataset::FirmPanel& panel,
                                     const dataset::LabelSet& labels,
                                     const std::vector<std::size_t>& rows) {
  auto patterns = dataset::classify_patterns(panel, labels);
  std::map<std::string, const dataset::PatternClass*> by_firm;
  for (const auto& pc : patterns) by_firm[pc.firm_id] = &pc;
  std::vector<std::string> keys(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto* pc = by_firm.at(panel.firm_ids[rows[i]]);
    switch (pc->category) {
      case dataset::PatternCategory::switching_exporter:
        keys[i] = "switching_exporter/start=" + std::to_string(pc->start_year);
        break;
      case dataset::PatternCategory::switching_non_exporter:
        keys[i] = "switching_non_exporter/stop=" + std::to_string(pc->stop_year);
        break;
      case dataset::PatternCategory::discontinuous:
        keys[i] = "discontinuous/export_years=" + std::to_string(pc->export_year_count);
        break;
      default:
        keys[i] = dataset::to_string(pc->category);
    }
  }
  return keys;
}

void cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
  dataset::FirmPanel panel = load_panel(cfg);
  dataset::LabelSet labels = dataset::label(panel, cfg.label_definition());
  const auto& ej = cfg.resolved.at("evaluate");
  const double threshold = ej.at("threshold").get<double>();
  const std::string group_by = ej.at("group_by").get<std::string>();
  const int folds = ej.at("folds").get<int>();

  csv::Table report;
  report.header = report_header();

  if (folds > 1) {
    // cross-validation protocol: retrain the configured model per split
    for (int f = 0; f < folds; ++f) {
      dataset::Partition part = dataset::make_partition(
          panel, cfg.partition_fraction(), derive_seed(cfg.seed(), "split-fold", f));
      AnyModel model = fit_any(cfg, panel, part.train_rows(panel), labels,
                               derive_seed(cfg.seed(), "fit-fold", f), log);
      PredictionTable pred = safe_predict(model, panel, part.test_rows(panel));
      AlignedScores a = align_with_labels(pred, labels);
      report.rows.push_back(
          report_row(model.display_name(), "all", f, metrics::evaluate(a.scores, a.labels, threshold)));
    }
    write_table(cfg, cfg.path("report"), report);
    log << "wrote " << cfg.path("report") << "\n";
    return;
  }

  dataset::Partition part =
      dataset::make_partition(panel, cfg.partition_fraction(), derive_seed(cfg.seed(), "split"));
  auto test_rows = part.test_rows(panel);

  struct Evaluated {
    std::string name;
    AlignedScores aligned;
  };
  std::vector<Evaluated> evaluated;
  for (const std::string& model_path : cfg.model_paths()) {
    AnyModel model = model_io::load_model(model_path);
    PredictionTable pred = safe_predict(model, panel, test_rows);
    AlignedScores a = align_with_labels(pred, labels);
    report.rows.push_back(
        report_row(model.display_name(), "all", 0, metrics::evaluate(a.scores, a.labels, threshold)));
    evaluated.push_back({model.display_name(), std::move(a)});
  }
  write_table(cfg, cfg.path("report"), report);
  log << "wrote " << cfg.path("report") << "\n";

  if (group_by != "none") {
    // patterns are timeline facts: classify them under the baseline
    // positive-revenue definition
    dataset::LabelSet timeline = labels;
    if (cfg.label_definition().kind != dataset::LabelDefinition::Kind::positive_revenue)
      timeline = dataset::label(panel, {});

    csv::Table grouped;
    grouped.header = report_header();
    for (const auto& ev : evaluated) {
      auto keys = grouping_keys(panel, timeline, ev.aligned.panel_rows, group_by);
      for (const auto& g :
           metrics::evaluate_by_group(ev.aligned.scores, ev.aligned.labels, keys, threshold))
        grouped.rows.push_back(report_row(ev.name, g.group, 0, g.report));
      if (group_by == "pattern") {
        auto dkeys = detail_keys(panel, timeline, ev.aligned.panel_rows);
        for (const auto& g :
             metrics::evaluate_by_group(ev.aligned.scores, ev.aligned.labels, dkeys, threshold)) {
          if (g.group.find('/') == std::string::npos) continue;  // already reported
          grouped.rows.push_back(report_row(ev.name, g.group, 0, g.report));
        }
      }
    }
    write_table(cfg, cfg.path("grouped_report"), grouped);
    log << "wrote " << cfg.path("grouped_report") << "\n";
  }

  if (evaluated.size() >= 2) {
    // rank correlations on the rows every model scored (the common
    // complete-case test bed)
    std::set<std::size_t> common(evaluated[0].aligned.panel_rows.begin(),
                                 evaluated[0].aligned.panel_rows.end());
    for (std::size_t m = 1; m < evaluated.size(); ++m) {
      std::set<std::size_t> rows_m(evaluated[m].aligned.panel_rows.begin(),
                                   evaluated[m].aligned.panel_rows.end());
      std::set<std::size_t> inter;
      std::set_intersection(common.begin(), common.end(), rows_m.begin(), rows_m.end(),
                            std::inserter(inter, inter.begin()));
      common = std::move(inter);
    }
    std::vector<std::vector<double>> aligned(evaluated.size());
    for (std::size_t m = 0; m < evaluated.size(); ++m) {
      std::map<std::size_t, double> by_row;
      for (std::size_t i = 0; i < evaluated[m].aligned.panel_rows.size(); ++i)
        by_row[evaluated[m].aligned.panel_rows[i]] = evaluated[m].aligned.scores[i];
      for (std::size_t r : common) aligned[m].push_back(by_row.at(r));
    }
    csv::Table sp;
    sp.header = {"model"};
    for (const auto& ev : evaluated) sp.header.push_back(ev.name);
    for (std::size_t a = 0; a < evaluated.size(); ++a) {
      std::vector<std::string> row{evaluated[a].name};
      for (std::size_t b = 0; b < evaluated.size(); ++b) {
        try {
          row.push_back(fmt(metrics::spearman(aligned[a], aligned[b])));
        } catch (const Error&) {
          row.push_back("");  // constant score vectors leave the cell blank
        }
      }
      sp.rows.push_back(std::move(row));
    }
    write_table(cfg, cfg.path("spearman"), sp);
    log << "wrote " << cfg.path("spearman") << " over " << common.size() << " common rows\n";
  }
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

void cmd_score(const RunConfig& cfg, std::ostream& log) {
  dataset::FirmPanel panel = load_panel(cfg);
  dataset::LabelSet labels = dataset::label(panel, cfg.label_definition());
  AnyModel model = model_io::load_model(cfg.path("model"));
  std::vector<std::size_t> all(panel.n_rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  PredictionTable pred = safe_predict(model, panel, all);
  scoring::ScoreTable table = scoring::score(pred);

  csv::Table t;
  t.header = {"firm_id", "year", "score", "distance", "risk_class"};
  for (std::size_t i = 0; i < table.size(); ++i) {
    t.rows.push_back({table.firm_ids[i], std::to_string(table.years[i]), fmt(table.scores[i]),
                      fmt(table.distances[i]), std::to_string(table.risk_classes[i])});
  }
  write_table(cfg, cfg.path("scores"), t);
  log << "wrote " << cfg.path("scores") << "\n";

  const auto& sj = cfg.resolved.at("score");
  scoring::PremiaOptions opt;
  opt.size_column = sj.at("size_column").get<std::string>();
  opt.include_exporters = sj.at("include_exporters").get<bool>();
  for (const auto& outcome : sj.at("outcomes")) {
    opt.outcome_column = outcome.get<std::string>();
    scoring::PremiaModel pm = scoring::fit_premia(panel, table, opt, &labels.labels);
    scoring::PremiaTable pt = scoring::premia_table(pm);

    csv::Table pc;
    pc.header = {"risk_class", "theta", "std_error", "level_euro", "gap_vs_reference"};
    for (const auto& row : pt.rows) {
      double se = row.risk_class == pm.reference_class
                      ? 0.0
                      : pm.risk_effects.at(row.risk_class).std_error;
      pc.rows.push_back({std::to_string(row.risk_class), fmt(row.theta), fmt(se),
                         fmt(row.level), fmt(row.gap_vs_class1)});
    }
    std::string base = cfg.path("premia_prefix") + "_" + opt.outcome_column;
    write_table(cfg, base + ".csv", pc);

    nlohmann::json pj;
    pj["outcome"] = pm.outcome;
    pj["intercept"] = {{"estimate", pm.intercept}, {"std_error", pm.intercept_se}};
    pj["reference_class"] = pm.reference_class;
    pj["size"] = {{"estimate", pm.size_slope.estimate}, {"std_error", pm.size_slope.std_error}};
    nlohmann::json risks = nlohmann::json::object();
    for (const auto& [rc, coef] : pm.risk_effects)
      risks[std::to_string(rc)] = {{"estimate", coef.estimate}, {"std_error", coef.std_error}};
    pj["risk_effects"] = risks;
    auto block = [&](const std::vector<scoring::Coefficient>& coefs) {
      nlohmann::json out = nlohmann::json::object();
      for (const auto& c : coefs)
        out[c.name] = {{"estimate", c.estimate}, {"std_error", c.std_error}};
      return out;
    };
    pj["year_effects"] = block(pm.year_effects);
    pj["industry_effects"] = block(pm.industry_effects);
    pj["region_effects"] = block(pm.region_effects);
    pj["n_obs"] = pm.n_obs;
    pj["n_clusters"] = pm.n_clusters;
    pj["n_dropped"] = pm.n_dropped;
    pj["r_squared"] = pm.r_squared;
    ensure_parent_dir(base + ".json");
    std::ofstream pout(base + ".json", std::ios::binary);
    if (!pout) fail(ErrorKind::io, "cannot write " + base + ".json");
    pout << pj.dump(2) << "\n";
    log << "wrote " << base << ".{csv,json}\n";
  }
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

void cmd_analyze(const RunConfig& cfg, std::ostream& log) {
  dataset::FirmPanel panel = load_panel(cfg);
  dataset::LabelSet labels = dataset::label(panel, {});  // exporter status
  AnyModel model = model_io::load_model(cfg.path("model"));
  std::vector<std::size_t> all(panel.n_rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  PredictionTable pred = safe_predict(model, panel, all);
  scoring::ScoreTable table = scoring::score(pred);

  const auto& aj = cfg.resolved.at("analyze");
  auto firms = analytics::collapse_to_firms(panel, table, labels.labels,
                                            aj.at("collapse_latest").get<bool>());

  analytics::LocationQuotients lq = analytics::location_quotients(
      firms, aj.at("bootstrap_reps").get<int>(), derive_seed(cfg.seed(), "lq"));
  csv::Table lt;
  lt.header = {"region", "n_potential", "n_firms", "lq", "ci_low", "ci_high", "significant"};
  for (const auto& r : lq.regions) {
    lt.rows.push_back({r.region, std::to_string(r.n_potential), std::to_string(r.n_firms),
                       fmt_opt(r.lq), fmt_opt(r.ci_low), fmt_opt(r.ci_high),
                       r.significant ? "1" : "0"});
  }
  write_table(cfg, cfg.path("lq"), lt);
  log << "wrote " << cfg.path("lq") << "\n";

  csv::Table gt;
  gt.header = {"group_key", "group",  "count",
               "min",       "q1",     "median",
               "q3",        "max",    "share_of_national_potential",
               "within_group_potential_share"};
  auto emit_groups = [&](analytics::GroupKey key, const char* key_name) {
    for (const auto& g : analytics::aggregate_scores(firms, key)) {
      gt.rows.push_back({key_name, g.group, std::to_string(g.count), fmt(g.min), fmt(g.q1),
                         fmt(g.median), fmt(g.q3), fmt(g.max),
                         fmt(g.share_of_national_potential),
                         fmt(g.within_group_potential_share)});
    }
  };
  emit_groups(analytics::GroupKey::region, "region");
  emit_groups(analytics::GroupKey::industry, "industry");
  write_table(cfg, cfg.path("group_stats"), gt);
  log << "wrote " << cfg.path("group_stats") << "\n";

  int reps = aj.at("vip_replications").get<int>();
  if (reps >= 2) {
    if (model.kind != ModelKind::bart)
      fail(ErrorKind::config, "vip replication needs a bart model");
    dataset::LabelSet run_labels = dataset::label(panel, cfg.label_definition());
    dataset::Partition part =
        dataset::make_partition(panel, cfg.partition_fraction(), derive_seed(cfg.seed(), "split"));
    std::vector<std::size_t> rows;
    std::vector<int> y = labels_for_rows(run_labels, part.train_rows(panel), &rows);
    auto view = dataset::make_view(panel, rows);

    bart::BartConfig bc = model.bart.config;
    bc.burn_in = aj.at("vip_burn_in").get<int>();
    bc.post_burn = aj.at("vip_post_burn").get<int>();
    std::vector<std::uint64_t> seeds;
    for (int r = 0; r < reps; ++r) seeds.push_back(derive_seed(cfg.seed(), "vip", r));
    analytics::VipSummary vip = analytics::vip_replicate(view, y, bc, seeds);

    csv::Table vt;
    vt.header = {"predictor", "mean_inclusion", "sd", "above_1pct"};
    for (std::size_t j = 0; j < vip.predictor_names.size(); ++j) {
      vt.rows.push_back({vip.predictor_names[j], fmt(vip.mean[j]), fmt(vip.sd[j]),
                         vip.mean[j] >= 0.01 ? "1" : "0"});
    }
    write_table(cfg, cfg.path("vip"), vt);
    log << "wrote " << cfg.path("vip") << " (" << reps << " replications)\n";
  }
}

}  // namespace

int run(const std::string& subcommand, const RunConfig& cfg, std::ostream& log,
        std::ostream& err) {
  try {
    set_thread_cap(cfg.threads());
    fs::create_directories(cfg.output_dir());
    echo_resolved_config(cfg);
    if (subcommand == "simulate") cmd_simulate(cfg, log);
    else if (subcommand == "train") cmd_train(cfg, log);
    else if (subcommand == "predict") cmd_predict(cfg, log);
    else if (subcommand == "evaluate") cmd_evaluate(cfg, log);
    else if (subcommand == "score") cmd_score(cfg, log);
    else if (subcommand == "analyze") cmd_analyze(cfg, log);
    else {
      err << "error: kind=config msg=\"unknown subcommand " << subcommand << "\"\n";
      return 2;
    }
    return 0;
  } catch (const Error& e) {
    err << "error: kind=" << to_string(e.kind()) << " msg=\"" << e.what() << "\"\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: kind=internal msg=\"" << e.what() << "\"\n";
    return 1;
  }
}

}  // namespace exportscore::cli
