#include "exportscore/runconfig.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "exportscore/common.hpp"

namespace exportscore::cli {

using json = nlohmann::json;

json default_config() {
  return json{
      {"seed", 42},
      {"threads", 0},  // 0 = hardware concurrency (EXPORTSCORE_THREADS caps it)
      {"emit_timestamp", true},
      {"output_dir", "out"},
      {"paths",
       {{"panel", ""},
        {"truth", ""},
        {"model", ""},
        {"models", json::array()},
        {"predictions", ""},
        {"report", ""},
        {"grouped_report", ""},
        {"spearman", ""},
        {"scores", ""},
        {"premia_prefix", ""},
        {"lq", ""},
        {"group_stats", ""},
        {"vip", ""},
        {"resolved_config", ""}}},
      {"schema",
       {{"mode", "financial"},  // financial | financial_base | generic | declared
        {"p", 52},
        {"numeric", json::array()},
        {"flags", json::array()},
        {"categorical", json::array()},
        {"auxiliary", json::array()},
        {"expect_export_revenue", true},
        {"expect_total_revenue", true}}},
      {"derive", false},
      {"synth",
       {{"layout", "financial"},
        {"n_firms", 1000},
        {"first_year", 2010},
        {"n_years", 8},
        {"p", 52},
        {"coefficients", json::array()},
        {"intercept", 0.0},
        {"interaction_weight", 0.0},
        {"missingness",
         {{"kind", "mnar"}, {"rate", 0.25}, {"informativeness", 3.0}, {"size_link", 1.0}}},
        {"noise_scale", 1.0},
        {"n_regions", 12},
        {"n_industries", 10},
        {"pattern_mix", nullptr}}},
      {"label", {{"definition", "positive_revenue"}, {"percentile", 5.0}, {"year", 0}}},
      {"partition", {{"fraction", 0.8}}},
      {"model",
       {{"kind", "bart_mia"},
        {"predictor_subset", json::array()},
        {"complete_case", false},
        {"bart",
         {{"q", 50},
          {"eta", 2.0},
          {"beta", 0.95},
          {"d", 2.0},
          {"burn_in", 250},
          {"post_burn", 1000},
          {"grow", 0.28},
          {"prune", 0.28},
          {"change", 0.44}}},
        {"lasso", {{"grid_size", 100}, {"lambda_min_ratio", 1e-4}, {"ebic_gamma", 0.5}}},
        {"cart", {{"min_node", 5}, {"prune", true}, {"cv_folds", 5}}},
        {"forest", {{"n_trees", 500}, {"mtry", 0}, {"min_node", 1}, {"bootstrap", true}}}}},
      {"evaluate", {{"threshold", 0.5}, {"group_by", "none"}, {"folds", 1}}},
      {"score",
       {{"outcomes", json::array({"cash", "fixed_assets"})},
        {"size_column", "number_of_employees"},
        {"include_exporters", true}}},
      {"analyze",
       {{"bootstrap_reps", 1000},
        {"vip_replications", 5},
        {"vip_burn_in", 150},
        {"vip_post_burn", 300},
        {"collapse_latest", true}}},
  };
}

namespace {

void check_known_keys(const json& user, const json& defaults, const std::string& prefix) {
  if (!user.is_object()) fail(ErrorKind::config, "config node " + prefix + " must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!defaults.contains(it.key())) fail(ErrorKind::config, "unknown config key \"" + path + "\"");
    const json& dv = defaults.at(it.key());
    if (dv.is_object()) {
      if (!it.value().is_object())
        fail(ErrorKind::config, "config key \"" + path + "\" must be an object");
      check_known_keys(it.value(), dv, path);
    }
  }
}

void deep_merge(json& base, const json& user) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    if (it.value().is_object() && base.contains(it.key()) && base.at(it.key()).is_object()) {
      deep_merge(base.at(it.key()), it.value());
    } else {
      base[it.key()] = it.value();
    }
  }
}

void apply_override(json& root, const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos)
    fail(ErrorKind::config, "override \"" + spec + "\" is not key.path=value");
  std::string keypath = spec.substr(0, eq);
  std::string value = spec.substr(eq + 1);

  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::exception&) {
    parsed = value;  // bare strings allowed
  }

  json* node = &root;
  std::size_t pos = 0;
  for (;;) {
    auto dot = keypath.find('.', pos);
    std::string key = keypath.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (key.empty()) fail(ErrorKind::config, "override key \"" + keypath + "\" has an empty part");
    if (dot == std::string::npos) {
      (*node)[key] = parsed;
      break;
    }
    node = &(*node)[key];
    pos = dot + 1;
  }
}

std::string get_string(const json& j, const char* key) { return j.at(key).get<std::string>(); }

}  // namespace

RunConfig resolve_config(const json& user, const std::vector<std::string>& overrides) {
  json with_overrides = user;
  for (const auto& o : overrides) apply_override(with_overrides, o);

  json defaults = default_config();
  check_known_keys(with_overrides, defaults, "");
  deep_merge(defaults, with_overrides);

  // default artifact paths live under output_dir
  std::string dir = defaults.at("output_dir").get<std::string>();
  auto fill = [&](const char* key, const std::string& name) {
    json& p = defaults.at("paths").at(key);
    if (p.get<std::string>().empty()) p = dir + "/" + name;
  };
  fill("panel", "panel.csv");
  fill("truth", "truth.csv");
  fill("model", "model.json");
  fill("predictions", "predictions.csv");
  fill("report", "report.csv");
  fill("grouped_report", "report_grouped.csv");
  fill("spearman", "spearman.csv");
  fill("scores", "scores.csv");
  fill("premia_prefix", "premia");
  fill("lq", "lq.csv");
  fill("group_stats", "group_stats.csv");
  fill("vip", "vip.csv");
  fill("resolved_config", "resolved_config.json");

  RunConfig cfg;
  cfg.resolved = std::move(defaults);
  return cfg;
}

RunConfig load_config(const std::string& config_path, const std::vector<std::string>& overrides) {
  json user = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) fail(ErrorKind::io, "cannot open config " + config_path);
    try {
      in >> user;
    } catch (const json::exception& e) {
      fail(ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
    }
  }
  return resolve_config(user, overrides);
}

std::uint64_t RunConfig::seed() const { return resolved.at("seed").get<std::uint64_t>(); }
int RunConfig::threads() const { return resolved.at("threads").get<int>(); }
bool RunConfig::emit_timestamp() const { return resolved.at("emit_timestamp").get<bool>(); }
std::string RunConfig::output_dir() const { return resolved.at("output_dir").get<std::string>(); }

std::string RunConfig::path(const std::string& name) const {
  return resolved.at("paths").at(name).get<std::string>();
}

dataset::PanelSchema RunConfig::schema() const {
  const json& s = resolved.at("schema");
  std::string mode = get_string(s, "mode");
  if (mode == "financial") return dataset::financial_schema(true);
  if (mode == "financial_base") return dataset::financial_schema(false);
  if (mode == "generic") {
    dataset::PanelSchema out;
    int p = s.at("p").get<int>();
    for (int j = 0; j < p; ++j)
      out.columns.push_back({"x" + std::to_string(j + 1), dataset::ColumnRole::numeric});
    out.columns.push_back({"region", dataset::ColumnRole::categorical});
    out.columns.push_back({"industry", dataset::ColumnRole::categorical});
    return out;
  }
  if (mode != "declared")
    fail(ErrorKind::config, "schema.mode must be financial, financial_base, generic or declared");
  dataset::PanelSchema out;
  for (const auto& n : s.at("numeric"))
    out.columns.push_back({n.get<std::string>(), dataset::ColumnRole::numeric});
  for (const auto& n : s.at("flags"))
    out.columns.push_back({n.get<std::string>(), dataset::ColumnRole::flag});
  for (const auto& n : s.at("categorical"))
    out.columns.push_back({n.get<std::string>(), dataset::ColumnRole::categorical});
  for (const auto& n : s.at("auxiliary"))
    out.columns.push_back({n.get<std::string>(), dataset::ColumnRole::auxiliary});
  out.expect_export_revenue = s.at("expect_export_revenue").get<bool>();
  out.expect_total_revenue = s.at("expect_total_revenue").get<bool>();
  return out;
}

bool RunConfig::derive() const { return resolved.at("derive").get<bool>(); }

synth::GeneratorSpec RunConfig::synth_spec() const {
  const json& s = resolved.at("synth");
  synth::GeneratorSpec spec;
  std::string layout = get_string(s, "layout");
  if (layout == "financial") spec.layout = synth::Layout::financial;
  else if (layout == "generic") spec.layout = synth::Layout::generic;
  else fail(ErrorKind::config, "synth.layout must be financial or generic");
  spec.n_firms = s.at("n_firms").get<int>();
  spec.first_year = s.at("first_year").get<int>();
  spec.n_years = s.at("n_years").get<int>();
  spec.p = s.at("p").get<int>();
  spec.coefficients = s.at("coefficients").get<std::vector<double>>();
  spec.intercept = s.at("intercept").get<double>();
  spec.interaction_weight = s.at("interaction_weight").get<double>();
  const json& m = s.at("missingness");
  std::string kind = get_string(m, "kind");
  if (kind == "mcar") spec.missingness.kind = synth::MissingnessKind::mcar;
  else if (kind == "mnar") spec.missingness.kind = synth::MissingnessKind::mnar;
  else fail(ErrorKind::config, "synth.missingness.kind must be mcar or mnar");
  spec.missingness.rate = m.at("rate").get<double>();
  spec.missingness.informativeness = m.at("informativeness").get<double>();
  spec.missingness.size_link = m.at("size_link").get<double>();
  spec.noise_scale = s.at("noise_scale").get<double>();
  spec.n_regions = s.at("n_regions").get<int>();
  spec.n_industries = s.at("n_industries").get<int>();
  spec.seed = derive_seed(seed(), "synth");
  return spec;
}

bool RunConfig::has_pattern_mix() const {
  return !resolved.at("synth").at("pattern_mix").is_null();
}

synth::PatternMix RunConfig::pattern_mix() const {
  const json& m = resolved.at("synth").at("pattern_mix");
  synth::PatternMix mix;
  auto get = [&](const char* key) { return m.contains(key) ? m.at(key).get<double>() : 0.0; };
  mix.constant_exporter = get("constant_exporter");
  mix.non_exporter = get("non_exporter");
  mix.switching_exporter = get("switching_exporter");
  mix.switching_non_exporter = get("switching_non_exporter");
  mix.discontinuous = get("discontinuous");
  return mix;
}

dataset::LabelDefinition RunConfig::label_definition() const {
  const json& l = resolved.at("label");
  dataset::LabelDefinition def;
  std::string kind = get_string(l, "definition");
  if (kind == "positive_revenue") def.kind = dataset::LabelDefinition::Kind::positive_revenue;
  else if (kind == "share_threshold") def.kind = dataset::LabelDefinition::Kind::share_threshold;
  else if (kind == "annual") def.kind = dataset::LabelDefinition::Kind::annual;
  else
    fail(ErrorKind::config,
         "label.definition must be positive_revenue, share_threshold or annual");
  def.percentile = l.at("percentile").get<double>();
  def.year = l.at("year").get<int>();
  return def;
}

double RunConfig::partition_fraction() const {
  return resolved.at("partition").at("fraction").get<double>();
}

std::string RunConfig::model_kind() const {
  return resolved.at("model").at("kind").get<std::string>();
}

std::vector<std::string> RunConfig::model_paths() const {
  auto models = resolved.at("paths").at("models").get<std::vector<std::string>>();
  if (models.empty()) models.push_back(path("model"));
  return models;
}

std::string RunConfig::config_hash() const {
  // provenance covers the scientific configuration; artifact locations,
  // thread caps, and the timestamp switch do not change what is computed
  json scientific = resolved;
  scientific.erase("paths");
  scientific.erase("output_dir");
  scientific.erase("threads");
  scientific.erase("emit_timestamp");
  std::uint64_t h = fnv1a64(scientific.dump());
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> RunConfig::csv_comment_lines() const {
  std::vector<std::string> lines;
  lines.push_back(std::string("exportscore ") + kVersion + " config=" + config_hash());
  if (emit_timestamp()) {
    auto now = std::chrono::system_clock::now();
    std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    lines.push_back(std::string("generated ") + buf);
  }
  return lines;
}

}  // namespace exportscore::cli
