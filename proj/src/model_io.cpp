#include "exportscore/model_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "exportscore/common.hpp"

namespace exportscore::model_io {

using json = nlohmann::json;

namespace {
constexpr int kFormatVersion = 1;
constexpr const char* kFormatName = "exportscore-model";
}  // namespace

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::bart: return "bart";
    case ModelKind::logit: return "logit";
    case ModelKind::lasso_logit: return "lasso_logit";
    case ModelKind::cart: return "cart";
    case ModelKind::forest: return "forest";
  }
  return "?";
}

std::string AnyModel::display_name() const {
  if (kind == ModelKind::bart) return bart.config.mia_enabled ? "bart_mia" : "bart";
  return to_string(kind);
}

PredictionTable AnyModel::predict(const dataset::DataView& rows) const {
  switch (kind) {
    case ModelKind::bart: return bart::predict(bart, rows);
    case ModelKind::logit: return baselines::predict(logit, rows);
    case ModelKind::lasso_logit: return baselines::predict(lasso.model, rows);
    case ModelKind::cart: return baselines::predict(cart, rows);
    case ModelKind::forest: return baselines::predict(forest, rows);
  }
  fail(ErrorKind::config, "unknown model kind");
}

// ---------------------------------------------------------------------------
// bart
// ---------------------------------------------------------------------------

namespace {

json bart_config_to_json(const bart::BartConfig& c) {
  return json{{"q", c.q},
              {"eta", c.eta},
              {"beta", c.beta},
              {"d", c.d},
              {"sigma2", c.sigma2},
              {"burn_in", c.burn_in},
              {"post_burn", c.post_burn},
              {"mia_enabled", c.mia_enabled},
              {"seed", c.seed},
              {"proposal_probs",
               {{"grow", c.proposal_probs.grow},
                {"prune", c.proposal_probs.prune},
                {"change", c.proposal_probs.change}}}};
}

bart::BartConfig bart_config_from_json(const json& j) {
  bart::BartConfig c;
  c.q = j.at("q").get<int>();
  c.eta = j.at("eta").get<double>();
  c.beta = j.at("beta").get<double>();
  c.d = j.at("d").get<double>();
  c.sigma2 = j.at("sigma2").get<double>();
  c.burn_in = j.at("burn_in").get<int>();
  c.post_burn = j.at("post_burn").get<int>();
  c.mia_enabled = j.at("mia_enabled").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  const auto& p = j.at("proposal_probs");
  c.proposal_probs.grow = p.at("grow").get<double>();
  c.proposal_probs.prune = p.at("prune").get<double>();
  c.proposal_probs.change = p.at("change").get<double>();
  return c;
}

// node as a compact 7-tuple: [kind, predictor, cutpoint, direction, value, left, right]
json tree_to_json(const bart::FrozenTree& t) {
  json nodes = json::array();
  for (const auto& nd : t.nodes) {
    nodes.push_back(json::array({int(nd.kind), nd.predictor, nd.cutpoint,
                                 int(nd.missing_direction), nd.value, nd.left, nd.right}));
  }
  return nodes;
}

bart::FrozenTree tree_from_json(const json& j) {
  bart::FrozenTree t;
  for (const auto& row : j) {
    bart::FrozenNode nd;
    nd.kind = bart::RuleKind(row.at(0).get<int>());
    nd.predictor = row.at(1).get<std::int32_t>();
    nd.cutpoint = row.at(2).get<double>();
    nd.missing_direction = bart::MissingDirection(row.at(3).get<int>());
    nd.value = row.at(4).get<double>();
    nd.left = row.at(5).get<std::int32_t>();
    nd.right = row.at(6).get<std::int32_t>();
    t.nodes.push_back(nd);
  }
  return t;
}

json diagnostics_to_json(const baselines::FitDiagnostics& d) {
  return json{{"converged", d.converged},
              {"iterations", d.iterations},
              {"separation_warning", d.separation_warning},
              {"n_dropped", d.n_dropped},
              {"n_used", d.n_used}};
}

baselines::FitDiagnostics diagnostics_from_json(const json& j) {
  baselines::FitDiagnostics d;
  d.converged = j.at("converged").get<bool>();
  d.iterations = j.at("iterations").get<int>();
  d.separation_warning = j.at("separation_warning").get<bool>();
  d.n_dropped = j.at("n_dropped").get<std::size_t>();
  d.n_used = j.at("n_used").get<std::size_t>();
  return d;
}

json logit_to_json(const baselines::LogitModel& m) {
  return json{{"predictors", m.predictor_names},
              {"intercept", m.intercept},
              {"coefficients", m.coefficients},
              {"diagnostics", diagnostics_to_json(m.diagnostics)}};
}

baselines::LogitModel logit_from_json(const json& j) {
  baselines::LogitModel m;
  m.predictor_names = j.at("predictors").get<std::vector<std::string>>();
  m.intercept = j.at("intercept").get<double>();
  m.coefficients = j.at("coefficients").get<std::vector<double>>();
  m.diagnostics = diagnostics_from_json(j.at("diagnostics"));
  return m;
}

json tree_nodes_to_json(const std::vector<baselines::TreeNode>& nodes) {
  json out = json::array();
  for (const auto& nd : nodes)
    out.push_back(json::array({nd.pred, nd.cut, nd.left, nd.right, nd.prob, nd.n, nd.n_pos}));
  return out;
}

std::vector<baselines::TreeNode> tree_nodes_from_json(const json& j) {
  std::vector<baselines::TreeNode> out;
  for (const auto& row : j) {
    baselines::TreeNode nd;
    nd.pred = row.at(0).get<int>();
    nd.cut = row.at(1).get<double>();
    nd.left = row.at(2).get<int>();
    nd.right = row.at(3).get<int>();
    nd.prob = row.at(4).get<double>();
    nd.n = row.at(5).get<long>();
    nd.n_pos = row.at(6).get<long>();
    out.push_back(nd);
  }
  return out;
}

}  // namespace

std::string to_json_string(const AnyModel& model) {
  json j;
  j["format"] = kFormatName;
  j["version"] = kFormatVersion;
  j["kind"] = to_string(model.kind);
  switch (model.kind) {
    case ModelKind::bart: {
      j["config"] = bart_config_to_json(model.bart.config);
      j["predictors"] = model.bart.predictor_names;
      j["had_missing"] = model.bart.had_missing;
      j["trace"] = model.bart.trace;
      json draws = json::array();
      for (const auto& ensemble : model.bart.draws) {
        json trees = json::array();
        for (const auto& t : ensemble) trees.push_back(tree_to_json(t));
        draws.push_back(std::move(trees));
      }
      j["draws"] = std::move(draws);
      break;
    }
    case ModelKind::logit:
      j["model"] = logit_to_json(model.logit);
      break;
    case ModelKind::lasso_logit: {
      j["model"] = logit_to_json(model.lasso.model);
      j["selected"] = model.lasso.selected;
      j["selected_lambda"] = model.lasso.selected_lambda;
      j["lambda_max"] = model.lasso.lambda_max;
      json path = json::array();
      for (const auto& pt : model.lasso.path)
        path.push_back(json::array({pt.lambda, pt.df, pt.loglik, pt.ebic}));
      j["path"] = std::move(path);
      break;
    }
    case ModelKind::cart:
      j["predictors"] = model.cart.predictor_names;
      j["selected_alpha"] = model.cart.selected_alpha;
      j["nodes"] = tree_nodes_to_json(model.cart.nodes);
      j["diagnostics"] = diagnostics_to_json(model.cart.diagnostics);
      break;
    case ModelKind::forest: {
      j["predictors"] = model.forest.predictor_names;
      j["config"] = json{{"n_trees", model.forest.config.n_trees},
                         {"mtry", model.forest.config.mtry},
                         {"min_node", model.forest.config.min_node},
                         {"bootstrap", model.forest.config.bootstrap},
                         {"seed", model.forest.config.seed}};
      j["oob_accuracy"] = std::isfinite(model.forest.oob_accuracy)
                              ? json(model.forest.oob_accuracy)
                              : json(nullptr);
      j["diagnostics"] = diagnostics_to_json(model.forest.diagnostics);
      json trees = json::array();
      for (const auto& t : model.forest.trees) trees.push_back(tree_nodes_to_json(t));
      j["trees"] = std::move(trees);
      break;
    }
  }
  return j.dump();
}

AnyModel from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, std::string("model document is not valid JSON: ") + e.what());
  }
  if (!j.contains("format") || j["format"] != kFormatName)
    fail(ErrorKind::schema, "not an exportscore model document");
  if (j.at("version").get<int>() != kFormatVersion)
    fail(ErrorKind::schema, "unsupported model document version");

  AnyModel m;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "bart") {
    m.kind = ModelKind::bart;
    m.bart.config = bart_config_from_json(j.at("config"));
    m.bart.predictor_names = j.at("predictors").get<std::vector<std::string>>();
    m.bart.had_missing = j.at("had_missing").get<std::vector<std::uint8_t>>();
    m.bart.trace = j.at("trace").get<std::vector<double>>();
    for (const auto& trees : j.at("draws")) {
      std::vector<bart::FrozenTree> ensemble;
      for (const auto& t : trees) ensemble.push_back(tree_from_json(t));
      m.bart.draws.push_back(std::move(ensemble));
    }
  } else if (kind == "logit") {
    m.kind = ModelKind::logit;
    m.logit = logit_from_json(j.at("model"));
  } else if (kind == "lasso_logit") {
    m.kind = ModelKind::lasso_logit;
    m.lasso.model = logit_from_json(j.at("model"));
    m.lasso.selected = j.at("selected").get<std::vector<std::string>>();
    m.lasso.selected_lambda = j.at("selected_lambda").get<double>();
    m.lasso.lambda_max = j.at("lambda_max").get<double>();
    for (const auto& row : j.at("path")) {
      baselines::LassoPathPoint pt;
      pt.lambda = row.at(0).get<double>();
      pt.df = row.at(1).get<int>();
      pt.loglik = row.at(2).get<double>();
      pt.ebic = row.at(3).get<double>();
      m.lasso.path.push_back(pt);
    }
  } else if (kind == "cart") {
    m.kind = ModelKind::cart;
    m.cart.predictor_names = j.at("predictors").get<std::vector<std::string>>();
    m.cart.selected_alpha = j.at("selected_alpha").get<double>();
    m.cart.nodes = tree_nodes_from_json(j.at("nodes"));
    m.cart.diagnostics = diagnostics_from_json(j.at("diagnostics"));
  } else if (kind == "forest") {
    m.kind = ModelKind::forest;
    m.forest.predictor_names = j.at("predictors").get<std::vector<std::string>>();
    const auto& c = j.at("config");
    m.forest.config.n_trees = c.at("n_trees").get<int>();
    m.forest.config.mtry = c.at("mtry").get<int>();
    m.forest.config.min_node = c.at("min_node").get<int>();
    m.forest.config.bootstrap = c.at("bootstrap").get<bool>();
    m.forest.config.seed = c.at("seed").get<std::uint64_t>();
    m.forest.oob_accuracy = j.at("oob_accuracy").is_null()
                                ? std::numeric_limits<double>::quiet_NaN()
                                : j.at("oob_accuracy").get<double>();
    m.forest.diagnostics = diagnostics_from_json(j.at("diagnostics"));
    for (const auto& t : j.at("trees")) m.forest.trees.push_back(tree_nodes_from_json(t));
  } else {
    fail(ErrorKind::schema, "unknown model kind \"" + kind + "\"");
  }
  return m;
}

void save_model(const AnyModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  out << to_json_string(model) << "\n";
  if (!out) fail(ErrorKind::io, "write failed for " + path);
}

AnyModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_string(text);
}

}  // namespace exportscore::model_io
