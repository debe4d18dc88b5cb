#pragma once

#include <string>

#include "exportscore/bart.hpp"
#include "exportscore/baselines.hpp"
#include "exportscore/panel.hpp"
#include "exportscore/prediction.hpp"

namespace exportscore::model_io {

enum class ModelKind { bart, logit, lasso_logit, cart, forest };

const char* to_string(ModelKind k);

// One trained model of any kind, as stored in a model document.
struct AnyModel {
  ModelKind kind = ModelKind::bart;
  bart::BartModel bart;
  baselines::LogitModel logit;
  baselines::LassoFit lasso;
  baselines::CartModel cart;
  baselines::ForestModel forest;

  // "bart_mia" when the bart config has MIA enabled
  std::string display_name() const;
  PredictionTable predict(const dataset::DataView& rows) const;
};

// Versioned JSON document; round-trips are lossless.
void save_model(const AnyModel& model, const std::string& path);
AnyModel load_model(const std::string& path);

std::string to_json_string(const AnyModel& model);
AnyModel from_json_string(const std::string& text);

}  // namespace exportscore::model_io
