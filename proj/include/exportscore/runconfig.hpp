#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "exportscore/panel.hpp"
#include "exportscore/synth.hpp"

namespace exportscore::cli {

// One JSON document drives every subcommand. Unknown keys are rejected,
// defaults are filled in, and the fully-resolved document is echoed next to
// the outputs. key=value overrides win over the file.
struct RunConfig {
  nlohmann::json resolved;

  std::uint64_t seed() const;
  int threads() const;
  bool emit_timestamp() const;
  std::string output_dir() const;
  std::string path(const std::string& name) const;

  dataset::PanelSchema schema() const;
  bool derive() const;
  synth::GeneratorSpec synth_spec() const;
  bool has_pattern_mix() const;
  synth::PatternMix pattern_mix() const;
  dataset::LabelDefinition label_definition() const;
  double partition_fraction() const;

  std::string model_kind() const;
  std::vector<std::string> model_paths() const;

  // 64-bit FNV-1a of the canonical resolved document, as 16 hex digits
  std::string config_hash() const;
  std::vector<std::string> csv_comment_lines() const;
};

nlohmann::json default_config();

RunConfig resolve_config(const nlohmann::json& user,
                         const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::string& config_path,
                      const std::vector<std::string>& overrides = {});

}  // namespace exportscore::cli
