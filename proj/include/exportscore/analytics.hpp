#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "exportscore/bart.hpp"
#include "exportscore/panel.hpp"
#include "exportscore/scoring.hpp"

namespace exportscore::analytics {

// One scored firm for the cross-sectional analyses (firms observed in several
// years are collapsed to their latest-year score unless told otherwise).
struct ScoredFirm {
  std::string firm_id;
  double score = 0.0;
  bool exporter = false;
  std::string region;
  std::string industry;
};

std::vector<ScoredFirm> collapse_to_firms(const dataset::FirmPanel& panel,
                                          const scoring::ScoreTable& scores,
                                          const std::vector<std::int8_t>& labels,
                                          bool latest_year_only = true);

// P = non-exporters scoring strictly above the median non-exporter (lower
// median for even counts).
std::vector<std::string> potential_set(const std::vector<ScoredFirm>& firms);

struct RegionQuotient {
  std::string region;
  long n_potential = 0;  // #P_j
  long n_firms = 0;      // #I_j
  std::optional<double> lq;
  std::optional<double> ci_low;   // 5th bootstrap percentile
  std::optional<double> ci_high;  // 95th
  bool significant = false;       // CI excludes 1
};

struct LocationQuotients {
  std::vector<RegionQuotient> regions;
  long total_potential = 0;  // #P
  long total_firms = 0;      // #I
};

LocationQuotients location_quotients(const std::vector<ScoredFirm>& firms, int bootstrap_reps,
                                     std::uint64_t seed);

// Boxplot statistics per group plus the two Figure-6 share conventions.
struct GroupSummary {
  std::string group;
  long count = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
  double share_of_national_potential = 0.0;  // #P_j / #P
  double within_group_potential_share = 0.0; // #P_j / #I_j
};

enum class GroupKey { region, industry };

std::vector<GroupSummary> aggregate_scores(const std::vector<ScoredFirm>& firms, GroupKey key);

struct VipSummary {
  std::vector<std::string> predictor_names;
  std::vector<double> mean;
  std::vector<double> sd;  // sample sd over replications
  int replications = 0;
  std::vector<std::string> top_predictors;  // mean inclusion >= 1%
};

// Refits BART-MIA on the same training rows once per seed and aggregates the
// per-fit variable inclusion proportions.
VipSummary vip_replicate(const dataset::DataView& train, const std::vector<int>& labels,
                         const bart::BartConfig& config, const std::vector<std::uint64_t>& seeds);

}  // namespace exportscore::analytics
