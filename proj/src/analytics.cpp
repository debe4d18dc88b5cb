#include "exportscore/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "exportscore/common.hpp"

namespace exportscore::analytics {

namespace {

// lower median: element at index ceil(n/2) - 1 of the sorted sample
double lower_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() + 1) / 2 - 1];
}

// nearest-rank quantile on a sorted sample
double quantile_sorted(const std::vector<double>& sorted, double p) {
  std::size_t rank = static_cast<std::size_t>(std::ceil(p * double(sorted.size())));
  if (rank == 0) rank = 1;
  return sorted[rank - 1];
}

}  // namespace

std::vector<ScoredFirm> collapse_to_firms(const dataset::FirmPanel& panel,
                                          const scoring::ScoreTable& scores,
                                          const std::vector<std::int8_t>& labels,
                                          bool latest_year_only) {
  if (labels.size() != panel.n_rows())
    fail(ErrorKind::alignment, "labels do not align with panel rows");
  int region_col = panel.find_categorical("region");
  int industry_col = panel.find_categorical("industry");

  struct Pick {
    int year = INT32_MIN;
    double score = 0.0;
    bool exporter = false;
    std::size_t panel_row = 0;
    bool ever_exporter = false;
    bool seen = false;
  };
  std::map<std::string, Pick> by_firm;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    std::size_t r = scores.panel_rows[k];
    if (labels[r] < 0) continue;  // unlabeled rows carry no export status
    auto& pick = by_firm[panel.firm_ids[r]];
    pick.ever_exporter |= labels[r] == 1;
    bool take = !pick.seen || (latest_year_only ? panel.years[r] > pick.year
                                                : panel.years[r] < pick.year);
    if (take) {
      pick.seen = true;
      pick.year = panel.years[r];
      pick.score = scores.scores[k];
      pick.exporter = labels[r] == 1;
      pick.panel_row = r;
    }
  }

  std::vector<ScoredFirm> out;
  out.reserve(by_firm.size());
  for (const auto& [firm, pick] : by_firm) {
    ScoredFirm f;
    f.firm_id = firm;
    f.score = pick.score;
    f.exporter = pick.ever_exporter;
    if (region_col >= 0) f.region = panel.categorical[region_col].values[pick.panel_row];
    if (industry_col >= 0) f.industry = panel.categorical[industry_col].values[pick.panel_row];
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<std::string> potential_set(const std::vector<ScoredFirm>& firms) {
  std::vector<double> non_exporter_scores;
  for (const auto& f : firms)
    if (!f.exporter) non_exporter_scores.push_back(f.score);
  if (non_exporter_scores.empty()) return {};
  double med = lower_median(std::move(non_exporter_scores));
  std::vector<std::string> out;
  for (const auto& f : firms)
    if (!f.exporter && f.score > med) out.push_back(f.firm_id);
  return out;
}

namespace {

struct PoolEntry {
  int region = 0;   // index into region list
  bool potential = false;
};

LocationQuotients quotients_from_counts(const std::vector<std::string>& region_names,
                                        const std::vector<long>& n_firms,
                                        const std::vector<long>& n_potential) {
  LocationQuotients out;
  for (std::size_t j = 0; j < region_names.size(); ++j) {
    out.total_firms += n_firms[j];
    out.total_potential += n_potential[j];
  }
  for (std::size_t j = 0; j < region_names.size(); ++j) {
    RegionQuotient rq;
    rq.region = region_names[j];
    rq.n_firms = n_firms[j];
    rq.n_potential = n_potential[j];
    if (n_firms[j] > 0 && out.total_potential > 0) {
      double region_rate = double(n_potential[j]) / double(n_firms[j]);
      double national_rate = double(out.total_potential) / double(out.total_firms);
      rq.lq = region_rate / national_rate;
    }
    out.regions.push_back(std::move(rq));
  }
  return out;
}

}  // namespace

LocationQuotients location_quotients(const std::vector<ScoredFirm>& firms, int bootstrap_reps,
                                     std::uint64_t seed) {
  if (bootstrap_reps < 0) fail(ErrorKind::parameter, "bootstrap reps must be >= 0");

  std::set<std::string> potential(
      [&] {
        auto p = potential_set(firms);
        return std::set<std::string>(p.begin(), p.end());
      }());

  // the universe I is the set of non-exporting firms, partitioned by region
  std::vector<std::string> region_names;
  std::map<std::string, int> region_index;
  std::vector<PoolEntry> pool;
  for (const auto& f : firms) {
    if (f.exporter) continue;
    auto [it, inserted] = region_index.try_emplace(f.region, int(region_names.size()));
    if (inserted) region_names.push_back(f.region);
    pool.push_back({it->second, potential.count(f.firm_id) > 0});
  }

  const std::size_t n_regions = region_names.size();
  std::vector<long> n_firms(n_regions, 0), n_potential(n_regions, 0);
  for (const auto& e : pool) {
    ++n_firms[e.region];
    n_potential[e.region] += e.potential;
  }
  LocationQuotients out = quotients_from_counts(region_names, n_firms, n_potential);

  if (bootstrap_reps > 0 && !pool.empty()) {
    // resample firms with replacement from the national pool, recompute each
    // region's quotient, and read the 5th/95th percentiles; replicates are
    // independent tasks with per-replicate seeds
    constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> replicate_lq(std::size_t(bootstrap_reps) * n_regions, kAbsent);
    parallel_for(std::size_t(bootstrap_reps), [&](std::size_t lo, std::size_t hi) {
      std::vector<long> bf(n_regions), bp(n_regions);
      for (std::size_t rep = lo; rep < hi; ++rep) {
        Rng rng(derive_seed(seed, "lq-bootstrap", rep));
        std::fill(bf.begin(), bf.end(), 0);
        std::fill(bp.begin(), bp.end(), 0);
        long total_potential = 0;
        for (std::size_t i = 0; i < pool.size(); ++i) {
          const PoolEntry& e = pool[rng.below(pool.size())];
          ++bf[e.region];
          bp[e.region] += e.potential;
          total_potential += e.potential;
        }
        if (total_potential == 0) continue;
        double national_rate = double(total_potential) / double(pool.size());
        for (std::size_t j = 0; j < n_regions; ++j) {
          if (bf[j] == 0) continue;
          replicate_lq[rep * n_regions + j] = double(bp[j]) / double(bf[j]) / national_rate;
        }
      }
    });
    for (std::size_t j = 0; j < n_regions; ++j) {
      std::vector<double> reps;
      reps.reserve(bootstrap_reps);
      for (int rep = 0; rep < bootstrap_reps; ++rep) {
        double v = replicate_lq[std::size_t(rep) * n_regions + j];
        if (!std::isnan(v)) reps.push_back(v);
      }
      if (reps.empty() || !out.regions[j].lq) continue;
      std::sort(reps.begin(), reps.end());
      out.regions[j].ci_low = quantile_sorted(reps, 0.05);
      out.regions[j].ci_high = quantile_sorted(reps, 0.95);
      out.regions[j].significant =
          *out.regions[j].ci_low > 1.0 || *out.regions[j].ci_high < 1.0;
    }
  }
  return out;
}

std::vector<GroupSummary> aggregate_scores(const std::vector<ScoredFirm>& firms, GroupKey key) {
  std::set<std::string> potential(
      [&] {
        auto p = potential_set(firms);
        return std::set<std::string>(p.begin(), p.end());
      }());

  std::map<std::string, std::vector<const ScoredFirm*>> groups;
  long total_potential = 0;
  for (const auto& f : firms) {
    if (f.exporter) continue;  // the distributional figures describe non-exporters
    groups[key == GroupKey::region ? f.region : f.industry].push_back(&f);
    total_potential += potential.count(f.firm_id) > 0;
  }

  std::vector<GroupSummary> out;
  for (const auto& [name, members] : groups) {
    GroupSummary g;
    g.group = name;
    g.count = long(members.size());
    std::vector<double> v;
    v.reserve(members.size());
    long n_pot = 0;
    for (const auto* f : members) {
      v.push_back(f->score);
      n_pot += potential.count(f->firm_id) > 0;
    }
    std::sort(v.begin(), v.end());
    g.min = v.front();
    g.max = v.back();
    g.q1 = quantile_sorted(v, 0.25);
    g.median = quantile_sorted(v, 0.50);
    g.q3 = quantile_sorted(v, 0.75);
    g.share_of_national_potential = total_potential ? double(n_pot) / double(total_potential) : 0.0;
    g.within_group_potential_share = double(n_pot) / double(g.count);
    out.push_back(std::move(g));
  }
  return out;
}

VipSummary vip_replicate(const dataset::DataView& train, const std::vector<int>& labels,
                         const bart::BartConfig& config, const std::vector<std::uint64_t>& seeds) {
  if (seeds.size() < 2) fail(ErrorKind::parameter, "vip replication needs at least 2 seeds");

  // replications are independent fits with their own seeds
  std::vector<std::vector<double>> proportions(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      bart::BartConfig cfg = config;
      cfg.seed = seeds[r];
      bart::BartModel model = bart::fit(train, labels, cfg);
      proportions[r] = bart::vip(model);
    }
  }, 1);

  const std::size_t p = proportions[0].size();
  VipSummary s;
  s.predictor_names = train.col_names();
  s.replications = int(seeds.size());
  s.mean.assign(p, 0.0);
  s.sd.assign(p, 0.0);
  for (const auto& v : proportions)
    for (std::size_t j = 0; j < p; ++j) s.mean[j] += v[j];
  for (std::size_t j = 0; j < p; ++j) s.mean[j] /= double(seeds.size());
  for (const auto& v : proportions) {
    for (std::size_t j = 0; j < p; ++j) {
      double d = v[j] - s.mean[j];
      s.sd[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < p; ++j)
    s.sd[j] = std::sqrt(s.sd[j] / double(seeds.size() - 1));
  for (std::size_t j = 0; j < p; ++j)
    if (s.mean[j] >= 0.01) s.top_predictors.push_back(s.predictor_names[j]);
  return s;
}

}  // namespace exportscore::analytics
