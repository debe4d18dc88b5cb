#pragma once

#include <optional>
#include <string>
#include <vector>

namespace exportscore::metrics {

struct ConfusionCounts {
  long tp = 0, fp = 0, fn = 0, tn = 0;
  long total() const { return tp + fp + fn + tn; }
};

// Threshold accuracy measures plus the two curve areas.
// A ratio with a zero denominator is absent, not zero.
struct MetricsReport {
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> balanced_accuracy;
  std::optional<double> roc_auc;
  std::optional<double> pr_auc;
  double threshold = 0.5;
  long n_obs = 0;
};

// Predicted positive iff score > threshold (strictly).
ConfusionCounts confusion(const std::vector<double>& scores, const std::vector<int>& labels,
                          double threshold);

MetricsReport accuracy_measures(const ConfusionCounts& counts, double threshold);

// Mann-Whitney concordance (ties count one half). Throws undefined_metric
// when only one class is present.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Area under the precision-recall curve with step-wise interpolation,
// descending in score. Throws undefined_metric when no positives exist.
double pr_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Pearson correlation of mid-ranks. Throws undefined_metric for n < 2.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// Full report: threshold measures always, curve areas where defined.
MetricsReport evaluate(const std::vector<double>& scores, const std::vector<int>& labels,
                       double threshold);

struct GroupReport {
  std::string group;
  MetricsReport report;
};

// One report per group key, keys sorted; group must cover every scored row.
std::vector<GroupReport> evaluate_by_group(const std::vector<double>& scores,
                                           const std::vector<int>& labels,
                                           const std::vector<std::string>& groups,
                                           double threshold);

std::vector<double> midranks(const std::vector<double>& v);

}  // namespace exportscore::metrics
