#include "exportscore/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "exportscore/common.hpp"

namespace exportscore::metrics {

ConfusionCounts confusion(const std::vector<double>& scores, const std::vector<int>& labels,
                          double threshold) {
  if (scores.size() != labels.size())
    fail(ErrorKind::alignment, "scores and labels differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    bool pred = scores[i] > threshold;
    if (labels[i] == 1) {
      pred ? ++c.tp : ++c.fn;
    } else {
      pred ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

MetricsReport accuracy_measures(const ConfusionCounts& c, double threshold) {
  MetricsReport r;
  r.threshold = threshold;
  r.n_obs = c.total();
  if (c.tp + c.fn > 0) r.sensitivity = double(c.tp) / double(c.tp + c.fn);
  if (c.tn + c.fp > 0) r.specificity = double(c.tn) / double(c.tn + c.fp);
  if (r.sensitivity && r.specificity)
    r.balanced_accuracy = 0.5 * (*r.sensitivity + *r.specificity);
  return r;
}

std::vector<double> midranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    double mid = 0.5 * (double(i + 1) + double(j + 1));  // 1-based average rank
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    fail(ErrorKind::alignment, "scores and labels differ in length");
  long n1 = 0, n0 = 0;
  for (int y : labels) (y == 1 ? n1 : n0)++;
  if (n1 == 0 || n0 == 0)
    fail(ErrorKind::undefined_metric, "ROC AUC needs both classes present");

  auto ranks = midranks(scores);
  double rank_sum_pos = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == 1) rank_sum_pos += ranks[i];
  double u = rank_sum_pos - double(n1) * (double(n1) + 1.0) / 2.0;
  return u / (double(n1) * double(n0));
}

double pr_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    fail(ErrorKind::alignment, "scores and labels differ in length");
  long n1 = std::count(labels.begin(), labels.end(), 1);
  if (n1 == 0) fail(ErrorKind::undefined_metric, "PR AUC needs at least one positive");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  // Walk distinct score levels from the top; each level adds its whole tied
  // block. Area is the step sum sum_k (R_k - R_{k-1}) P_k.
  double area = 0.0;
  double prev_recall = 0.0;
  long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) (labels[order[k]] == 1 ? tp : fp)++;
    double recall = double(tp) / double(n1);
    double precision = double(tp) / double(tp + fp);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j + 1;
  }
  return area;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) fail(ErrorKind::alignment, "vectors differ in length");
  if (a.size() < 2) fail(ErrorKind::undefined_metric, "Spearman needs at least 2 rows");
  auto ra = midranks(a);
  auto rb = midranks(b);
  double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / double(ra.size());
  double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / double(rb.size());
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    double da = ra[i] - ma, db = rb[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0)
    fail(ErrorKind::undefined_metric, "Spearman undefined for a constant vector");
  return sab / std::sqrt(saa * sbb);
}

MetricsReport evaluate(const std::vector<double>& scores, const std::vector<int>& labels,
                       double threshold) {
  MetricsReport r = accuracy_measures(confusion(scores, labels, threshold), threshold);
  long n1 = std::count(labels.begin(), labels.end(), 1);
  long n0 = static_cast<long>(labels.size()) - n1;
  if (n1 > 0 && n0 > 0) {
    r.roc_auc = roc_auc(scores, labels);
    r.pr_auc = pr_auc(scores, labels);
  }
  return r;
}

std::vector<GroupReport> evaluate_by_group(const std::vector<double>& scores,
                                           const std::vector<int>& labels,
                                           const std::vector<std::string>& groups,
                                           double threshold) {
  if (scores.size() != labels.size() || scores.size() != groups.size())
    fail(ErrorKind::alignment, "scores, labels and groups differ in length");
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < groups.size(); ++i) members[groups[i]].push_back(i);

  std::vector<GroupReport> out;
  for (const auto& [key, idx] : members) {
    std::vector<double> s;
    std::vector<int> y;
    s.reserve(idx.size());
    y.reserve(idx.size());
    for (std::size_t i : idx) {
      s.push_back(scores[i]);
      y.push_back(labels[i]);
    }
    out.push_back({key, evaluate(s, y, threshold)});
  }
  return out;
}

}  // namespace exportscore::metrics
