#include "stepguard/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "stepguard/errors.hpp"

namespace stepguard {
namespace {

struct TieGroup {
  double score;
  std::uint64_t positives;
  std::uint64_t negatives;
};

/// Groups of equal score in descending order, validating the input.
std::vector<TieGroup> descending_groups(std::span<const EvalSample> samples, bool require_both_classes) {
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (const auto& s : samples) {
    if (s.label != 0 && s.label != 1) throw InvalidArgument("labels must be 0 or 1");
    if (!std::isfinite(s.score)) throw InvalidArgument("scores must be finite");
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return samples[a].score > samples[b].score; });

  std::vector<TieGroup> groups;
  std::uint64_t total_pos = 0;
  for (std::size_t k : order) {
    const auto& s = samples[k];
    if (groups.empty() || groups.back().score != s.score) groups.push_back({s.score, 0, 0});
    if (s.label == 1) {
      ++groups.back().positives;
      ++total_pos;
    } else {
      ++groups.back().negatives;
    }
  }
  if (require_both_classes && (total_pos == 0 || total_pos == samples.size())) {
    throw InvalidArgument("metric needs at least one positive and one negative sample");
  }
  return groups;
}

std::pair<std::uint64_t, std::uint64_t> class_counts(const std::vector<TieGroup>& groups) {
  std::uint64_t p = 0, n = 0;
  for (const auto& g : groups) {
    p += g.positives;
    n += g.negatives;
  }
  return {p, n};
}

}  // namespace

double roc_auc(std::span<const EvalSample> samples) {
  const auto groups = descending_groups(samples, true);
  const auto [pos, neg] = class_counts(groups);
  // Twice the trapezoid area in count units stays an exact integer.
  std::uint64_t doubled_area = 0;
  std::uint64_t tp = 0;
  for (const auto& g : groups) {
    doubled_area += g.negatives * (2 * tp + g.positives);
    tp += g.positives;
  }
  return static_cast<double>(doubled_area) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

double pr_auc(std::span<const EvalSample> samples) {
  const auto groups = descending_groups(samples, true);
  const auto [pos, neg] = class_counts(groups);
  (void)neg;
  double weighted = 0.0;
  std::uint64_t tp = 0, fp = 0;
  for (const auto& g : groups) {
    tp += g.positives;
    fp += g.negatives;
    if (g.positives == 0) continue;
    weighted += static_cast<double>(g.positives) * static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  return weighted / static_cast<double>(pos);
}

CurveSummary summarize(std::span<const EvalSample> samples) {
  CurveSummary summary;
  summary.roc_auc = roc_auc(samples);
  summary.pr_auc = pr_auc(samples);

  const auto groups = descending_groups(samples, true);
  const auto [pos, neg] = class_counts(groups);
  const double total = static_cast<double>(pos + neg);
  std::uint64_t tp = 0, fp = 0;
  summary.curve_points.reserve(groups.size());
  for (const auto& g : groups) {
    tp += g.positives;
    fp += g.negatives;
    const double recall = static_cast<double>(tp) / static_cast<double>(pos);
    summary.curve_points.push_back({
        g.score,
        recall,
        static_cast<double>(fp) / static_cast<double>(neg),
        static_cast<double>(tp) / static_cast<double>(tp + fp),
        recall,
        static_cast<double>(tp + (neg - fp)) / total,
    });
  }
  return summary;
}

std::vector<ThresholdAccuracy> threshold_sweep(std::span<const EvalSample> samples,
                                               std::span<const double> grid) {
  if (grid.empty()) throw InvalidArgument("threshold grid must not be empty");
  if (samples.empty()) throw InvalidArgument("threshold sweep needs at least one sample");
  descending_groups(samples, false);
  std::vector<ThresholdAccuracy> out;
  out.reserve(grid.size());
  for (double gamma : grid) {
    std::size_t correct = 0;
    for (const auto& s : samples) {
      if ((s.score > gamma) == (s.label == 1)) ++correct;
    }
    out.push_back({gamma, static_cast<double>(correct) / static_cast<double>(samples.size())});
  }
  return out;
}

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 9; ++i) grid.push_back(i / 10.0);
  return grid;
}

}  // namespace stepguard
