#include "lpl/eval.hpp"

#include <algorithm>
#include <cmath>

#include "lpl/errors.hpp"

namespace lpl {

LabelCounts label_tpr_tnr(const PointLabels& pseudo, const PointLabels& gt,
                          const TprTnrOptions& options) {
  if (pseudo.cls.size() != gt.cls.size()) {
    throw ValidationError("label_tpr_tnr: point count mismatch");
  }
  LabelCounts counts;
  for (std::size_t k = 0; k < pseudo.cls.size(); ++k) {
    if (gt.cls[k] == PointClass::kIgnore) continue;
    if (options.exclude_pseudo_ignore && pseudo.cls[k] == PointClass::kIgnore) continue;
    const bool predicted_pos = pseudo.cls[k] == PointClass::kPos;
    if (gt.cls[k] == PointClass::kPos) {
      predicted_pos ? ++counts.tp : ++counts.fn;
    } else {
      predicted_pos ? ++counts.fp : ++counts.tn;
    }
  }
  return counts;
}

LabelCounts label_tpr_tnr(std::span<const PointLabels> pseudo, std::span<const PointLabels> gt,
                          const TprTnrOptions& options) {
  if (pseudo.size() != gt.size()) throw ValidationError("label_tpr_tnr: frame count mismatch");
  LabelCounts counts;
  for (std::size_t f = 0; f < pseudo.size(); ++f) {
    counts += label_tpr_tnr(pseudo[f], gt[f], options);
  }
  return counts;
}

PRCurve average_precision(const std::vector<std::vector<Detection>>& detections,
                          const std::vector<std::vector<Point2D>>& ground_truth, double radius) {
  if (detections.size() != ground_truth.size()) {
    throw ValidationError("average_precision: frame count mismatch");
  }

  PRCurve curve;
  std::int64_t total_gt = 0;
  for (const auto& gts : ground_truth) total_gt += static_cast<std::int64_t>(gts.size());
  if (total_gt == 0) return curve;  // AP defined as 0, empty curve

  struct Pooled {
    double confidence;
    int frame;
    int order;
    Point2D position;
  };
  std::vector<Pooled> pooled;
  for (std::size_t f = 0; f < detections.size(); ++f) {
    for (std::size_t i = 0; i < detections[f].size(); ++i) {
      const Detection& d = detections[f][i];
      pooled.push_back({d.confidence, static_cast<int>(f), static_cast<int>(i), {d.x, d.y}});
    }
  }
  std::sort(pooled.begin(), pooled.end(), [](const Pooled& a, const Pooled& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.frame != b.frame) return a.frame < b.frame;
    return a.order < b.order;
  });

  std::vector<std::vector<char>> matched(ground_truth.size());
  for (std::size_t f = 0; f < ground_truth.size(); ++f) {
    matched[f].assign(ground_truth[f].size(), 0);
  }

  const double radius_sq = radius * radius;
  std::int64_t cum_tp = 0;
  double ap = 0.0;
  double prev_recall = 0.0;
  curve.points.reserve(pooled.size());
  for (std::size_t r = 0; r < pooled.size(); ++r) {
    const Pooled& det = pooled[r];
    const auto& gts = ground_truth[static_cast<std::size_t>(det.frame)];
    auto& taken = matched[static_cast<std::size_t>(det.frame)];

    int best = -1;
    double best_sq = radius_sq;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double sq = squared_distance(det.position, gts[g]);
      if (sq <= best_sq && (best < 0 || sq < best_sq)) {
        best = static_cast<int>(g);
        best_sq = sq;
      }
    }
    const bool tp = best >= 0;
    if (tp) {
      taken[static_cast<std::size_t>(best)] = 1;
      ++cum_tp;
    }
    const double precision = static_cast<double>(cum_tp) / static_cast<double>(r + 1);
    const double recall = static_cast<double>(cum_tp) / static_cast<double>(total_gt);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    curve.points.push_back(
        {static_cast<int>(r) + 1, det.confidence, tp, precision, recall});
  }
  curve.ap = ap;
  return curve;
}

std::vector<std::int64_t> distance_histogram(std::span<const Point2D> centers, double bin_width,
                                             double max_distance) {
  if (!(bin_width > 0.0) || !(max_distance > 0.0)) {
    throw ValidationError("distance_histogram: bin_width and max_distance must be positive");
  }
  const auto n_regular = static_cast<std::size_t>(std::ceil(max_distance / bin_width));
  std::vector<std::int64_t> counts(n_regular + 1, 0);  // trailing overflow bin
  for (const Point2D& c : centers) {
    const double d = c.norm();
    const std::size_t bin =
        d >= max_distance ? n_regular : static_cast<std::size_t>(d / bin_width);
    ++counts[std::min(bin, n_regular)];
  }
  return counts;
}

}  // namespace lpl
