#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lpl/pseudo_label.hpp"

namespace lpl {

/// Detector output in the LiDAR frame.
struct Detection {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;
};

struct LabelCounts {
  std::int64_t tp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;
  std::int64_t fp = 0;

  bool tpr_defined() const { return tp + fn > 0; }
  bool tnr_defined() const { return tn + fp > 0; }
  double tpr() const { return static_cast<double>(tp) / static_cast<double>(tp + fn); }
  double tnr() const { return static_cast<double>(tn) / static_cast<double>(tn + fp); }

  LabelCounts& operator+=(const LabelCounts& o) {
    tp += o.tp;
    fn += o.fn;
    tn += o.tn;
    fp += o.fp;
    return *this;
  }
};

struct TprTnrOptions {
  /// Alternative convention: drop pseudo-ignore points from the counts
  /// instead of treating them as negative predictions.
  bool exclude_pseudo_ignore = false;
};

/// Point-level agreement of pseudo targets with ground-truth targets.
/// gt-ignore points are excluded; by default pseudo-ignore counts as a
/// negative prediction (FN under gt-POS, TN under gt-NEG).
LabelCounts label_tpr_tnr(const PointLabels& pseudo, const PointLabels& gt,
                          const TprTnrOptions& options = {});
LabelCounts label_tpr_tnr(std::span<const PointLabels> pseudo, std::span<const PointLabels> gt,
                          const TprTnrOptions& options = {});

struct PRPoint {
  int rank = 0;  // 1-based position in confidence order
  double confidence = 0.0;
  bool tp = false;
  double precision = 0.0;
  double recall = 0.0;
};

struct PRCurve {
  std::vector<PRPoint> points;
  double ap = 0.0;
};

/// Pooled average precision: detections sorted by confidence (ties by frame,
/// then insertion order); each detection greedily matches the nearest
/// unmatched ground truth of its frame within `radius`. AP is the raw step
/// sum over the recall increments. Zero ground truth yields AP 0 and an
/// empty curve.
PRCurve average_precision(const std::vector<std::vector<Detection>>& detections,
                          const std::vector<std::vector<Point2D>>& ground_truth, double radius);

/// Counts of center distances per [k*bin_width, (k+1)*bin_width) bin with a
/// trailing overflow bin for distances >= max_distance.
std::vector<std::int64_t> distance_histogram(std::span<const Point2D> centers,
                                             double bin_width = 1.0, double max_distance = 30.0);

}  // namespace lpl
