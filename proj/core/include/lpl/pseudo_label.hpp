#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "lpl/rng.hpp"
#include "lpl/scan_geometry.hpp"

namespace lpl {

/// Box-selection thresholds: minimum score, maximum width/height ratio,
/// maximum overlap ratio against any other box.
struct FilterParams {
  double t_score = 0.75;
  double t_aspect = 0.45;
  double t_overlap = 0.4;

  void validate() const;  // all in (0, 1]
};

/// Label-generation geometry around estimated person centers.
struct LabelParams {
  double r_pos = 0.4;         // classification-positive radius
  double r_reg = 0.8;         // regression radius
  int min_support = 5;        // centers with fewer positives are discarded
  double r_kernel = 0.5;      // mean-shift kernel radius
  double widen = 0.1;         // box widening for the negative mask
  int min_frustum_points = 5; // below this, no localization is attempted

  void validate() const;
};

enum class PointClass : std::uint8_t { kNeg = 0, kPos = 1, kIgnore = 2 };

/// Per-point training targets for one scan plus the estimated person centers.
/// reg maps beam index -> (center - point) in the LiDAR frame for points
/// within r_reg of their nearest center.
struct PointLabels {
  std::int64_t frame_id = 0;
  std::vector<PointClass> cls;
  std::map<std::int32_t, Point2D> reg;
  std::vector<Point2D> centers;
};

struct FilteredBoxes {
  std::vector<DetBox> kept;
  std::vector<DetBox> discarded;
};

/// Keeps boxes passing all three tests; the overlap ratio
/// area(b ∩ b') / area(b) is evaluated against every *other* box of the
/// original, unfiltered list. Input order is preserved in both outputs.
FilteredBoxes filter_boxes(std::span<const DetBox> boxes, const FilterParams& params);

struct RangeSplit {
  std::vector<int> close;
  std::vector<int> far;
};

/// Two-cluster split of range values minimizing within-cluster squared error
/// (the exact 1-D k=2 optimum via threshold search). "close" is the cluster
/// with the smaller mean; all-equal inputs land entirely in close.
RangeSplit kmeans_range_split(std::span<const double> ranges);

struct MeanShiftResult {
  Point2D mode;
  int iterations = 0;
  double final_shift = 0.0;
  bool converged = false;
};

/// Flat (uniform) circular-kernel mean shift: repeatedly moves the estimate
/// to the mean of points within r_kernel, stopping once the shift drops below
/// 1e-6 m or after 100 iterations. An empty kernel leaves the estimate
/// unchanged.
MeanShiftResult mean_shift_refine_full(std::span<const Point2D> points, Point2D init,
                                       double r_kernel);
Point2D mean_shift_refine(std::span<const Point2D> points, Point2D init, double r_kernel);

/// One person location from a box frustum: close/far range split, mean of the
/// close cluster as the initial estimate, mean shift over all frustum points.
/// Returns nullopt when fewer than min_frustum_points points are available.
std::optional<Point2D> localize_person(std::span<const Point2D> points,
                                       std::span<const double> ranges, const LabelParams& params);

/// Full per-frame pipeline: filter boxes, localize one center per kept box,
/// then classify points as POS (within r_pos of a surviving center), NEG
/// (projecting into no widened box, kept and discarded alike) or IGNORE.
/// Centers with fewer than min_support positives are discarded, demoting
/// their exclusive positives to IGNORE (a single demotion pass).
PointLabels generate_labels(const Scan& scan, std::span<const DetBox> boxes,
                            const CameraCalib& calib, const FilterParams& fp,
                            const LabelParams& lp);

/// Targets from known person centers (annotation supervision): POS within
/// r_pos, IGNORE out to r_reg, NEG beyond.
PointLabels labels_from_centers(const Scan& scan, std::span<const Point2D> centers,
                                const LabelParams& lp);

enum class CleanMode { kRemoveFp, kRemoveFn, kBoth, kBothCorrectReg };

/// Replaces wrong pseudo targets with their ground-truth values. RemoveFp
/// demotes pseudo-positives that are NEG in gt; RemoveFn promotes points that
/// gt marks POS but the pseudo labels do not. BothCorrectReg additionally
/// copies every regression target gt defines.
PointLabels clean_labels(const PointLabels& labels, const PointLabels& gt, CleanMode mode);

/// Inverts the class of round(fraction * n_labeled) labeled points, chosen
/// uniformly without replacement. Ignore points and reg targets are left
/// untouched.
PointLabels inject_label_flips(const PointLabels& labels, double fraction, Rng& rng);

}  // namespace lpl
