#include "lpl/pseudo_label.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lpl/errors.hpp"

namespace lpl {
namespace {

constexpr double kShiftTolerance = 1e-6;
constexpr int kMaxIterations = 100;

void check_unit_interval(double value, const char* name) {
  if (!(value > 0.0) || !(value <= 1.0)) {
    throw ValidationError(std::string(name) + " must lie in (0, 1]");
  }
}

/// Index of the nearest center within `radius`, or -1. Ties break toward the
/// lower index.
int nearest_center_within(const Point2D& p, std::span<const Point2D> centers, double radius) {
  int best = -1;
  double best_sq = radius * radius;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double sq = squared_distance(p, centers[c]);
    if (sq <= best_sq && (best < 0 || sq < best_sq)) {
      best = static_cast<int>(c);
      best_sq = sq;
    }
  }
  return best;
}

}  // namespace

void FilterParams::validate() const {
  check_unit_interval(t_score, "t_score");
  check_unit_interval(t_aspect, "t_aspect");
  check_unit_interval(t_overlap, "t_overlap");
}

void LabelParams::validate() const {
  if (!(r_pos > 0.0) || !(r_pos <= r_reg)) {
    throw ValidationError("label params: need 0 < r_pos <= r_reg");
  }
  if (min_support < 1) throw ValidationError("label params: min_support must be >= 1");
  if (!(r_kernel > 0.0)) throw ValidationError("label params: r_kernel must be positive");
  if (widen < 0.0) throw ValidationError("label params: widen must be non-negative");
  if (min_frustum_points < 0) throw ValidationError("label params: min_frustum_points < 0");
}

FilteredBoxes filter_boxes(std::span<const DetBox> boxes, const FilterParams& params) {
  params.validate();
  FilteredBoxes out;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const DetBox& box = boxes[i];
    bool keep = box.score >= params.t_score && box.width() / box.height() <= params.t_aspect;
    if (keep) {
      // Overlap ratio against every other box of the original list.
      for (std::size_t j = 0; j < boxes.size() && keep; ++j) {
        if (j == i) continue;
        if (box_intersection_area(box, boxes[j]) / box.area() > params.t_overlap) keep = false;
      }
    }
    (keep ? out.kept : out.discarded).push_back(box);
  }
  return out;
}

RangeSplit kmeans_range_split(std::span<const double> ranges) {
  const int n = static_cast<int>(ranges.size());
  if (n == 0) throw ValidationError("kmeans_range_split: empty input");

  RangeSplit split;
  if (n == 1) {
    split.close = {0};
    return split;
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return ranges[static_cast<std::size_t>(a)] != ranges[static_cast<std::size_t>(b)]
               ? ranges[static_cast<std::size_t>(a)] < ranges[static_cast<std::size_t>(b)]
               : a < b;
  });
  if (ranges[static_cast<std::size_t>(order.front())] ==
      ranges[static_cast<std::size_t>(order.back())]) {
    split.close = std::move(order);
    std::sort(split.close.begin(), split.close.end());
    return split;
  }

  // Exact optimum: in 1-D the best 2-partition is a split of the sorted
  // values; scan all n-1 split points with prefix sums.
  std::vector<double> prefix_sum(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> prefix_sq(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    const double r = ranges[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    prefix_sum[static_cast<std::size_t>(i) + 1] = prefix_sum[static_cast<std::size_t>(i)] + r;
    prefix_sq[static_cast<std::size_t>(i) + 1] = prefix_sq[static_cast<std::size_t>(i)] + r * r;
  }
  const auto segment_cost = [&](int lo, int hi) {  // [lo, hi)
    const double count = hi - lo;
    const double sum = prefix_sum[static_cast<std::size_t>(hi)] - prefix_sum[static_cast<std::size_t>(lo)];
    const double sq = prefix_sq[static_cast<std::size_t>(hi)] - prefix_sq[static_cast<std::size_t>(lo)];
    return sq - sum * sum / count;
  };

  int best_split = 1;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int s = 1; s < n; ++s) {
    const double cost = segment_cost(0, s) + segment_cost(s, n);
    if (cost < best_cost) {
      best_cost = cost;
      best_split = s;
    }
  }

  split.close.assign(order.begin(), order.begin() + best_split);
  split.far.assign(order.begin() + best_split, order.end());
  std::sort(split.close.begin(), split.close.end());
  std::sort(split.far.begin(), split.far.end());
  return split;
}

MeanShiftResult mean_shift_refine_full(std::span<const Point2D> points, Point2D init,
                                       double r_kernel) {
  MeanShiftResult result;
  result.mode = init;
  const double r_sq = r_kernel * r_kernel;
  for (int it = 0; it < kMaxIterations; ++it) {
    double sum_x = 0.0;
    double sum_y = 0.0;
    int count = 0;
    for (const Point2D& p : points) {
      if (squared_distance(p, result.mode) <= r_sq) {
        sum_x += p.x;
        sum_y += p.y;
        ++count;
      }
    }
    if (count == 0) {
      result.converged = true;  // nothing in reach: estimate stays put
      result.final_shift = 0.0;
      return result;
    }
    const Point2D next{sum_x / count, sum_y / count};
    result.final_shift = distance(next, result.mode);
    result.mode = next;
    ++result.iterations;
    if (result.final_shift < kShiftTolerance) {
      result.converged = true;
      return result;
    }
  }
  return result;
}

Point2D mean_shift_refine(std::span<const Point2D> points, Point2D init, double r_kernel) {
  return mean_shift_refine_full(points, init, r_kernel).mode;
}

std::optional<Point2D> localize_person(std::span<const Point2D> points,
                                       std::span<const double> ranges,
                                       const LabelParams& params) {
  if (points.size() != ranges.size()) {
    throw ValidationError("localize_person: points/ranges size mismatch");
  }
  if (static_cast<int>(points.size()) < std::max(1, params.min_frustum_points)) {
    return std::nullopt;
  }
  const RangeSplit split = kmeans_range_split(ranges);
  Point2D init{0.0, 0.0};
  for (const int k : split.close) {
    init = init + points[static_cast<std::size_t>(k)];
  }
  init = init * (1.0 / static_cast<double>(split.close.size()));
  return mean_shift_refine(points, init, params.r_kernel);
}

PointLabels generate_labels(const Scan& scan, std::span<const DetBox> boxes,
                            const CameraCalib& calib, const FilterParams& fp,
                            const LabelParams& lp) {
  lp.validate();
  const int n = scan.size();
  PointLabels out;
  out.frame_id = scan.frame_id;
  out.cls.assign(static_cast<std::size_t>(n), PointClass::kNeg);

  const std::vector<Point2D> points = polar_to_cartesian(scan);
  const auto projections = project_scan(scan, calib);

  // Negative mask: a point projecting into any widened box (kept or
  // discarded) cannot be a negative sample.
  std::vector<char> in_any_box(static_cast<std::size_t>(n), 0);
  for (const DetBox& box : boxes) {
    for (const int k : box_members(projections, box, /*bottom_half=*/false, lp.widen)) {
      in_any_box[static_cast<std::size_t>(k)] = 1;
    }
  }

  // One center candidate per kept box, localized from the bottom-half frustum.
  const FilteredBoxes filtered = filter_boxes(boxes, fp);
  std::vector<Point2D> candidates;
  for (const DetBox& box : filtered.kept) {
    const std::vector<int> frustum = box_members(projections, box, /*bottom_half=*/true, 0.0);
    std::vector<Point2D> frustum_points;
    std::vector<double> frustum_ranges;
    frustum_points.reserve(frustum.size());
    frustum_ranges.reserve(frustum.size());
    for (const int k : frustum) {
      frustum_points.push_back(points[static_cast<std::size_t>(k)]);
      frustum_ranges.push_back(scan.ranges[static_cast<std::size_t>(k)]);
    }
    if (const auto center = localize_person(frustum_points, frustum_ranges, lp)) {
      candidates.push_back(*center);
    }
  }

  // Support counting happens against the full candidate set; the demotion
  // pass below is applied once, not iterated.
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  std::vector<int> support(candidates.size(), 0);
  for (int k = 0; k < n; ++k) {
    const int c = nearest_center_within(points[static_cast<std::size_t>(k)], candidates, lp.r_pos);
    assignment[static_cast<std::size_t>(k)] = c;
    if (c >= 0) ++support[static_cast<std::size_t>(c)];
  }

  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (support[c] >= lp.min_support) out.centers.push_back(candidates[c]);
  }

  for (int k = 0; k < n; ++k) {
    const Point2D& p = points[static_cast<std::size_t>(k)];
    const int surviving = nearest_center_within(p, out.centers, lp.r_pos);
    if (surviving >= 0) {
      out.cls[static_cast<std::size_t>(k)] = PointClass::kPos;
    } else if (assignment[static_cast<std::size_t>(k)] >= 0) {
      // Positive only of a discarded center.
      out.cls[static_cast<std::size_t>(k)] = PointClass::kIgnore;
    } else if (in_any_box[static_cast<std::size_t>(k)]) {
      out.cls[static_cast<std::size_t>(k)] = PointClass::kIgnore;
    }  // else stays NEG

    const int reg_center = nearest_center_within(p, out.centers, lp.r_reg);
    if (reg_center >= 0) {
      out.reg.emplace(static_cast<std::int32_t>(k),
                      out.centers[static_cast<std::size_t>(reg_center)] - p);
    }
  }
  return out;
}

PointLabels labels_from_centers(const Scan& scan, std::span<const Point2D> centers,
                                const LabelParams& lp) {
  lp.validate();
  const int n = scan.size();
  PointLabels out;
  out.frame_id = scan.frame_id;
  out.cls.assign(static_cast<std::size_t>(n), PointClass::kNeg);
  out.centers.assign(centers.begin(), centers.end());

  const std::vector<Point2D> points = polar_to_cartesian(scan);
  for (int k = 0; k < n; ++k) {
    const Point2D& p = points[static_cast<std::size_t>(k)];
    const int c = nearest_center_within(p, centers, lp.r_reg);
    if (c < 0) continue;
    out.reg.emplace(static_cast<std::int32_t>(k), centers[static_cast<std::size_t>(c)] - p);
    const double d = distance(p, centers[static_cast<std::size_t>(c)]);
    out.cls[static_cast<std::size_t>(k)] = d <= lp.r_pos ? PointClass::kPos : PointClass::kIgnore;
  }
  return out;
}

PointLabels clean_labels(const PointLabels& labels, const PointLabels& gt, CleanMode mode) {
  if (labels.cls.size() != gt.cls.size()) {
    throw ValidationError("clean_labels: point count mismatch");
  }
  if (labels.frame_id != gt.frame_id) {
    throw ValidationError("clean_labels: frame id mismatch");
  }
  const bool remove_fp = mode != CleanMode::kRemoveFn;
  const bool remove_fn = mode != CleanMode::kRemoveFp;

  PointLabels out = labels;
  for (std::size_t k = 0; k < out.cls.size(); ++k) {
    if (remove_fp && out.cls[k] == PointClass::kPos && gt.cls[k] == PointClass::kNeg) {
      out.cls[k] = gt.cls[k];
    }
    if (remove_fn && out.cls[k] != PointClass::kPos && gt.cls[k] == PointClass::kPos) {
      out.cls[k] = PointClass::kPos;
    }
  }
  if (mode == CleanMode::kBothCorrectReg) {
    for (const auto& [index, offset] : gt.reg) out.reg[index] = offset;
  }
  return out;
}

PointLabels inject_label_flips(const PointLabels& labels, double fraction, Rng& rng) {
  if (fraction < 0.0 || fraction > 1.0) {
    throw ValidationError("inject_label_flips: fraction outside [0, 1]");
  }
  std::vector<std::size_t> labeled;
  for (std::size_t k = 0; k < labels.cls.size(); ++k) {
    if (labels.cls[k] != PointClass::kIgnore) labeled.push_back(k);
  }
  const auto n_flips =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(labeled.size())));
  rng.shuffle(labeled);

  PointLabels out = labels;
  for (std::size_t i = 0; i < n_flips; ++i) {
    auto& cls = out.cls[labeled[i]];
    cls = cls == PointClass::kPos ? PointClass::kNeg : PointClass::kPos;
  }
  return out;
}

}  // namespace lpl
