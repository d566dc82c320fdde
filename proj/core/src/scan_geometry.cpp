#include "lpl/scan_geometry.hpp"

#include <algorithm>
#include <cmath>

#include "lpl/errors.hpp"

namespace lpl {

void CameraCalib::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ValidationError("calib: focal lengths must be positive");
  if (image_width <= 0 || image_height <= 0) {
    throw ValidationError("calib: image dimensions must be positive");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(h_lidar)) {
    throw ValidationError("calib: non-finite parameter");
  }
  if (!extrinsic.is_rigid(1e-6)) {
    throw ValidationError("calib: extrinsic is not a proper rigid transform");
  }
}

void DetBox::validate() const {
  if (!(x_min < x_max) || !(y_min < y_max)) throw ValidationError("box: degenerate extents");
  if (!(score >= 0.0) || !(score <= 1.0)) throw ValidationError("box: score outside [0, 1]");
}

double box_intersection_area(const DetBox& a, const DetBox& b) {
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

DetBox widen_box(const DetBox& box, double widen) {
  const double extra = 0.5 * widen * box.width();
  DetBox out = box;
  out.x_min -= extra;
  out.x_max += extra;
  return out;
}

std::optional<Pixel> project_point(const Point2D& p, const CameraCalib& calib) {
  const Eigen::Vector3d lifted(p.x, p.y, calib.h_lidar);
  const Eigen::Vector3d cam = calib.extrinsic.apply(lifted);
  if (cam.z() <= 0.0) return std::nullopt;
  const double u = calib.fx * cam.x() / cam.z() + calib.cx;
  const double v = calib.fy * cam.y() / cam.z() + calib.cy;
  if (u < 0.0 || u > static_cast<double>(calib.image_width) || v < 0.0 ||
      v > static_cast<double>(calib.image_height)) {
    return std::nullopt;
  }
  return Pixel{u, v};
}

std::vector<std::optional<Pixel>> project_scan(const Scan& scan, const CameraCalib& calib) {
  const std::vector<Point2D> points = polar_to_cartesian(scan);
  std::vector<std::optional<Pixel>> projections(points.size());
  for (int k = 0; k < scan.size(); ++k) {
    if (scan.no_return(k)) continue;  // sentinel beams never join a frustum
    projections[static_cast<std::size_t>(k)] = project_point(points[static_cast<std::size_t>(k)], calib);
  }
  return projections;
}

std::vector<int> box_members(std::span<const std::optional<Pixel>> projections, const DetBox& box,
                             bool bottom_half, double widen) {
  const DetBox region = widen == 0.0 ? box : widen_box(box, widen);
  const double v_min = bottom_half ? 0.5 * (box.y_min + box.y_max) : region.y_min;
  std::vector<int> members;
  for (std::size_t k = 0; k < projections.size(); ++k) {
    if (!projections[k]) continue;
    const Pixel& px = *projections[k];
    if (px.u >= region.x_min && px.u <= region.x_max && px.v >= v_min && px.v <= region.y_max) {
      members.push_back(static_cast<int>(k));
    }
  }
  return members;
}

std::vector<int> points_in_box_bottom(const Scan& scan, const DetBox& box,
                                      const CameraCalib& calib) {
  const auto projections = project_scan(scan, calib);
  return box_members(projections, box, /*bottom_half=*/true, /*widen=*/0.0);
}

std::vector<int> points_in_box_full(const Scan& scan, const DetBox& box, const CameraCalib& calib,
                                    double widen) {
  const auto projections = project_scan(scan, calib);
  return box_members(projections, box, /*bottom_half=*/false, widen);
}

}  // namespace lpl
