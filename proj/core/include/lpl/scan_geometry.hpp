#pragma once

#include <optional>
#include <span>
#include <vector>

#include "lpl/geometry.hpp"
#include "lpl/scan.hpp"

namespace lpl {

/// Pinhole intrinsics plus the rigid base->camera transform. The base frame
/// has z up with the scan plane at height h_lidar; the camera frame has z
/// forward and y down.
struct CameraCalib {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int image_width = 0;
  int image_height = 0;
  double h_lidar = 0.0;
  RigidTransform3 extrinsic;

  void validate() const;
};

/// Image-space person box with detector confidence.
struct DetBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  double score = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }

  void validate() const;
};

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

/// Intersection area of two boxes (0 when disjoint).
double box_intersection_area(const DetBox& a, const DetBox& b);

/// Same center, width scaled by (1 + widen).
DetBox widen_box(const DetBox& box, double widen);

/// Lifts a scan-plane point to 3D, applies the extrinsic and projects through
/// the pinhole model. Returns nullopt for points at or behind the camera and
/// for projections outside the image rectangle.
std::optional<Pixel> project_point(const Point2D& p, const CameraCalib& calib);

/// Projection of every beam; sentinel (no-return) beams yield nullopt.
std::vector<std::optional<Pixel>> project_scan(const Scan& scan, const CameraCalib& calib);

/// Membership over precomputed projections. Box edges are closed; with
/// bottom_half the v interval is [(y_min+y_max)/2, y_max].
std::vector<int> box_members(std::span<const std::optional<Pixel>> projections, const DetBox& box,
                             bool bottom_half, double widen);

/// Beams whose projection falls in the bottom half of the box.
std::vector<int> points_in_box_bottom(const Scan& scan, const DetBox& box, const CameraCalib& calib);

/// Beams projecting into the full box, width enlarged by `widen`.
std::vector<int> points_in_box_full(const Scan& scan, const DetBox& box, const CameraCalib& calib,
                                    double widen);

}  // namespace lpl
