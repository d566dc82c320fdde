#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <cmath>

namespace lpl {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// 2D point/vector in meters. LiDAR frame convention: x forward, y left.
struct Point2D {
  double x = 0.0;
  double y = 0.0;

  Point2D operator+(const Point2D& o) const { return {x + o.x, y + o.y}; }
  Point2D operator-(const Point2D& o) const { return {x - o.x, y - o.y}; }
  Point2D operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Point2D& o) const = default;
  double norm() const { return std::hypot(x, y); }
};

inline double squared_distance(const Point2D& a, const Point2D& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double distance(const Point2D& a, const Point2D& b) {
  return std::sqrt(squared_distance(a, b));
}

/// Proper rigid transform p' = R p + t.
struct RigidTransform3 {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }

  bool is_rigid(double tol = 1e-9) const {
    const Eigen::Matrix3d gram = rotation.transpose() * rotation;
    return (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation.determinant() - 1.0) <= tol;
  }
};

/// Planar pose (position + heading).
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

inline Point2D world_to_local(const Pose2D& pose, const Point2D& p) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  const double dx = p.x - pose.x;
  const double dy = p.y - pose.y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

inline Point2D local_to_world(const Pose2D& pose, const Point2D& p) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  return {pose.x + c * p.x - s * p.y, pose.y + s * p.x + c * p.y};
}

}  // namespace lpl
