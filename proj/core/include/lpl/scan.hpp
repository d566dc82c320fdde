#pragma once

#include <cstdint>
#include <vector>

#include "lpl/geometry.hpp"

namespace lpl {

/// One LiDAR revolution on a fixed angular grid. Beam k has azimuth
/// angle_min + k * angle_increment; azimuths are strictly increasing and span
/// at most a full turn. No-return beams carry the sentinel range max_range.
struct Scan {
  std::int64_t frame_id = 0;
  double timestamp = 0.0;
  double angle_min = -kPi;
  double angle_increment = 0.0;
  double max_range = 30.0;
  std::vector<double> ranges;

  int size() const { return static_cast<int>(ranges.size()); }
  double angle(int k) const { return angle_min + k * angle_increment; }
  bool no_return(int k) const { return ranges[static_cast<std::size_t>(k)] >= max_range; }

  /// Throws ValidationError when an invariant is violated.
  void validate() const;
};

/// Beam k maps to (r_k cos phi_k, r_k sin phi_k). Sentinel beams produce a
/// point too; callers filter via Scan::no_return.
std::vector<Point2D> polar_to_cartesian(const Scan& scan);

}  // namespace lpl
