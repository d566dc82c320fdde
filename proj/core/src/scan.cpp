#include "lpl/scan.hpp"

#include <cmath>
#include <string>

#include "lpl/errors.hpp"

namespace lpl {

void Scan::validate() const {
  if (ranges.empty()) throw ValidationError("scan: needs at least one beam");
  if (!std::isfinite(max_range) || max_range <= 0.0) {
    throw ValidationError("scan: max_range must be positive");
  }
  if (!std::isfinite(angle_min) || !std::isfinite(angle_increment) || angle_increment <= 0.0) {
    throw ValidationError("scan: angles must be finite with positive increment");
  }
  const double span = angle_increment * static_cast<double>(ranges.size() - 1);
  if (span > kTwoPi + 1e-9) throw ValidationError("scan: azimuth span exceeds a full turn");
  for (std::size_t k = 0; k < ranges.size(); ++k) {
    const double r = ranges[k];
    if (!std::isfinite(r) || r <= 0.0 || r > max_range) {
      throw ValidationError("scan: range out of (0, max_range] at beam " + std::to_string(k));
    }
  }
}

std::vector<Point2D> polar_to_cartesian(const Scan& scan) {
  std::vector<Point2D> points;
  points.reserve(scan.ranges.size());
  for (int k = 0; k < scan.size(); ++k) {
    const double phi = scan.angle(k);
    const double r = scan.ranges[static_cast<std::size_t>(k)];
    points.push_back({r * std::cos(phi), r * std::sin(phi)});
  }
  return points;
}

}  // namespace lpl
