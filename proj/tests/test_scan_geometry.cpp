#include <doctest.h>

#include <cmath>

#include "lpl/errors.hpp"
#include "lpl/rng.hpp"
#include "lpl/scan_geometry.hpp"
#include "lpl/synth_world.hpp"

using namespace lpl;

namespace {

Scan forward_sector_scan(int n, double fov, double range) {
  Scan scan;
  scan.angle_min = -0.5 * fov;
  scan.angle_increment = fov / n;
  scan.max_range = 30.0;
  scan.ranges.assign(static_cast<std::size_t>(n), range);
  return scan;
}

}  // namespace

TEST_CASE("polar_to_cartesian axis cases") {
  Scan scan;
  scan.angle_min = 0.0;
  scan.angle_increment = kPi / 4.0;
  scan.max_range = 30.0;
  scan.ranges = {1.0, std::sqrt(2.0), 2.0};  // angles 0, pi/4, pi/2

  const auto points = polar_to_cartesian(scan);
  REQUIRE(points.size() == 3);
  CHECK(points[0].x == doctest::Approx(1.0));
  CHECK(points[0].y == doctest::Approx(0.0));
  CHECK(points[1].x == doctest::Approx(1.0));
  CHECK(points[1].y == doctest::Approx(1.0));
  CHECK(points[2].x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(points[2].y == doctest::Approx(2.0));
}

TEST_CASE("polar round trip reproduces ranges and angles") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Scan scan;
    const int n = static_cast<int>(rng.uniform_int(5, 400));
    scan.angle_min = rng.uniform(-kPi, 0.0);
    scan.angle_increment = rng.uniform(0.001, kTwoPi / n);
    scan.max_range = 30.0;
    for (int k = 0; k < n; ++k) scan.ranges.push_back(rng.uniform(0.05, 29.9));
    scan.validate();

    const auto points = polar_to_cartesian(scan);
    for (int k = 0; k < n; ++k) {
      const double r = std::hypot(points[k].x, points[k].y);
      double phi = std::atan2(points[k].y, points[k].x);
      // Undo the atan2 wrap for beams beyond +-pi.
      const double expected_phi = scan.angle(k);
      while (phi < expected_phi - kPi) phi += kTwoPi;
      while (phi > expected_phi + kPi) phi -= kTwoPi;
      CHECK(r == doctest::Approx(scan.ranges[k]).epsilon(1e-9));
      CHECK(phi == doctest::Approx(expected_phi).epsilon(1e-9));
    }
  }
}

TEST_CASE("scan validation rejects bad invariants") {
  Scan scan = forward_sector_scan(10, 1.0, 5.0);
  CHECK_NOTHROW(scan.validate());

  Scan empty = scan;
  empty.ranges.clear();
  CHECK_THROWS_AS(empty.validate(), ValidationError);

  Scan negative = scan;
  negative.ranges[0] = -1.0;
  CHECK_THROWS_AS(negative.validate(), ValidationError);

  Scan beyond = scan;
  beyond.ranges[0] = beyond.max_range + 1.0;
  CHECK_THROWS_AS(beyond.validate(), ValidationError);

  Scan wide = scan;
  wide.angle_increment = 1.0;  // 9 rad span
  CHECK_THROWS_AS(wide.validate(), ValidationError);
}

TEST_CASE("project_point on the optical axis lands on the principal point") {
  // Camera at the scan-plane height: points straight ahead project to
  // (cx, cy) at any distance.
  const CameraCalib calib = make_forward_camera(580, 580, 480, 300, 960, 600, 0.4, 0.4);
  for (const double d : {0.5, 2.0, 7.0, 25.0}) {
    const auto px = project_point({d, 0.0}, calib);
    REQUIRE(px.has_value());
    CHECK(px->u == doctest::Approx(480.0));
    CHECK(px->v == doctest::Approx(300.0));
  }
  CHECK_FALSE(project_point({-1.0, 0.0}, calib).has_value());  // behind the camera
}

TEST_CASE("project_point pinhole arithmetic") {
  // Camera-frame point (1, 0, 2) with fx = 600, cx = 640 gives u = 940.
  CameraCalib calib = make_forward_camera(600, 600, 640, 512, 1280, 1024, 0.0, 0.0);
  const auto px = project_point({2.0, -1.0}, calib);  // maps to camera (1, 0, 2)
  REQUIRE(px.has_value());
  CHECK(px->u == doctest::Approx(940.0));
  CHECK(px->v == doctest::Approx(512.0));
}

TEST_CASE("project_point culls projections outside the image") {
  const CameraCalib calib = make_forward_camera(580, 580, 480, 300, 960, 600, 0.4, 1.0);
  CHECK_FALSE(project_point({0.2, 5.0}, calib).has_value());
}

TEST_CASE("projection is bit-identical under an identity-composed extrinsic") {
  CameraCalib calib = make_forward_camera(580, 580, 480, 300, 960, 600, 0.4, 1.0);
  CameraCalib composed = calib;
  composed.extrinsic.rotation = calib.extrinsic.rotation * Eigen::Matrix3d::Identity();
  composed.extrinsic.translation =
      calib.extrinsic.rotation * Eigen::Vector3d::Zero() + calib.extrinsic.translation;

  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Point2D p{rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
    const auto a = project_point(p, calib);
    const auto b = project_point(p, composed);
    REQUIRE(a.has_value() == b.has_value());
    if (a) {
      CHECK(a->u == b->u);
      CHECK(a->v == b->v);
    }
  }
}

TEST_CASE("camera calib validation") {
  CameraCalib calib = make_forward_camera(580, 580, 480, 300, 960, 600, 0.4, 1.0);
  CHECK_NOTHROW(calib.validate());
  calib.fx = 0.0;
  CHECK_THROWS_AS(calib.validate(), ValidationError);

  CameraCalib skewed = make_forward_camera(580, 580, 480, 300, 960, 600, 0.4, 1.0);
  skewed.extrinsic.rotation(0, 0) = 0.5;  // no longer orthonormal
  CHECK_THROWS_AS(skewed.validate(), ValidationError);
}

TEST_CASE("whole-image box captures every forward beam in its bottom half") {
  // Scan plane below the camera: every projection lands in the lower image
  // half, so a full-image box collects all non-sentinel beams.
  const CameraCalib calib = make_forward_camera(580, 580, 480, 300, 960, 600, 0.4, 1.0);
  Scan scan = forward_sector_scan(41, 0.6, 4.0);
  scan.ranges[7] = scan.max_range;  // one no-return beam

  const DetBox box{0.0, 0.0, 960.0, 600.0, 1.0};
  const auto members = points_in_box_bottom(scan, box, calib);
  REQUIRE(members.size() == 40);
  for (const int k : members) CHECK(k != 7);
}

TEST_CASE("box outside the image collects nothing") {
  const CameraCalib calib = make_forward_camera(580, 580, 480, 300, 960, 600, 0.4, 1.0);
  const Scan scan = forward_sector_scan(21, 0.6, 4.0);
  const DetBox box{-500.0, -500.0, -10.0, -10.0, 1.0};
  CHECK(points_in_box_bottom(scan, box, calib).empty());
  CHECK(points_in_box_full(scan, box, calib, 0.1).empty());
}

TEST_CASE("bottom-half membership is a subset of full membership") {
  const CameraCalib calib = make_forward_camera(580, 580, 480, 300, 960, 600, 0.4, 1.0);
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Scan scan = forward_sector_scan(60, 1.0, 1.0);
    for (auto& r : scan.ranges) r = rng.uniform(0.5, 15.0);
    const double x0 = rng.uniform(0.0, 800.0);
    const double y0 = rng.uniform(0.0, 400.0);
    const DetBox box{x0, y0, x0 + rng.uniform(20.0, 150.0), y0 + rng.uniform(20.0, 190.0), 0.9};

    const auto bottom = points_in_box_bottom(scan, box, calib);
    const auto full = points_in_box_full(scan, box, calib, 0.0);
    for (const int k : bottom) {
      CHECK(std::find(full.begin(), full.end(), k) != full.end());
    }
  }
}

TEST_CASE("widen_box enlarges width symmetrically") {
  const DetBox box{100.0, 40.0, 200.0, 240.0, 0.9};
  const DetBox wide = widen_box(box, 0.1);
  CHECK(wide.width() == doctest::Approx(110.0));
  CHECK(wide.x_min == doctest::Approx(95.0));
  CHECK(wide.x_max == doctest::Approx(205.0));
  CHECK(wide.y_min == box.y_min);
  CHECK(wide.y_max == box.y_max);

  const DetBox same = widen_box(box, 0.0);
  CHECK(same.x_min == box.x_min);
  CHECK(same.x_max == box.x_max);
}

TEST_CASE("point just outside the box joins after widening") {
  std::vector<std::optional<Pixel>> projections = {
      Pixel{203.0, 100.0},  // 3 px beyond the right edge
      Pixel{150.0, 100.0},
      std::nullopt,
  };
  const DetBox box{100.0, 0.0, 200.0, 200.0, 0.9};
  const auto raw = box_members(projections, box, false, 0.0);
  CHECK(raw == std::vector<int>{1});
  const auto widened = box_members(projections, box, false, 0.1);
  CHECK(widened == std::vector<int>{0, 1});
}

TEST_CASE("box membership edges are closed") {
  std::vector<std::optional<Pixel>> projections = {
      Pixel{100.0, 150.0},  // on the left edge, on the half-height line
      Pixel{200.0, 200.0},  // bottom-right corner
      Pixel{100.0, 149.9},  // just above the half-height line
  };
  const DetBox box{100.0, 100.0, 200.0, 200.0, 0.9};
  CHECK(box_members(projections, box, true, 0.0) == std::vector<int>{0, 1});
  CHECK(box_members(projections, box, false, 0.0) == std::vector<int>{0, 1, 2});
}

TEST_CASE("det box validation") {
  CHECK_THROWS_AS((DetBox{10, 10, 10, 20, 0.5}).validate(), ValidationError);
  CHECK_THROWS_AS((DetBox{0, 0, 10, 20, 1.5}).validate(), ValidationError);
  CHECK_NOTHROW((DetBox{0, 0, 10, 20, 0.5}).validate());
}
