#include "lpl/synth_world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "lpl/errors.hpp"

namespace lpl {
namespace {

constexpr std::uint64_t kSaltLayout = 0x4c41594f;  // per-sequence layout stream
constexpr std::uint64_t kSaltScan = 0x5343414e;    // per-frame range noise
constexpr std::uint64_t kSaltBoxes = 0x424f5845;   // per-frame detector noise
constexpr double kRayEpsilon = 1e-9;
constexpr double kMinRange = 1e-3;

double cross(const Point2D& u, const Point2D& v) { return u.x * v.y - u.y * v.x; }

std::optional<double> ray_segment(const Point2D& origin, const Point2D& dir, const Segment& seg) {
  const Point2D edge = seg.b - seg.a;
  const Point2D ao = seg.a - origin;
  const double denom = cross(dir, edge);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t = cross(ao, edge) / denom;
  const double s = cross(ao, dir) / denom;
  if (t <= kRayEpsilon || s < 0.0 || s > 1.0) return std::nullopt;
  return t;
}

std::optional<double> ray_circle(const Point2D& origin, const Point2D& dir, const Circle& circle) {
  const Point2D oc = circle.center - origin;
  const double b = dir.x * oc.x + dir.y * oc.y;
  const double disc = b * b - (oc.x * oc.x + oc.y * oc.y - circle.radius * circle.radius);
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double t1 = b - sq;
  if (t1 > kRayEpsilon) return t1;
  const double t2 = b + sq;
  if (t2 > kRayEpsilon) return t2;
  return std::nullopt;
}

std::pair<Circle, Circle> leg_circles(const Person& person) {
  const double half = 0.5 * person.leg_separation;
  const Point2D lateral{-std::sin(person.heading) * half, std::cos(person.heading) * half};
  return {Circle{person.center + lateral, person.leg_radius},
          Circle{person.center - lateral, person.leg_radius}};
}

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  std::int32_t owner = kOwnerNone;
};

/// Nearest intersection along the ray; `skip_person`/`skip_clutter` exclude
/// one object (used for occlusion tests).
Hit nearest_hit(const Scene& scene, const Point2D& origin, const Point2D& dir,
                int skip_person = -1, int skip_clutter = -1) {
  Hit hit;
  for (std::size_t w = 0; w < scene.walls.size(); ++w) {
    if (const auto t = ray_segment(origin, dir, scene.walls[w]); t && *t < hit.t) {
      hit = {*t, make_owner(OwnerKind::kWall, static_cast<int>(w))};
    }
  }
  for (std::size_t p = 0; p < scene.pillars.size(); ++p) {
    if (const auto t = ray_circle(origin, dir, scene.pillars[p]); t && *t < hit.t) {
      hit = {*t, make_owner(OwnerKind::kPillar, static_cast<int>(p))};
    }
  }
  for (std::size_t c = 0; c < scene.clutter.size(); ++c) {
    if (static_cast<int>(c) == skip_clutter) continue;
    if (const auto t = ray_circle(origin, dir, scene.clutter[c]); t && *t < hit.t) {
      hit = {*t, make_owner(OwnerKind::kClutter, static_cast<int>(c))};
    }
  }
  for (std::size_t i = 0; i < scene.persons.size(); ++i) {
    if (static_cast<int>(i) == skip_person) continue;
    const auto [left, right] = leg_circles(scene.persons[i]);
    for (const Circle& leg : {left, right}) {
      if (const auto t = ray_circle(origin, dir, leg); t && *t < hit.t) {
        hit = {*t, make_owner(OwnerKind::kPerson, static_cast<int>(i))};
      }
    }
  }
  return hit;
}

/// Raw pinhole projection of a base-frame 3D point; no image-rectangle cull.
std::optional<Pixel> pinhole(const CameraCalib& calib, const Eigen::Vector3d& base_point) {
  const Eigen::Vector3d cam = calib.extrinsic.apply(base_point);
  if (cam.z() <= 0.0) return std::nullopt;
  return Pixel{calib.fx * cam.x() / cam.z() + calib.cx, calib.fy * cam.y() / cam.z() + calib.cy};
}

struct BoxCandidate {
  double distance = 0.0;
  DetBox box;  // noise-free, clamped to the image; score left at 0
};

/// Box of a person-shaped object standing at `local` (LiDAR frame). The
/// visibility and occlusion tests use the true geometry; the projection sees
/// the object through a camera yawed by `yaw_error` (calibration error).
std::optional<BoxCandidate> object_box(const Scene& scene, const Pose2D& pose,
                                       const SensorConfig& sensor, const Point2D& local,
                                       double width, double height, double yaw_error,
                                       int skip_person, int skip_clutter) {
  const CameraCalib& calib = sensor.camera;
  const double dist = local.norm();
  if (dist < 1e-6) return std::nullopt;

  const double cy = std::cos(yaw_error);
  const double sy = std::sin(yaw_error);
  const Point2D seen{cy * local.x + sy * local.y, -sy * local.x + cy * local.y};

  const auto torso = pinhole(calib, {seen.x, seen.y, 0.5 * height});
  if (!torso) return std::nullopt;
  if (torso->u < 0.0 || torso->u > calib.image_width || torso->v < 0.0 ||
      torso->v > calib.image_height) {
    return std::nullopt;
  }

  // Occluded when anything else in the scan plane blocks the line of sight.
  const Point2D dir = local * (1.0 / dist);
  const Point2D origin{pose.x, pose.y};
  const Point2D world_dir{std::cos(pose.theta) * dir.x - std::sin(pose.theta) * dir.y,
                          std::sin(pose.theta) * dir.x + std::cos(pose.theta) * dir.y};
  const Hit block = nearest_hit(scene, origin, world_dir, skip_person, skip_clutter);
  if (block.t < dist - 0.5 * width) return std::nullopt;

  const Eigen::Vector3d cam = calib.extrinsic.apply({seen.x, seen.y, 0.5 * height});
  const double half_w_px = calib.fx * 0.5 * width / cam.z();
  const auto top = pinhole(calib, {seen.x, seen.y, height});
  const auto bottom = pinhole(calib, {seen.x, seen.y, 0.0});
  if (!top || !bottom) return std::nullopt;

  DetBox box{torso->u - half_w_px, top->v, torso->u + half_w_px, bottom->v, 0.0};
  box.x_min = std::max(box.x_min, 0.0);
  box.y_min = std::max(box.y_min, 0.0);
  box.x_max = std::min(box.x_max, static_cast<double>(calib.image_width));
  box.y_max = std::min(box.y_max, static_cast<double>(calib.image_height));
  if (box.width() < 1.0 || box.height() < 2.0) return std::nullopt;
  return BoxCandidate{dist, box};
}

}  // namespace

void SensorConfig::validate() const {
  if (n_beams < 2) throw ValidationError("sensor: n_beams must be >= 2");
  if (!(fov > 0.0) || fov > kTwoPi + 1e-9) throw ValidationError("sensor: fov outside (0, 2*pi]");
  if (!(max_range > 0.0)) throw ValidationError("sensor: max_range must be positive");
  if (range_noise_sigma < 0.0) throw ValidationError("sensor: range_noise_sigma must be >= 0");
  camera.validate();
  const DetectorNoise& n = detector_noise;
  if (n.score_mean_decay < 0.0 || n.score_noise_sigma < 0.0 || n.dropout_base < 0.0 ||
      n.dropout_per_meter < 0.0 || n.fp_rate < 0.0 || n.box_jitter_sigma < 0.0 ||
      n.yaw_error_sigma < 0.0 || n.phantom_rate < 0.0 ||
      n.phantom_box_prob < 0.0 || n.phantom_box_prob > 1.0) {
    throw ValidationError("sensor: detector noise parameters out of range");
  }
}

void SimConfig::validate() const {
  sensor.validate();
  const WorldConfig& w = world;
  if (!(w.arena_x_max > w.arena_x_min) || !(w.arena_y_half > 0.0)) {
    throw ValidationError("world: arena extents are degenerate");
  }
  if (w.pillars_min < 0 || w.pillars_max < w.pillars_min) {
    throw ValidationError("world: bad pillar count range");
  }
  if (w.clutter_min < 0 || w.clutter_max < w.clutter_min) {
    throw ValidationError("world: bad clutter count range");
  }
  if (!(w.clutter_range_min > 0.0) || w.clutter_range_max < w.clutter_range_min) {
    throw ValidationError("world: bad clutter range");
  }
  if (w.persons_min < 0 || w.persons_max < w.persons_min) {
    throw ValidationError("world: bad person count range");
  }
  if (!(w.speed_min > 0.0) || w.speed_max < w.speed_min) {
    throw ValidationError("world: bad speed range");
  }
  if (!(w.sector_half_angle > 0.0) || w.sector_half_angle > kPi) {
    throw ValidationError("world: sector_half_angle outside (0, pi]");
  }
  if (!(w.spawn_range_min > 0.0) || w.spawn_range_max < w.spawn_range_min) {
    throw ValidationError("world: bad spawn range");
  }
  if (sequences.train < 0 || sequences.test < 0 || sequences.train + sequences.test < 1) {
    throw ValidationError("sequences: need at least one sequence");
  }
  if (sequences.frames < 1) throw ValidationError("sequences: frames must be >= 1");
  if (!(sequences.dt > 0.0)) throw ValidationError("sequences: dt must be positive");
}

RaycastResult raycast_scan(const Scene& scene, const Pose2D& pose, const SensorConfig& sensor,
                           Rng& rng) {
  RaycastResult result;
  Scan& scan = result.scan;
  scan.angle_increment = sensor.fov / sensor.n_beams;
  scan.angle_min = -0.5 * sensor.fov;
  scan.max_range = sensor.max_range;
  scan.ranges.resize(static_cast<std::size_t>(sensor.n_beams));
  result.owner.assign(static_cast<std::size_t>(sensor.n_beams), kOwnerNone);

  const Point2D origin{pose.x, pose.y};
  for (int k = 0; k < sensor.n_beams; ++k) {
    const double phi = pose.theta + scan.angle(k);
    const Point2D dir{std::cos(phi), std::sin(phi)};
    const Hit hit = nearest_hit(scene, origin, dir);
    double range = sensor.max_range;
    if (hit.t <= sensor.max_range) {
      range = std::clamp(hit.t + rng.normal(0.0, sensor.range_noise_sigma), kMinRange,
                         sensor.max_range);
      result.owner[static_cast<std::size_t>(k)] = hit.owner;
    }
    scan.ranges[static_cast<std::size_t>(k)] = range;
  }
  return result;
}

std::vector<DetBox> true_boxes(const Scene& scene, const Pose2D& pose,
                               const SensorConfig& sensor) {
  std::vector<DetBox> boxes;
  for (std::size_t i = 0; i < scene.persons.size(); ++i) {
    const Person& person = scene.persons[i];
    const Point2D local = world_to_local(pose, person.center);
    auto candidate = object_box(scene, pose, sensor, local, person.width, person.height, 0.0,
                                static_cast<int>(i), -1);
    if (!candidate) continue;
    candidate->box.score =
        std::clamp(1.0 - sensor.detector_noise.score_mean_decay * candidate->distance, 0.0, 1.0);
    boxes.push_back(candidate->box);
  }
  return boxes;
}

namespace {

// Jitter corners, perturb the score, drop, re-clamp. Returns false when the
// box is dropped or degenerates.
bool apply_box_noise(DetBox& box, double distance, const SensorConfig& sensor, Rng& rng) {
  const DetectorNoise& noise = sensor.detector_noise;
  const CameraCalib& calib = sensor.camera;
  box.x_min += rng.normal(0.0, noise.box_jitter_sigma);
  box.y_min += rng.normal(0.0, noise.box_jitter_sigma);
  box.x_max += rng.normal(0.0, noise.box_jitter_sigma);
  box.y_max += rng.normal(0.0, noise.box_jitter_sigma);
  box.score = std::clamp(box.score + rng.normal(0.0, noise.score_noise_sigma), 0.0, 1.0);

  const double p_drop =
      std::clamp(noise.dropout_base + noise.dropout_per_meter * distance, 0.0, 1.0);
  if (p_drop > 0.0 && rng.uniform() < p_drop) return false;

  if (box.x_min > box.x_max) std::swap(box.x_min, box.x_max);
  if (box.y_min > box.y_max) std::swap(box.y_min, box.y_max);
  box.x_min = std::clamp(box.x_min, 0.0, static_cast<double>(calib.image_width));
  box.x_max = std::clamp(box.x_max, 0.0, static_cast<double>(calib.image_width));
  box.y_min = std::clamp(box.y_min, 0.0, static_cast<double>(calib.image_height));
  box.y_max = std::clamp(box.y_max, 0.0, static_cast<double>(calib.image_height));
  return box.width() >= 1.0 && box.height() >= 2.0;
}

}  // namespace

std::vector<DetBox> render_detections(const Scene& scene, const Pose2D& pose,
                                      const SensorConfig& sensor,
                                      const SequenceEffects& effects, Rng& rng) {
  const DetectorNoise& noise = sensor.detector_noise;
  const CameraCalib& calib = sensor.camera;
  std::vector<DetBox> boxes;
  for (std::size_t i = 0; i < scene.persons.size(); ++i) {
    const Person& person = scene.persons[i];
    const Point2D local = world_to_local(pose, person.center);
    auto candidate = object_box(scene, pose, sensor, local, person.width, person.height,
                                effects.yaw_error, static_cast<int>(i), -1);
    if (!candidate) continue;
    DetBox box = candidate->box;
    box.score = std::clamp(1.0 - noise.score_mean_decay * candidate->distance, 0.0, 1.0);
    if (apply_box_noise(box, candidate->distance, sensor, rng)) boxes.push_back(box);
  }

  // Phantom spots: the detector keeps "seeing" a person at these positions.
  for (const Point2D& phantom : effects.phantoms) {
    if (noise.phantom_box_prob <= 0.0 || rng.uniform() >= noise.phantom_box_prob) continue;
    const Point2D local = world_to_local(pose, phantom);
    auto candidate = object_box(scene, pose, sensor, local, 0.5, 1.7, effects.yaw_error, -1, -1);
    if (!candidate) continue;
    DetBox box = candidate->box;
    box.score = std::clamp(0.93 - noise.score_mean_decay * candidate->distance, 0.0, 1.0);
    if (apply_box_noise(box, candidate->distance, sensor, rng)) boxes.push_back(box);
  }

  const int n_false = rng.poisson(noise.fp_rate);
  for (int i = 0; i < n_false; ++i) {
    const double h = rng.uniform(0.15, 0.75) * calib.image_height;
    const double w = rng.uniform(0.20, 0.42) * h;  // person-like aspect ratio
    const double u0 = rng.uniform(0.0, std::max(1.0, calib.image_width - w));
    const double v0 = rng.uniform(0.0, std::max(1.0, calib.image_height - h));
    boxes.push_back({u0, v0, std::min(u0 + w, static_cast<double>(calib.image_width)),
                     std::min(v0 + h, static_cast<double>(calib.image_height)),
                     rng.uniform(0.5, 0.98)});
  }
  return boxes;
}

std::vector<Point2D> person_centers_local(const Scene& scene, const Pose2D& pose) {
  std::vector<Point2D> centers;
  centers.reserve(scene.persons.size());
  for (const Person& person : scene.persons) {
    centers.push_back(world_to_local(pose, person.center));
  }
  return centers;
}

std::vector<Point2D> gt_annotations(const Scan& scan, const Scene& scene, const Pose2D& pose) {
  constexpr double kRadius = 0.5;
  constexpr int kMinPoints = 5;
  const std::vector<Point2D> points = polar_to_cartesian(scan);
  std::vector<Point2D> kept;
  for (const Point2D& center : person_centers_local(scene, pose)) {
    int count = 0;
    for (int k = 0; k < scan.size(); ++k) {
      if (scan.no_return(k)) continue;
      if (squared_distance(points[static_cast<std::size_t>(k)], center) <= kRadius * kRadius) {
        if (++count >= kMinPoints) break;
      }
    }
    if (count >= kMinPoints) kept.push_back(center);
  }
  return kept;
}

CameraCalib make_forward_camera(double fx, double fy, double cx, double cy, int width, int height,
                                double h_lidar, double h_camera) {
  CameraCalib calib;
  calib.fx = fx;
  calib.fy = fy;
  calib.cx = cx;
  calib.cy = cy;
  calib.image_width = width;
  calib.image_height = height;
  calib.h_lidar = h_lidar;
  // Base x-forward/z-up to camera z-forward/y-down, camera at height h_camera.
  calib.extrinsic.rotation << 0, -1, 0, 0, 0, -1, 1, 0, 0;
  calib.extrinsic.translation = Eigen::Vector3d(0.0, h_camera, 0.0);
  return calib;
}

SimConfig default_sim_config() {
  SimConfig config;
  config.sensor.camera = make_forward_camera(580.0, 580.0, 640.0, 360.0, 1280, 720, 0.4, 1.0);
  return config;
}

SimConfig source_domain_config() {
  SimConfig config = default_sim_config();
  config.sensor.n_beams = 873;
  config.sensor.range_noise_sigma = 0.03;
  config.sensor.detector_noise.box_jitter_sigma = 5.0;
  config.sensor.detector_noise.dropout_base = 0.08;
  config.sensor.detector_noise.fp_rate = 0.5;
  config.sensor.detector_noise.score_mean_decay = 0.03;
  config.world.arena_x_max = 9.0;
  config.world.arena_y_half = 4.5;
  config.world.pillars_min = 1;
  config.world.pillars_max = 3;
  config.world.persons_min = 1;
  config.world.persons_max = 5;
  config.world.speed_min = 0.3;
  config.world.speed_max = 1.0;
  config.world.spawn_range_max = 7.0;
  return config;
}

namespace {

void reject_unknown_keys(const toml::Value& root) {
  static const std::map<std::string, std::vector<std::string>> schema = {
      {"sensor", {"n_beams", "fov", "max_range", "range_noise_sigma"}},
      {"camera", {"fx", "fy", "cx", "cy", "image_width", "image_height", "h_lidar", "h_camera"}},
      {"camera_noise",
       {"score_mean_decay", "score_noise_sigma", "dropout_base", "dropout_per_meter", "fp_rate",
        "box_jitter_sigma", "yaw_error_sigma", "phantom_rate", "phantom_box_prob"}},
      {"world",
       {"arena_x_min", "arena_x_max", "arena_y_half", "pillars_min", "pillars_max", "clutter_min",
        "clutter_max", "clutter_range_min", "clutter_range_max", "persons_min", "persons_max",
        "speed_min", "speed_max", "sector_half_angle", "spawn_range_min", "spawn_range_max"}},
      {"sequences", {"train", "test", "frames", "dt"}},
  };
  for (const auto& [section, value] : root.as_table()) {
    const auto it = schema.find(section);
    if (it == schema.end()) {
      throw ValidationError("config: unknown section [" + section + "]");
    }
    for (const auto& [key, unused] : value.as_table()) {
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end()) {
        throw ValidationError("config: unknown key '" + section + "." + key + "'");
      }
    }
  }
}

}  // namespace

SimConfig sim_config_from_toml(const toml::Value& root, const SimConfig& base) {
  reject_unknown_keys(root);
  SimConfig config = base;

  config.sensor.n_beams = static_cast<int>(root.get_int("sensor.n_beams", config.sensor.n_beams));
  config.sensor.fov = root.get_double("sensor.fov", config.sensor.fov);
  config.sensor.max_range = root.get_double("sensor.max_range", config.sensor.max_range);
  config.sensor.range_noise_sigma =
      root.get_double("sensor.range_noise_sigma", config.sensor.range_noise_sigma);

  const CameraCalib& cam = config.sensor.camera;
  const double h_camera = cam.extrinsic.translation.y();  // forward camera: t = (0, h_cam, 0)
  config.sensor.camera = make_forward_camera(
      root.get_double("camera.fx", cam.fx), root.get_double("camera.fy", cam.fy),
      root.get_double("camera.cx", cam.cx), root.get_double("camera.cy", cam.cy),
      static_cast<int>(root.get_int("camera.image_width", cam.image_width)),
      static_cast<int>(root.get_int("camera.image_height", cam.image_height)),
      root.get_double("camera.h_lidar", cam.h_lidar),
      root.get_double("camera.h_camera", h_camera));

  DetectorNoise& noise = config.sensor.detector_noise;
  noise.score_mean_decay = root.get_double("camera_noise.score_mean_decay", noise.score_mean_decay);
  noise.score_noise_sigma =
      root.get_double("camera_noise.score_noise_sigma", noise.score_noise_sigma);
  noise.dropout_base = root.get_double("camera_noise.dropout_base", noise.dropout_base);
  noise.dropout_per_meter =
      root.get_double("camera_noise.dropout_per_meter", noise.dropout_per_meter);
  noise.fp_rate = root.get_double("camera_noise.fp_rate", noise.fp_rate);
  noise.box_jitter_sigma = root.get_double("camera_noise.box_jitter_sigma", noise.box_jitter_sigma);
  noise.yaw_error_sigma = root.get_double("camera_noise.yaw_error_sigma", noise.yaw_error_sigma);
  noise.phantom_rate = root.get_double("camera_noise.phantom_rate", noise.phantom_rate);
  noise.phantom_box_prob =
      root.get_double("camera_noise.phantom_box_prob", noise.phantom_box_prob);

  WorldConfig& world = config.world;
  world.arena_x_min = root.get_double("world.arena_x_min", world.arena_x_min);
  world.arena_x_max = root.get_double("world.arena_x_max", world.arena_x_max);
  world.arena_y_half = root.get_double("world.arena_y_half", world.arena_y_half);
  world.pillars_min = static_cast<int>(root.get_int("world.pillars_min", world.pillars_min));
  world.pillars_max = static_cast<int>(root.get_int("world.pillars_max", world.pillars_max));
  world.clutter_min = static_cast<int>(root.get_int("world.clutter_min", world.clutter_min));
  world.clutter_max = static_cast<int>(root.get_int("world.clutter_max", world.clutter_max));
  world.clutter_range_min = root.get_double("world.clutter_range_min", world.clutter_range_min);
  world.clutter_range_max = root.get_double("world.clutter_range_max", world.clutter_range_max);
  world.persons_min = static_cast<int>(root.get_int("world.persons_min", world.persons_min));
  world.persons_max = static_cast<int>(root.get_int("world.persons_max", world.persons_max));
  world.speed_min = root.get_double("world.speed_min", world.speed_min);
  world.speed_max = root.get_double("world.speed_max", world.speed_max);
  world.sector_half_angle = root.get_double("world.sector_half_angle", world.sector_half_angle);
  world.spawn_range_min = root.get_double("world.spawn_range_min", world.spawn_range_min);
  world.spawn_range_max = root.get_double("world.spawn_range_max", world.spawn_range_max);

  SequencesConfig& seq = config.sequences;
  seq.train = static_cast<int>(root.get_int("sequences.train", seq.train));
  seq.test = static_cast<int>(root.get_int("sequences.test", seq.test));
  seq.frames = static_cast<int>(root.get_int("sequences.frames", seq.frames));
  seq.dt = root.get_double("sequences.dt", seq.dt);

  config.validate();
  return config;
}

namespace {

struct WalkingPerson {
  Person person;
  Point2D waypoint;
  double speed = 0.0;
  double angle_lo = 0.0;  // private angular lane within the sector
  double angle_hi = 0.0;
};

Point2D sample_sector_point(const WorldConfig& world, std::span<const Circle> pillars, Rng& rng,
                            double angle_lo, double angle_hi) {
  for (int attempt = 0; attempt < 32; ++attempt) {
    const double angle = rng.uniform(angle_lo, angle_hi);
    const double radius = rng.uniform(world.spawn_range_min, world.spawn_range_max);
    const Point2D p{radius * std::cos(angle), radius * std::sin(angle)};
    bool clear = true;
    for (const Circle& pillar : pillars) {
      if (distance(p, pillar.center) < pillar.radius + 0.4) {
        clear = false;
        break;
      }
    }
    if (clear) return p;
  }
  return {world.spawn_range_min * std::cos(0.5 * (angle_lo + angle_hi)),
          world.spawn_range_min * std::sin(0.5 * (angle_lo + angle_hi))};
}

}  // namespace

SequenceData generate_sequence(const SimConfig& config, std::uint64_t seed, int sequence_index) {
  config.validate();
  const WorldConfig& world = config.world;
  Rng layout_rng = derive_rng(seed, kSaltLayout, static_cast<std::uint64_t>(sequence_index));

  Scene scene;
  const double x0 = world.arena_x_min;
  const double x1 = world.arena_x_max;
  const double y = world.arena_y_half;
  scene.walls = {{{x0, -y}, {x1, -y}}, {{x1, -y}, {x1, y}}, {{x1, y}, {x0, y}}, {{x0, y}, {x0, -y}}};

  const int n_pillars =
      static_cast<int>(layout_rng.uniform_int(world.pillars_min, world.pillars_max));
  for (int i = 0; i < n_pillars; ++i) {
    const double angle = layout_rng.uniform(-world.sector_half_angle, world.sector_half_angle);
    const double radius = layout_rng.uniform(world.spawn_range_min + 0.5, world.spawn_range_max);
    scene.pillars.push_back({{radius * std::cos(angle), radius * std::sin(angle)},
                             layout_rng.uniform(0.12, 0.35)});
  }

  // Furniture-scale clutter in the sector. Pieces keep a minimum mutual
  // distance so they stay single blobs rather than forming accidental
  // leg-pair doubles.
  const int n_clutter =
      static_cast<int>(layout_rng.uniform_int(world.clutter_min, world.clutter_max));
  for (int i = 0; i < n_clutter; ++i) {
    for (int attempt = 0; attempt < 32; ++attempt) {
      const double angle = layout_rng.uniform(-world.sector_half_angle, world.sector_half_angle);
      const double radius = layout_rng.uniform(world.clutter_range_min, world.clutter_range_max);
      const Point2D p{radius * std::cos(angle), radius * std::sin(angle)};
      bool clear = true;
      for (const Circle& other : scene.clutter) {
        if (distance(p, other.center) < 1.2) clear = false;
      }
      for (const Circle& pillar : scene.pillars) {
        if (distance(p, pillar.center) < pillar.radius + 0.6) clear = false;
      }
      if (!clear) continue;
      scene.clutter.push_back({p, layout_rng.uniform(0.14, 0.30)});
      break;
    }
  }

  SequenceEffects effects;
  effects.yaw_error = layout_rng.normal(0.0, config.sensor.detector_noise.yaw_error_sigma);
  const int n_phantoms = layout_rng.poisson(config.sensor.detector_noise.phantom_rate);
  for (int i = 0; i < n_phantoms; ++i) {
    const double angle =
        layout_rng.uniform(-world.sector_half_angle * 0.9, world.sector_half_angle * 0.9);
    const double radius =
        layout_rng.uniform(world.spawn_range_max + 0.7, world.spawn_range_max + 3.0);
    effects.phantoms.push_back({radius * std::cos(angle), radius * std::sin(angle)});
  }

  const int n_persons =
      static_cast<int>(layout_rng.uniform_int(world.persons_min, world.persons_max));
  std::vector<WalkingPerson> walkers;
  for (int i = 0; i < n_persons; ++i) {
    WalkingPerson walker;
    // Each walker keeps to an angular lane so persons rarely merge in the
    // image; image-box overlaps still occur at lane boundaries up close.
    const double band = 2.0 * world.sector_half_angle / n_persons;
    walker.angle_lo = -world.sector_half_angle + band * i;
    walker.angle_hi = walker.angle_lo + band;
    walker.person.center =
        sample_sector_point(world, scene.pillars, layout_rng, walker.angle_lo, walker.angle_hi);
    walker.waypoint =
        sample_sector_point(world, scene.pillars, layout_rng, walker.angle_lo, walker.angle_hi);
    walker.speed = layout_rng.uniform(world.speed_min, world.speed_max);
    const Point2D to_goal = walker.waypoint - walker.person.center;
    walker.person.heading = std::atan2(to_goal.y, to_goal.x);
    walkers.push_back(walker);
  }

  const Pose2D pose{0.0, 0.0, 0.0};
  SequenceData data;
  data.index = sequence_index;
  {
    char name[16];
    std::snprintf(name, sizeof(name), "seq_%03d", sequence_index);
    data.name = name;
  }

  data.frames.reserve(static_cast<std::size_t>(config.sequences.frames));
  for (int f = 0; f < config.sequences.frames; ++f) {
    scene.persons.clear();
    for (WalkingPerson& walker : walkers) {
      scene.persons.push_back(walker.person);
    }

    FrameData frame;
    frame.pose = pose;
    Rng scan_rng = derive_rng(seed, kSaltScan + static_cast<std::uint64_t>(sequence_index),
                              static_cast<std::uint64_t>(f));
    RaycastResult cast = raycast_scan(scene, pose, config.sensor, scan_rng);
    frame.scan = std::move(cast.scan);
    frame.owner = std::move(cast.owner);
    frame.scan.frame_id = static_cast<std::int64_t>(sequence_index) * 1000000 + f;
    frame.scan.timestamp = f * config.sequences.dt;

    Rng det_rng = derive_rng(seed, kSaltBoxes + static_cast<std::uint64_t>(sequence_index),
                             static_cast<std::uint64_t>(f));
    frame.detections = render_detections(scene, pose, config.sensor, effects, det_rng);
    frame.boxes_true = true_boxes(scene, pose, config.sensor);
    frame.annotations = gt_annotations(frame.scan, scene, pose);
    frame.centers_all = person_centers_local(scene, pose);
    data.frames.push_back(std::move(frame));

    // Advance the walkers for the next frame.
    for (WalkingPerson& walker : walkers) {
      const Point2D to_goal = walker.waypoint - walker.person.center;
      const double remaining = to_goal.norm();
      const double step = walker.speed * config.sequences.dt;
      if (remaining < std::max(step, 0.1)) {
        walker.person.center = walker.waypoint;
        walker.waypoint = sample_sector_point(world, scene.pillars, layout_rng, walker.angle_lo,
                                              walker.angle_hi);
      } else {
        const Point2D dir = to_goal * (1.0 / remaining);
        walker.person.center = walker.person.center + dir * step;
        walker.person.heading = std::atan2(dir.y, dir.x);
      }
    }
  }
  return data;
}

}  // namespace lpl
