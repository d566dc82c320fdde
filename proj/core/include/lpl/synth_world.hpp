#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lpl/pseudo_label.hpp"
#include "lpl/rng.hpp"
#include "lpl/scan_geometry.hpp"
#include "lpl/toml.hpp"

namespace lpl {

struct Segment {
  Point2D a;
  Point2D b;
};

struct Circle {
  Point2D center;
  double radius = 0.0;
};

/// Walking person modeled as a leg pair: two circles of leg_radius placed
/// leg_separation apart, perpendicular to the heading.
struct Person {
  Point2D center;
  double heading = 0.0;
  double leg_radius = 0.07;
  double leg_separation = 0.30;
  double height = 1.7;
  double width = 0.5;
};

/// World-frame snapshot of the scene for one frame. Clutter poles are
/// leg-scale thin circles (furniture legs, poles) that the image detector can
/// persistently mistake for persons.
struct Scene {
  std::vector<Segment> walls;
  std::vector<Circle> pillars;
  std::vector<Circle> clutter;
  std::vector<Person> persons;
};

// Beam ownership: which object a beam hit. Encoded as (kind << 24) | index.
enum class OwnerKind : std::uint8_t { kNone = 0, kWall = 1, kPillar = 2, kPerson = 3, kClutter = 4 };

constexpr std::int32_t kOwnerNone = 0;

constexpr std::int32_t make_owner(OwnerKind kind, int index) {
  return (static_cast<std::int32_t>(kind) << 24) | index;
}
constexpr OwnerKind owner_kind(std::int32_t owner) {
  return static_cast<OwnerKind>(owner >> 24);
}
constexpr int owner_index(std::int32_t owner) {
  return owner & 0x00ffffff;
}

/// Synthetic image-detector imperfections. Per-frame noise (jitter, dropout,
/// random false boxes) is complemented by per-sequence systematic effects: a
/// calibration yaw error and persistent "phantom" spots (posters, mannequins)
/// the detector keeps boxing as persons.
struct DetectorNoise {
  double score_mean_decay = 0.02;    // score drop per meter of distance
  double score_noise_sigma = 0.05;   // additive Gaussian on the score
  double dropout_base = 0.03;        // miss probability at distance 0
  double dropout_per_meter = 0.005;  // extra miss probability per meter
  double fp_rate = 0.3;              // Poisson rate of random false boxes per frame
  double box_jitter_sigma = 3.0;     // corner jitter in pixels
  double yaw_error_sigma = 0.005;    // per-sequence camera yaw error [rad]
  double phantom_rate = 0.25;        // Poisson mean of phantom spots per sequence
  double phantom_box_prob = 0.4;     // per-frame emission probability per phantom
};

/// Systematic per-sequence detector imperfections, drawn once per sequence.
struct SequenceEffects {
  double yaw_error = 0.0;
  std::vector<Point2D> phantoms;  // world positions of persistent false boxes
};

struct SensorConfig {
  int n_beams = 1091;
  double fov = kTwoPi;
  double max_range = 30.0;
  double range_noise_sigma = 0.01;
  CameraCalib camera;
  DetectorNoise detector_noise;

  void validate() const;
};

struct RaycastResult {
  Scan scan;
  std::vector<std::int32_t> owner;  // per beam
};

/// Casts all beams from `pose`, keeping the nearest hit per beam. Range noise
/// is added after the hit test and clamped to (0, max_range]; misses carry
/// the sentinel max_range and kOwnerNone.
RaycastResult raycast_scan(const Scene& scene, const Pose2D& pose, const SensorConfig& sensor,
                           Rng& rng);

/// Noise-free boxes of camera-visible, unoccluded persons (clamped to the
/// image rectangle).
std::vector<DetBox> true_boxes(const Scene& scene, const Pose2D& pose,
                               const SensorConfig& sensor);

/// Simulated image-detector output: person boxes seen through the sequence's
/// yaw error with corner jitter, a distance-decayed noisy score and
/// distance-dependent dropout; person-shaped boxes at the phantom spots;
/// plus Poisson(fp_rate) random false boxes at person-like aspect ratios.
std::vector<DetBox> render_detections(const Scene& scene, const Pose2D& pose,
                                      const SensorConfig& sensor,
                                      const SequenceEffects& effects, Rng& rng);

/// All person centers expressed in the LiDAR frame of `pose`.
std::vector<Point2D> person_centers_local(const Scene& scene, const Pose2D& pose);

/// The annotation analog: person centers with at least five scan points
/// within a 0.5 m radius.
std::vector<Point2D> gt_annotations(const Scan& scan, const Scene& scene, const Pose2D& pose);

/// Randomized layout and walking-person limits for sequence generation.
struct WorldConfig {
  double arena_x_min = -1.0;
  double arena_x_max = 12.0;
  double arena_y_half = 7.5;
  int pillars_min = 0;
  int pillars_max = 2;
  int clutter_min = 2;
  int clutter_max = 5;
  double clutter_range_min = 8.5;   // default: clutter stands behind the
  double clutter_range_max = 10.5;  // person band
  int persons_min = 1;
  int persons_max = 4;
  double speed_min = 0.4;
  double speed_max = 1.2;
  double sector_half_angle = 0.66;  // waypoints confined to the camera sector
  double spawn_range_min = 2.0;
  double spawn_range_max = 8.5;
};

struct SequencesConfig {
  int train = 17;
  int test = 10;
  int frames = 200;
  double dt = 0.1;
};

struct SimConfig {
  SensorConfig sensor;
  WorldConfig world;
  SequencesConfig sequences;

  void validate() const;
};

/// Spec defaults: 1091-beam full-circle scanner, 17 train / 10 test sequences
/// of 200 frames, moderate detector noise.
SimConfig default_sim_config();

/// A deliberately different sensor/world ("source domain"): coarser angular
/// resolution, noisier ranges, tighter arena. Used to pre-train baseline
/// models with a domain gap to the default config.
SimConfig source_domain_config();

/// Applies TOML overrides on top of `base`; unknown keys are rejected.
SimConfig sim_config_from_toml(const toml::Value& root, const SimConfig& base);

/// Forward-looking camera `h_camera - h_lidar` above the scan plane.
CameraCalib make_forward_camera(double fx, double fy, double cx, double cy, int width, int height,
                                double h_lidar, double h_camera);

struct FrameData {
  Scan scan;
  std::vector<std::int32_t> owner;
  std::vector<DetBox> detections;
  std::vector<DetBox> boxes_true;
  std::vector<Point2D> annotations;  // visibility-filtered centers, LiDAR frame
  std::vector<Point2D> centers_all;  // every person center, LiDAR frame
  Pose2D pose;
};

struct SequenceData {
  std::string name;
  int index = 0;
  std::vector<FrameData> frames;
};

/// Simulates one sequence. Output depends only on (config, seed, index):
/// layout and person paths come from a per-sequence stream, per-frame sensor
/// noise from streams derived from (seed, index, frame).
SequenceData generate_sequence(const SimConfig& config, std::uint64_t seed, int sequence_index);

}  // namespace lpl
