#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lpl/detector.hpp"
#include "lpl/eval.hpp"
#include "lpl/pseudo_label.hpp"
#include "lpl/scan_geometry.hpp"
#include "lpl/synth_world.hpp"

namespace lpl::io {

// All readers throw IoError with path context on missing/unreadable files and
// ValidationError on malformed content. Writers produce byte-stable output:
// doubles are serialized with shortest round-trip formatting and all
// containers have a deterministic order.

// --- scans ------------------------------------------------------------------
// CSV layout: a two-line header (field names, then their values: angle_min,
// angle_increment, max_range, n_points) followed by one row per frame:
// frame_id, timestamp, r_0, ..., r_{N-1}.
void write_scans_csv(const std::filesystem::path& path, std::span<const Scan> scans);
std::vector<Scan> read_scans_csv(const std::filesystem::path& path);

// --- calibration ------------------------------------------------------------
void write_calib_json(const std::filesystem::path& path, const CameraCalib& calib);
CameraCalib read_calib_json(const std::filesystem::path& path);

// --- detections ---------------------------------------------------------------
struct FrameDetections {
  std::int64_t frame_id = 0;
  std::vector<DetBox> boxes;
};

void write_detections_json(const std::filesystem::path& path,
                           std::span<const FrameDetections> frames);
std::vector<FrameDetections> read_detections_json(const std::filesystem::path& path);

// --- annotations --------------------------------------------------------------
struct FrameCenters {
  std::int64_t frame_id = 0;
  std::vector<Point2D> centers;
};

void write_annotations_json(const std::filesystem::path& path,
                            std::span<const FrameCenters> frames);
std::vector<FrameCenters> read_annotations_json(const std::filesystem::path& path);

// --- beam ownership (oracle-only) ----------------------------------------------
struct FrameOwnership {
  std::int64_t frame_id = 0;
  std::vector<std::int32_t> owner;
  std::vector<Point2D> centers_all;
  std::vector<DetBox> boxes_true;
};

void write_ownership_json(const std::filesystem::path& path,
                          std::span<const FrameOwnership> frames);
std::vector<FrameOwnership> read_ownership_json(const std::filesystem::path& path);

// --- labels -------------------------------------------------------------------
// Per frame: frame_id, centers, the class sequence run-length encoded over
// {P, N, I} and a sparse index -> [dx, dy] regression map.
std::string rle_encode(std::span<const PointClass> cls);
std::vector<PointClass> rle_decode(std::string_view text);

void write_labels_json(const std::filesystem::path& path, std::span<const PointLabels> labels);
std::vector<PointLabels> read_labels_json(const std::filesystem::path& path);

// --- model ----------------------------------------------------------------------
void write_model_json(const std::filesystem::path& path, const Model& model);
Model read_model_json(const std::filesystem::path& path);

// --- evaluation outputs ----------------------------------------------------------
// PR curve CSV: rank, confidence, tp, precision, recall.
void write_pr_curve_csv(const std::filesystem::path& path, const PRCurve& curve);

// Trajectory CSV: step, ap_0.3, ap_0.5.
void write_trajectory_csv(const std::filesystem::path& path,
                          std::span<const TrajectoryPoint> trajectory);

// Histogram CSV: bin_lo, bin_hi, then one count column per series.
struct HistogramSeries {
  std::string name;
  std::vector<std::int64_t> counts;
};

void write_histogram_csv(const std::filesystem::path& path,
                         std::span<const HistogramSeries> series, double bin_width,
                         double max_distance);
void write_histogram_svg(const std::filesystem::path& path,
                         std::span<const HistogramSeries> series, double bin_width,
                         double max_distance);

// --- dataset directories -----------------------------------------------------------
// A dataset directory holds calib.json, split.json and one subdirectory per
// sequence with scans.csv, detections.json, annotations.json and
// ownership.json.

struct SplitManifest {
  std::vector<std::string> train;  // sequence directory names
  std::vector<std::string> test;
};

void write_split_json(const std::filesystem::path& path, const SplitManifest& split);
SplitManifest read_split_json(const std::filesystem::path& path);

void write_sequence_dir(const std::filesystem::path& dir, const SequenceData& data);

struct LoadedSequence {
  std::string name;
  std::vector<Scan> scans;
  std::vector<std::vector<DetBox>> detections;
  std::vector<std::vector<Point2D>> annotations;
};

LoadedSequence read_sequence_dir(const std::filesystem::path& dir, const std::string& name);

enum class SplitSelect { kTrain, kTest, kAll };

struct LoadedDataset {
  CameraCalib calib;
  std::vector<LoadedSequence> sequences;
};

LoadedDataset read_dataset(const std::filesystem::path& root, SplitSelect select);

// --- helpers -------------------------------------------------------------------
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

/// FNV-1a over arbitrary bytes, hex-encoded; used for config hashes.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace lpl::io
