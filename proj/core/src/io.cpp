#include "lpl/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lpl/errors.hpp"

namespace lpl::io {
namespace {

using nlohmann::json;

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void dump_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path.string());
  out << j.dump();
  out.put('\n');
  if (!out) throw IoError("write failed: " + path.string());
}

template <typename T>
T require(const json& j, const char* key, const std::filesystem::path& path) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ValidationError(path.string() + ": missing field '" + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ValidationError(path.string() + ": bad type for field '" + key + "'");
  }
}

json point_to_json(const Point2D& p) { return json::array({p.x, p.y}); }

Point2D point_from_json(const json& j, const std::filesystem::path& path) {
  if (!j.is_array() || j.size() != 2) throw ValidationError(path.string() + ": bad point");
  return {j[0].get<double>(), j[1].get<double>()};
}

json box_to_json(const DetBox& b) {
  return json{{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max},
              {"y_max", b.y_max}, {"score", b.score}};
}

DetBox box_from_json(const json& j, const std::filesystem::path& path) {
  DetBox b{require<double>(j, "x_min", path), require<double>(j, "y_min", path),
           require<double>(j, "x_max", path), require<double>(j, "y_max", path),
           require<double>(j, "score", path)};
  b.validate();
  return b;
}

double parse_double(std::string_view text, const std::filesystem::path& path, int line) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError(path.string() + ":" + std::to_string(line) + ": bad number '" +
                          std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

// --- scans -------------------------------------------------------------------

void write_scans_csv(const std::filesystem::path& path, std::span<const Scan> scans) {
  if (scans.empty()) throw ValidationError("write_scans_csv: no scans");
  const Scan& first = scans.front();
  std::string out;
  out.reserve(scans.size() * (16 * scans.front().ranges.size()));
  out += "angle_min,angle_increment,max_range,n_points\n";
  out += format_double(first.angle_min);
  out += ',';
  out += format_double(first.angle_increment);
  out += ',';
  out += format_double(first.max_range);
  out += ',';
  out += std::to_string(first.size());
  out += '\n';
  for (const Scan& scan : scans) {
    if (scan.size() != first.size() || scan.angle_min != first.angle_min ||
        scan.angle_increment != first.angle_increment || scan.max_range != first.max_range) {
      throw ValidationError("write_scans_csv: scans disagree on the angular grid");
    }
    out += std::to_string(scan.frame_id);
    out += ',';
    out += format_double(scan.timestamp);
    for (const double r : scan.ranges) {
      out += ',';
      out += format_double(r);
    }
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<Scan> read_scans_csv(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  std::vector<Scan> scans;

  double angle_min = 0.0;
  double angle_increment = 0.0;
  double max_range = 0.0;
  int n_points = 0;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t eol = text.find('\n', pos);
    const std::string_view line(text.data() + pos,
                                (eol == std::string::npos ? text.size() : eol) - pos);
    pos = eol == std::string::npos ? text.size() : eol + 1;
    ++line_no;
    if (line.empty()) continue;

    if (line_no == 1) {
      if (line != "angle_min,angle_increment,max_range,n_points") {
        throw ValidationError(path.string() + ": unexpected CSV header");
      }
      continue;
    }
    const auto fields = split_csv(line);
    if (line_no == 2) {
      if (fields.size() != 4) throw ValidationError(path.string() + ": malformed header values");
      angle_min = parse_double(fields[0], path, line_no);
      angle_increment = parse_double(fields[1], path, line_no);
      max_range = parse_double(fields[2], path, line_no);
      n_points = static_cast<int>(parse_double(fields[3], path, line_no));
      continue;
    }
    if (static_cast<int>(fields.size()) != n_points + 2) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": wrong field count");
    }
    Scan scan;
    scan.angle_min = angle_min;
    scan.angle_increment = angle_increment;
    scan.max_range = max_range;
    scan.frame_id = static_cast<std::int64_t>(parse_double(fields[0], path, line_no));
    scan.timestamp = parse_double(fields[1], path, line_no);
    scan.ranges.reserve(static_cast<std::size_t>(n_points));
    for (int k = 0; k < n_points; ++k) {
      scan.ranges.push_back(parse_double(fields[static_cast<std::size_t>(k) + 2], path, line_no));
    }
    scan.validate();
    scans.push_back(std::move(scan));
  }
  if (scans.empty()) throw ValidationError(path.string() + ": no scan rows");
  return scans;
}

// --- calibration --------------------------------------------------------------

void write_calib_json(const std::filesystem::path& path, const CameraCalib& calib) {
  json rotation = json::array();
  for (int r = 0; r < 3; ++r) {
    rotation.push_back(json::array({calib.extrinsic.rotation(r, 0), calib.extrinsic.rotation(r, 1),
                                    calib.extrinsic.rotation(r, 2)}));
  }
  const json j{{"fx", calib.fx},
               {"fy", calib.fy},
               {"cx", calib.cx},
               {"cy", calib.cy},
               {"image_width", calib.image_width},
               {"image_height", calib.image_height},
               {"h_lidar", calib.h_lidar},
               {"extrinsic",
                json{{"rotation", rotation},
                     {"translation", json::array({calib.extrinsic.translation.x(),
                                                  calib.extrinsic.translation.y(),
                                                  calib.extrinsic.translation.z()})}}}};
  dump_json(path, j);
}

CameraCalib read_calib_json(const std::filesystem::path& path) {
  const json j = load_json(path);
  CameraCalib calib;
  calib.fx = require<double>(j, "fx", path);
  calib.fy = require<double>(j, "fy", path);
  calib.cx = require<double>(j, "cx", path);
  calib.cy = require<double>(j, "cy", path);
  calib.image_width = require<int>(j, "image_width", path);
  calib.image_height = require<int>(j, "image_height", path);
  calib.h_lidar = require<double>(j, "h_lidar", path);
  const json extrinsic = require<json>(j, "extrinsic", path);
  const json rotation = require<json>(extrinsic, "rotation", path);
  const json translation = require<json>(extrinsic, "translation", path);
  if (!rotation.is_array() || rotation.size() != 3 || !translation.is_array() ||
      translation.size() != 3) {
    throw ValidationError(path.string() + ": malformed extrinsic");
  }
  for (int r = 0; r < 3; ++r) {
    if (!rotation[static_cast<std::size_t>(r)].is_array() ||
        rotation[static_cast<std::size_t>(r)].size() != 3) {
      throw ValidationError(path.string() + ": malformed rotation");
    }
    for (int c = 0; c < 3; ++c) {
      calib.extrinsic.rotation(r, c) =
          rotation[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    }
    calib.extrinsic.translation(r) = translation[static_cast<std::size_t>(r)].get<double>();
  }
  calib.validate();
  return calib;
}

// --- detections ------------------------------------------------------------------

void write_detections_json(const std::filesystem::path& path,
                           std::span<const FrameDetections> frames) {
  json j = json::array();
  for (const FrameDetections& frame : frames) {
    json boxes = json::array();
    for (const DetBox& box : frame.boxes) boxes.push_back(box_to_json(box));
    j.push_back(json{{"frame_id", frame.frame_id}, {"boxes", std::move(boxes)}});
  }
  dump_json(path, j);
}

std::vector<FrameDetections> read_detections_json(const std::filesystem::path& path) {
  const json j = load_json(path);
  if (!j.is_array()) throw ValidationError(path.string() + ": expected an array of frames");
  std::vector<FrameDetections> frames;
  frames.reserve(j.size());
  for (const json& frame : j) {
    FrameDetections fd;
    fd.frame_id = require<std::int64_t>(frame, "frame_id", path);
    for (const json& box : require<json>(frame, "boxes", path)) {
      fd.boxes.push_back(box_from_json(box, path));
    }
    frames.push_back(std::move(fd));
  }
  return frames;
}

// --- annotations ------------------------------------------------------------------

void write_annotations_json(const std::filesystem::path& path,
                            std::span<const FrameCenters> frames) {
  json j = json::array();
  for (const FrameCenters& frame : frames) {
    json centers = json::array();
    for (const Point2D& c : frame.centers) centers.push_back(point_to_json(c));
    j.push_back(json{{"frame_id", frame.frame_id}, {"centers", std::move(centers)}});
  }
  dump_json(path, j);
}

std::vector<FrameCenters> read_annotations_json(const std::filesystem::path& path) {
  const json j = load_json(path);
  if (!j.is_array()) throw ValidationError(path.string() + ": expected an array of frames");
  std::vector<FrameCenters> frames;
  frames.reserve(j.size());
  for (const json& frame : j) {
    FrameCenters fc;
    fc.frame_id = require<std::int64_t>(frame, "frame_id", path);
    for (const json& c : require<json>(frame, "centers", path)) {
      fc.centers.push_back(point_from_json(c, path));
    }
    frames.push_back(std::move(fc));
  }
  return frames;
}

// --- ownership -------------------------------------------------------------------

void write_ownership_json(const std::filesystem::path& path,
                          std::span<const FrameOwnership> frames) {
  json j = json::array();
  for (const FrameOwnership& frame : frames) {
    json centers = json::array();
    for (const Point2D& c : frame.centers_all) centers.push_back(point_to_json(c));
    json boxes = json::array();
    for (const DetBox& b : frame.boxes_true) boxes.push_back(box_to_json(b));
    j.push_back(json{{"frame_id", frame.frame_id},
                     {"owner", frame.owner},
                     {"centers_all", std::move(centers)},
                     {"boxes_true", std::move(boxes)}});
  }
  dump_json(path, j);
}

std::vector<FrameOwnership> read_ownership_json(const std::filesystem::path& path) {
  const json j = load_json(path);
  if (!j.is_array()) throw ValidationError(path.string() + ": expected an array of frames");
  std::vector<FrameOwnership> frames;
  frames.reserve(j.size());
  for (const json& frame : j) {
    FrameOwnership fo;
    fo.frame_id = require<std::int64_t>(frame, "frame_id", path);
    fo.owner = require<std::vector<std::int32_t>>(frame, "owner", path);
    for (const json& c : require<json>(frame, "centers_all", path)) {
      fo.centers_all.push_back(point_from_json(c, path));
    }
    for (const json& b : require<json>(frame, "boxes_true", path)) {
      fo.boxes_true.push_back(box_from_json(b, path));
    }
    frames.push_back(std::move(fo));
  }
  return frames;
}

// --- labels ----------------------------------------------------------------------

std::string rle_encode(std::span<const PointClass> cls) {
  std::string out;
  std::size_t i = 0;
  while (i < cls.size()) {
    std::size_t run = 1;
    while (i + run < cls.size() && cls[i + run] == cls[i]) ++run;
    out += std::to_string(run);
    switch (cls[i]) {
      case PointClass::kPos: out += 'P'; break;
      case PointClass::kNeg: out += 'N'; break;
      case PointClass::kIgnore: out += 'I'; break;
    }
    i += run;
  }
  return out;
}

std::vector<PointClass> rle_decode(std::string_view text) {
  std::vector<PointClass> cls;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t count = 0;
    const std::size_t digits_start = i;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
      count = count * 10 + static_cast<std::size_t>(text[i] - '0');
      ++i;
    }
    if (i == digits_start || count == 0 || i >= text.size()) {
      throw ValidationError("rle_decode: malformed run-length string");
    }
    PointClass value;
    switch (text[i]) {
      case 'P': value = PointClass::kPos; break;
      case 'N': value = PointClass::kNeg; break;
      case 'I': value = PointClass::kIgnore; break;
      default: throw ValidationError("rle_decode: unknown class symbol");
    }
    ++i;
    cls.insert(cls.end(), count, value);
  }
  return cls;
}

void write_labels_json(const std::filesystem::path& path, std::span<const PointLabels> labels) {
  json j = json::array();
  for (const PointLabels& frame : labels) {
    json centers = json::array();
    for (const Point2D& c : frame.centers) centers.push_back(point_to_json(c));
    json reg = json::object();
    for (const auto& [index, offset] : frame.reg) {
      reg[std::to_string(index)] = json::array({offset.x, offset.y});
    }
    j.push_back(json{{"frame_id", frame.frame_id},
                     {"centers", std::move(centers)},
                     {"cls", rle_encode(frame.cls)},
                     {"reg", std::move(reg)}});
  }
  dump_json(path, j);
}

std::vector<PointLabels> read_labels_json(const std::filesystem::path& path) {
  const json j = load_json(path);
  if (!j.is_array()) throw ValidationError(path.string() + ": expected an array of frames");
  std::vector<PointLabels> labels;
  labels.reserve(j.size());
  for (const json& frame : j) {
    PointLabels pl;
    pl.frame_id = require<std::int64_t>(frame, "frame_id", path);
    pl.cls = rle_decode(require<std::string>(frame, "cls", path));
    for (const json& c : require<json>(frame, "centers", path)) {
      pl.centers.push_back(point_from_json(c, path));
    }
    const json reg = require<json>(frame, "reg", path);
    for (const auto& [key, value] : reg.items()) {
      std::int32_t index = 0;
      const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), index);
      if (ec != std::errc() || ptr != key.data() + key.size() || index < 0 ||
          index >= static_cast<std::int32_t>(pl.cls.size())) {
        throw ValidationError(path.string() + ": bad regression index '" + key + "'");
      }
      pl.reg.emplace(index, point_from_json(value, path));
    }
    labels.push_back(std::move(pl));
  }
  return labels;
}

// --- model -----------------------------------------------------------------------

void write_model_json(const std::filesystem::path& path, const Model& model) {
  json layers = json::array();
  for (const DenseLayer& layer : model.net.layers) {
    json weights = json::array();
    for (int r = 0; r < layer.weights.rows(); ++r) {
      for (int c = 0; c < layer.weights.cols(); ++c) weights.push_back(layer.weights(r, c));
    }
    json bias = json::array();
    for (int r = 0; r < layer.bias.size(); ++r) bias.push_back(layer.bias(r));
    layers.push_back(json{{"in", layer.weights.cols()},
                          {"out", layer.weights.rows()},
                          {"weights", std::move(weights)},
                          {"bias", std::move(bias)}});
  }
  const json j{{"format", "lpl-model"},
               {"window", json{{"size", model.window.size}, {"depth_scale", model.window.depth_scale}}},
               {"vote_threshold", model.vote_threshold},
               {"group_radius", model.group_radius},
               {"optimizer",
                json{{"adam_beta1", model.optimizer.beta1},
                     {"adam_beta2", model.optimizer.beta2},
                     {"adam_epsilon", model.optimizer.epsilon}}},
               {"layers", std::move(layers)},
               {"provenance", json{{"seed", model.seed}, {"config_hash", model.config_hash}}}};
  dump_json(path, j);
}

Model read_model_json(const std::filesystem::path& path) {
  const json j = load_json(path);
  if (require<std::string>(j, "format", path) != "lpl-model") {
    throw ValidationError(path.string() + ": not a model file");
  }
  Model model;
  const json window = require<json>(j, "window", path);
  model.window.size = require<int>(window, "size", path);
  model.window.depth_scale = require<double>(window, "depth_scale", path);
  model.window.validate();
  model.vote_threshold = require<double>(j, "vote_threshold", path);
  model.group_radius = require<double>(j, "group_radius", path);
  const json optimizer = require<json>(j, "optimizer", path);
  model.optimizer.beta1 = require<double>(optimizer, "adam_beta1", path);
  model.optimizer.beta2 = require<double>(optimizer, "adam_beta2", path);
  model.optimizer.epsilon = require<double>(optimizer, "adam_epsilon", path);
  const json provenance = require<json>(j, "provenance", path);
  model.seed = require<std::uint64_t>(provenance, "seed", path);
  model.config_hash = require<std::string>(provenance, "config_hash", path);

  for (const json& layer_json : require<json>(j, "layers", path)) {
    DenseLayer layer;
    const int in = require<int>(layer_json, "in", path);
    const int out = require<int>(layer_json, "out", path);
    const auto weights = require<std::vector<double>>(layer_json, "weights", path);
    const auto bias = require<std::vector<double>>(layer_json, "bias", path);
    if (in <= 0 || out <= 0 || static_cast<int>(weights.size()) != in * out ||
        static_cast<int>(bias.size()) != out) {
      throw ValidationError(path.string() + ": layer shape mismatch");
    }
    layer.weights.resize(out, in);
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) {
        layer.weights(r, c) = weights[static_cast<std::size_t>(r * in + c)];
      }
    }
    layer.bias.resize(out);
    for (int r = 0; r < out; ++r) layer.bias(r) = bias[static_cast<std::size_t>(r)];
    model.net.layers.push_back(std::move(layer));
  }
  if (model.net.layers.empty()) throw ValidationError(path.string() + ": model has no layers");
  if (model.net.input_dim() != model.window.size) {
    throw ValidationError(path.string() + ": window size does not match the input layer");
  }
  return model;
}

// --- evaluation outputs -------------------------------------------------------------

void write_pr_curve_csv(const std::filesystem::path& path, const PRCurve& curve) {
  std::string out = "rank,confidence,tp,precision,recall\n";
  for (const PRPoint& p : curve.points) {
    out += std::to_string(p.rank);
    out += ',';
    out += format_double(p.confidence);
    out += ',';
    out += p.tp ? '1' : '0';
    out += ',';
    out += format_double(p.precision);
    out += ',';
    out += format_double(p.recall);
    out += '\n';
  }
  write_text_file(path, out);
}

void write_trajectory_csv(const std::filesystem::path& path,
                          std::span<const TrajectoryPoint> trajectory) {
  std::string out = "step,ap_0.3,ap_0.5\n";
  for (const TrajectoryPoint& p : trajectory) {
    out += std::to_string(p.step);
    out += ',';
    out += format_double(p.ap03);
    out += ',';
    out += format_double(p.ap05);
    out += '\n';
  }
  write_text_file(path, out);
}

void write_histogram_csv(const std::filesystem::path& path,
                         std::span<const HistogramSeries> series, double bin_width,
                         double max_distance) {
  if (series.empty()) throw ValidationError("write_histogram_csv: no series");
  const std::size_t n_bins = series.front().counts.size();
  std::string out = "bin_lo,bin_hi";
  for (const HistogramSeries& s : series) {
    if (s.counts.size() != n_bins) throw ValidationError("write_histogram_csv: ragged series");
    out += ',';
    out += s.name;
  }
  out += '\n';
  for (std::size_t b = 0; b < n_bins; ++b) {
    const bool overflow = b + 1 == n_bins;
    out += format_double(overflow ? max_distance : static_cast<double>(b) * bin_width);
    out += ',';
    out += overflow ? "inf" : format_double(static_cast<double>(b + 1) * bin_width);
    for (const HistogramSeries& s : series) {
      out += ',';
      out += std::to_string(s.counts[b]);
    }
    out += '\n';
  }
  write_text_file(path, out);
}

void write_histogram_svg(const std::filesystem::path& path,
                         std::span<const HistogramSeries> series, double bin_width,
                         double max_distance) {
  if (series.empty()) throw ValidationError("write_histogram_svg: no series");
  static const char* kColors[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44"};
  const std::size_t n_bins = series.front().counts.size();
  std::int64_t max_count = 1;
  for (const HistogramSeries& s : series) {
    if (s.counts.size() != n_bins) throw ValidationError("write_histogram_svg: ragged series");
    for (const std::int64_t c : s.counts) max_count = std::max(max_count, c);
  }

  const double width = 720.0;
  const double height = 400.0;
  const double left = 60.0;
  const double bottom = height - 50.0;
  const double top = 30.0;
  const double plot_w = width - left - 20.0;
  const double plot_h = bottom - top;
  const double group_w = plot_w / static_cast<double>(n_bins);
  const double bar_w = group_w / static_cast<double>(series.size() + 1);

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(width) +
         "\" height=\"" + format_double(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes
  svg += "<line x1=\"" + format_double(left) + "\" y1=\"" + format_double(top) + "\" x2=\"" +
         format_double(left) + "\" y2=\"" + format_double(bottom) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + format_double(left) + "\" y1=\"" + format_double(bottom) + "\" x2=\"" +
         format_double(left + plot_w) + "\" y2=\"" + format_double(bottom) +
         "\" stroke=\"black\"/>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % 4];
    for (std::size_t b = 0; b < n_bins; ++b) {
      const double h = plot_h * static_cast<double>(series[s].counts[b]) /
                       static_cast<double>(max_count);
      if (h <= 0.0) continue;
      const double x = left + group_w * static_cast<double>(b) +
                       bar_w * (0.5 + static_cast<double>(s));
      svg += "<rect x=\"" + format_double(x) + "\" y=\"" + format_double(bottom - h) +
             "\" width=\"" + format_double(bar_w) + "\" height=\"" + format_double(h) +
             "\" fill=\"" + color + "\"/>\n";
    }
    // legend
    const double ly = top + 16.0 * static_cast<double>(s);
    svg += "<rect x=\"" + format_double(left + plot_w - 150.0) + "\" y=\"" + format_double(ly) +
           "\" width=\"12\" height=\"12\" fill=\"" + color + "\"/>\n";
    svg += "<text x=\"" + format_double(left + plot_w - 132.0) + "\" y=\"" +
           format_double(ly + 11.0) + "\" font-size=\"12\" font-family=\"sans-serif\">" +
           series[s].name + "</text>\n";
  }
  // x tick labels every 5 bins plus the overflow bin
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (b % 5 != 0 && b + 1 != n_bins) continue;
    const double x = left + group_w * static_cast<double>(b);
    const std::string label =
        b + 1 == n_bins ? (">=" + format_double(max_distance))
                        : format_double(static_cast<double>(b) * bin_width);
    svg += "<text x=\"" + format_double(x) + "\" y=\"" + format_double(bottom + 16.0) +
           "\" font-size=\"11\" font-family=\"sans-serif\">" + label + "</text>\n";
  }
  svg += "<text x=\"" + format_double(left) + "\" y=\"" + format_double(top - 10.0) +
         "\" font-size=\"12\" font-family=\"sans-serif\">count (max " +
         std::to_string(max_count) + ")</text>\n";
  svg += "<text x=\"" + format_double(left + plot_w / 2.0 - 40.0) + "\" y=\"" +
         format_double(height - 12.0) +
         "\" font-size=\"12\" font-family=\"sans-serif\">distance [m]</text>\n";
  svg += "</svg>\n";
  write_text_file(path, svg);
}

// --- dataset directories --------------------------------------------------------------

void write_split_json(const std::filesystem::path& path, const SplitManifest& split) {
  dump_json(path, json{{"train", split.train}, {"test", split.test}});
}

SplitManifest read_split_json(const std::filesystem::path& path) {
  const json j = load_json(path);
  SplitManifest split;
  split.train = require<std::vector<std::string>>(j, "train", path);
  split.test = require<std::vector<std::string>>(j, "test", path);
  return split;
}

void write_sequence_dir(const std::filesystem::path& dir, const SequenceData& data) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory: " + dir.string());

  std::vector<Scan> scans;
  std::vector<FrameDetections> detections;
  std::vector<FrameCenters> annotations;
  std::vector<FrameOwnership> ownership;
  scans.reserve(data.frames.size());
  for (const FrameData& frame : data.frames) {
    scans.push_back(frame.scan);
    detections.push_back({frame.scan.frame_id, frame.detections});
    annotations.push_back({frame.scan.frame_id, frame.annotations});
    ownership.push_back({frame.scan.frame_id, frame.owner, frame.centers_all, frame.boxes_true});
  }
  write_scans_csv(dir / "scans.csv", scans);
  write_detections_json(dir / "detections.json", detections);
  write_annotations_json(dir / "annotations.json", annotations);
  write_ownership_json(dir / "ownership.json", ownership);
}

LoadedSequence read_sequence_dir(const std::filesystem::path& dir, const std::string& name) {
  LoadedSequence seq;
  seq.name = name;
  seq.scans = read_scans_csv(dir / "scans.csv");
  const auto detections = read_detections_json(dir / "detections.json");
  const auto annotations = read_annotations_json(dir / "annotations.json");
  if (detections.size() != seq.scans.size() || annotations.size() != seq.scans.size()) {
    throw ValidationError(dir.string() + ": frame counts disagree across files");
  }
  seq.detections.reserve(detections.size());
  seq.annotations.reserve(annotations.size());
  for (std::size_t f = 0; f < seq.scans.size(); ++f) {
    if (detections[f].frame_id != seq.scans[f].frame_id ||
        annotations[f].frame_id != seq.scans[f].frame_id) {
      throw ValidationError(dir.string() + ": frame ids disagree across files");
    }
    seq.detections.push_back(detections[f].boxes);
    seq.annotations.push_back(annotations[f].centers);
  }
  return seq;
}

LoadedDataset read_dataset(const std::filesystem::path& root, SplitSelect select) {
  LoadedDataset dataset;
  dataset.calib = read_calib_json(root / "calib.json");
  const SplitManifest split = read_split_json(root / "split.json");
  std::vector<std::string> names;
  if (select == SplitSelect::kTrain || select == SplitSelect::kAll) {
    names.insert(names.end(), split.train.begin(), split.train.end());
  }
  if (select == SplitSelect::kTest || select == SplitSelect::kAll) {
    names.insert(names.end(), split.test.begin(), split.test.end());
  }
  for (const std::string& name : names) {
    dataset.sequences.push_back(read_sequence_dir(root / name, name));
  }
  return dataset;
}

}  // namespace lpl::io
