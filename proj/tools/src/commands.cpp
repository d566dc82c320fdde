#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>

#include <json.hpp>

#include "lpl/detector.hpp"
#include "lpl/errors.hpp"
#include "lpl/eval.hpp"
#include "lpl/io.hpp"
#include "lpl/parallel.hpp"
#include "lpl/synth_world.hpp"
#include "lpl/toml.hpp"
#include "manifest.hpp"

namespace lpl::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSaltFlips = 0x464c4950;

void require_option(const std::string& value, const char* name) {
  if (value.empty()) throw ValidationError(std::string("missing required option ") + name);
}

io::SplitSelect parse_split(const std::string& split) {
  if (split == "train") return io::SplitSelect::kTrain;
  if (split == "test") return io::SplitSelect::kTest;
  if (split == "all") return io::SplitSelect::kAll;
  throw ValidationError("unknown split '" + split + "' (expected train|test|all)");
}

CleanMode parse_clean_mode(const std::string& mode) {
  if (mode == "remove-fp") return CleanMode::kRemoveFp;
  if (mode == "remove-fn") return CleanMode::kRemoveFn;
  if (mode == "both") return CleanMode::kBoth;
  if (mode == "both-correct-reg") return CleanMode::kBothCorrectReg;
  throw ValidationError("unknown clean mode '" + mode +
                        "' (expected remove-fp|remove-fn|both|both-correct-reg)");
}

std::string hash_args(const GlobalOptions& global, const std::string& extra = {}) {
  return io::fnv1a_hex(global.argv_joined + '\x1f' + extra);
}

// Dataset flattened to frame granularity, with per-frame ground-truth labels
// derived from the annotations.
struct FlatDataset {
  io::LoadedDataset loaded;
  std::vector<int> sequence_of;          // flat frame -> sequence index
  std::vector<const Scan*> scans;
  std::vector<const std::vector<DetBox>*> detections;
  std::vector<PointLabels> gt;
  std::vector<std::vector<Point2D>> annotations;
};

FlatDataset load_flat(const std::string& root, const std::string& split,
                      const LabelParams& label_params, int threads) {
  FlatDataset flat;
  flat.loaded = io::read_dataset(root, parse_split(split));
  for (std::size_t s = 0; s < flat.loaded.sequences.size(); ++s) {
    const io::LoadedSequence& seq = flat.loaded.sequences[s];
    for (std::size_t f = 0; f < seq.scans.size(); ++f) {
      flat.sequence_of.push_back(static_cast<int>(s));
      flat.scans.push_back(&seq.scans[f]);
      flat.detections.push_back(&seq.detections[f]);
      flat.annotations.push_back(seq.annotations[f]);
    }
  }
  flat.gt.resize(flat.scans.size());
  parallel_for(static_cast<int>(flat.scans.size()), threads, [&](int i) {
    flat.gt[static_cast<std::size_t>(i)] = labels_from_centers(
        *flat.scans[static_cast<std::size_t>(i)], flat.annotations[static_cast<std::size_t>(i)],
        label_params);
  });
  return flat;
}

std::vector<PointLabels> load_aligned_labels(const std::string& path, const FlatDataset& flat) {
  std::vector<PointLabels> labels = io::read_labels_json(path);
  if (labels.size() != flat.scans.size()) {
    throw ValidationError(path + ": has " + std::to_string(labels.size()) + " frames, dataset has " +
                          std::to_string(flat.scans.size()));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].frame_id != flat.scans[i]->frame_id) {
      throw ValidationError(path + ": frame id mismatch at index " + std::to_string(i));
    }
    if (labels[i].cls.size() != flat.scans[i]->ranges.size()) {
      throw ValidationError(path + ": point count mismatch at frame " +
                            std::to_string(labels[i].frame_id));
    }
  }
  return labels;
}

std::vector<LabeledScan> make_labeled_scans(const FlatDataset& flat,
                                            const std::vector<PointLabels>& labels) {
  std::vector<LabeledScan> out;
  out.reserve(flat.scans.size());
  for (std::size_t i = 0; i < flat.scans.size(); ++i) {
    out.push_back({flat.scans[i], &labels[i], flat.sequence_of[i]});
  }
  return out;
}

json label_counts_json(const LabelCounts& counts) {
  json j{{"tp", counts.tp}, {"fn", counts.fn}, {"tn", counts.tn}, {"fp", counts.fp}};
  j["tpr"] = counts.tpr_defined() ? json(counts.tpr()) : json(nullptr);
  j["tnr"] = counts.tnr_defined() ? json(counts.tnr()) : json(nullptr);
  return j;
}

void dump_json_file(const fs::path& path, const json& j) {
  io::write_text_file(path, j.dump() + "\n");
}

}  // namespace

void cmd_synth(const GlobalOptions& global, const SynthOptions& options) {
  Stopwatch stopwatch;
  require_option(global.out, "--out");

  SimConfig base;
  if (options.preset == "default") {
    base = default_sim_config();
  } else if (options.preset == "source") {
    base = source_domain_config();
  } else {
    throw ValidationError("unknown preset '" + options.preset + "' (expected default|source)");
  }

  std::string config_text;
  SimConfig config = base;
  if (!options.config_path.empty()) {
    config_text = io::read_text_file(options.config_path);
    config = sim_config_from_toml(toml::parse(config_text), base);
  }
  config.validate();

  const fs::path out_dir(global.out);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir.string());
  PartialMarker marker(out_dir / ".partial");

  const int n_sequences = config.sequences.train + config.sequences.test;
  std::vector<std::string> names(static_cast<std::size_t>(n_sequences));
  parallel_for(n_sequences, global.threads, [&](int i) {
    const SequenceData data = generate_sequence(config, global.seed, i);
    io::write_sequence_dir(out_dir / data.name, data);
    names[static_cast<std::size_t>(i)] = data.name;
  });

  io::write_calib_json(out_dir / "calib.json", config.sensor.camera);
  io::SplitManifest split;
  split.train.assign(names.begin(), names.begin() + config.sequences.train);
  split.test.assign(names.begin() + config.sequences.train, names.end());
  io::write_split_json(out_dir / "split.json", split);

  RunManifest manifest;
  manifest.command = "synth";
  manifest.seed = global.seed;
  manifest.threads = global.threads;
  manifest.config_hash = hash_args(global, config_text);
  if (!options.config_path.empty()) manifest.inputs.push_back(options.config_path);
  manifest.outputs.push_back(out_dir.string());
  manifest.duration_seconds = stopwatch.seconds();
  write_manifest_file(out_dir / "manifest.json", manifest);
  marker.commit();

  std::cout << "wrote " << n_sequences << " sequences (" << config.sequences.train << " train, "
            << config.sequences.test << " test) x " << config.sequences.frames << " frames to "
            << out_dir.string() << "\n";
}

void cmd_pseudo(const GlobalOptions& global, const PseudoOptions& options) {
  Stopwatch stopwatch;
  require_option(global.out, "--out");
  require_option(options.data, "--data");
  options.filter.validate();
  options.label.validate();

  const FlatDataset flat = load_flat(options.data, options.split, options.label, global.threads);
  std::vector<PointLabels> labels(flat.scans.size());
  parallel_for(static_cast<int>(flat.scans.size()), global.threads, [&](int i) {
    const auto idx = static_cast<std::size_t>(i);
    labels[idx] = generate_labels(*flat.scans[idx], *flat.detections[idx], flat.loaded.calib,
                                  options.filter, options.label);
  });

  const fs::path out_path(global.out);
  PartialMarker marker(out_path.string() + ".partial");
  io::write_labels_json(out_path, labels);

  // Per-sequence center counts.
  std::size_t flat_index = 0;
  for (const io::LoadedSequence& seq : flat.loaded.sequences) {
    std::size_t centers = 0;
    for (std::size_t f = 0; f < seq.scans.size(); ++f, ++flat_index) {
      centers += labels[flat_index].centers.size();
    }
    std::cout << seq.name << ": " << centers << " centers over " << seq.scans.size()
              << " frames\n";
  }

  RunManifest manifest;
  manifest.command = "pseudo";
  manifest.seed = global.seed;
  manifest.threads = global.threads;
  manifest.config_hash = hash_args(global);
  manifest.inputs.push_back(options.data);
  manifest.outputs.push_back(out_path.string());
  manifest.duration_seconds = stopwatch.seconds();
  write_manifest_file(out_path.string() + ".manifest.json", manifest);
  marker.commit();
}

void cmd_labels_eval(const GlobalOptions& global, const LabelsEvalOptions& options) {
  Stopwatch stopwatch;
  require_option(global.out, "--out");
  require_option(options.data, "--data");
  require_option(options.labels, "--labels");

  const FlatDataset flat = load_flat(options.data, options.split, options.label, global.threads);
  const std::vector<PointLabels> pseudo = load_aligned_labels(options.labels, flat);

  TprTnrOptions tpr_options;
  tpr_options.exclude_pseudo_ignore = options.exclude_pseudo_ignore;

  LabelCounts total;
  json per_sequence = json::object();
  std::size_t flat_index = 0;
  for (const io::LoadedSequence& seq : flat.loaded.sequences) {
    LabelCounts seq_counts;
    for (std::size_t f = 0; f < seq.scans.size(); ++f, ++flat_index) {
      seq_counts += label_tpr_tnr(pseudo[flat_index], flat.gt[flat_index], tpr_options);
    }
    per_sequence[seq.name] = label_counts_json(seq_counts);
    total += seq_counts;
  }

  RunManifest manifest;
  manifest.command = "labels-eval";
  manifest.seed = global.seed;
  manifest.threads = global.threads;
  manifest.config_hash = hash_args(global);
  manifest.inputs = {options.data, options.labels};
  manifest.outputs = {global.out};
  manifest.duration_seconds = stopwatch.seconds();

  json report = label_counts_json(total);
  report["per_sequence"] = std::move(per_sequence);
  report["manifest"] = manifest_json(manifest, /*include_volatile=*/false);

  const fs::path out_path(global.out);
  PartialMarker marker(out_path.string() + ".partial");
  dump_json_file(out_path, report);
  write_manifest_file(out_path.string() + ".manifest.json", manifest);
  marker.commit();

  std::cout << "tpr: " << (total.tpr_defined() ? std::to_string(total.tpr()) : "undefined")
            << "  tnr: " << (total.tnr_defined() ? std::to_string(total.tnr()) : "undefined")
            << "\n";
}

void cmd_labels_clean(const GlobalOptions& global, const LabelsCleanOptions& options) {
  Stopwatch stopwatch;
  require_option(global.out, "--out");
  require_option(options.data, "--data");
  require_option(options.labels, "--labels");
  const CleanMode mode = parse_clean_mode(options.mode);

  const FlatDataset flat = load_flat(options.data, options.split, options.label, global.threads);
  const std::vector<PointLabels> pseudo = load_aligned_labels(options.labels, flat);

  std::vector<PointLabels> cleaned(pseudo.size());
  parallel_for(static_cast<int>(pseudo.size()), global.threads, [&](int i) {
    const auto idx = static_cast<std::size_t>(i);
    cleaned[idx] = clean_labels(pseudo[idx], flat.gt[idx], mode);
  });

  const fs::path out_path(global.out);
  PartialMarker marker(out_path.string() + ".partial");
  io::write_labels_json(out_path, cleaned);

  RunManifest manifest;
  manifest.command = "labels-clean";
  manifest.seed = global.seed;
  manifest.threads = global.threads;
  manifest.config_hash = hash_args(global);
  manifest.inputs = {options.data, options.labels};
  manifest.outputs = {out_path.string()};
  manifest.duration_seconds = stopwatch.seconds();
  write_manifest_file(out_path.string() + ".manifest.json", manifest);
  marker.commit();

  std::cout << "cleaned " << cleaned.size() << " frames (" << options.mode << ")\n";
}

void cmd_hist(const GlobalOptions& global, const HistOptions& options) {
  Stopwatch stopwatch;
  require_option(global.out, "--out");
  if (options.labels.empty() && options.data.empty()) {
    throw ValidationError("hist needs --labels and/or --data");
  }
  if (!(options.bin_width > 0.0) || !(options.max_distance > options.bin_width)) {
    throw ValidationError("hist: bad bin geometry");
  }

  std::vector<io::HistogramSeries> series;
  RunManifest manifest;
  if (!options.labels.empty()) {
    const std::vector<PointLabels> labels = io::read_labels_json(options.labels);
    std::vector<Point2D> centers;
    for (const PointLabels& frame : labels) {
      centers.insert(centers.end(), frame.centers.begin(), frame.centers.end());
    }
    series.push_back(
        {"pseudo", distance_histogram(centers, options.bin_width, options.max_distance)});
    manifest.inputs.push_back(options.labels);
  }
  if (!options.data.empty()) {
    const FlatDataset flat = load_flat(options.data, options.split, LabelParams{}, global.threads);
    std::vector<Point2D> centers;
    for (const auto& frame_centers : flat.annotations) {
      centers.insert(centers.end(), frame_centers.begin(), frame_centers.end());
    }
    series.push_back(
        {"annotations", distance_histogram(centers, options.bin_width, options.max_distance)});
    manifest.inputs.push_back(options.data);
  }

  const fs::path csv_path(global.out + ".csv");
  const fs::path svg_path(global.out + ".svg");
  PartialMarker marker(global.out + ".partial");
  io::write_histogram_csv(csv_path, series, options.bin_width, options.max_distance);
  io::write_histogram_svg(svg_path, series, options.bin_width, options.max_distance);

  manifest.command = "hist";
  manifest.seed = global.seed;
  manifest.threads = global.threads;
  manifest.config_hash = hash_args(global);
  manifest.outputs = {csv_path.string(), svg_path.string()};
  manifest.duration_seconds = stopwatch.seconds();
  write_manifest_file(global.out + ".manifest.json", manifest);
  marker.commit();

  std::cout << "wrote " << csv_path.string() << " and " << svg_path.string() << "\n";
}

void cmd_train(const GlobalOptions& global, const TrainOptions& options) {
  Stopwatch stopwatch;
  require_option(global.out, "--out");
  require_option(options.data, "--data");
  if (options.supervision != "pseudo" && options.supervision != "gt") {
    throw ValidationError("unknown supervision '" + options.supervision + "' (expected pseudo|gt)");
  }
  if (options.loss != "ce" && options.loss != "phuber") {
    throw ValidationError("unknown loss '" + options.loss + "' (expected ce|phuber)");
  }
  if (options.flip_labels < 0.0 || options.flip_labels > 1.0) {
    throw ValidationError("--flip-labels outside [0, 1]");
  }

  const FlatDataset flat = load_flat(options.data, options.split, options.label, global.threads);

  std::vector<PointLabels> labels;
  if (options.supervision == "pseudo") {
    require_option(options.labels, "--labels");
    labels = load_aligned_labels(options.labels, flat);
    if (!options.clean.empty()) {
      const CleanMode mode = parse_clean_mode(options.clean);
      for (std::size_t i = 0; i < labels.size(); ++i) {
        labels[i] = clean_labels(labels[i], flat.gt[i], mode);
      }
    }
  } else {
    labels = flat.gt;
    if (!options.clean.empty()) {
      throw ValidationError("--clean only applies to pseudo supervision");
    }
  }

  if (options.flip_labels > 0.0) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      Rng rng = derive_rng(global.seed, kSaltFlips, static_cast<std::uint64_t>(i));
      labels[i] = inject_label_flips(labels[i], options.flip_labels, rng);
    }
  }

  Model model;
  if (!options.init.empty()) {
    model = io::read_model_json(options.init);
  } else {
    WindowParams window;
    window.size = options.window;
    model = Model::create(global.seed, window);
  }
  model.config_hash = hash_args(global);
  model.seed = global.seed;

  RobustLossParams loss_params;
  loss_params.tau = options.tau;
  loss_params.mixup_alpha = options.alpha;
  loss_params.mixup_weight = options.mixup_weight;
  loss_params.use_partial_huber = options.loss == "phuber";
  loss_params.use_mixup = options.mixup;

  TrainConfig config;
  config.epochs = options.epochs;
  config.batch_size = options.batch_size;
  config.lr_initial = options.lr;
  config.lr_final = options.lr_final;
  config.seed = global.seed;

  const std::vector<LabeledScan> data = make_labeled_scans(flat, labels);
  const TrainReport report = train(model, data, config, loss_params);

  const fs::path out_path(global.out);
  PartialMarker marker(out_path.string() + ".partial");
  io::write_model_json(out_path, model);

  RunManifest manifest;
  manifest.command = "train";
  manifest.seed = global.seed;
  manifest.threads = global.threads;
  manifest.config_hash = model.config_hash;
  manifest.inputs.push_back(options.data);
  if (!options.labels.empty()) manifest.inputs.push_back(options.labels);
  if (!options.init.empty()) manifest.inputs.push_back(options.init);
  manifest.outputs = {out_path.string()};
  manifest.duration_seconds = stopwatch.seconds();
  write_manifest_file(out_path.string() + ".manifest.json", manifest);
  marker.commit();

  std::cout << "trained " << config.epochs << " epochs, " << report.total_updates << " updates";
  if (!report.epoch_mean_loss.empty()) {
    std::cout << ", final epoch loss " << report.epoch_mean_loss.back();
  }
  std::cout << "\n";
}

void cmd_finetune(const GlobalOptions& global, const FinetuneOptions& options) {
  Stopwatch stopwatch;
  require_option(global.out, "--out");
  require_option(options.data, "--data");
  require_option(options.labels, "--labels");
  require_option(options.model, "--model");
  if (options.shuffle != "global" && options.shuffle != "sequence") {
    throw ValidationError("unknown shuffle scope '" + options.shuffle +
                          "' (expected global|sequence)");
  }

  const FlatDataset train_flat =
      load_flat(options.data, "train", options.label, global.threads);
  const std::vector<PointLabels> labels = load_aligned_labels(options.labels, train_flat);
  const FlatDataset test_flat = load_flat(options.data, "test", options.label, global.threads);

  Model model = io::read_model_json(options.model);

  FinetuneConfig config;
  config.lr = options.lr;
  config.batch_size = options.batch_size;
  config.track_every = options.track_every;
  config.scope = options.shuffle == "global" ? ShuffleScope::kGlobal : ShuffleScope::kSequence;
  config.tau = options.tau;
  config.seed = global.seed;

  std::vector<Scan> test_scans;
  for (const Scan* scan : test_flat.scans) test_scans.push_back(*scan);

  const std::vector<LabeledScan> data = make_labeled_scans(train_flat, labels);
  const auto trajectory = finetune_online(model, data, test_scans, test_flat.annotations, config);

  const fs::path trajectory_path(global.out + "_trajectory.csv");
  const fs::path model_path(global.out + "_model.json");
  PartialMarker marker(global.out + ".partial");
  io::write_trajectory_csv(trajectory_path, trajectory);
  model.config_hash = hash_args(global);
  io::write_model_json(model_path, model);

  RunManifest manifest;
  manifest.command = "finetune";
  manifest.seed = global.seed;
  manifest.threads = global.threads;
  manifest.config_hash = hash_args(global);
  manifest.inputs = {options.data, options.labels, options.model};
  manifest.outputs = {trajectory_path.string(), model_path.string()};
  manifest.duration_seconds = stopwatch.seconds();
  write_manifest_file(global.out + "_manifest.json", manifest);
  marker.commit();

  std::cout << "finetune (" << options.shuffle << "): ap_0.5 " << trajectory.front().ap05
            << " -> " << trajectory.back().ap05 << " over " << trajectory.back().step
            << " updates\n";
}

void cmd_eval(const GlobalOptions& global, const EvalOptions& options) {
  Stopwatch stopwatch;
  require_option(global.out, "--out");
  require_option(options.data, "--data");
  require_option(options.model, "--model");

  const FlatDataset flat = load_flat(options.data, options.split, LabelParams{}, global.threads);
  const Model model = io::read_model_json(options.model);

  std::vector<Scan> scans;
  for (const Scan* scan : flat.scans) scans.push_back(*scan);
  const DetectorEval eval = evaluate_detector(model, scans, flat.annotations, global.threads);

  std::size_t n_gt = 0;
  for (const auto& centers : flat.annotations) n_gt += centers.size();

  RunManifest manifest;
  manifest.command = "eval";
  manifest.seed = global.seed;
  manifest.threads = global.threads;
  manifest.config_hash = hash_args(global);
  manifest.inputs = {options.data, options.model};

  const fs::path report_path(global.out + "_report.json");
  const fs::path pr03_path(global.out + "_pr03.csv");
  const fs::path pr05_path(global.out + "_pr05.csv");
  manifest.outputs = {report_path.string(), pr03_path.string(), pr05_path.string()};

  PartialMarker marker(global.out + ".partial");
  io::write_pr_curve_csv(pr03_path, eval.pr03);
  io::write_pr_curve_csv(pr05_path, eval.pr05);

  json report{{"ap_0.3", eval.pr03.ap},
              {"ap_0.5", eval.pr05.ap},
              {"n_ground_truth", n_gt},
              {"n_detections", eval.pr05.points.size()},
              {"frames", scans.size()},
              {"manifest", manifest_json(manifest, /*include_volatile=*/false)}};
  dump_json_file(report_path, report);

  manifest.duration_seconds = stopwatch.seconds();
  write_manifest_file(global.out + "_manifest.json", manifest);
  marker.commit();

  std::cout << "ap_0.3: " << eval.pr03.ap << "  ap_0.5: " << eval.pr05.ap << "  (" << n_gt
            << " ground truths, " << scans.size() << " frames)\n";
}

}  // namespace lpl::cli
