#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lpl/eval.hpp"
#include "lpl/pseudo_label.hpp"
#include "lpl/rng.hpp"
#include "lpl/scan.hpp"

namespace lpl {

/// Per-point input features: a window of neighboring range deltas,
/// clamp((r_j - r_i) / depth_scale, -1, 1), over the wrap-around
/// neighborhood centered on point i. The center entry is always 0.
struct WindowParams {
  int size = 17;
  double depth_scale = 1.5;

  void validate() const;  // size odd and >= 3
};

void fill_window_feature(std::span<const double> ranges, int index, const WindowParams& params,
                         std::span<double> out);

/// One row of features per beam (N x size).
Eigen::MatrixXd window_features(const Scan& scan, const WindowParams& params);

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;
};

/// Fully connected net with rectified-linear hidden activations and a linear
/// output layer.
struct Mlp {
  std::vector<DenseLayer> layers;

  int input_dim() const { return static_cast<int>(layers.front().weights.cols()); }
  int output_dim() const { return static_cast<int>(layers.back().weights.rows()); }

  static Mlp random_init(std::span<const int> dims, std::uint64_t seed);
  static Mlp zeros(std::span<const int> dims);
};

/// Same shapes as the model; used for gradients and optimizer moments.
struct MlpBuffers {
  std::vector<DenseLayer> layers;

  static MlpBuffers zeros_like(const Mlp& net);
  void set_zero();
};

struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer
};

/// x is row-major (n x input_dim); returns n x output_dim.
Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& x,
                            ForwardCache* cache = nullptr);

/// Accumulates parameter gradients for d(loss)/d(output) into `grad`.
void mlp_backward(const Mlp& net, const ForwardCache& cache, const Eigen::MatrixXd& d_output,
                  MlpBuffers& grad);

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  MlpBuffers m;
  MlpBuffers v;
  std::int64_t step = 0;
  AdamParams params;

  static AdamState for_net(const Mlp& net, const AdamParams& params = {});
};

void adam_update(Mlp& net, const MlpBuffers& grad, AdamState& state, double lr);

/// Detector: window preprocessing, a [W -> 64 -> 64 -> 3] net producing one
/// classification logit and a beam-aligned (along, cross) center offset, and
/// vote-grouping parameters.
struct Model {
  Mlp net;
  WindowParams window;
  double vote_threshold = 0.3;
  double group_radius = 0.5;
  AdamParams optimizer;
  std::uint64_t seed = 0;       // provenance
  std::string config_hash;

  static Model create(std::uint64_t seed, const WindowParams& window = {});
};

struct PointPrediction {
  double p = 0.0;       // person probability
  Point2D offset;       // beam-aligned (along, cross), meters
};

PointPrediction forward_point(const Model& model, std::span<const double> feature);

/// Predicted absolute center for beam k: point + along * radial + cross *
/// tangential unit vectors of the beam azimuth.
Point2D absolute_center(const Point2D& point, double azimuth, const Point2D& offset);

// --- losses -----------------------------------------------------------------
// p must lie in (0, 1) (callers clamp logits, never probabilities); y in
// [0, 1] admits soft mixup targets.

/// Probability assigned to the (possibly soft) true class:
/// p_y = y*p + (1-y)*(1-p).
double true_class_probability(double p, double y);

/// Binary cross-entropy with soft targets.
double loss_ce(double p, double y);

/// Cross-entropy whose base loss is linearized below p_y = 1/tau, bounding
/// the gradient magnitude w.r.t. p_y by tau:
///   -tau * p_y + log(tau) + 1   for p_y <= 1/tau,
///   -log(p_y)                   otherwise.
double loss_partial_huber(double p, double y, double tau);

// d(loss)/d(logit) through the sigmoid link.
double dloss_dz_ce(double p, double y);
double dloss_dz_partial_huber(double p, double y, double tau);

struct RobustLossParams {
  double tau = 5.0;
  double mixup_alpha = 0.2;
  double mixup_weight = 0.7;
  bool use_partial_huber = false;
  bool use_mixup = false;

  void validate() const;  // tau > 1, alpha > 0, weight in [0, 1]
};

struct MixupBatch {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

/// Pairs every sample with a uniformly drawn partner and blends both feature
/// and target with lambda ~ Beta(alpha, alpha).
MixupBatch mixup_pairs(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha, Rng& rng);

/// A scan plus its training targets; `sequence` groups scans for
/// sequence-scoped shuffling.
struct LabeledScan {
  const Scan* scan = nullptr;
  const PointLabels* labels = nullptr;
  int sequence = 0;
};

struct TrainConfig {
  int epochs = 5;
  int batch_size = 8;          // scans per batch
  double lr_initial = 1e-3;
  double lr_final = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Constant lr_initial until the schedule midpoint, then exponential decay
/// reaching lr_final on the last step.
double learning_rate_at(const TrainConfig& config, int step, int total_steps);

struct StepReport {
  double cls_loss = 0.0;
  double reg_loss = 0.0;
  double mixup_loss = 0.0;
  int n_cls = 0;
  int n_reg = 0;
  int updates = 0;
};

/// One training iteration on a batch of scans. Classification uses POS/NEG
/// points only; regression is mean squared error over points with a target.
/// With mixup enabled (and weight > 0) a second optimizer update runs on a
/// mixup-augmented copy of the classification samples. Batches with no
/// contributing points are a no-op. Non-finite losses raise NumericalError.
StepReport train_step(Model& model, std::span<const LabeledScan> batch,
                      const RobustLossParams& loss_params, AdamState& adam, double lr, Rng& rng);

struct TrainReport {
  std::vector<double> epoch_mean_loss;
  int total_updates = 0;
};

TrainReport train(Model& model, std::span<const LabeledScan> data, const TrainConfig& config,
                  const RobustLossParams& loss_params);

/// Greedy vote grouping: points with p >= vote_threshold vote at their
/// predicted centers; the highest-confidence unassigned vote seeds a group
/// absorbing votes within group_radius. Output positions are p-weighted
/// means, confidences the group maxima, sorted by confidence descending.
/// The result does not depend on input order.
std::vector<Detection> vote_and_group(std::span<const double> probs,
                                      std::span<const Point2D> votes, double vote_threshold,
                                      double group_radius);

struct ScanPrediction {
  std::vector<double> probs;
  std::vector<Point2D> centers;  // absolute predicted centers per beam
};

ScanPrediction predict_scan(const Model& model, const Scan& scan);
std::vector<Detection> detect(const Model& model, const Scan& scan);

struct DetectorEval {
  PRCurve pr03;
  PRCurve pr05;
};

DetectorEval evaluate_detector(const Model& model, std::span<const Scan> scans,
                               const std::vector<std::vector<Point2D>>& gt_centers,
                               int threads = 1);

enum class ShuffleScope { kSequence, kGlobal };

struct FinetuneConfig {
  double lr = 5e-5;
  int batch_size = 8;
  int track_every = 10;
  ShuffleScope scope = ShuffleScope::kGlobal;
  double tau = 5.0;            // fine-tuning always uses the partial-Huber loss
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrajectoryPoint {
  int step = 0;
  double ap03 = 0.0;
  double ap05 = 0.0;
};

/// One epoch of low-rate adaptation. kSequence shuffles frames only within
/// each sequence and consumes sequences in order; kGlobal shuffles across
/// the whole set. Test AP is recorded at step 0, every track_every updates,
/// and after the final update.
std::vector<TrajectoryPoint> finetune_online(Model& model, std::span<const LabeledScan> data,
                                             std::span<const Scan> test_scans,
                                             const std::vector<std::vector<Point2D>>& test_gt,
                                             const FinetuneConfig& config);

}  // namespace lpl
