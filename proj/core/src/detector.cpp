#include "lpl/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lpl/errors.hpp"
#include "lpl/parallel.hpp"

namespace lpl {
namespace {

constexpr double kLogitClamp = 30.0;
constexpr std::uint64_t kSaltEpochOrder = 0x45504f43;
constexpr std::uint64_t kSaltMixup = 0x4d495855;
constexpr std::uint64_t kSaltInit = 0x494e4954;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-std::clamp(z, -kLogitClamp, kLogitClamp))); }

void check_probability(double p, double y) {
  if (!(p > 0.0) || !(p < 1.0)) throw ValidationError("loss: p must lie in (0, 1)");
  if (!(y >= 0.0) || !(y <= 1.0)) throw ValidationError("loss: y must lie in [0, 1]");
}

}  // namespace

void WindowParams::validate() const {
  if (size < 3 || size % 2 == 0) throw ValidationError("window: size must be odd and >= 3");
  if (!(depth_scale > 0.0)) throw ValidationError("window: depth_scale must be positive");
}

void fill_window_feature(std::span<const double> ranges, int index, const WindowParams& params,
                         std::span<double> out) {
  const int n = static_cast<int>(ranges.size());
  const int half = params.size / 2;
  const double center = ranges[static_cast<std::size_t>(index)];
  for (int d = -half; d <= half; ++d) {
    const int j = ((index + d) % n + n) % n;  // wrap-around neighborhood
    const double delta = (ranges[static_cast<std::size_t>(j)] - center) / params.depth_scale;
    out[static_cast<std::size_t>(d + half)] = std::clamp(delta, -1.0, 1.0);
  }
}

Eigen::MatrixXd window_features(const Scan& scan, const WindowParams& params) {
  params.validate();
  const int n = scan.size();
  Eigen::MatrixXd features(n, params.size);
  std::vector<double> row(static_cast<std::size_t>(params.size));
  for (int i = 0; i < n; ++i) {
    fill_window_feature(scan.ranges, i, params, row);
    for (int c = 0; c < params.size; ++c) features(i, c) = row[static_cast<std::size_t>(c)];
  }
  return features;
}

Mlp Mlp::random_init(std::span<const int> dims, std::uint64_t seed) {
  if (dims.size() < 2) throw ValidationError("mlp: need at least input and output dims");
  Rng rng = derive_rng(seed, kSaltInit);
  Mlp net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    DenseLayer layer;
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const double bound = std::sqrt(6.0 / fan_in);
    layer.weights.resize(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) layer.weights(r, c) = rng.uniform(-bound, bound);
    }
    layer.bias = Eigen::VectorXd::Zero(fan_out);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

Mlp Mlp::zeros(std::span<const int> dims) {
  if (dims.size() < 2) throw ValidationError("mlp: need at least input and output dims");
  Mlp net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    DenseLayer layer;
    layer.weights = Eigen::MatrixXd::Zero(dims[l + 1], dims[l]);
    layer.bias = Eigen::VectorXd::Zero(dims[l + 1]);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

MlpBuffers MlpBuffers::zeros_like(const Mlp& net) {
  MlpBuffers buffers;
  for (const DenseLayer& layer : net.layers) {
    buffers.layers.push_back({Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()),
                              Eigen::VectorXd::Zero(layer.bias.size())});
  }
  return buffers;
}

void MlpBuffers::set_zero() {
  for (DenseLayer& layer : layers) {
    layer.weights.setZero();
    layer.bias.setZero();
  }
}

Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& x, ForwardCache* cache) {
  if (cache) {
    cache->inputs.clear();
    cache->inputs.reserve(net.layers.size());
  }
  Eigen::MatrixXd activation = x;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (cache) cache->inputs.push_back(activation);
    const DenseLayer& layer = net.layers[l];
    Eigen::MatrixXd z = activation * layer.weights.transpose();
    z.rowwise() += layer.bias.transpose();
    if (l + 1 < net.layers.size()) z = z.cwiseMax(0.0);  // rectified-linear hidden units
    activation = std::move(z);
  }
  return activation;
}

void mlp_backward(const Mlp& net, const ForwardCache& cache, const Eigen::MatrixXd& d_output,
                  MlpBuffers& grad) {
  if (cache.inputs.size() != net.layers.size()) {
    throw ValidationError("mlp_backward: cache does not match network");
  }
  Eigen::MatrixXd delta = d_output;
  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const Eigen::MatrixXd& input = cache.inputs[l];
    grad.layers[l].weights.noalias() += delta.transpose() * input;
    grad.layers[l].bias += delta.colwise().sum().transpose();
    if (l == 0) break;
    delta = delta * net.layers[l].weights;
    // The input to layer l is the output of the previous rectifier; its
    // positive entries mark the active units.
    delta.array() *= (input.array() > 0.0).cast<double>();
  }
}

AdamState AdamState::for_net(const Mlp& net, const AdamParams& params) {
  AdamState state;
  state.m = MlpBuffers::zeros_like(net);
  state.v = MlpBuffers::zeros_like(net);
  state.params = params;
  return state;
}

void adam_update(Mlp& net, const MlpBuffers& grad, AdamState& state, double lr) {
  ++state.step;
  const double b1 = state.params.beta1;
  const double b2 = state.params.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& m = state.m.layers[l];
    auto& v = state.v.layers[l];
    const auto& g = grad.layers[l];
    m.weights = b1 * m.weights + (1.0 - b1) * g.weights;
    m.bias = b1 * m.bias + (1.0 - b1) * g.bias;
    v.weights = b2 * v.weights + (1.0 - b2) * g.weights.cwiseProduct(g.weights);
    v.bias = b2 * v.bias + (1.0 - b2) * g.bias.cwiseProduct(g.bias);
    const double eps = state.params.epsilon;
    net.layers[l].weights -=
        (lr / correction1) *
        (m.weights.array() / ((v.weights.array() / correction2).sqrt() + eps)).matrix();
    net.layers[l].bias -=
        (lr / correction1) *
        (m.bias.array() / ((v.bias.array() / correction2).sqrt() + eps)).matrix();
  }
}

Model Model::create(std::uint64_t seed, const WindowParams& window) {
  window.validate();
  Model model;
  model.window = window;
  const int dims[] = {window.size, 64, 64, 3};
  model.net = Mlp::random_init(dims, seed);
  model.seed = seed;
  return model;
}

PointPrediction forward_point(const Model& model, std::span<const double> feature) {
  Eigen::MatrixXd x(1, static_cast<int>(feature.size()));
  for (std::size_t c = 0; c < feature.size(); ++c) x(0, static_cast<int>(c)) = feature[c];
  const Eigen::MatrixXd out = mlp_forward(model.net, x);
  return {sigmoid(out(0, 0)), {out(0, 1), out(0, 2)}};
}

Point2D absolute_center(const Point2D& point, double azimuth, const Point2D& offset) {
  const double c = std::cos(azimuth);
  const double s = std::sin(azimuth);
  // offset.x along the beam, offset.y across it.
  return {point.x + offset.x * c - offset.y * s, point.y + offset.x * s + offset.y * c};
}

double true_class_probability(double p, double y) {
  check_probability(p, y);
  return y * p + (1.0 - y) * (1.0 - p);
}

double loss_ce(double p, double y) {
  check_probability(p, y);
  return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

double loss_partial_huber(double p, double y, double tau) {
  if (!(tau > 1.0)) throw ValidationError("loss: tau must exceed 1");
  const double p_y = true_class_probability(p, y);
  if (p_y <= 1.0 / tau) return -tau * p_y + std::log(tau) + 1.0;
  return -std::log(p_y);
}

double dloss_dz_ce(double p, double y) {
  check_probability(p, y);
  return p - y;
}

double dloss_dz_partial_huber(double p, double y, double tau) {
  if (!(tau > 1.0)) throw ValidationError("loss: tau must exceed 1");
  const double p_y = true_class_probability(p, y);
  const double dl_dpy = p_y <= 1.0 / tau ? -tau : -1.0 / p_y;
  const double dpy_dp = 2.0 * y - 1.0;
  return dl_dpy * dpy_dp * p * (1.0 - p);
}

void RobustLossParams::validate() const {
  if (!(tau > 1.0)) throw ValidationError("robust loss: tau must exceed 1");
  if (!(mixup_alpha > 0.0)) throw ValidationError("robust loss: alpha must be positive");
  if (!(mixup_weight >= 0.0) || !(mixup_weight <= 1.0)) {
    throw ValidationError("robust loss: mixup weight outside [0, 1]");
  }
}

MixupBatch mixup_pairs(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha,
                       Rng& rng) {
  const int n = static_cast<int>(x.rows());
  if (n < 2) throw ValidationError("mixup: batch must contain at least two samples");
  MixupBatch out;
  out.x.resizeLike(x);
  out.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto j = static_cast<int>(rng.uniform_int(0, n - 1));
    const double lambda = rng.beta(alpha, alpha);
    out.x.row(i) = lambda * x.row(i) + (1.0 - lambda) * x.row(j);
    out.y(i) = lambda * y(i) + (1.0 - lambda) * y(j);
  }
  return out;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ValidationError("train: epochs must be >= 0");
  if (batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
  if (!(lr_initial > 0.0) || !(lr_final > 0.0)) {
    throw ValidationError("train: learning rates must be positive");
  }
}

double learning_rate_at(const TrainConfig& config, int step, int total_steps) {
  const int midpoint = total_steps / 2;
  if (step < midpoint || total_steps <= 1) return config.lr_initial;
  const int decay_steps = std::max(1, total_steps - 1 - midpoint);
  const double t = static_cast<double>(step - midpoint) / static_cast<double>(decay_steps);
  return config.lr_initial * std::pow(config.lr_final / config.lr_initial, std::min(t, 1.0));
}

namespace {

struct BatchData {
  Eigen::MatrixXd cls_x;
  Eigen::VectorXd cls_y;
  Eigen::MatrixXd reg_x;
  Eigen::MatrixXd reg_t;  // beam-aligned targets, n x 2
};

BatchData assemble_batch(std::span<const LabeledScan> batch, const WindowParams& window) {
  int n_cls = 0;
  int n_reg = 0;
  for (const LabeledScan& item : batch) {
    for (const PointClass c : item.labels->cls) {
      if (c != PointClass::kIgnore) ++n_cls;
    }
    n_reg += static_cast<int>(item.labels->reg.size());
  }

  BatchData data;
  data.cls_x.resize(n_cls, window.size);
  data.cls_y.resize(n_cls);
  data.reg_x.resize(n_reg, window.size);
  data.reg_t.resize(n_reg, 2);

  std::vector<double> row(static_cast<std::size_t>(window.size));
  int ci = 0;
  int ri = 0;
  for (const LabeledScan& item : batch) {
    const Scan& scan = *item.scan;
    const PointLabels& labels = *item.labels;
    if (static_cast<int>(labels.cls.size()) != scan.size()) {
      throw ValidationError("train: labels do not match scan size");
    }
    for (int k = 0; k < scan.size(); ++k) {
      if (labels.cls[static_cast<std::size_t>(k)] == PointClass::kIgnore) continue;
      fill_window_feature(scan.ranges, k, window, row);
      for (int c = 0; c < window.size; ++c) data.cls_x(ci, c) = row[static_cast<std::size_t>(c)];
      data.cls_y(ci) = labels.cls[static_cast<std::size_t>(k)] == PointClass::kPos ? 1.0 : 0.0;
      ++ci;
    }
    for (const auto& [index, offset] : labels.reg) {
      const int k = static_cast<int>(index);
      if (k < 0 || k >= scan.size()) throw ValidationError("train: reg index out of range");
      fill_window_feature(scan.ranges, k, window, row);
      for (int c = 0; c < window.size; ++c) data.reg_x(ri, c) = row[static_cast<std::size_t>(c)];
      const double phi = scan.angle(k);
      data.reg_t(ri, 0) = offset.x * std::cos(phi) + offset.y * std::sin(phi);
      data.reg_t(ri, 1) = -offset.x * std::sin(phi) + offset.y * std::cos(phi);
      ++ri;
    }
  }
  return data;
}

double batch_cls_loss(const Eigen::VectorXd& p, const Eigen::VectorXd& y,
                      const RobustLossParams& params) {
  double total = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    total += params.use_partial_huber ? loss_partial_huber(p(i), y(i), params.tau)
                                      : loss_ce(p(i), y(i));
  }
  return total / static_cast<double>(p.size());
}

Eigen::VectorXd batch_cls_dldz(const Eigen::VectorXd& p, const Eigen::VectorXd& y,
                               const RobustLossParams& params) {
  Eigen::VectorXd dldz(p.size());
  for (int i = 0; i < p.size(); ++i) {
    dldz(i) = params.use_partial_huber ? dloss_dz_partial_huber(p(i), y(i), params.tau)
                                       : dloss_dz_ce(p(i), y(i));
  }
  return dldz;
}

Eigen::VectorXd sigmoid_vector(const Eigen::VectorXd& z) {
  Eigen::VectorXd p(z.size());
  for (int i = 0; i < z.size(); ++i) p(i) = sigmoid(z(i));
  return p;
}

}  // namespace

StepReport train_step(Model& model, std::span<const LabeledScan> batch,
                      const RobustLossParams& loss_params, AdamState& adam, double lr, Rng& rng) {
  loss_params.validate();
  const BatchData data = assemble_batch(batch, model.window);

  StepReport report;
  report.n_cls = static_cast<int>(data.cls_x.rows());
  report.n_reg = static_cast<int>(data.reg_x.rows());
  if (report.n_cls == 0 && report.n_reg == 0) return report;  // nothing contributes

  const double cls_scale = loss_params.use_mixup ? 1.0 - loss_params.mixup_weight : 1.0;
  MlpBuffers grad = MlpBuffers::zeros_like(model.net);

  if (report.n_cls > 0) {
    ForwardCache cache;
    const Eigen::MatrixXd out = mlp_forward(model.net, data.cls_x, &cache);
    const Eigen::VectorXd p = sigmoid_vector(out.col(0));
    report.cls_loss = batch_cls_loss(p, data.cls_y, loss_params);
    Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(out.rows(), out.cols());
    d_out.col(0) =
        batch_cls_dldz(p, data.cls_y, loss_params) * (cls_scale / static_cast<double>(report.n_cls));
    mlp_backward(model.net, cache, d_out, grad);
  }
  if (report.n_reg > 0) {
    ForwardCache cache;
    const Eigen::MatrixXd out = mlp_forward(model.net, data.reg_x, &cache);
    const Eigen::MatrixXd residual = out.rightCols(2) - data.reg_t;
    report.reg_loss = residual.squaredNorm() / static_cast<double>(report.n_reg);
    Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(out.rows(), out.cols());
    d_out.rightCols(2) = residual * (2.0 / static_cast<double>(report.n_reg));
    mlp_backward(model.net, cache, d_out, grad);
  }

  if (!std::isfinite(report.cls_loss) || !std::isfinite(report.reg_loss)) {
    throw NumericalError("train_step: non-finite loss");
  }
  adam_update(model.net, grad, adam, lr);
  report.updates = 1;

  if (loss_params.use_mixup && loss_params.mixup_weight > 0.0 && report.n_cls >= 2) {
    const MixupBatch mixed = mixup_pairs(data.cls_x, data.cls_y, loss_params.mixup_alpha, rng);
    ForwardCache cache;
    const Eigen::MatrixXd out = mlp_forward(model.net, mixed.x, &cache);
    const Eigen::VectorXd p = sigmoid_vector(out.col(0));
    report.mixup_loss = batch_cls_loss(p, mixed.y, loss_params);
    if (!std::isfinite(report.mixup_loss)) throw NumericalError("train_step: non-finite mixup loss");
    Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(out.rows(), out.cols());
    d_out.col(0) = batch_cls_dldz(p, mixed.y, loss_params) *
                   (loss_params.mixup_weight / static_cast<double>(p.size()));
    grad.set_zero();
    mlp_backward(model.net, cache, d_out, grad);
    adam_update(model.net, grad, adam, lr);
    report.updates = 2;
  }
  return report;
}

TrainReport train(Model& model, std::span<const LabeledScan> data, const TrainConfig& config,
                  const RobustLossParams& loss_params) {
  config.validate();
  loss_params.validate();
  if (data.empty()) throw ValidationError("train: empty dataset");

  const int n = static_cast<int>(data.size());
  const int batches_per_epoch = (n + config.batch_size - 1) / config.batch_size;
  const int total_steps = config.epochs * batches_per_epoch;

  AdamState adam = AdamState::for_net(model.net, model.optimizer);
  TrainReport report;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  int step = 0;
  std::vector<LabeledScan> batch;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng order_rng = derive_rng(config.seed, kSaltEpochOrder, static_cast<std::uint64_t>(epoch));
    order_rng.shuffle(order);

    double epoch_loss = 0.0;
    int epoch_batches = 0;
    for (int start = 0; start < n; start += config.batch_size) {
      batch.clear();
      const int end = std::min(n, start + config.batch_size);
      for (int i = start; i < end; ++i) batch.push_back(data[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);

      Rng mix_rng = derive_rng(config.seed, kSaltMixup, static_cast<std::uint64_t>(step));
      const double lr = learning_rate_at(config, step, total_steps);
      const StepReport sr = train_step(model, batch, loss_params, adam, lr, mix_rng);
      epoch_loss += sr.cls_loss * (loss_params.use_mixup ? 1.0 - loss_params.mixup_weight : 1.0) +
                    sr.reg_loss + loss_params.mixup_weight * sr.mixup_loss;
      report.total_updates += sr.updates;
      ++epoch_batches;
      ++step;
    }
    report.epoch_mean_loss.push_back(epoch_batches > 0 ? epoch_loss / epoch_batches : 0.0);
  }
  return report;
}

std::vector<Detection> vote_and_group(std::span<const double> probs,
                                      std::span<const Point2D> votes, double vote_threshold,
                                      double group_radius) {
  if (probs.size() != votes.size()) throw ValidationError("vote_and_group: size mismatch");

  struct Vote {
    double p;
    Point2D position;
  };
  std::vector<Vote> candidates;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] >= vote_threshold) candidates.push_back({probs[i], votes[i]});
  }
  // Order by (p desc, x, y) so the grouping does not depend on input order.
  std::sort(candidates.begin(), candidates.end(), [](const Vote& a, const Vote& b) {
    if (a.p != b.p) return a.p > b.p;
    if (a.position.x != b.position.x) return a.position.x < b.position.x;
    return a.position.y < b.position.y;
  });

  const double radius_sq = group_radius * group_radius;
  std::vector<char> assigned(candidates.size(), 0);
  std::vector<Detection> detections;
  for (std::size_t seed = 0; seed < candidates.size(); ++seed) {
    if (assigned[seed]) continue;
    const Point2D anchor = candidates[seed].position;
    double weight_sum = 0.0;
    double wx = 0.0;
    double wy = 0.0;
    for (std::size_t i = seed; i < candidates.size(); ++i) {
      if (assigned[i]) continue;
      if (squared_distance(candidates[i].position, anchor) > radius_sq) continue;
      assigned[i] = 1;
      weight_sum += candidates[i].p;
      wx += candidates[i].p * candidates[i].position.x;
      wy += candidates[i].p * candidates[i].position.y;
    }
    detections.push_back({wx / weight_sum, wy / weight_sum, candidates[seed].p});
  }
  return detections;  // seeds were visited in confidence order
}

ScanPrediction predict_scan(const Model& model, const Scan& scan) {
  const Eigen::MatrixXd features = window_features(scan, model.window);
  const Eigen::MatrixXd out = mlp_forward(model.net, features);
  const std::vector<Point2D> points = polar_to_cartesian(scan);

  ScanPrediction prediction;
  prediction.probs.resize(static_cast<std::size_t>(scan.size()));
  prediction.centers.resize(static_cast<std::size_t>(scan.size()));
  for (int k = 0; k < scan.size(); ++k) {
    prediction.probs[static_cast<std::size_t>(k)] = sigmoid(out(k, 0));
    prediction.centers[static_cast<std::size_t>(k)] = absolute_center(
        points[static_cast<std::size_t>(k)], scan.angle(k), {out(k, 1), out(k, 2)});
  }
  return prediction;
}

std::vector<Detection> detect(const Model& model, const Scan& scan) {
  const ScanPrediction prediction = predict_scan(model, scan);
  return vote_and_group(prediction.probs, prediction.centers, model.vote_threshold,
                        model.group_radius);
}

DetectorEval evaluate_detector(const Model& model, std::span<const Scan> scans,
                               const std::vector<std::vector<Point2D>>& gt_centers,
                               int threads) {
  if (scans.size() != gt_centers.size()) {
    throw ValidationError("evaluate_detector: frame count mismatch");
  }
  std::vector<std::vector<Detection>> detections(scans.size());
  parallel_for(static_cast<int>(scans.size()), threads,
               [&](int i) { detections[static_cast<std::size_t>(i)] = detect(model, scans[static_cast<std::size_t>(i)]); });
  DetectorEval eval;
  eval.pr03 = average_precision(detections, gt_centers, 0.3);
  eval.pr05 = average_precision(detections, gt_centers, 0.5);
  return eval;
}

void FinetuneConfig::validate() const {
  if (!(lr > 0.0)) throw ValidationError("finetune: lr must be positive");
  if (batch_size < 1) throw ValidationError("finetune: batch_size must be >= 1");
  if (track_every < 1) throw ValidationError("finetune: track_every must be >= 1");
  if (!(tau > 1.0)) throw ValidationError("finetune: tau must exceed 1");
}

std::vector<TrajectoryPoint> finetune_online(Model& model, std::span<const LabeledScan> data,
                                             std::span<const Scan> test_scans,
                                             const std::vector<std::vector<Point2D>>& test_gt,
                                             const FinetuneConfig& config) {
  config.validate();
  if (data.empty()) throw ValidationError("finetune: empty dataset");

  // Assemble the consumption order for exactly one epoch.
  std::vector<int> order;
  order.reserve(data.size());
  if (config.scope == ShuffleScope::kGlobal) {
    order.resize(data.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng = derive_rng(config.seed, kSaltEpochOrder, 0);
    rng.shuffle(order);
  } else {
    // Sequences stay in first-appearance order; frames shuffle within each.
    std::vector<int> sequence_ids;
    std::vector<std::vector<int>> groups;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const int seq = data[i].sequence;
      auto it = std::find(sequence_ids.begin(), sequence_ids.end(), seq);
      if (it == sequence_ids.end()) {
        sequence_ids.push_back(seq);
        groups.emplace_back();
        it = sequence_ids.end() - 1;
      }
      groups[static_cast<std::size_t>(it - sequence_ids.begin())].push_back(static_cast<int>(i));
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
      Rng rng = derive_rng(config.seed, kSaltEpochOrder, static_cast<std::uint64_t>(g) + 1);
      rng.shuffle(groups[g]);
      order.insert(order.end(), groups[g].begin(), groups[g].end());
    }
  }

  RobustLossParams loss_params;
  loss_params.tau = config.tau;
  loss_params.use_partial_huber = true;

  AdamState adam = AdamState::for_net(model.net, model.optimizer);
  std::vector<TrajectoryPoint> trajectory;
  const auto record = [&](int step) {
    const DetectorEval eval = evaluate_detector(model, test_scans, test_gt);
    trajectory.push_back({step, eval.pr03.ap, eval.pr05.ap});
  };
  record(0);

  const int n = static_cast<int>(order.size());
  int update = 0;
  std::vector<LabeledScan> batch;
  for (int start = 0; start < n; start += config.batch_size) {
    batch.clear();
    const int end = std::min(n, start + config.batch_size);
    for (int i = start; i < end; ++i) batch.push_back(data[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
    Rng rng = derive_rng(config.seed, kSaltMixup, static_cast<std::uint64_t>(update));
    train_step(model, batch, loss_params, adam, config.lr, rng);
    ++update;
    if (update % config.track_every == 0) record(update);
  }
  if (trajectory.back().step != update) record(update);
  return trajectory;
}

}  // namespace lpl
