#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lpl/detector.hpp"
#include "lpl/errors.hpp"
#include "lpl/io.hpp"
#include "lpl/rng.hpp"

using namespace lpl;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Scan ramp_scan(int n) {
  Scan scan;
  scan.angle_min = -kPi;
  scan.angle_increment = kTwoPi / n;
  scan.max_range = 30.0;
  for (int k = 0; k < n; ++k) {
    scan.ranges.push_back(2.0 + 25.0 * (0.5 + 0.5 * std::sin(0.37 * k)));
  }
  return scan;
}

// A small labeled scan for training tests: a leg-like dip around beam 20.
struct TrainFixture {
  Scan scan;
  PointLabels labels;

  TrainFixture() {
    scan = ramp_scan(64);
    for (int k = 18; k <= 22; ++k) scan.ranges[static_cast<std::size_t>(k)] = 3.0;
    labels.frame_id = scan.frame_id;
    labels.cls.assign(64, PointClass::kNeg);
    const std::vector<Point2D> points = polar_to_cartesian(scan);
    const Point2D center = points[20];
    for (int k = 18; k <= 22; ++k) {
      labels.cls[static_cast<std::size_t>(k)] = PointClass::kPos;
      labels.reg.emplace(k, center - points[static_cast<std::size_t>(k)]);
    }
    labels.cls[30] = PointClass::kIgnore;
  }
};

}  // namespace

TEST_CASE("window features are clamped deltas with a zero center") {
  const WindowParams params;
  std::vector<double> ranges(40, 5.0);
  ranges[3] = 30.0;
  ranges[39] = 0.5;

  std::vector<double> out(17);
  fill_window_feature(ranges, 1, params, out);
  CHECK(out[8] == 0.0);  // center
  // Neighbor at +2 (index 3) is far: clamped to 1.
  CHECK(out[10] == 1.0);
  // Wrap-around neighbor at -2 (index 39) is close: (0.5 - 5) / 1.5 clamped.
  CHECK(out[6] == -1.0);
  // Flat neighbor: exact zero delta.
  CHECK(out[9] == 0.0);
  for (const double v : out) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("zero model outputs probability one half and zero offset") {
  Model model = Model::create(0);
  const int dims[] = {17, 64, 64, 3};
  model.net = Mlp::zeros(dims);
  const std::vector<double> feature(17, 0.3);
  const PointPrediction pred = forward_point(model, feature);
  CHECK(pred.p == 0.5);
  CHECK(pred.offset.x == 0.0);
  CHECK(pred.offset.y == 0.0);
}

TEST_CASE("predicted probabilities stay in the open unit interval") {
  const Model model = Model::create(7);
  const Scan scan = ramp_scan(128);
  const ScanPrediction prediction = predict_scan(model, scan);
  for (const double p : prediction.probs) {
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
}

TEST_CASE("loss values at the reference points") {
  // Perfect prediction: zero loss for both.
  CHECK(loss_ce(1.0 - 1e-12, 1.0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(loss_partial_huber(1.0 - 1e-12, 1.0, 5.0) == doctest::Approx(0.0).epsilon(1e-9));

  // Branch point p_y = 1/tau: both branches evaluate to log(tau).
  const double tau = 5.0;
  const double p_branch = 0.2;  // y = 1 -> p_y = p
  const double linear = -tau * p_branch + std::log(tau) + 1.0;
  const double logarithmic = -std::log(p_branch);
  CHECK(std::abs(linear - logarithmic) < 1e-9);
  CHECK(loss_partial_huber(p_branch, 1.0, tau) == doctest::Approx(std::log(5.0)).epsilon(1e-12));

  // Linear branch: p_y = 0.1 -> -0.5 + log 5 + 1.
  CHECK(loss_partial_huber(0.1, 1.0, tau) ==
        doctest::Approx(-0.5 + std::log(5.0) + 1.0).epsilon(1e-12));
  CHECK(loss_partial_huber(0.1, 1.0, tau) == doctest::Approx(2.1094379124341003).epsilon(1e-12));

  // The y = 0 side mirrors through p_y = 1 - p (log branch here: p_y = 0.7).
  CHECK(loss_partial_huber(0.3, 0.0, tau) == doctest::Approx(-std::log(0.7)).epsilon(1e-12));
  // And the linear branch engages at p_y = 0.1 regardless of the class.
  CHECK(loss_partial_huber(0.9, 0.0, tau) == doctest::Approx(2.1094379124341003).epsilon(1e-12));

  CHECK_THROWS_AS(loss_ce(0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(loss_ce(1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(loss_partial_huber(0.5, 1.5, 5.0), ValidationError);
  CHECK_THROWS_AS(loss_partial_huber(0.5, 1.0, 1.0), ValidationError);
}

TEST_CASE("partial huber converges to cross-entropy as tau grows") {
  const double tau = 1e6;
  for (double p = 0.01; p <= 0.999; p += 0.007) {
    CHECK(std::abs(loss_partial_huber(p, 1.0, tau) - loss_ce(p, 1.0)) < 1e-5);
    CHECK(std::abs(loss_partial_huber(1.0 - p, 0.0, tau) - loss_ce(1.0 - p, 0.0)) < 1e-5);
  }
}

TEST_CASE("partial huber gradient is bounded by tau") {
  const double tau = 5.0;
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double p = rng.uniform(0.001, 0.999);
    const double y = rng.uniform_int(0, 1);
    const double dldz = dloss_dz_partial_huber(p, y, tau);
    const double link = p * (1.0 - p);  // |dp_y/dz| with hard targets
    CHECK(std::abs(dldz) <= tau * link * (1.0 + 1e-12));
  }
}

TEST_CASE("loss gradients match finite differences through the sigmoid") {
  Rng rng(17);
  int checked = 0;
  while (checked < 100) {
    const double z = rng.uniform(-4.0, 4.0);
    const double y = rng.uniform(0.0, 1.0);
    const double tau = 5.0;
    const double p = sigmoid(z);
    const double p_y = y * p + (1.0 - y) * (1.0 - p);
    if (std::abs(p_y - 1.0 / tau) < 1e-6) continue;  // skip the branch point

    const double h = 1e-6;
    const auto fd = [&](auto loss) {
      return (loss(sigmoid(z + h)) - loss(sigmoid(z - h))) / (2.0 * h);
    };
    const double fd_ce = fd([&](double q) { return loss_ce(q, y); });
    const double an_ce = dloss_dz_ce(p, y);
    CHECK(std::abs(fd_ce - an_ce) / std::max({std::abs(fd_ce), std::abs(an_ce), 1e-6}) < 1e-4);

    const double fd_ph = fd([&](double q) { return loss_partial_huber(q, y, tau); });
    const double an_ph = dloss_dz_partial_huber(p, y, tau);
    CHECK(std::abs(fd_ph - an_ph) / std::max({std::abs(fd_ph), std::abs(an_ph), 1e-6}) < 1e-4);
    ++checked;
  }
}

TEST_CASE("network gradients match central finite differences") {
  // Composite objective: mean CE on the logit head plus MSE on the offsets.
  const int dims[] = {9, 12, 10, 3};
  const Mlp net = Mlp::random_init(dims, 11);
  Rng rng(23);
  const int n = 14;
  Eigen::MatrixXd x(n, 9);
  Eigen::VectorXd y(n);
  Eigen::MatrixXd t(n, 2);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < 9; ++c) x(i, c) = rng.uniform(-1.0, 1.0);
    y(i) = static_cast<double>(rng.uniform_int(0, 1));
    t(i, 0) = rng.uniform(-0.5, 0.5);
    t(i, 1) = rng.uniform(-0.5, 0.5);
  }

  const auto objective = [&](const Mlp& candidate) {
    const Eigen::MatrixXd out = mlp_forward(candidate, x);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      total += loss_ce(sigmoid(out(i, 0)), y(i)) / n;
    }
    total += (out.rightCols(2) - t).squaredNorm() / n;
    return total;
  };

  ForwardCache cache;
  const Eigen::MatrixXd out = mlp_forward(net, x, &cache);
  Eigen::MatrixXd d_out(n, 3);
  for (int i = 0; i < n; ++i) {
    d_out(i, 0) = dloss_dz_ce(sigmoid(out(i, 0)), y(i)) / n;
  }
  d_out.rightCols(2) = (out.rightCols(2) - t) * (2.0 / n);
  MlpBuffers grad = MlpBuffers::zeros_like(net);
  mlp_backward(net, cache, d_out, grad);

  // Probe 100 random weight coordinates.
  Rng probe_rng(29);
  const double h = 1e-5;
  for (int probe = 0; probe < 100; ++probe) {
    const auto layer = static_cast<std::size_t>(probe_rng.uniform_int(0, 2));
    Mlp plus = net;
    Mlp minus = net;
    double analytic = 0.0;
    if (probe_rng.uniform() < 0.85) {
      const int r = static_cast<int>(probe_rng.uniform_int(0, net.layers[layer].weights.rows() - 1));
      const int c = static_cast<int>(probe_rng.uniform_int(0, net.layers[layer].weights.cols() - 1));
      plus.layers[layer].weights(r, c) += h;
      minus.layers[layer].weights(r, c) -= h;
      analytic = grad.layers[layer].weights(r, c);
    } else {
      const int r = static_cast<int>(probe_rng.uniform_int(0, net.layers[layer].bias.size() - 1));
      plus.layers[layer].bias(r) += h;
      minus.layers[layer].bias(r) -= h;
      analytic = grad.layers[layer].bias(r);
    }
    const double fd = (objective(plus) - objective(minus)) / (2.0 * h);
    const double rel = std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-6});
    CHECK(rel < 1e-4);
  }
}

TEST_CASE("mixup produces convex combinations") {
  Rng rng(41);
  const int n = 50;
  Eigen::MatrixXd x(n, 4);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < 4; ++c) x(i, c) = rng.uniform(-1.0, 1.0);
    y(i) = static_cast<double>(rng.uniform_int(0, 1));
  }
  const MixupBatch mixed = mixup_pairs(x, y, 0.2, rng);
  REQUIRE(mixed.x.rows() == n);
  for (int i = 0; i < n; ++i) {
    CHECK(mixed.y(i) >= 0.0);
    CHECK(mixed.y(i) <= 1.0);
    CHECK(mixed.x.row(i).minCoeff() >= x.minCoeff() - 1e-12);
    CHECK(mixed.x.row(i).maxCoeff() <= x.maxCoeff() + 1e-12);
  }

  // Identical samples are fixed points of the blend.
  Eigen::MatrixXd same = Eigen::MatrixXd::Constant(8, 3, 0.4);
  Eigen::VectorXd same_y = Eigen::VectorXd::Constant(8, 1.0);
  const MixupBatch fixed = mixup_pairs(same, same_y, 0.2, rng);
  CHECK((fixed.x - same).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((fixed.y - same_y).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::MatrixXd one_row(1, 3);
  Eigen::VectorXd one_y(1);
  CHECK_THROWS_AS(mixup_pairs(one_row, one_y, 0.2, rng), ValidationError);
}

TEST_CASE("beta(alpha, alpha) draws average one half") {
  Rng rng(4);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rng.beta(0.2, 0.2);
  const double mean = sum / n;
  // Var of Beta(0.2, 0.2) = 0.25 / 1.4; allow three standard errors.
  const double stderr3 = 3.0 * std::sqrt(0.25 / 1.4 / n);
  CHECK(std::abs(mean - 0.5) <= stderr3);
}

TEST_CASE("train_step is a no-op on ignore-only batches") {
  TrainFixture fx;
  fx.labels.cls.assign(64, PointClass::kIgnore);
  fx.labels.reg.clear();

  Model model = Model::create(3);
  const Eigen::MatrixXd before = model.net.layers[0].weights;
  AdamState adam = AdamState::for_net(model.net);
  Rng rng(1);
  const LabeledScan item{&fx.scan, &fx.labels, 0};
  const StepReport report =
      train_step(model, std::vector<LabeledScan>{item}, RobustLossParams{}, adam, 1e-3, rng);
  CHECK(report.updates == 0);
  CHECK(report.n_cls == 0);
  CHECK(adam.step == 0);
  CHECK((model.net.layers[0].weights - before).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mixup with zero weight equals the mixup-off path") {
  TrainFixture fx;
  const LabeledScan item{&fx.scan, &fx.labels, 0};

  Model with_mixup = Model::create(5);
  Model without = Model::create(5);

  RobustLossParams on;
  on.use_mixup = true;
  on.mixup_weight = 0.0;
  RobustLossParams off;

  AdamState adam_on = AdamState::for_net(with_mixup.net);
  AdamState adam_off = AdamState::for_net(without.net);
  Rng rng_on(2);
  Rng rng_off(2);
  for (int step = 0; step < 3; ++step) {
    train_step(with_mixup, std::vector<LabeledScan>{item}, on, adam_on, 1e-3, rng_on);
    train_step(without, std::vector<LabeledScan>{item}, off, adam_off, 1e-3, rng_off);
  }
  for (std::size_t l = 0; l < with_mixup.net.layers.size(); ++l) {
    const double diff = (with_mixup.net.layers[l].weights - without.net.layers[l].weights)
                            .cwiseAbs()
                            .maxCoeff();
    CHECK(diff <= 1e-12);
  }
}

TEST_CASE("a gradient step decreases the loss of its own batch") {
  TrainFixture fx;
  const LabeledScan item{&fx.scan, &fx.labels, 0};
  Model model = Model::create(11);

  const auto batch_loss = [&](const Model& m) {
    double total = 0.0;
    int count = 0;
    const Eigen::MatrixXd features = window_features(fx.scan, m.window);
    const Eigen::MatrixXd out = mlp_forward(m.net, features);
    for (int k = 0; k < fx.scan.size(); ++k) {
      if (fx.labels.cls[static_cast<std::size_t>(k)] == PointClass::kIgnore) continue;
      const double y = fx.labels.cls[static_cast<std::size_t>(k)] == PointClass::kPos ? 1.0 : 0.0;
      total += loss_ce(sigmoid(std::clamp(out(k, 0), -30.0, 30.0)), y);
      ++count;
    }
    return total / count;
  };

  const double before = batch_loss(model);
  AdamState adam = AdamState::for_net(model.net);
  Rng rng(1);
  RobustLossParams params;
  train_step(model, std::vector<LabeledScan>{item}, params, adam, 1e-4, rng);
  const double after = batch_loss(model);
  CHECK(after < before);
}

TEST_CASE("training is bit-deterministic for a fixed seed") {
  TrainFixture fx;
  std::vector<LabeledScan> data;
  for (int i = 0; i < 6; ++i) data.push_back({&fx.scan, &fx.labels, i / 3});

  TrainConfig config;
  config.epochs = 3;
  config.batch_size = 2;
  config.seed = 77;
  RobustLossParams loss;
  loss.use_mixup = true;
  loss.use_partial_huber = true;

  Model a = Model::create(9);
  Model b = Model::create(9);
  train(a, data, config, loss);
  train(b, data, config, loss);
  for (std::size_t l = 0; l < a.net.layers.size(); ++l) {
    CHECK((a.net.layers[l].weights - b.net.layers[l].weights).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.net.layers[l].bias - b.net.layers[l].bias).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("learning rate holds then decays to the floor") {
  TrainConfig config;
  config.lr_initial = 1e-3;
  config.lr_final = 1e-6;
  const int total = 100;
  CHECK(learning_rate_at(config, 0, total) == 1e-3);
  CHECK(learning_rate_at(config, 49, total) == 1e-3);
  CHECK(learning_rate_at(config, total - 1, total) == doctest::Approx(1e-6).epsilon(1e-12));
  double prev = 1e-3;
  for (int s = 50; s < total; ++s) {
    const double lr = learning_rate_at(config, s, total);
    CHECK(lr <= prev * (1.0 + 1e-12));
    prev = lr;
  }
}

TEST_CASE("vote_and_group reference behavior") {
  // Below threshold: nothing.
  {
    const std::vector<double> probs{0.1, 0.2};
    const std::vector<Point2D> votes{{0, 0}, {1, 1}};
    CHECK(vote_and_group(probs, votes, 0.3, 0.5).empty());
  }
  // Two close votes merge into one weighted detection.
  {
    const std::vector<double> probs{0.9, 0.8};
    const std::vector<Point2D> votes{{1.0, 0.0}, {1.1, 0.0}};
    const auto detections = vote_and_group(probs, votes, 0.3, 0.5);
    REQUIRE(detections.size() == 1);
    CHECK(detections[0].confidence == 0.9);
    CHECK(detections[0].x == doctest::Approx((0.9 * 1.0 + 0.8 * 1.1) / 1.7));
    CHECK(detections[0].y == doctest::Approx(0.0));
  }
  // Two distant votes stay separate, sorted by confidence.
  {
    const std::vector<double> probs{0.7, 0.95};
    const std::vector<Point2D> votes{{0.0, 0.0}, {2.0, 0.0}};
    const auto detections = vote_and_group(probs, votes, 0.3, 0.5);
    REQUIRE(detections.size() == 2);
    CHECK(detections[0].confidence == 0.95);
    CHECK(detections[1].confidence == 0.7);
  }
}

TEST_CASE("vote grouping is invariant to input order") {
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 40;
    std::vector<double> probs;
    std::vector<Point2D> votes;
    for (int i = 0; i < n; ++i) {
      probs.push_back(rng.uniform(0.0, 1.0));
      votes.push_back({rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)});
    }
    const auto base = vote_and_group(probs, votes, 0.3, 0.5);

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<double> probs2;
    std::vector<Point2D> votes2;
    for (const int i : perm) {
      probs2.push_back(probs[static_cast<std::size_t>(i)]);
      votes2.push_back(votes[static_cast<std::size_t>(i)]);
    }
    const auto shuffled = vote_and_group(probs2, votes2, 0.3, 0.5);

    REQUIRE(shuffled.size() == base.size());
    for (std::size_t d = 0; d < base.size(); ++d) {
      CHECK(shuffled[d].x == base[d].x);
      CHECK(shuffled[d].y == base[d].y);
      CHECK(shuffled[d].confidence == base[d].confidence);
    }
  }
}

TEST_CASE("absolute centers rotate offsets into the beam frame") {
  // Beam along +y: an along-beam offset moves the center further out.
  const Point2D center = absolute_center({0.0, 2.0}, kPi / 2.0, {0.5, 0.0});
  CHECK(center.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(center.y == doctest::Approx(2.5));
  // Cross-beam offset points left of the beam direction.
  const Point2D side = absolute_center({0.0, 2.0}, kPi / 2.0, {0.0, 0.3});
  CHECK(side.x == doctest::Approx(-0.3));
  CHECK(side.y == doctest::Approx(2.0));
}

TEST_CASE("finetune trajectory has initial and final points when tracking is sparse") {
  TrainFixture fx;
  std::vector<LabeledScan> data;
  for (int i = 0; i < 4; ++i) data.push_back({&fx.scan, &fx.labels, 0});

  std::vector<Scan> test_scans{fx.scan};
  std::vector<std::vector<Point2D>> test_gt{{polar_to_cartesian(fx.scan)[20]}};

  Model model = Model::create(13);
  FinetuneConfig config;
  config.track_every = 1000;  // beyond the single update of this epoch
  config.batch_size = 8;
  const auto trajectory = finetune_online(model, data, test_scans, test_gt, config);
  REQUIRE(trajectory.size() == 2);
  CHECK(trajectory.front().step == 0);
  CHECK(trajectory.back().step == 1);
}

TEST_CASE("model JSON round trip preserves weights bit-for-bit") {
  Model model = Model::create(123);
  model.config_hash = "deadbeef";
  const auto path = std::filesystem::temp_directory_path() / "lpl_model_roundtrip.json";
  io::write_model_json(path, model);
  const Model loaded = io::read_model_json(path);
  std::filesystem::remove(path);

  REQUIRE(loaded.net.layers.size() == model.net.layers.size());
  for (std::size_t l = 0; l < model.net.layers.size(); ++l) {
    CHECK((loaded.net.layers[l].weights - model.net.layers[l].weights).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK((loaded.net.layers[l].bias - model.net.layers[l].bias).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(loaded.window.size == model.window.size);
  CHECK(loaded.seed == model.seed);
  CHECK(loaded.config_hash == model.config_hash);
  CHECK(loaded.optimizer.beta1 == model.optimizer.beta1);
}
