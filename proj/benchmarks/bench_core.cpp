#include <benchmark/benchmark.h>

#include "lpl/detector.hpp"
#include "lpl/eval.hpp"
#include "lpl/pseudo_label.hpp"
#include "lpl/rng.hpp"
#include "lpl/synth_world.hpp"

namespace {

using namespace lpl;

SimConfig bench_config() {
  SimConfig config = default_sim_config();
  config.sequences.frames = 1;
  return config;
}

const SequenceData& bench_sequence() {
  static const SequenceData data = [] {
    SimConfig config = bench_config();
    config.sequences.frames = 8;
    return generate_sequence(config, 7, 0);
  }();
  return data;
}

void BM_RaycastScan(benchmark::State& state) {
  const SimConfig config = bench_config();
  Scene scene;
  scene.walls = {{{-1, -6}, {12, -6}}, {{12, -6}, {12, 6}}, {{12, 6}, {-1, 6}}, {{-1, 6}, {-1, -6}}};
  for (int i = 0; i < 4; ++i) {
    Person person;
    person.center = {2.0 + i * 1.5, -2.0 + i * 1.1};
    scene.persons.push_back(person);
  }
  Rng rng(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(raycast_scan(scene, Pose2D{}, config.sensor, rng));
  }
}
BENCHMARK(BM_RaycastScan);

void BM_GenerateLabels(benchmark::State& state) {
  const SequenceData& data = bench_sequence();
  const SimConfig config = bench_config();
  const FilterParams fp;
  const LabelParams lp;
  std::size_t frame = 0;
  for (auto _ : state) {
    const FrameData& f = data.frames[frame % data.frames.size()];
    benchmark::DoNotOptimize(generate_labels(f.scan, f.detections, config.sensor.camera, fp, lp));
    ++frame;
  }
}
BENCHMARK(BM_GenerateLabels);

void BM_MeanShift(benchmark::State& state) {
  Rng rng(3);
  std::vector<Point2D> points;
  for (int i = 0; i < 200; ++i) {
    points.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(mean_shift_refine(points, {0.2, 0.1}, 0.5));
  }
}
BENCHMARK(BM_MeanShift);

void BM_PredictScan(benchmark::State& state) {
  const SequenceData& data = bench_sequence();
  const Model model = Model::create(5);
  std::size_t frame = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict_scan(model, data.frames[frame % data.frames.size()].scan));
    ++frame;
  }
}
BENCHMARK(BM_PredictScan);

void BM_AveragePrecision(benchmark::State& state) {
  Rng rng(9);
  std::vector<std::vector<Detection>> detections(100);
  std::vector<std::vector<Point2D>> gts(100);
  for (int f = 0; f < 100; ++f) {
    for (int i = 0; i < 6; ++i) {
      detections[f].push_back({rng.uniform(-8, 8), rng.uniform(-8, 8), rng.uniform(0, 1)});
    }
    for (int i = 0; i < 3; ++i) {
      gts[f].push_back({rng.uniform(-8, 8), rng.uniform(-8, 8)});
    }
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(average_precision(detections, gts, 0.5));
  }
}
BENCHMARK(BM_AveragePrecision);

}  // namespace

BENCHMARK_MAIN();
