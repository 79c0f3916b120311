#include <benchmark/benchmark.h>

#include "ictus/controller.hpp"
#include "ictus/kalman.hpp"
#include "ictus/lstm.hpp"
#include "ictus/service.hpp"
#include "ictus/synth.hpp"

using namespace ictus;

namespace {

const Take& take() {
  static const Take t = generate_take(Score::demo().truncated(30), ConductorStyle::sample(1), 1.0, Timebase{20});
  return t;
}

}  // namespace

static void BM_LstmStreamStep(benchmark::State& state) {
  LstmPhaseModel model(LstmConfig{54, static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 32, 0.2});
  model.init_random(1);
  StreamState s = make_stream_state(model);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stream_step(model, s, take().frames[i]));
    i = (i + 1) % take().frames.size();
  }
}
BENCHMARK(BM_LstmStreamStep)->Args({16, 1})->Args({64, 3});

static void BM_KalmanStep(benchmark::State& state) {
  const std::vector<Take> fit = {take()};
  KalmanEstimator est(std::make_shared<const KalmanPhaseModel>(fit_kalman(fit)));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(est.step(take().frames[i]));
    i = (i + 1) % take().frames.size();
  }
}
BENCHMARK(BM_KalmanStep);

static void BM_ControllerStep(benchmark::State& state) {
  const Score score = Score::demo();
  Controller c(score, ControllerConfig{});
  long k = 0;
  for (auto _ : state) {
    const double phase = take().labels[static_cast<std::size_t>(k) % take().labels.size()].phase;
    benchmark::DoNotOptimize(c.step(phase, k++, BarCursor{}));
  }
}
BENCHMARK(BM_ControllerStep);

static void BM_HandlePose(benchmark::State& state) {
  LstmPhaseModel model(LstmConfig{});
  model.init_random(1);
  auto m = std::make_shared<ServiceModel>();
  m->score = Score::demo();
  m->estimator = std::make_shared<const LstmEstimator>(std::make_shared<const LstmPhaseModel>(model));
  m->height_scale = 1.0;
  Session s("bench", m);
  s.start();
  long k = 0;
  for (auto _ : state) {
    const auto& f = take().frames[static_cast<std::size_t>(k) % take().frames.size()];
    benchmark::DoNotOptimize(s.handle_pose(PoseFrameMsg{k++, f.pos}));
  }
}
BENCHMARK(BM_HandlePose);
BENCHMARK_MAIN();
