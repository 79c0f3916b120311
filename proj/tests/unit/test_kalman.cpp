#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include <Eigen/Eigenvalues>

#include "ictus/error.hpp"
#include "ictus/kalman.hpp"
#include "ictus/metrics.hpp"
#include "ictus/phase.hpp"
#include "ictus/rng.hpp"
#include "ictus/synth.hpp"

using namespace ictus;

namespace {

// A take whose 6-dim features are an exact affine function of (sin, cos).
Take linear_take(double step, int n, double offset = 0.2) {
  Take t;
  t.keypoints = KeypointSet{{"a"}, 2};
  Eigen::MatrixXd h(6, 2);
  h << 1.0, 0.0, 0.0, 1.0, 0.5, -0.5, 0.3, 0.2, -1.0, 0.4, 0.1, 0.9;
  Eigen::VectorXd d(6);
  d << 0.1, -0.2, 0.3, 0.0, 0.5, -0.1;
  for (int k = 0; k < n; ++k) {
    const double phi = wrap_phase(offset + step * k);
    t.labels.push_back({0, phi});
    const Eigen::VectorXd z = h * Eigen::Vector2d(std::sin(phi), std::cos(phi)) + d;
    t.frames.push_back(KinematicFrame{z.head(2), z.segment(2, 2), z.tail(2)});
  }
  return t;
}

void expect_psd(const Eigen::Matrix2d& p) {
  EXPECT_EQ(p, p.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> e(p);
  EXPECT_GE(e.eigenvalues().minCoeff(), -1e-10);
}

KalmanPhaseModel rotation_model(double omega) {
  KalmanPhaseModel m;
  m.omega = omega;
  m.H = Eigen::MatrixXd::Identity(2, 2);
  m.d = Eigen::VectorXd::Zero(2);
  m.R = Eigen::MatrixXd::Identity(2, 2);
  m.Q = 0.01 * Eigen::Matrix2d::Identity();
  m.prepare();
  return m;
}

}  // namespace

TEST(KalmanFit, OmegaIsMeanLabelStep) {
  const std::vector<Take> takes = {linear_take(0.45, 200)};
  const KalmanPhaseModel m = fit_kalman(takes);
  EXPECT_NEAR(m.omega, 0.45, 1e-12);
}

TEST(KalmanFit, NoiselessObservationsGiveFlooredR) {
  const std::vector<Take> takes = {linear_take(0.45, 300)};
  const KalmanFitOptions opts;
  const KalmanPhaseModel m = fit_kalman(takes, opts);
  for (Eigen::Index i = 0; i < 6; ++i) EXPECT_NEAR(m.R(i, i), opts.r_floor, 1e-12);
  EXPECT_NEAR(m.H(2, 0), 0.5, 1e-9);
  EXPECT_NEAR(m.d(4), 0.5, 1e-9);
  // constant increments: state residuals vanish, leaving the floor
  EXPECT_NEAR(m.Q(0, 0), opts.q_floor, 1e-12);
}

TEST(KalmanFit, Deterministic) {
  const Score score = Score::demo().truncated(30);
  const std::vector<Take> takes = {generate_take(score, ConductorStyle::sample(1), 1.0, Timebase{20}),
                                   generate_take(score, ConductorStyle::sample(2), 0.8, Timebase{20})};
  const KalmanPhaseModel a = fit_kalman(takes);
  const KalmanPhaseModel b = fit_kalman(takes);
  EXPECT_EQ(a.omega, b.omega);
  EXPECT_EQ(a.H, b.H);
  EXPECT_EQ(a.R, b.R);
  EXPECT_EQ(a.Q, b.Q);
  EXPECT_THROW(fit_kalman(std::vector<Take>{}), Error);
}

TEST(KalmanFit, RankDeficientDesignWarnsAndRegularizes) {
  std::vector<std::string> warnings;
  auto old = set_warning_handler([&](std::string_view w) { warnings.emplace_back(w); });
  const std::vector<Take> takes = {linear_take(0.0, 50)};
  const KalmanPhaseModel m = fit_kalman(takes);
  set_warning_handler(old);
  EXPECT_FALSE(warnings.empty());
  EXPECT_TRUE(m.H.allFinite());
}

TEST(KalmanPredict, Rotation) {
  const KalmanPhaseModel m = rotation_model(0.45);
  const KalmanState s = predict(m, KalmanState{});
  EXPECT_NEAR(s.x(0), std::sin(0.45), 1e-15);
  EXPECT_NEAR(s.x(1), std::cos(0.45), 1e-15);
}

TEST(KalmanPredict, ZeroOmegaGrowsCovarianceByQ) {
  const KalmanPhaseModel m = rotation_model(0.0);
  KalmanState s;
  s.x = Eigen::Vector2d(0.3, 0.8);
  const KalmanState p = predict(m, s);
  EXPECT_EQ(p.x, s.x);
  EXPECT_TRUE(p.P.isApprox(s.P + m.Q, 1e-15));
}

TEST(KalmanPredict, QuarterTurnsReturnHome) {
  const KalmanPhaseModel m = rotation_model(std::numbers::pi / 2);
  KalmanState s;
  for (int i = 0; i < 4; ++i) s = predict(m, s);
  EXPECT_NEAR(s.x(0), 0.0, 1e-12);
  EXPECT_NEAR(s.x(1), 1.0, 1e-12);
}

TEST(KalmanUpdate, HugeNoiseKeepsPrior) {
  KalmanPhaseModel m = rotation_model(0.1);
  m.R = 1e12 * Eigen::MatrixXd::Identity(2, 2);
  m.prepare();
  KalmanState s;
  s.x = Eigen::Vector2d(0.6, 0.8);
  const KalmanState u = update(m, s, Eigen::Vector2d(-1.0, 0.0));
  EXPECT_NEAR((u.x - s.x).norm(), 0.0, 1e-9);
  EXPECT_NEAR((u.P - s.P).norm(), 0.0, 1e-9);
}

TEST(KalmanUpdate, ExactObservationWins) {
  KalmanPhaseModel m = rotation_model(0.1);
  m.H.resize(3, 2);
  m.H << 2.0, 0.0, 0.0, 1.0, 1.0, 1.0;
  m.d = Eigen::Vector3d(0.5, -0.5, 0.0);
  m.R = 1e-12 * Eigen::MatrixXd::Identity(3, 3);
  m.prepare();
  const Eigen::Vector2d truth(std::sin(2.0), std::cos(2.0));
  const Eigen::VectorXd z = m.H * truth + m.d;
  const KalmanState u = update(m, KalmanState{}, z);
  EXPECT_NEAR((u.x - truth).norm(), 0.0, 1e-9);
  EXPECT_THROW(update(m, KalmanState{}, Eigen::Vector2d(1.0, 1.0)), Error);
}

TEST(KalmanFilter, CovarianceStaysSymmetricPsd) {
  const Score score = Score::demo().truncated(30);
  const std::vector<Take> takes = {generate_take(score, ConductorStyle::sample(3), 1.0, Timebase{20})};
  const KalmanPhaseModel m = fit_kalman(takes);
  KalmanState s = initial_state(m);
  for (const auto& f : takes[0].frames) {
    s = update(m, predict(m, s), f.features());
    expect_psd(s.P);
  }
}

TEST(KalmanFilter, TracksRegularBarsButNotFermatas) {
  const Score score = Score::demo().truncated(40);
  ConductorStyle style;
  style.noise_std = 0.0;
  style.tempo_jitter = 0.0;
  std::vector<Take> corpus;
  for (int i = 0; i < 3; ++i) {
    style.seed = 70 + i;
    corpus.push_back(generate_take(score, style, 1.0, Timebase{20}));
  }
  auto model = std::make_shared<KalmanPhaseModel>(fit_kalman(corpus));
  KalmanEstimator est(model);
  std::vector<double> phi;
  for (const auto& f : corpus[0].frames) phi.push_back(est.step(f));
  const double regular = mspe(corpus[0].labels, phi, regular_bar_mask(corpus[0].labels, score), true);
  const double fermata = mspe(corpus[0].labels, phi, fermata_bar_mask(corpus[0].labels, score), true);
  EXPECT_LT(regular, 0.1);
  EXPECT_GT(fermata, regular);
}

TEST(KalmanEstimator, DropInContract) {
  auto model = std::make_shared<KalmanPhaseModel>(fit_kalman(std::vector<Take>{linear_take(0.3, 100)}));
  KalmanEstimator a(model);
  const Take t = linear_take(0.3, 10);
  std::vector<double> first;
  for (const auto& f : t.frames) first.push_back(a.step(f));
  a.reset();
  for (std::size_t i = 0; i < t.frames.size(); ++i) EXPECT_EQ(a.step(t.frames[i]), first[i]);
  auto b = a.fresh();
  EXPECT_EQ(b->name(), "kalman");
  EXPECT_EQ(b->step(t.frames[0]), first[0]);
  // The first frame is an update without a predict.
  KalmanState s = update(*model, initial_state(*model), t.frames[0].features());
  EXPECT_NEAR(first[0], phase_from_sincos(s.x(0), s.x(1)), 1e-15);
  EXPECT_NEAR(first[0], t.labels[0].phase, 1e-6);
}

TEST(KalmanModel, SaveLoadRoundTrip) {
  const Score score = Score::demo().truncated(10);
  const KalmanPhaseModel m =
      fit_kalman(std::vector<Take>{generate_take(score, ConductorStyle::sample(3), 1.0, Timebase{20})});
  const auto path = std::filesystem::temp_directory_path() / "ictus_test_kalman.ictp";
  save_kalman(m, path);
  const KalmanPhaseModel b = load_kalman(path);
  EXPECT_EQ(b.omega, m.omega);
  EXPECT_EQ(b.H, m.H);
  EXPECT_EQ(b.d, m.d);
  EXPECT_EQ(b.R, m.R);
  EXPECT_EQ(b.Q, m.Q);
  EXPECT_EQ(b.x0, m.x0);
  EXPECT_EQ(b.HtRinvH, m.HtRinvH);
}
