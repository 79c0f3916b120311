#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "ictus/error.hpp"
#include "ictus/lstm.hpp"
#include "ictus/phase.hpp"
#include "ictus/rng.hpp"

using namespace ictus;

namespace {

LstmConfig tiny(int input = 5, int hidden = 4, int layers = 2, int fc = 3) {
  LstmConfig c;
  c.input_dim = input;
  c.hidden = hidden;
  c.layers = layers;
  c.fc_hidden = fc;
  c.dropout = 0.0;
  return c;
}

Eigen::MatrixXd random_features(Rng& rng, int d, int t) {
  Eigen::MatrixXd x(d, t);
  for (int j = 0; j < t; ++j)
    for (int i = 0; i < d; ++i) x(i, j) = rng.normal();
  return x;
}

PhaseOutputs random_outputs(Rng& rng, int t) {
  PhaseOutputs p(2, t);
  for (int j = 0; j < t; ++j) {
    p(0, j) = rng.uniform(-1.5, 1.5);
    p(1, j) = rng.uniform(-1.5, 1.5);
  }
  return p;
}

// Independent oracles, written directly from the loss definitions.
double mse_oracle(const PhaseOutputs& p, const std::vector<double>& phi) {
  long double sum = 0.0L;
  for (std::size_t t = 0; t < phi.size(); ++t) {
    const long double es = p(0, static_cast<Eigen::Index>(t)) - std::sin(phi[t]);
    const long double ec = p(1, static_cast<Eigen::Index>(t)) - std::cos(phi[t]);
    sum += 0.5L * (es * es + ec * ec);
  }
  return static_cast<double>(sum / phi.size());
}

double mono_oracle(const PhaseOutputs& p, double eps) {
  const double pi = std::acos(-1.0);
  std::vector<double> phase;
  for (Eigen::Index t = 0; t < p.cols(); ++t) {
    double a = std::atan2(p(0, t), p(1, t));
    if (a < 0) a += 2 * pi;
    phase.push_back(a);
  }
  long double sum = 0.0L;
  for (std::size_t t = 1; t < phase.size(); ++t) {
    double d = phase[t] - phase[t - 1];
    while (d > pi) d -= 2 * pi;
    while (d <= -pi) d += 2 * pi;
    if (d < eps) sum += -d;
  }
  return static_cast<double>(sum / phase.size());
}

}  // namespace

TEST(LstmModel, ParamCountAndOffsets) {
  const LstmConfig c = tiny();
  LstmPhaseModel m(c);
  EXPECT_EQ(static_cast<std::size_t>(m.params().size()), c.param_count());
  EXPECT_EQ(c.param_count(), 4u * 4 * 5 + 4 * 4 * 4 + 16 + 4 * 4 * 4 + 4 * 4 * 4 + 16 + 3 * 4 + 3 + 2 * 3 + 2);
  EXPECT_EQ(m.wx_offset(0), 0u);
  EXPECT_EQ(m.fc2_offset() + 2 * 3 + 2, c.param_count());
  EXPECT_TRUE(m.params().isZero());
}

TEST(LstmModel, InitRandomIsSeededAndBounded) {
  LstmPhaseModel a(tiny());
  LstmPhaseModel b(tiny());
  a.init_random(3);
  b.init_random(3);
  EXPECT_EQ(a.params(), b.params());
  b.init_random(4);
  EXPECT_NE(a.params(), b.params());
  // forget-gate bias block starts at 1
  const std::size_t fb = a.bias_offset(0) + 4;
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(a.params()[fb + i], 1.0, 0.5 + 1e-12);
}

TEST(LstmForward, ZeroWeightsGiveHeadBias) {
  LstmPhaseModel m(tiny());
  const std::size_t b1 = m.fc1_offset() + 3 * 4;
  m.params()[b1] = 0.7;
  m.params()[b1 + 1] = -0.4;
  const std::size_t b2 = m.fc2_offset() + 2 * 3;
  m.params()[b2] = 0.3;
  m.params()[b2 + 1] = -0.2;
  Rng rng(1);
  const PhaseOutputs out = forward(m, random_features(rng, 5, 17));
  for (int t = 0; t < 17; ++t) {
    EXPECT_EQ(out(0, t), 0.3);
    EXPECT_EQ(out(1, t), -0.2);
  }
}

TEST(LstmForward, SingleFrame) {
  LstmPhaseModel m(tiny());
  m.init_random(2);
  Rng rng(2);
  EXPECT_EQ(forward(m, random_features(rng, 5, 1)).cols(), 1);
  EXPECT_THROW(forward(m, random_features(rng, 6, 3)), Error);
}

TEST(LstmStream, MatchesBatchForward) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    LstmConfig c = tiny(3 + static_cast<int>(rng.below(5)), 2 + static_cast<int>(rng.below(6)),
                        1 + static_cast<int>(rng.below(3)), 2 + static_cast<int>(rng.below(4)));
    LstmPhaseModel m(c);
    m.init_random(100 + trial);
    Eigen::VectorXd mean(c.input_dim), scale(c.input_dim);
    for (int i = 0; i < c.input_dim; ++i) {
      mean(i) = rng.normal();
      scale(i) = rng.uniform(0.5, 2.0);
    }
    m.set_standardization(mean, scale);
    const int steps = 1 + static_cast<int>(rng.below(80));
    const Eigen::MatrixXd x = random_features(rng, c.input_dim, steps);
    const PhaseOutputs batch = forward(m, x);
    StreamState st = make_stream_state(m);
    for (int t = 0; t < steps; ++t) {
      const StreamOutput o = stream_step(m, st, Eigen::VectorXd(x.col(t)));
      ASSERT_NEAR(o.sin_part, batch(0, t), 1e-9);
      ASSERT_NEAR(o.cos_part, batch(1, t), 1e-9);
    }
  }
}

TEST(LstmStream, ResetReproduces) {
  LstmPhaseModel m(tiny());
  m.init_random(9);
  Rng rng(9);
  const Eigen::MatrixXd x = random_features(rng, 5, 20);
  StreamState st = make_stream_state(m);
  std::vector<double> first;
  for (int t = 0; t < 20; ++t) first.push_back(stream_step(m, st, Eigen::VectorXd(x.col(t))).phase);
  st.reset();
  for (int t = 0; t < 20; ++t) EXPECT_EQ(stream_step(m, st, Eigen::VectorXd(x.col(t))).phase, first[t]);
}

TEST(LstmStream, ZeroOutputHasNoPhase) {
  LstmPhaseModel m(tiny());
  StreamState st = make_stream_state(m);
  Rng rng(1);
  const Eigen::MatrixXd x = random_features(rng, 5, 2);
  EXPECT_THROW(stream_step(m, st, Eigen::VectorXd(x.col(0))), Error);
}

TEST(Losses, MseExamples) {
  PhaseOutputs p(2, 1);
  p << std::sin(1.2), std::cos(1.2);
  EXPECT_NEAR(loss_mse(p, std::vector<double>{1.2}), 0.0, 1e-15);
  p << 0.0, 0.0;
  EXPECT_DOUBLE_EQ(loss_mse(p, std::vector<double>{0.0}), 0.5);
  EXPECT_THROW(loss_mse(p, std::vector<double>{0.0, 1.0}), Error);
}

TEST(Losses, MonoExamples) {
  const std::vector<double> phi = {0.1, 0.3, 0.2};
  PhaseOutputs p(2, 3);
  for (int t = 0; t < 3; ++t) {
    p(0, t) = std::sin(phi[t]);
    p(1, t) = std::cos(phi[t]);
  }
  EXPECT_NEAR(loss_mono(p), 0.1 / 3.0, 1e-12);
  PhaseOutputs inc(2, 4);
  for (int t = 0; t < 4; ++t) {
    inc(0, t) = std::sin(0.5 * t);
    inc(1, t) = std::cos(0.5 * t);
  }
  EXPECT_EQ(loss_mono(inc), 0.0);
  PhaseOutputs wrap(2, 2);
  wrap << std::sin(kTwoPi - 0.1), std::sin(0.1), std::cos(kTwoPi - 0.1), std::cos(0.1);
  EXPECT_EQ(loss_mono(wrap), 0.0);
  PhaseOutputs zero = PhaseOutputs::Zero(2, 2);
  EXPECT_THROW(loss_mono(zero), Error);
}

TEST(Losses, TotalExamples) {
  const std::vector<double> phi = {0.1, 0.3, 0.2};
  PhaseOutputs p(2, 3);
  for (int t = 0; t < 3; ++t) {
    p(0, t) = std::sin(phi[t]);
    p(1, t) = std::cos(phi[t]);
  }
  const LossGrad g0 = loss_with_grad(p, phi, 0.0);
  EXPECT_EQ(g0.total, g0.mse);
  // a pi/3 offset makes every squared error 1: mse 0.5, plus mono 0.0333 at beta 1
  PhaseOutputs q = p;
  const std::vector<double> labels = {0.1 + std::numbers::pi / 3, 0.3 + std::numbers::pi / 3, 0.2 + std::numbers::pi / 3};
  const LossGrad g1 = loss_with_grad(q, labels, 1.0);
  EXPECT_NEAR(g1.mse, 0.5, 1e-12);
  EXPECT_NEAR(g1.mono, 0.1 / 3.0, 1e-12);
  EXPECT_NEAR(g1.total, 0.5 + 0.1 / 3.0, 1e-12);
}

TEST(Losses, MatchBruteForceOracles) {
  Rng rng(21);
  for (int c = 0; c < 100; ++c) {
    const int t = 2 + static_cast<int>(rng.below(60));
    const PhaseOutputs p = random_outputs(rng, t);
    std::vector<double> phi;
    for (int i = 0; i < t; ++i) phi.push_back(rng.uniform(0.0, kTwoPi));
    EXPECT_NEAR(loss_mse(p, phi), mse_oracle(p, phi), 1e-12);
    EXPECT_NEAR(loss_mono(p, -1e-7), mono_oracle(p, -1e-7), 1e-12);
    const LossGrad g = loss_with_grad(p, phi, 0.3);
    EXPECT_NEAR(g.total, mse_oracle(p, phi) + 0.3 * mono_oracle(p, -1e-7), 1e-12);
  }
}

TEST(Losses, MonoZeroIffNoBackwardStep) {
  Rng rng(22);
  for (int c = 0; c < 200; ++c) {
    const PhaseOutputs p = random_outputs(rng, 2 + static_cast<int>(rng.below(10)));
    bool backward = false;
    for (Eigen::Index t = 1; t < p.cols(); ++t) {
      const double d = phase_diff(phase_from_sincos(p(0, t), p(1, t)), phase_from_sincos(p(0, t - 1), p(1, t - 1)));
      if (d < -1e-7) backward = true;
    }
    if (backward) {
      EXPECT_GT(loss_mono(p), 0.0);
    } else {
      EXPECT_EQ(loss_mono(p), 0.0);
    }
  }
}

TEST(BetaSchedule, Examples) {
  EXPECT_EQ(beta_schedule(0, 0.3, 40), 0.0);
  EXPECT_DOUBLE_EQ(beta_schedule(40, 0.3, 40), 0.3);
  EXPECT_DOUBLE_EQ(beta_schedule(20, 0.3, 40), 0.15);
  EXPECT_EQ(beta_schedule(8, 0.3, 40), 0.0);
  EXPECT_GT(beta_schedule(9, 0.3, 40), 0.0);
}

TEST(BetaSchedule, MonotoneAndBounded) {
  double prev = 0.0;
  for (double e = 0.0; e < 200.0; e += 0.25) {
    const double b = beta_schedule(e, 0.7, 40);
    EXPECT_GE(b, prev);
    EXPECT_LE(b, 0.7);
    prev = b;
  }
}

TEST(LstmModel, SaveLoadRoundTrip) {
  LstmPhaseModel m(tiny());
  m.init_random(5);
  m.set_standardization(Eigen::VectorXd::Constant(5, 0.5), Eigen::VectorXd::Constant(5, 2.0));
  const auto path = std::filesystem::temp_directory_path() / "ictus_test_model.ictp";
  save_model(m, path);
  const LstmPhaseModel back = load_model(path);
  EXPECT_EQ(back.config(), m.config());
  EXPECT_EQ(back.params(), m.params());
  EXPECT_EQ(back.input_mean(), m.input_mean());
  EXPECT_EQ(back.input_scale(), m.input_scale());
}

TEST(LstmEstimator, FreshHasIndependentState) {
  auto model = std::make_shared<LstmPhaseModel>(tiny(54, 4, 1, 3));
  model->init_random(1);
  LstmEstimator a(model);
  KinematicFrame f{Eigen::VectorXd::Constant(18, 0.1), Eigen::VectorXd::Constant(18, 0.01),
                   Eigen::VectorXd::Zero(18)};
  const double first = a.step(f);
  a.step(f);
  auto b = a.fresh();
  EXPECT_EQ(b->step(f), first);
  EXPECT_EQ(b->name(), "lstm");
}
