#pragma once

// Stacked-LSTM phase regressor: 3 LSTM layers, then FC(H -> F) + ReLU and
// FC(F -> 2) producing (sin, cos) of the phase.
//
// All trainable parameters live in one flat vector. Per LSTM layer l:
//   Wx (4H x in_l), Wh (4H x H), b (4H), gate rows ordered i, f, g, o
// followed by fc1 W (F x H), fc1 b (F), fc2 W (2 x F), fc2 b (2).
// Matrices are column-major. Inputs are standardized with a fixed
// per-feature mean and scale stored alongside the parameters.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ictus/estimator.hpp"
#include "ictus/kinematics.hpp"
#include "ictus/score.hpp"

namespace ictus {

struct LstmConfig {
  int input_dim = 54;
  int hidden = 64;
  int layers = 3;
  int fc_hidden = 32;
  double dropout = 0.2;  // applied to every LSTM layer output while training

  std::size_t param_count() const;
  bool operator==(const LstmConfig&) const = default;
};

class LstmPhaseModel {
 public:
  LstmPhaseModel() = default;
  /// All parameters zero, identity standardization.
  explicit LstmPhaseModel(const LstmConfig& config);

  /// Uniform(-1/sqrt(H), 1/sqrt(H)) weights, forget-gate bias 1.
  void init_random(std::uint64_t seed);

  const LstmConfig& config() const { return config_; }
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  const Eigen::VectorXd& input_mean() const { return mean_; }
  const Eigen::VectorXd& input_scale() const { return scale_; }
  void set_standardization(Eigen::VectorXd mean, Eigen::VectorXd scale);

  // Offsets into params().
  std::size_t wx_offset(int layer) const;
  std::size_t wh_offset(int layer) const;
  std::size_t bias_offset(int layer) const;
  std::size_t fc1_offset() const;
  std::size_t fc2_offset() const;
  int layer_input(int layer) const { return layer == 0 ? config_.input_dim : config_.hidden; }

 private:
  LstmConfig config_;
  Eigen::VectorXd params_;
  Eigen::VectorXd mean_;
  Eigen::VectorXd scale_;
};

/// Per-feature mean and inverse standard deviation over all frames.
std::pair<Eigen::VectorXd, Eigen::VectorXd> feature_standardization(std::span<const Eigen::MatrixXd> sequences);

/// Outputs are 2 x T: row 0 is the sine estimate, row 1 the cosine estimate.
using PhaseOutputs = Eigen::Matrix<double, 2, Eigen::Dynamic>;

/// Inference forward pass over one sequence (dropout off).
/// Throws Errc::shape if a frame does not match input_dim.
PhaseOutputs forward(const LstmPhaseModel& model, std::span<const KinematicFrame> window);
PhaseOutputs forward(const LstmPhaseModel& model, const Eigen::MatrixXd& features);

// Losses over one sequence. `phases` are ground-truth phases.
double loss_mse(const PhaseOutputs& pred, std::span<const double> phases);
double loss_mse(const PhaseOutputs& pred, std::span<const PhaseSample> labels);
/// Throws Errc::undefined_phase if any output is exactly (0, 0) and
/// Errc::length_mismatch if T < 2.
double loss_mono(const PhaseOutputs& pred, double epsilon = -1e-7);
double total_loss(const PhaseOutputs& pred, std::span<const PhaseSample> labels, double beta, double epsilon = -1e-7);

/// Loss value plus its gradient with respect to the outputs.
struct LossGrad {
  double mse = 0.0;
  double mono = 0.0;
  double total = 0.0;
  PhaseOutputs d_pred;
};
LossGrad loss_with_grad(const PhaseOutputs& pred, std::span<const double> phases, double beta, double epsilon = -1e-7);

/// Monotonicity weight at epoch e: 0 while e <= r/5, then beta*min(e/r, 1).
double beta_schedule(double epoch, double beta, double ramp);

// Batched training pass. X holds B sequences of length T as a D x (T*B)
// matrix with column t*B + b, raw (unstandardized) features.
struct SequenceBatch {
  Eigen::MatrixXd features;
  std::vector<double> phases;  // T*B, same column order
  int steps = 0;
  int batch = 0;
};

class Rng;

/// Mean over the batch of total_loss per sequence. Fills `grad` (same layout
/// as params) when non-null. Dropout is active only when `dropout_rng` is
/// given. Components are written to `mse_out` / `mono_out` when non-null.
double batch_loss(const LstmPhaseModel& model, const SequenceBatch& batch, double beta, double epsilon,
                  Eigen::VectorXd* grad, Rng* dropout_rng, double* mse_out = nullptr, double* mono_out = nullptr);

/// Recurrent state for step-by-step inference.
struct StreamState {
  std::vector<Eigen::VectorXd> h;
  std::vector<Eigen::VectorXd> c;
  double last_phase = 0.0;
  bool has_output = false;

  void reset();
};

StreamState make_stream_state(const LstmPhaseModel& model);

struct StreamOutput {
  double sin_part = 0.0;
  double cos_part = 0.0;
  double phase = 0.0;
};

/// One recurrent step with dropout disabled. Throws Errc::shape.
StreamOutput stream_step(const LstmPhaseModel& model, StreamState& state, const Eigen::VectorXd& features);
StreamOutput stream_step(const LstmPhaseModel& model, StreamState& state, const KinematicFrame& frame);

void save_model(const LstmPhaseModel& model, const std::filesystem::path& path);
LstmPhaseModel load_model(const std::filesystem::path& path);

class LstmEstimator final : public PhaseEstimator {
 public:
  explicit LstmEstimator(std::shared_ptr<const LstmPhaseModel> model);
  double step(const KinematicFrame& frame) override;
  void reset() override { state_.reset(); }
  std::unique_ptr<PhaseEstimator> fresh() const override;
  std::string name() const override { return "lstm"; }

 private:
  std::shared_ptr<const LstmPhaseModel> model_;
  StreamState state_;
};

/// Stacks frame features into a D x T matrix.
Eigen::MatrixXd feature_matrix(std::span<const KinematicFrame> frames);

}  // namespace ictus
