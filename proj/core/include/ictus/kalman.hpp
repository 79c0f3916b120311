#pragma once

// Linear Kalman baseline. The state is x = (sin phi, cos phi), advanced by
// a fixed rotation omega per step. Observations are pose feature vectors
// modelled as z = H x + d + noise, with H and d fitted by least squares.

#include <filesystem>
#include <memory>
#include <span>

#include <Eigen/Core>

#include "ictus/estimator.hpp"
#include "ictus/synth.hpp"

namespace ictus {

struct KalmanPhaseModel {
  double omega = 0.0;
  Eigen::MatrixXd H;  // m x 2
  Eigen::VectorXd d;  // m
  Eigen::MatrixXd R;  // m x m
  Eigen::Matrix2d Q = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d P0 = Eigen::Matrix2d::Identity();
  Eigen::Vector2d x0 = Eigen::Vector2d(0.0, 1.0);

  // Cached H^T R^-1 and H^T R^-1 H, filled by prepare().
  Eigen::MatrixXd HtRinv;
  Eigen::Matrix2d HtRinvH = Eigen::Matrix2d::Zero();

  /// Validates shapes and caches the information-form terms. Throws Errc::shape.
  void prepare();
  Eigen::Matrix2d transition() const;
  Eigen::Index obs_dim() const { return H.rows(); }
};

struct KalmanFitOptions {
  double r_floor = 1e-6;   // added to the diagonal of R
  double q_floor = 1e-6;   // added to the diagonal of Q
  double ridge = 1e-8;     // relative ridge for ill-conditioned least squares
};

/// Throws Errc::config on an empty corpus.
KalmanPhaseModel fit_kalman(std::span<const Take* const> takes, const KalmanFitOptions& options = {});
KalmanPhaseModel fit_kalman(std::span<const Take> takes, const KalmanFitOptions& options = {});

struct KalmanState {
  Eigen::Vector2d x = Eigen::Vector2d(0.0, 1.0);
  Eigen::Matrix2d P = Eigen::Matrix2d::Identity();
};

KalmanState initial_state(const KalmanPhaseModel& model);
KalmanState predict(const KalmanPhaseModel& model, const KalmanState& state);
/// Information-form measurement update. Throws Errc::shape on a dimension mismatch.
KalmanState update(const KalmanPhaseModel& model, const KalmanState& state, const Eigen::VectorXd& observation);

void save_kalman(const KalmanPhaseModel& model, const std::filesystem::path& path);
KalmanPhaseModel load_kalman(const std::filesystem::path& path);

/// Predict-then-update per frame (the first frame is only updated).
class KalmanEstimator final : public PhaseEstimator {
 public:
  explicit KalmanEstimator(std::shared_ptr<const KalmanPhaseModel> model);
  double step(const KinematicFrame& frame) override;
  void reset() override;
  std::unique_ptr<PhaseEstimator> fresh() const override;
  std::string name() const override { return "kalman"; }
  const KalmanState& state() const { return state_; }

 private:
  std::shared_ptr<const KalmanPhaseModel> model_;
  KalmanState state_;
  bool started_ = false;
};

}  // namespace ictus
