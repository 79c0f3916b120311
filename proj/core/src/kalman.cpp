#include "ictus/kalman.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "ictus/error.hpp"
#include "ictus/param_file.hpp"
#include "ictus/phase.hpp"

namespace ictus {

namespace {

using Eigen::Index;
using Eigen::Matrix2d;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

Matrix2d symmetrize(const Matrix2d& p) { return 0.5 * (p + p.transpose()); }

Vector2d unit(double phi) { return {std::sin(phi), std::cos(phi)}; }

}  // namespace

Matrix2d KalmanPhaseModel::transition() const {
  const double c = std::cos(omega), s = std::sin(omega);
  Matrix2d g;
  g << c, s, -s, c;
  return g;
}

void KalmanPhaseModel::prepare() {
  const Index m = H.rows();
  if (H.cols() != 2 || d.size() != m || R.rows() != m || R.cols() != m) throw Error(Errc::shape, "inconsistent Kalman model");
  Eigen::LDLT<MatrixXd> ldlt(R);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw Error(Errc::invariant, "observation covariance is not positive definite");
  HtRinv = ldlt.solve(H).transpose();
  HtRinvH = HtRinv * H;
}

KalmanPhaseModel fit_kalman(std::span<const Take* const> takes, const KalmanFitOptions& options) {
  Index n = 0;
  for (const Take* t : takes) n += static_cast<Index>(t->frames.size());
  if (takes.empty() || n < 3) throw Error(Errc::config, "Kalman fit needs labelled frames");
  const auto m = static_cast<Index>(takes.front()->keypoints.feature_dim());

  // Design matrix A = [sin; cos; 1] (3 x n), observations Z (m x n).
  MatrixXd a(3, n), z(m, n);
  double omega_sum = 0.0;
  Index omega_count = 0;
  Vector2d x0 = Vector2d::Zero();
  Matrix2d qsum = Matrix2d::Zero();
  Index col = 0;
  std::vector<std::pair<Index, Index>> spans;
  for (const Take* t : takes) {
    if (static_cast<Index>(t->keypoints.feature_dim()) != m) throw Error(Errc::shape, "takes use different keypoint sets");
    if (t->frames.empty()) continue;
    spans.emplace_back(col, static_cast<Index>(t->frames.size()));
    x0 += unit(t->labels.front().phase);
    for (std::size_t i = 0; i < t->frames.size(); ++i, ++col) {
      const double phi = t->labels[i].phase;
      a(0, col) = std::sin(phi);
      a(1, col) = std::cos(phi);
      a(2, col) = 1.0;
      z.col(col) = t->frames[i].features();
      if (i > 0) {
        omega_sum += phase_diff(phi, t->labels[i - 1].phase);
        ++omega_count;
      }
    }
  }
  KalmanPhaseModel model;
  model.omega = omega_count > 0 ? omega_sum / static_cast<double>(omega_count) : 0.0;
  model.x0 = x0 / static_cast<double>(spans.size());

  Eigen::Matrix3d gram = a * a.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(gram);
  const double top = eig.eigenvalues().maxCoeff();
  if (eig.eigenvalues().minCoeff() <= 1e-10 * top) {
    warn("Kalman fit: label design matrix is rank deficient, using a ridge-regularized solve");
    gram += Eigen::Matrix3d::Identity() * (options.ridge * std::max(top, 1.0));
  }
  const MatrixXd coef = gram.ldlt().solve(a * z.transpose()).transpose();  // m x 3
  model.H = coef.leftCols(2);
  model.d = coef.col(2);
  const MatrixXd resid = z - coef * a;
  model.R = resid * resid.transpose() / static_cast<double>(n);
  model.R.diagonal().array() += options.r_floor;

  const Matrix2d g = model.transition();
  Index qn = 0;
  for (const auto& [start, len] : spans) {
    for (Index i = 1; i < len; ++i) {
      const Vector2d w = a.col(start + i).head<2>() - g * a.col(start + i - 1).head<2>();
      qsum += w * w.transpose();
      ++qn;
    }
  }
  model.Q = (qn > 0 ? Matrix2d(qsum / static_cast<double>(qn)) : Matrix2d::Zero()) + options.q_floor * Matrix2d::Identity();
  model.P0 = Matrix2d::Identity();
  model.prepare();
  return model;
}

KalmanPhaseModel fit_kalman(std::span<const Take> takes, const KalmanFitOptions& options) {
  std::vector<const Take*> ptrs;
  for (const auto& t : takes) ptrs.push_back(&t);
  return fit_kalman(ptrs, options);
}

KalmanState initial_state(const KalmanPhaseModel& model) { return {model.x0, model.P0}; }

KalmanState predict(const KalmanPhaseModel& model, const KalmanState& state) {
  const Matrix2d g = model.transition();
  return {g * state.x, symmetrize(g * state.P * g.transpose() + model.Q)};
}

KalmanState update(const KalmanPhaseModel& model, const KalmanState& state, const VectorXd& observation) {
  if (observation.size() != model.obs_dim()) {
    throw Error(Errc::shape, "observation has " + std::to_string(observation.size()) + " entries, model expects " +
                                 std::to_string(model.obs_dim()));
  }
  Matrix2d p = state.P;
  Eigen::FullPivLU<Matrix2d> lu(p);
  if (!lu.isInvertible()) {
    warn("Kalman update: singular prior covariance, regularizing");
    p += 1e-9 * Matrix2d::Identity();
    lu.compute(p);
  }
  const Matrix2d p_inv = lu.inverse();
  const Matrix2d info = p_inv + model.HtRinvH;
  const Matrix2d post = symmetrize(info.inverse());
  const Vector2d x = post * (p_inv * state.x + model.HtRinv * (observation - model.d));
  return {x, post};
}

void save_kalman(const KalmanPhaseModel& model, const std::filesystem::path& path) {
  ParamFile file;
  file.kind = "kalman";
  file.meta = {{"obs_dim", model.obs_dim()}, {"omega", model.omega}};
  auto put = [&](const auto& m) {
    for (Index j = 0; j < m.cols(); ++j) {
      for (Index i = 0; i < m.rows(); ++i) file.values.push_back(m(i, j));
    }
  };
  put(model.H);
  put(model.d);
  put(model.R);
  put(model.Q);
  put(model.P0);
  put(model.x0);
  write_params(file, path);
}

KalmanPhaseModel load_kalman(const std::filesystem::path& path) {
  const ParamFile file = read_params(path);
  if (file.kind != "kalman") throw Error(Errc::format, path.string() + " holds a '" + file.kind + "' model, not kalman");
  KalmanPhaseModel model;
  Index m = 0;
  try {
    m = file.meta.at("obs_dim").get<Index>();
    model.omega = file.meta.at("omega").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::format, std::string("bad kalman metadata: ") + e.what());
  }
  const auto expected = static_cast<std::size_t>(2 * m + m + m * m + 4 + 4 + 2);
  if (m <= 0 || file.values.size() != expected) throw Error(Errc::shape, "Kalman parameter count mismatch");
  std::size_t k = 0;
  auto take = [&](auto& mat) {
    for (Index j = 0; j < mat.cols(); ++j) {
      for (Index i = 0; i < mat.rows(); ++i) mat(i, j) = file.values[k++];
    }
  };
  model.H.resize(m, 2);
  model.d.resize(m);
  model.R.resize(m, m);
  take(model.H);
  take(model.d);
  take(model.R);
  take(model.Q);
  take(model.P0);
  take(model.x0);
  model.prepare();
  return model;
}

KalmanEstimator::KalmanEstimator(std::shared_ptr<const KalmanPhaseModel> model)
    : model_(std::move(model)), state_(initial_state(*model_)) {}

double KalmanEstimator::step(const KinematicFrame& frame) {
  if (started_) state_ = predict(*model_, state_);
  started_ = true;
  state_ = update(*model_, state_, frame.features());
  return phase_from_sincos(state_.x[0], state_.x[1]);
}

void KalmanEstimator::reset() {
  state_ = initial_state(*model_);
  started_ = false;
}

std::unique_ptr<PhaseEstimator> KalmanEstimator::fresh() const { return std::make_unique<KalmanEstimator>(model_); }

}  // namespace ictus
