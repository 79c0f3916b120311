#include "ictus/lstm.hpp"

#include <cmath>

#include "ictus/error.hpp"
#include "ictus/param_file.hpp"
#include "ictus/phase.hpp"
#include "ictus/rng.hpp"

namespace ictus {

namespace {

using Eigen::Index;
using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::VectorXd;

using ConstMat = Map<const MatrixXd>;
using ConstVec = Map<const VectorXd>;
using Mat = Map<MatrixXd>;
using Vec = Map<VectorXd>;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LayerTape {
  MatrixXd input;  // in x TB, what the layer consumed
  MatrixXd gates;  // 4H x TB, activated i, f, g, o
  MatrixXd c;
  MatrixXd tc;     // tanh(c)
  MatrixXd h;      // layer output before dropout
  MatrixXd mask;   // scaled dropout mask, empty when dropout is off
};

struct Tape {
  std::vector<LayerTape> layers;
  MatrixXd top;  // input to fc1
  MatrixXd a1_pre;
  MatrixXd a1;
  MatrixXd out;
};

MatrixXd standardize(const LstmPhaseModel& m, const MatrixXd& x) {
  return ((x.colwise() - m.input_mean()).array().colwise() * m.input_scale().array()).matrix();
}

void check_features(const LstmPhaseModel& m, Index rows) {
  if (rows != m.config().input_dim) {
    throw Error(Errc::shape, "feature dimension " + std::to_string(rows) + " does not match model input " +
                                 std::to_string(m.config().input_dim));
  }
}

void run_forward(const LstmPhaseModel& m, const MatrixXd& x, int steps, int batch, Rng* rng, Tape& tape) {
  const auto& cfg = m.config();
  const Index hdim = cfg.hidden;
  const Index tb = static_cast<Index>(steps) * batch;
  const double* p = m.params().data();
  tape.layers.assign(static_cast<std::size_t>(cfg.layers), {});
  MatrixXd in = standardize(m, x);
  for (int l = 0; l < cfg.layers; ++l) {
    auto& lt = tape.layers[static_cast<std::size_t>(l)];
    const ConstMat wx(p + m.wx_offset(l), 4 * hdim, m.layer_input(l));
    const ConstMat wh(p + m.wh_offset(l), 4 * hdim, hdim);
    const ConstVec b(p + m.bias_offset(l), 4 * hdim);
    lt.input = std::move(in);
    lt.gates.noalias() = wx * lt.input;
    lt.gates.colwise() += b;
    lt.c.resize(hdim, tb);
    lt.tc.resize(hdim, tb);
    lt.h.resize(hdim, tb);
    for (int t = 0; t < steps; ++t) {
      const Index col = static_cast<Index>(t) * batch;
      auto z = lt.gates.middleCols(col, batch);
      if (t > 0) z.noalias() += wh * lt.h.middleCols(col - batch, batch);
      z.topRows(2 * hdim) = z.topRows(2 * hdim).unaryExpr(&sigmoid);
      z.middleRows(2 * hdim, hdim) = z.middleRows(2 * hdim, hdim).array().tanh().matrix();
      z.bottomRows(hdim) = z.bottomRows(hdim).unaryExpr(&sigmoid);
      auto c = lt.c.middleCols(col, batch);
      c = z.topRows(hdim).cwiseProduct(z.middleRows(2 * hdim, hdim));
      if (t > 0) c += z.middleRows(hdim, hdim).cwiseProduct(lt.c.middleCols(col - batch, batch));
      lt.tc.middleCols(col, batch) = c.array().tanh().matrix();
      lt.h.middleCols(col, batch) = z.bottomRows(hdim).cwiseProduct(lt.tc.middleCols(col, batch));
    }
    if (rng != nullptr && cfg.dropout > 0.0) {
      const double keep = 1.0 - cfg.dropout;
      lt.mask.resize(hdim, tb);
      for (Index j = 0; j < tb; ++j) {
        for (Index i = 0; i < hdim; ++i) lt.mask(i, j) = rng->uniform() < keep ? 1.0 / keep : 0.0;
      }
      in = lt.h.cwiseProduct(lt.mask);
    } else {
      lt.mask.resize(0, 0);
      in = lt.h;
    }
  }
  const Index f = cfg.fc_hidden;
  const ConstMat w1(p + m.fc1_offset(), f, hdim);
  const ConstVec b1(p + m.fc1_offset() + static_cast<std::size_t>(f * hdim), f);
  const ConstMat w2(p + m.fc2_offset(), 2, f);
  const ConstVec b2(p + m.fc2_offset() + static_cast<std::size_t>(2 * f), 2);
  tape.top = std::move(in);
  tape.a1_pre.noalias() = w1 * tape.top;
  tape.a1_pre.colwise() += b1;
  tape.a1 = tape.a1_pre.cwiseMax(0.0);
  tape.out.noalias() = w2 * tape.a1;
  tape.out.colwise() += b2;
}

void run_backward(const LstmPhaseModel& m, const Tape& tape, const MatrixXd& d_out, int steps, int batch,
                  VectorXd& grad) {
  const auto& cfg = m.config();
  const Index hdim = cfg.hidden;
  const Index f = cfg.fc_hidden;
  const double* p = m.params().data();
  grad.setZero(m.params().size());
  double* g = grad.data();

  const ConstMat w1(p + m.fc1_offset(), f, hdim);
  const ConstMat w2(p + m.fc2_offset(), 2, f);
  Mat gw1(g + m.fc1_offset(), f, hdim);
  Vec gb1(g + m.fc1_offset() + static_cast<std::size_t>(f * hdim), f);
  Mat gw2(g + m.fc2_offset(), 2, f);
  Vec gb2(g + m.fc2_offset() + static_cast<std::size_t>(2 * f), 2);

  gw2.noalias() = d_out * tape.a1.transpose();
  gb2 = d_out.rowwise().sum();
  MatrixXd da = w2.transpose() * d_out;
  da = da.cwiseProduct((tape.a1_pre.array() > 0.0).cast<double>().matrix());
  gw1.noalias() = da * tape.top.transpose();
  gb1 = da.rowwise().sum();
  MatrixXd d_top = w1.transpose() * da;

  for (int l = cfg.layers - 1; l >= 0; --l) {
    const auto& lt = tape.layers[static_cast<std::size_t>(l)];
    const ConstMat wx(p + m.wx_offset(l), 4 * hdim, m.layer_input(l));
    const ConstMat wh(p + m.wh_offset(l), 4 * hdim, hdim);
    Mat gwx(g + m.wx_offset(l), 4 * hdim, m.layer_input(l));
    Mat gwh(g + m.wh_offset(l), 4 * hdim, hdim);
    Vec gb(g + m.bias_offset(l), 4 * hdim);

    const MatrixXd dh_out = lt.mask.size() > 0 ? MatrixXd(d_top.cwiseProduct(lt.mask)) : d_top;
    MatrixXd dz(4 * hdim, lt.gates.cols());
    MatrixXd dh_rec = MatrixXd::Zero(hdim, batch);
    MatrixXd dc_next = MatrixXd::Zero(hdim, batch);
    for (int t = steps - 1; t >= 0; --t) {
      const Index col = static_cast<Index>(t) * batch;
      const auto z = lt.gates.middleCols(col, batch);
      const auto ig = z.topRows(hdim).array();
      const auto fg = z.middleRows(hdim, hdim).array();
      const auto gg = z.middleRows(2 * hdim, hdim).array();
      const auto og = z.bottomRows(hdim).array();
      const auto tc = lt.tc.middleCols(col, batch).array();
      const Eigen::ArrayXXd dh = dh_out.middleCols(col, batch).array() + dh_rec.array();
      const Eigen::ArrayXXd dc = dh * og * (1.0 - tc.square()) + dc_next.array();
      auto dzt = dz.middleCols(col, batch);
      dzt.topRows(hdim) = (dc * gg * ig * (1.0 - ig)).matrix();
      if (t > 0) {
        dzt.middleRows(hdim, hdim) = (dc * lt.c.middleCols(col - batch, batch).array() * fg * (1.0 - fg)).matrix();
      } else {
        dzt.middleRows(hdim, hdim).setZero();
      }
      dzt.middleRows(2 * hdim, hdim) = (dc * ig * (1.0 - gg.square())).matrix();
      dzt.bottomRows(hdim) = (dh * tc * og * (1.0 - og)).matrix();
      dc_next = (dc * fg).matrix();
      dh_rec.noalias() = wh.transpose() * dzt;
    }
    gwx.noalias() = dz * lt.input.transpose();
    gb = dz.rowwise().sum();
    if (steps > 1) {
      const Index n = static_cast<Index>(steps - 1) * batch;
      gwh.noalias() = dz.rightCols(n) * lt.h.leftCols(n).transpose();
    }
    if (l > 0) d_top.noalias() = wx.transpose() * dz;
  }
}

PhaseOutputs column_slice(const MatrixXd& m, int steps, int batch, int b) {
  PhaseOutputs out(2, steps);
  for (int t = 0; t < steps; ++t) out.col(t) = m.col(static_cast<Index>(t) * batch + b);
  return out;
}

}  // namespace

std::size_t LstmConfig::param_count() const {
  const auto h = static_cast<std::size_t>(hidden);
  std::size_t n = 0;
  for (int l = 0; l < layers; ++l) {
    const auto in = static_cast<std::size_t>(l == 0 ? input_dim : hidden);
    n += 4 * h * in + 4 * h * h + 4 * h;
  }
  const auto f = static_cast<std::size_t>(fc_hidden);
  return n + f * h + f + 2 * f + 2;
}

LstmPhaseModel::LstmPhaseModel(const LstmConfig& config) : config_(config) {
  if (config.input_dim <= 0 || config.hidden <= 0 || config.layers <= 0 || config.fc_hidden <= 0) {
    throw Error(Errc::config, "LSTM dimensions must be positive");
  }
  if (!(config.dropout >= 0.0 && config.dropout < 1.0)) throw Error(Errc::config, "dropout must be in [0, 1)");
  params_ = VectorXd::Zero(static_cast<Index>(config.param_count()));
  mean_ = VectorXd::Zero(config.input_dim);
  scale_ = VectorXd::Ones(config.input_dim);
}

void LstmPhaseModel::init_random(std::uint64_t seed) {
  Rng rng(seed);
  const double k = 1.0 / std::sqrt(static_cast<double>(config_.hidden));
  for (Index i = 0; i < static_cast<Index>(fc1_offset()); ++i) params_[i] = rng.uniform(-k, k);
  for (int l = 0; l < config_.layers; ++l) {
    params_.segment(static_cast<Index>(bias_offset(l)) + config_.hidden, config_.hidden).array() += 1.0;
  }
  const double k1 = 1.0 / std::sqrt(static_cast<double>(config_.hidden));
  for (auto i = static_cast<Index>(fc1_offset()); i < static_cast<Index>(fc2_offset()); ++i) params_[i] = rng.uniform(-k1, k1);
  const double k2 = 1.0 / std::sqrt(static_cast<double>(config_.fc_hidden));
  for (auto i = static_cast<Index>(fc2_offset()); i < params_.size(); ++i) params_[i] = rng.uniform(-k2, k2);
}

void LstmPhaseModel::set_standardization(Eigen::VectorXd mean, Eigen::VectorXd scale) {
  if (mean.size() != config_.input_dim || scale.size() != config_.input_dim) {
    throw Error(Errc::shape, "standardization vectors must match the input dimension");
  }
  mean_ = std::move(mean);
  scale_ = std::move(scale);
}

std::size_t LstmPhaseModel::wx_offset(int layer) const {
  const auto h = static_cast<std::size_t>(config_.hidden);
  std::size_t off = 0;
  for (int l = 0; l < layer; ++l) off += 4 * h * static_cast<std::size_t>(layer_input(l)) + 4 * h * h + 4 * h;
  return off;
}

std::size_t LstmPhaseModel::wh_offset(int layer) const {
  return wx_offset(layer) + 4 * static_cast<std::size_t>(config_.hidden) * static_cast<std::size_t>(layer_input(layer));
}

std::size_t LstmPhaseModel::bias_offset(int layer) const {
  const auto h = static_cast<std::size_t>(config_.hidden);
  return wh_offset(layer) + 4 * h * h;
}

std::size_t LstmPhaseModel::fc1_offset() const { return wx_offset(config_.layers); }

std::size_t LstmPhaseModel::fc2_offset() const {
  const auto f = static_cast<std::size_t>(config_.fc_hidden);
  return fc1_offset() + f * static_cast<std::size_t>(config_.hidden) + f;
}

std::pair<VectorXd, VectorXd> feature_standardization(std::span<const MatrixXd> sequences) {
  if (sequences.empty()) throw Error(Errc::config, "no sequences for standardization");
  const Index d = sequences.front().rows();
  VectorXd sum = VectorXd::Zero(d);
  double n = 0.0;
  for (const auto& s : sequences) {
    sum += s.rowwise().sum();
    n += static_cast<double>(s.cols());
  }
  const VectorXd mean = sum / n;
  VectorXd var = VectorXd::Zero(d);
  for (const auto& s : sequences) var += (s.colwise() - mean).rowwise().squaredNorm();
  var /= n;
  VectorXd scale(d);
  for (Index i = 0; i < d; ++i) scale[i] = var[i] > 1e-16 ? 1.0 / std::sqrt(var[i]) : 1.0;
  return {mean, scale};
}

MatrixXd feature_matrix(std::span<const KinematicFrame> frames) {
  if (frames.empty()) return {};
  MatrixXd x(frames.front().pos.size() * 3, static_cast<Index>(frames.size()));
  for (std::size_t t = 0; t < frames.size(); ++t) x.col(static_cast<Index>(t)) = frames[t].features();
  return x;
}

PhaseOutputs forward(const LstmPhaseModel& model, const MatrixXd& features) {
  if (features.cols() == 0) throw Error(Errc::shape, "empty window");
  check_features(model, features.rows());
  Tape tape;
  run_forward(model, features, static_cast<int>(features.cols()), 1, nullptr, tape);
  return tape.out;
}

PhaseOutputs forward(const LstmPhaseModel& model, std::span<const KinematicFrame> window) {
  if (window.empty()) throw Error(Errc::shape, "empty window");
  return forward(model, feature_matrix(window));
}

double loss_mse(const PhaseOutputs& pred, std::span<const double> phases) {
  if (static_cast<std::size_t>(pred.cols()) != phases.size() || phases.empty()) {
    throw Error(Errc::length_mismatch, "prediction and label lengths differ");
  }
  double sum = 0.0;
  for (Index t = 0; t < pred.cols(); ++t) {
    const double ds = pred(0, t) - std::sin(phases[static_cast<std::size_t>(t)]);
    const double dc = pred(1, t) - std::cos(phases[static_cast<std::size_t>(t)]);
    sum += ds * ds + dc * dc;
  }
  return sum / (2.0 * static_cast<double>(pred.cols()));
}

double loss_mse(const PhaseOutputs& pred, std::span<const PhaseSample> labels) {
  std::vector<double> phases;
  phases.reserve(labels.size());
  for (const auto& l : labels) phases.push_back(l.phase);
  return loss_mse(pred, phases);
}

double loss_mono(const PhaseOutputs& pred, double epsilon) {
  if (pred.cols() < 2) throw Error(Errc::length_mismatch, "monotonicity loss needs at least two steps");
  double sum = 0.0;
  double prev = phase_from_sincos(pred(0, 0), pred(1, 0));
  for (Index t = 1; t < pred.cols(); ++t) {
    const double cur = phase_from_sincos(pred(0, t), pred(1, t));
    const double d = phase_diff(cur, prev);
    if (d < epsilon) sum -= d;
    prev = cur;
  }
  return sum / static_cast<double>(pred.cols());
}

double total_loss(const PhaseOutputs& pred, std::span<const PhaseSample> labels, double beta, double epsilon) {
  const double mse = loss_mse(pred, labels);
  return beta == 0.0 ? mse : mse + beta * loss_mono(pred, epsilon);
}

LossGrad loss_with_grad(const PhaseOutputs& pred, std::span<const double> phases, double beta, double epsilon) {
  const Index steps = pred.cols();
  if (static_cast<std::size_t>(steps) != phases.size() || steps == 0) {
    throw Error(Errc::length_mismatch, "prediction and label lengths differ");
  }
  LossGrad out;
  out.d_pred.resize(2, steps);
  const double inv_t = 1.0 / static_cast<double>(steps);
  double sum = 0.0;
  for (Index t = 0; t < steps; ++t) {
    const double ds = pred(0, t) - std::sin(phases[static_cast<std::size_t>(t)]);
    const double dc = pred(1, t) - std::cos(phases[static_cast<std::size_t>(t)]);
    sum += ds * ds + dc * dc;
    out.d_pred(0, t) = ds * inv_t;
    out.d_pred(1, t) = dc * inv_t;
  }
  out.mse = 0.5 * sum * inv_t;
  if (steps >= 2 && beta != 0.0) {
    std::vector<double> phi(static_cast<std::size_t>(steps));
    std::vector<double> d_phi(static_cast<std::size_t>(steps), 0.0);
    for (Index t = 0; t < steps; ++t) phi[static_cast<std::size_t>(t)] = phase_from_sincos(pred(0, t), pred(1, t));
    double mono = 0.0;
    for (std::size_t t = 1; t < phi.size(); ++t) {
      const double d = phase_diff(phi[t], phi[t - 1]);
      if (d < epsilon) {
        mono -= d;
        d_phi[t] -= inv_t;
        d_phi[t - 1] += inv_t;
      }
    }
    out.mono = mono * inv_t;
    for (Index t = 0; t < steps; ++t) {
      const double w = d_phi[static_cast<std::size_t>(t)];
      if (w == 0.0) continue;
      const double s = pred(0, t), c = pred(1, t);
      const double r2 = s * s + c * c;
      out.d_pred(0, t) += beta * w * c / r2;
      out.d_pred(1, t) -= beta * w * s / r2;
    }
  }
  out.total = out.mse + beta * out.mono;
  return out;
}

double beta_schedule(double epoch, double beta, double ramp) {
  if (epoch <= ramp / 5.0) return 0.0;
  return beta * std::min(epoch / ramp, 1.0);
}

double batch_loss(const LstmPhaseModel& model, const SequenceBatch& batch, double beta, double epsilon,
                  VectorXd* grad, Rng* dropout_rng, double* mse_out, double* mono_out) {
  check_features(model, batch.features.rows());
  const int steps = batch.steps;
  const int nb = batch.batch;
  if (steps <= 0 || nb <= 0 || batch.features.cols() != static_cast<Index>(steps) * nb ||
      batch.phases.size() != static_cast<std::size_t>(steps) * static_cast<std::size_t>(nb)) {
    throw Error(Errc::shape, "inconsistent sequence batch");
  }
  Tape tape;
  run_forward(model, batch.features, steps, nb, dropout_rng, tape);
  MatrixXd d_out(2, tape.out.cols());
  double total = 0.0, mse = 0.0, mono = 0.0;
  std::vector<double> phases(static_cast<std::size_t>(steps));
  for (int b = 0; b < nb; ++b) {
    for (int t = 0; t < steps; ++t) phases[static_cast<std::size_t>(t)] = batch.phases[static_cast<std::size_t>(t * nb + b)];
    const LossGrad lg = loss_with_grad(column_slice(tape.out, steps, nb, b), phases, beta, epsilon);
    total += lg.total;
    mse += lg.mse;
    mono += lg.mono;
    for (int t = 0; t < steps; ++t) d_out.col(static_cast<Index>(t) * nb + b) = lg.d_pred.col(t) / nb;
  }
  if (mse_out != nullptr) *mse_out = mse / nb;
  if (mono_out != nullptr) *mono_out = mono / nb;
  if (grad != nullptr) run_backward(model, tape, d_out, steps, nb, *grad);
  return total / nb;
}

void StreamState::reset() {
  for (auto& v : h) v.setZero();
  for (auto& v : c) v.setZero();
  last_phase = 0.0;
  has_output = false;
}

StreamState make_stream_state(const LstmPhaseModel& model) {
  StreamState s;
  s.h.assign(static_cast<std::size_t>(model.config().layers), VectorXd::Zero(model.config().hidden));
  s.c = s.h;
  return s;
}

StreamOutput stream_step(const LstmPhaseModel& model, StreamState& state, const VectorXd& features) {
  check_features(model, features.size());
  const auto& cfg = model.config();
  if (state.h.size() != static_cast<std::size_t>(cfg.layers)) state = make_stream_state(model);
  const Index hdim = cfg.hidden;
  const double* p = model.params().data();
  VectorXd x = (features - model.input_mean()).cwiseProduct(model.input_scale());
  VectorXd z(4 * hdim);
  for (int l = 0; l < cfg.layers; ++l) {
    const ConstMat wx(p + model.wx_offset(l), 4 * hdim, model.layer_input(l));
    const ConstMat wh(p + model.wh_offset(l), 4 * hdim, hdim);
    const ConstVec b(p + model.bias_offset(l), 4 * hdim);
    auto& h = state.h[static_cast<std::size_t>(l)];
    auto& c = state.c[static_cast<std::size_t>(l)];
    z.noalias() = wx * x;
    z += b;
    z.noalias() += wh * h;
    const VectorXd ig = z.head(hdim).unaryExpr(&sigmoid);
    const VectorXd fg = z.segment(hdim, hdim).unaryExpr(&sigmoid);
    const VectorXd gg = z.segment(2 * hdim, hdim).array().tanh().matrix();
    const VectorXd og = z.tail(hdim).unaryExpr(&sigmoid);
    c = fg.cwiseProduct(c) + ig.cwiseProduct(gg);
    h = og.cwiseProduct(c.array().tanh().matrix());
    x = h;
  }
  const Index f = cfg.fc_hidden;
  const ConstMat w1(p + model.fc1_offset(), f, hdim);
  const ConstVec b1(p + model.fc1_offset() + static_cast<std::size_t>(f * hdim), f);
  const ConstMat w2(p + model.fc2_offset(), 2, f);
  const ConstVec b2(p + model.fc2_offset() + static_cast<std::size_t>(2 * f), 2);
  VectorXd a = w1 * x;
  a += b1;
  a = a.cwiseMax(0.0);
  VectorXd y = w2 * a;
  y += b2;
  StreamOutput out{y[0], y[1], phase_from_sincos(y[0], y[1])};
  state.last_phase = out.phase;
  state.has_output = true;
  return out;
}

StreamOutput stream_step(const LstmPhaseModel& model, StreamState& state, const KinematicFrame& frame) {
  return stream_step(model, state, frame.features());
}

void save_model(const LstmPhaseModel& model, const std::filesystem::path& path) {
  const auto& cfg = model.config();
  ParamFile file;
  file.kind = "lstm";
  file.meta = {{"input_dim", cfg.input_dim},
               {"hidden", cfg.hidden},
               {"layers", cfg.layers},
               {"fc_hidden", cfg.fc_hidden},
               {"dropout", cfg.dropout},
               {"input_mean", std::vector<double>(model.input_mean().begin(), model.input_mean().end())},
               {"input_scale", std::vector<double>(model.input_scale().begin(), model.input_scale().end())}};
  file.values.assign(model.params().begin(), model.params().end());
  write_params(file, path);
}

LstmPhaseModel load_model(const std::filesystem::path& path) {
  const ParamFile file = read_params(path);
  if (file.kind != "lstm") throw Error(Errc::format, path.string() + " holds a '" + file.kind + "' model, not lstm");
  LstmConfig cfg;
  std::vector<double> mean, scale;
  try {
    cfg.input_dim = file.meta.at("input_dim").get<int>();
    cfg.hidden = file.meta.at("hidden").get<int>();
    cfg.layers = file.meta.at("layers").get<int>();
    cfg.fc_hidden = file.meta.at("fc_hidden").get<int>();
    cfg.dropout = file.meta.at("dropout").get<double>();
    mean = file.meta.at("input_mean").get<std::vector<double>>();
    scale = file.meta.at("input_scale").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::format, std::string("bad lstm metadata: ") + e.what());
  }
  LstmPhaseModel model(cfg);
  if (file.values.size() != cfg.param_count()) throw Error(Errc::shape, "parameter count does not match architecture");
  model.params() = Map<const VectorXd>(file.values.data(), static_cast<Index>(file.values.size()));
  model.set_standardization(Map<const VectorXd>(mean.data(), static_cast<Index>(mean.size())),
                            Map<const VectorXd>(scale.data(), static_cast<Index>(scale.size())));
  return model;
}

LstmEstimator::LstmEstimator(std::shared_ptr<const LstmPhaseModel> model)
    : model_(std::move(model)), state_(make_stream_state(*model_)) {}

double LstmEstimator::step(const KinematicFrame& frame) { return stream_step(*model_, state_, frame).phase; }

std::unique_ptr<PhaseEstimator> LstmEstimator::fresh() const { return std::make_unique<LstmEstimator>(model_); }

}  // namespace ictus
