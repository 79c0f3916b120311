#include "ictus/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "ictus/error.hpp"
#include "ictus/rng.hpp"

namespace ictus {

namespace {

struct Window {
  const Take* take = nullptr;
  int start = 0;
  int length = 0;
};

class AdamW {
 public:
  AdamW(Eigen::Index n, double weight_decay) : m_(Eigen::VectorXd::Zero(n)), v_(Eigen::VectorXd::Zero(n)), wd_(weight_decay) {}

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++t_;
    m_ = b1 * m_ + (1.0 - b1) * grad;
    v_ = b2 * v_ + (1.0 - b2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1, t_);
    const double c2 = 1.0 - std::pow(b2, t_);
    params *= 1.0 - lr * wd_;
    params.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps);
  }

 private:
  Eigen::VectorXd m_, v_;
  double wd_;
  int t_ = 0;
};

void clip(Eigen::VectorXd& grad, double bound) {
  if (bound <= 0.0) return;
  const double norm = grad.norm();
  if (norm > bound) grad *= bound / norm;
}

SequenceBatch pack(std::span<const Window> windows) {
  SequenceBatch b;
  b.steps = windows.front().length;
  b.batch = static_cast<int>(windows.size());
  const auto d = static_cast<Eigen::Index>(windows.front().take->keypoints.feature_dim());
  b.features.resize(d, static_cast<Eigen::Index>(b.steps) * b.batch);
  b.phases.resize(static_cast<std::size_t>(b.steps) * static_cast<std::size_t>(b.batch));
  for (int j = 0; j < b.batch; ++j) {
    const Window& w = windows[static_cast<std::size_t>(j)];
    for (int t = 0; t < b.steps; ++t) {
      const auto idx = static_cast<std::size_t>(w.start + t);
      const auto col = static_cast<Eigen::Index>(t) * b.batch + j;
      b.features.col(col) = w.take->frames[idx].features();
      b.phases[static_cast<std::size_t>(col)] = w.take->labels[idx].phase;
    }
  }
  return b;
}

double mean_loss(const LstmPhaseModel& model, std::span<const SequenceBatch> batches, double beta, double epsilon,
                 double* mse, double* mono) {
  double total = 0.0, sm = 0.0, so = 0.0, weight = 0.0;
  for (const auto& b : batches) {
    double m = 0.0, o = 0.0;
    const double l = batch_loss(model, b, beta, epsilon, nullptr, nullptr, &m, &o);
    total += l * b.batch;
    sm += m * b.batch;
    so += o * b.batch;
    weight += b.batch;
  }
  if (mse != nullptr) *mse = sm / weight;
  if (mono != nullptr) *mono = so / weight;
  return total / weight;
}

void check_finite(double loss, const std::string& where) {
  if (!std::isfinite(loss)) throw Error(Errc::diverged, "non-finite training loss " + where);
}

double range_test(const LstmPhaseModel& start, std::span<const SequenceBatch> batches, const TrainConfig& cfg,
                  Rng& rng, TrainLog& log) {
  LstmPhaseModel model = start;
  AdamW opt(model.params().size(), cfg.weight_decay);
  Eigen::VectorXd grad;
  double best = std::numeric_limits<double>::infinity();
  double best_lr = cfg.base_lr;
  std::size_t next = 0;
  for (double lr = cfg.base_lr; lr <= 1.0 + 1e-12; lr *= 10.0) {
    double sum = 0.0;
    bool blown = false;
    for (int s = 0; s < cfg.range_test_steps; ++s) {
      const auto& b = batches[next++ % batches.size()];
      const double loss = batch_loss(model, b, 0.0, cfg.epsilon, &grad, &rng);
      if (!std::isfinite(loss) || !grad.allFinite()) {
        blown = true;
        break;
      }
      clip(grad, cfg.grad_clip);
      opt.step(model.params(), grad, lr);
      sum += loss;
    }
    if (blown) break;
    const double avg = sum / cfg.range_test_steps;
    log.range_test.emplace_back(lr, avg);
    if (avg < best) {
      best = avg;
      best_lr = lr;
    } else if (avg > 4.0 * best) {
      break;
    }
  }
  return std::clamp(best_lr / 10.0, 1e-4, 1e-2);
}

}  // namespace

void TrainConfig::validate() const {
  if (model.hidden < 1 || model.layers < 1 || model.fc_hidden < 1 || model.input_dim < 1) {
    throw Error(Errc::config, "model sizes must be positive");
  }
  if (!(model.dropout >= 0.0 && model.dropout < 1.0)) throw Error(Errc::config, "dropout must be in [0, 1)");
  if (window < 2) throw Error(Errc::config, "window must be at least 2");
  if (beta < 0.0) throw Error(Errc::config, "beta must be non-negative");
  if (ramp_epochs < 1.0) throw Error(Errc::config, "ramp epochs must be at least 1");
  if (max_epochs < 1 || patience < 1 || batch_size < 1 || cycle_half_epochs < 1 || range_test_steps < 1) {
    throw Error(Errc::config, "epoch, patience, batch and cycle settings must be positive");
  }
  if (!(base_lr > 0.0) || max_lr < 0.0) throw Error(Errc::config, "learning rates must be positive");
}

std::vector<int> window_starts(int n, int window) {
  if (n <= 0) return {};
  if (n <= window) return {0};
  std::vector<int> starts;
  const int stride = std::max(1, window / 2);
  for (int s = 0; s + window <= n; s += stride) starts.push_back(s);
  if (starts.back() + window < n) starts.push_back(n - window);
  return starts;
}

std::vector<SequenceBatch> make_batches(std::span<const Take* const> takes, int window, int batch_size, Rng* shuffle) {
  std::vector<Window> windows;
  for (const Take* t : takes) {
    const int n = static_cast<int>(t->frames.size());
    for (int s : window_starts(n, window)) windows.push_back({t, s, std::min(window, n)});
  }
  if (shuffle != nullptr) {
    for (std::size_t i = windows.size(); i > 1; --i) std::swap(windows[i - 1], windows[shuffle->below(i)]);
  }
  // Bucket by length, keeping the (shuffled) order inside each bucket.
  std::map<int, std::vector<Window>> buckets;
  for (const auto& w : windows) buckets[w.length].push_back(w);
  std::vector<SequenceBatch> batches;
  for (const auto& [len, ws] : buckets) {
    for (std::size_t i = 0; i < ws.size(); i += static_cast<std::size_t>(batch_size)) {
      const std::size_t n = std::min(ws.size() - i, static_cast<std::size_t>(batch_size));
      batches.push_back(pack(std::span<const Window>(ws.data() + i, n)));
    }
  }
  if (shuffle != nullptr) {
    for (std::size_t i = batches.size(); i > 1; --i) std::swap(batches[i - 1], batches[shuffle->below(i)]);
  }
  return batches;
}

double cyclic_lr(long iteration, long half_cycle, double base, double max) {
  const double cycle = std::floor(1.0 + static_cast<double>(iteration) / (2.0 * static_cast<double>(half_cycle)));
  const double x = std::abs(static_cast<double>(iteration) / static_cast<double>(half_cycle) - 2.0 * cycle + 1.0);
  return base + (max - base) * std::max(0.0, 1.0 - x);
}

TrainResult train(std::span<const Take* const> train_takes, std::span<const Take* const> val_takes,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_takes.empty() || val_takes.empty()) throw Error(Errc::config, "training and validation splits must be non-empty");
  LstmConfig mc = cfg.model;
  mc.input_dim = static_cast<int>(train_takes.front()->keypoints.feature_dim());
  for (const Take* t : train_takes) {
    if (static_cast<int>(t->keypoints.feature_dim()) != mc.input_dim) throw Error(Errc::shape, "takes use different keypoint sets");
  }

  Rng rng(cfg.seed);
  LstmPhaseModel model(mc);
  model.init_random(mix_seed(cfg.seed, 1));
  {
    std::vector<Eigen::MatrixXd> seqs;
    for (const Take* t : train_takes) seqs.push_back(feature_matrix(t->frames));
    auto [mean, scale] = feature_standardization(seqs);
    model.set_standardization(std::move(mean), std::move(scale));
  }
  const auto val_batches = make_batches(val_takes, cfg.window, cfg.batch_size, nullptr);

  TrainResult result;
  TrainLog& log = result.log;
  {
    Rng order(mix_seed(cfg.seed, 2));
    const auto probe = make_batches(train_takes, cfg.window, cfg.batch_size, &order);
    log.max_lr = cfg.max_lr > 0.0 ? cfg.max_lr : range_test(model, probe, cfg, rng, log);
  }

  AdamW opt(model.params().size(), cfg.weight_decay);
  Eigen::VectorXd grad;
  long iteration = 0;
  long half_cycle = 0;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  result.model = model;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double beta_eff = beta_schedule(epoch, cfg.beta, cfg.ramp_epochs);
    const auto batches = make_batches(train_takes, cfg.window, cfg.batch_size, &rng);
    if (half_cycle == 0) half_cycle = std::max<long>(1, static_cast<long>(batches.size()) * cfg.cycle_half_epochs);
    double sum = 0.0, weight = 0.0, lr = cfg.base_lr;
    for (std::size_t i = 0; i < batches.size(); ++i) {
      const auto& b = batches[i];
      const double loss = batch_loss(model, b, beta_eff, cfg.epsilon, &grad, &rng);
      check_finite(loss, "at epoch " + std::to_string(epoch) + ", batch " + std::to_string(i));
      clip(grad, cfg.grad_clip);
      lr = cyclic_lr(iteration++, half_cycle, cfg.base_lr, log.max_lr);
      opt.step(model.params(), grad, lr);
      sum += loss * b.batch;
      weight += b.batch;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.beta_effective = beta_eff;
    rec.train_loss = sum / weight;
    rec.val_loss = mean_loss(model, val_batches, cfg.beta, cfg.epsilon, &rec.val_mse, &rec.val_mono);
    check_finite(rec.val_loss, "in validation at epoch " + std::to_string(epoch));
    if (rec.val_loss < best) {
      best = rec.val_loss;
      rec.improved = true;
      since_best = 0;
      result.model = model;
      log.best_epoch = epoch;
      log.best_val = best;
    } else {
      ++since_best;
    }
    log.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (since_best >= cfg.patience) {
      log.early_stopped = true;
      break;
    }
  }
  return result;
}

TrainResult train(std::span<const Take> train_takes, std::span<const Take> val_takes, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  std::vector<const Take*> tr, va;
  for (const auto& t : train_takes) tr.push_back(&t);
  for (const auto& t : val_takes) va.push_back(&t);
  return train(tr, va, cfg, on_epoch);
}

GradCheckResult grad_check(const LstmPhaseModel& model, const SequenceBatch& batch, double beta, double epsilon,
                           double step) {
  Eigen::VectorXd analytic;
  batch_loss(model, batch, beta, epsilon, &analytic, nullptr);
  LstmPhaseModel probe = model;
  GradCheckResult out;
  for (Eigen::Index i = 0; i < probe.params().size(); ++i) {
    const double keep = probe.params()[i];
    probe.params()[i] = keep + step;
    const double up = batch_loss(probe, batch, beta, epsilon, nullptr, nullptr);
    probe.params()[i] = keep - step;
    const double down = batch_loss(probe, batch, beta, epsilon, nullptr, nullptr);
    probe.params()[i] = keep;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic[i];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
    if (rel > out.max_rel_error || i == 0) {
      out.max_rel_error = std::max(out.max_rel_error, rel);
      out.worst_index = static_cast<std::size_t>(i);
      out.analytic = a;
      out.numeric = numeric;
    }
  }
  return out;
}

void write_train_log(const TrainLog& log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out.precision(17);
  out << "# max_lr=" << log.max_lr << " best_epoch=" << log.best_epoch << " early_stopped=" << log.early_stopped << "\n";
  out << "epoch,lr,beta_effective,train_loss,val_loss,val_mse,val_mono,improved\n";
  for (const auto& e : log.epochs) {
    out << e.epoch << ',' << e.lr << ',' << e.beta_effective << ',' << e.train_loss << ',' << e.val_loss << ','
        << e.val_mse << ',' << e.val_mono << ',' << (e.improved ? 1 : 0) << '\n';
  }
}

}  // namespace ictus
