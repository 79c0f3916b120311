#pragma once

// Training loop for the LSTM phase model: sliding windows, AdamW with a
// triangular cyclic learning rate, monotonicity-weight ramp, best-validation
// checkpointing and early stopping. Single-threaded and bit-deterministic
// for a given seed.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "ictus/lstm.hpp"
#include "ictus/synth.hpp"

namespace ictus {

struct TrainConfig {
  LstmConfig model;
  int window = 500;
  double beta = 0.3;
  double ramp_epochs = 40;
  double epsilon = -1e-7;
  int max_epochs = 200;
  int patience = 50;
  double base_lr = 1e-7;
  double max_lr = 0.0;         // 0 runs the range test
  int cycle_half_epochs = 4;   // epochs from base to max learning rate
  double weight_decay = 0.01;
  int batch_size = 8;
  double grad_clip = 1.0;      // global gradient-norm bound, 0 disables
  int range_test_steps = 3;    // optimizer steps per learning-rate decade
  std::uint64_t seed = 7;

  /// Throws Errc::config.
  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;             // learning rate at the last step of the epoch
  double beta_effective = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;       // full beta, dropout off
  double val_mse = 0.0;
  double val_mono = 0.0;
  bool improved = false;
};

struct TrainLog {
  double max_lr = 0.0;
  std::vector<std::pair<double, double>> range_test;  // (lr, loss)
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_val = 0.0;
  bool early_stopped = false;
};

struct TrainResult {
  LstmPhaseModel model;
  TrainLog log;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Throws Errc::config for empty splits and Errc::diverged on a non-finite loss.
TrainResult train(std::span<const Take* const> train_takes, std::span<const Take* const> val_takes,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});
TrainResult train(std::span<const Take> train_takes, std::span<const Take> val_takes, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Window start offsets for a sequence of length n: stride window/2, with a
/// final window flush with the end. Sequences shorter than the window yield
/// one window covering the whole sequence.
std::vector<int> window_starts(int n, int window);

/// Cuts the takes into windows and packs them into batches of equal length.
/// Windows are shuffled with `shuffle` when given.
std::vector<SequenceBatch> make_batches(std::span<const Take* const> takes, int window, int batch_size, Rng* shuffle);

/// Triangular cyclic learning rate.
double cyclic_lr(long iteration, long half_cycle, double base, double max);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Central finite differences over every parameter, dropout off. The
/// relative error is |a - n| / max(|a|, |n|, 1e-6).
GradCheckResult grad_check(const LstmPhaseModel& model, const SequenceBatch& batch, double beta,
                           double epsilon = -1e-7, double step = 1e-5);

/// CSV with columns epoch, lr, beta_effective, train_loss, val_loss, val_mse, val_mono, improved.
void write_train_log(const TrainLog& log, const std::filesystem::path& path);

}  // namespace ictus
