#pragma once

// Leave-one-subject-out experiments.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ictus/controller.hpp"
#include "ictus/kalman.hpp"
#include "ictus/metrics.hpp"
#include "ictus/train.hpp"

namespace ictus {

/// One fold: train on every subject except `test` and `validation`. An
/// empty `test` is a deployment split: one model, no test rows.
struct LosoPair {
  std::string test;
  std::string validation;
};

/// Each subject is tested twice, validated on the next and the one after
/// (in sorted subject order): 2n folds for n subjects.
std::vector<LosoPair> loso_pairs(std::vector<std::string> subjects, int validations_per_test = 2);

struct LosoConfig {
  TrainConfig train;
  KalmanFitOptions kalman;
  ControllerConfig controller;
  bool with_kalman = true;
  bool with_sessions = true;  // run controller sessions on the estimates
};

struct TakeRow {
  int fold = 0;
  std::string subject;
  double tempo_factor = 1.0;
  std::string estimator;  // "lstm" or "kalman"
  double mspe = 0.0;      // unwrapped
  double mspe_wrapped = 0.0;
  double mspe_regular = 0.0;  // wrapped, regular bars
  double mspe_fermata = 0.0;  // wrapped, fermata bars (NaN when none)
  double upbeat_delay = 0.0;  // mean steps over fermata resumes (NaN when none)
  double beat_bar_mean = 0.0; // NaN when the session produced no beats
  double beat_bar_std = 0.0;
  double pct_of_bar = 0.0;
  double speed_std = 0.0;
};

struct SubjectRow {
  std::string subject;
  std::string estimator;
  MeanStd mspe;
  MeanStd mspe_wrapped;
};

struct FoldSummary {
  LosoPair pair;
  int best_epoch = -1;
  double best_val = 0.0;
  double max_lr = 0.0;
  int epochs = 0;
};

struct EvalReport {
  std::vector<TakeRow> takes;
  std::vector<SubjectRow> subjects;
  std::vector<FoldSummary> folds;
  bool full_coverage = false;
  nlohmann::json config;
  std::string hash;  // FNV-1a of the report without the hash field

  nlohmann::json to_json() const;
};

/// Recomputes the per-subject aggregates from the take rows.
std::vector<SubjectRow> aggregate_subjects(std::span<const TakeRow> rows);

std::string fnv1a_hex(std::string_view data);

using FoldCallback = std::function<void(int fold, const LosoPair& pair)>;

/// Throws Errc::config when a pair names an unknown subject or repeats one.
EvalReport run_loso(std::span<const Take> corpus, const Score& score, std::span<const LosoPair> pairs,
                    const LosoConfig& cfg, const FoldCallback& on_fold = {});

/// Evaluates one estimator on one take. Adds session metrics when requested.
TakeRow evaluate_take(PhaseEstimator& estimator, const Take& take, const Score& score, const ControllerConfig& cfg,
                      bool with_session);

}  // namespace ictus
