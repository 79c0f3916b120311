#include "ictus/loso.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

#include "ictus/error.hpp"
#include "ictus/metrics.hpp"
#include "ictus/rng.hpp"
#include "ictus/session.hpp"

namespace ictus {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

template <typename F>
double or_nan(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == Errc::undefined_metric) return kNaN;
    throw;
  }
}

nlohmann::json config_json(const LosoConfig& c) {
  const auto& t = c.train;
  return {{"train",
           {{"window", t.window},
            {"beta", t.beta},
            {"ramp_epochs", t.ramp_epochs},
            {"epsilon", t.epsilon},
            {"max_epochs", t.max_epochs},
            {"patience", t.patience},
            {"base_lr", t.base_lr},
            {"max_lr", t.max_lr},
            {"cycle_half_epochs", t.cycle_half_epochs},
            {"weight_decay", t.weight_decay},
            {"batch_size", t.batch_size},
            {"grad_clip", t.grad_clip},
            {"seed", t.seed},
            {"hidden", t.model.hidden},
            {"layers", t.model.layers},
            {"fc_hidden", t.model.fc_hidden},
            {"dropout", t.model.dropout}}},
          {"controller",
           {{"strategy", to_string(c.controller.strategy)},
            {"upbeat_threshold", c.controller.upbeat_threshold},
            {"phase_high", c.controller.phase_high},
            {"phase_low", c.controller.phase_low},
            {"sleep_steps", c.controller.sleep_steps},
            {"rate_hz", c.controller.rate_hz}}},
          {"with_kalman", c.with_kalman},
          {"with_sessions", c.with_sessions}};
}

}  // namespace

std::vector<LosoPair> loso_pairs(std::vector<std::string> subjects, int validations_per_test) {
  std::sort(subjects.begin(), subjects.end());
  subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());
  const auto n = static_cast<int>(subjects.size());
  if (n < 3) throw Error(Errc::config, "leave-one-subject-out needs at least three subjects");
  const int v = std::clamp(validations_per_test, 1, n - 2);
  std::vector<LosoPair> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = 1; j <= v; ++j) pairs.push_back({subjects[static_cast<std::size_t>(i)], subjects[static_cast<std::size_t>((i + j) % n)]});
  }
  return pairs;
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<SubjectRow> aggregate_subjects(std::span<const TakeRow> rows) {
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& r : rows) {
    auto& g = groups[{r.subject, r.estimator}];
    g.first.push_back(r.mspe);
    g.second.push_back(r.mspe_wrapped);
  }
  std::vector<SubjectRow> out;
  for (const auto& [key, g] : groups) out.push_back({key.first, key.second, mean_std(g.first), mean_std(g.second)});
  return out;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["config"] = config;
  j["full_coverage"] = full_coverage;
  auto& folds_j = j["folds"] = nlohmann::json::array();
  for (const auto& f : folds) {
    folds_j.push_back({{"test", f.pair.test},
                       {"validation", f.pair.validation},
                       {"best_epoch", f.best_epoch},
                       {"best_val", num(f.best_val)},
                       {"max_lr", f.max_lr},
                       {"epochs", f.epochs}});
  }
  auto& takes_j = j["takes"] = nlohmann::json::array();
  for (const auto& r : takes) {
    takes_j.push_back({{"fold", r.fold},
                       {"subject", r.subject},
                       {"tempo_factor", r.tempo_factor},
                       {"estimator", r.estimator},
                       {"mspe", num(r.mspe)},
                       {"mspe_wrapped", num(r.mspe_wrapped)},
                       {"mspe_regular", num(r.mspe_regular)},
                       {"mspe_fermata", num(r.mspe_fermata)},
                       {"upbeat_delay", num(r.upbeat_delay)},
                       {"beat_bar_mean", num(r.beat_bar_mean)},
                       {"beat_bar_std", num(r.beat_bar_std)},
                       {"pct_of_bar", num(r.pct_of_bar)},
                       {"speed_std", num(r.speed_std)}});
  }
  auto& subj_j = j["subjects"] = nlohmann::json::array();
  for (const auto& s : subjects) {
    subj_j.push_back({{"subject", s.subject},
                      {"estimator", s.estimator},
                      {"mspe_mean", num(s.mspe.mean)},
                      {"mspe_std", num(s.mspe.std)},
                      {"mspe_wrapped_mean", num(s.mspe_wrapped.mean)},
                      {"mspe_wrapped_std", num(s.mspe_wrapped.std)},
                      {"takes", s.mspe.n}});
  }
  j["hash"] = hash;
  return j;
}

TakeRow evaluate_take(PhaseEstimator& estimator, const Take& take, const Score& score, const ControllerConfig& cfg,
                      bool with_session) {
  const Score piece = score_for_take(score, take);
  estimator.reset();
  std::vector<double> est;
  est.reserve(take.frames.size());
  for (const auto& f : take.frames) est.push_back(estimator.step(f));
  TakeRow row;
  row.subject = take.subject_id;
  row.tempo_factor = take.tempo_factor;
  row.estimator = estimator.name();
  row.mspe = mspe(take.labels, est, false);
  row.mspe_wrapped = mspe(take.labels, est, true);
  row.mspe_regular = or_nan([&] { return mspe(take.labels, est, regular_bar_mask(take.labels, piece), true); });
  row.mspe_fermata = or_nan([&] { return mspe(take.labels, est, fermata_bar_mask(take.labels, piece), true); });
  ControllerConfig c = cfg;
  c.rate_hz = take.rate.hz;
  const auto delays = upbeat_delays(take, piece, est, c);
  if (delays.empty()) {
    row.upbeat_delay = kNaN;
  } else {
    double sum = 0.0;
    for (int d : delays) sum += d;
    row.upbeat_delay = sum / static_cast<double>(delays.size());
  }
  row.beat_bar_mean = row.beat_bar_std = row.pct_of_bar = row.speed_std = kNaN;
  if (with_session) {
    const SessionLog log = run_session(est, piece, c);
    const double mean = or_nan([&] { return beat_bar_distance(log).mean; });
    row.beat_bar_mean = mean;
    row.beat_bar_std = or_nan([&] { return beat_bar_distance(log).std; });
    row.pct_of_bar = or_nan([&] { return pct_of_bar(log, piece); });
    row.speed_std = or_nan([&] { return speed_stability(log, piece); });
  }
  return row;
}

EvalReport run_loso(std::span<const Take> corpus, const Score& score, std::span<const LosoPair> pairs,
                    const LosoConfig& cfg, const FoldCallback& on_fold) {
  std::set<std::string> subjects;
  for (const auto& t : corpus) subjects.insert(t.subject_id);
  for (const auto& p : pairs) {
    if (!subjects.contains(p.validation) || (!p.test.empty() && !subjects.contains(p.test))) {
      throw Error(Errc::config, "fold (" + p.test + ", " + p.validation + ") names an unknown subject");
    }
    if (p.test == p.validation) throw Error(Errc::config, "test and validation subject must differ");
  }
  EvalReport report;
  report.config = config_json(cfg);
  std::set<std::string> tested;
  for (std::size_t fi = 0; fi < pairs.size(); ++fi) {
    const auto& pair = pairs[fi];
    if (on_fold) on_fold(static_cast<int>(fi), pair);
    std::vector<const Take*> train_set, val_set, test_set;
    for (const auto& t : corpus) {
      if (t.subject_id == pair.test) {
        test_set.push_back(&t);
      } else if (t.subject_id == pair.validation) {
        val_set.push_back(&t);
      } else {
        train_set.push_back(&t);
      }
    }
    TrainConfig tc = cfg.train;
    tc.seed = mix_seed(cfg.train.seed, fi);
    TrainResult tr = train(train_set, val_set, tc);
    report.folds.push_back({pair, tr.log.best_epoch, tr.log.best_val, tr.log.max_lr, static_cast<int>(tr.log.epochs.size())});
    if (test_set.empty()) continue;
    tested.insert(pair.test);
    LstmEstimator lstm(std::make_shared<const LstmPhaseModel>(std::move(tr.model)));
    std::unique_ptr<KalmanEstimator> kalman;
    if (cfg.with_kalman) {
      std::vector<const Take*> fit_set = train_set;
      fit_set.insert(fit_set.end(), val_set.begin(), val_set.end());
      kalman = std::make_unique<KalmanEstimator>(std::make_shared<const KalmanPhaseModel>(fit_kalman(fit_set, cfg.kalman)));
    }
    for (const Take* t : test_set) {
      TakeRow row = evaluate_take(lstm, *t, score, cfg.controller, cfg.with_sessions);
      row.fold = static_cast<int>(fi);
      report.takes.push_back(row);
      if (kalman) {
        TakeRow krow = evaluate_take(*kalman, *t, score, cfg.controller, cfg.with_sessions);
        krow.fold = static_cast<int>(fi);
        report.takes.push_back(krow);
      }
    }
  }
  report.full_coverage = tested == subjects;
  report.subjects = aggregate_subjects(report.takes);
  nlohmann::json unsigned_report = report.to_json();
  unsigned_report.erase("hash");
  report.hash = fnv1a_hex(unsigned_report.dump());
  return report;
}

}  // namespace ictus
