#include "commands.hpp"

#include <cmath>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "ictus/config.hpp"
#include "ictus/error.hpp"
#include "ictus/kalman.hpp"
#include "ictus/loso.hpp"
#include "ictus/lstm.hpp"
#include "ictus/metrics.hpp"
#include "ictus/param_file.hpp"
#include "ictus/service.hpp"
#include "ictus/session.hpp"
#include "ictus/synth.hpp"
#include "ictus/take_io.hpp"
#include "ictus/train.hpp"

namespace fs = std::filesystem;

namespace ictus::cli {

namespace {

AppConfig load(const Common& c) {
  AppConfig cfg = c.config.empty() ? AppConfig{} : load_config(c.config);
  if (c.seed) {
    cfg.corpus.seed = *c.seed;
    cfg.train.seed = *c.seed;
  }
  return cfg;
}

Score corpus_score(const fs::path& dir) {
  const fs::path p = dir / "score.json";
  return fs::exists(p) ? load_score(p) : Score::demo();
}

std::unique_ptr<PhaseEstimator> load_estimator(const std::string& kind, const std::string& checkpoint) {
  if (checkpoint.empty()) throw Error(Errc::config, "--checkpoint is required for the " + kind + " estimator");
  if (kind == "lstm") return std::make_unique<LstmEstimator>(std::make_shared<LstmPhaseModel>(load_model(checkpoint)));
  if (kind == "kalman") {
    return std::make_unique<KalmanEstimator>(std::make_shared<KalmanPhaseModel>(load_kalman(checkpoint)));
  }
  throw Error(Errc::config, "unknown estimator " + kind);
}

std::vector<double> label_phases(const Take& take) {
  std::vector<double> out;
  out.reserve(take.labels.size());
  for (const auto& l : take.labels) out.push_back(l.phase);
  return out;
}

std::vector<double> estimate(PhaseEstimator& est, const Take& take) {
  est.reset();
  std::vector<double> out;
  out.reserve(take.frames.size());
  for (const auto& f : take.frames) out.push_back(est.step(f));
  return out;
}

std::string take_stem(const Take& take, std::size_t index) {
  std::ostringstream s;
  s << take.subject_id << '_' << std::setw(3) << std::setfill('0') << index;
  return s.str();
}

// NaN prints as an empty cell.
std::string cell(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

template <typename F>
double or_nan(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() != Errc::undefined_metric) throw;
    return std::numeric_limits<double>::quiet_NaN();
  }
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  return out;
}

void write_text(const fs::path& path, const std::string& text) { open_out(path) << text; }

}  // namespace

int gen_corpus(const GenCorpusArgs& a) {
  const AppConfig cfg = load(a.common);
  const Score score = a.score.empty() ? Score::demo() : load_score(a.score);
  CorpusOptions opts;
  opts.seed = cfg.corpus.seed;
  opts.rate = Timebase{a.rate_hz > 0 ? a.rate_hz : cfg.corpus.rate_hz};
  opts.mirror_left_handed = cfg.corpus.mirror_left_handed;

  std::vector<CorpusEntry> plan;
  for (const auto& e : recording_plan()) {
    if (e.subject <= a.subjects) plan.push_back(e);
  }
  const auto takes = generate_corpus(score, plan, opts);

  const fs::path dir(a.common.out);
  fs::create_directories(dir);
  save_score(score, dir / "score.json");
  std::ofstream manifest = open_out(dir / "manifest.csv");
  manifest << "file,subject,tempo_factor,bars,frames,rate_hz,mirrored,end_time\n";
  std::map<std::string, std::size_t> per_subject;
  for (std::size_t i = 0; i < takes.size(); ++i) {
    const Take& t = takes[i];
    const std::string file = take_stem(t, per_subject[t.subject_id]++) + ".take";
    write_take(t, dir / file);
    manifest << file << ',' << t.subject_id << ',' << t.tempo_factor << ',' << plan[i].bars << ','
             << t.frames.size() << ',' << t.rate.hz << ',' << (t.mirrored ? 1 : 0) << ',' << cell(t.end_time) << '\n';
  }
  std::cout << "wrote " << takes.size() << " takes to " << dir.string() << '\n';
  return 0;
}

int train(const TrainArgs& a) {
  AppConfig cfg = load(a.common);
  if (a.max_epochs > 0) cfg.train.max_epochs = a.max_epochs;
  if (a.beta >= 0.0) cfg.train.beta = a.beta;
  cfg.train.validate();

  const auto corpus = read_takes(a.corpus);
  const std::set<std::string> excluded(a.exclude.begin(), a.exclude.end());
  std::vector<const Take*> train_set;
  std::vector<const Take*> val_set;
  for (const auto& t : corpus) {
    if (t.subject_id == a.validation) {
      val_set.push_back(&t);
    } else if (!excluded.contains(t.subject_id)) {
      train_set.push_back(&t);
    }
  }
  if (val_set.empty()) throw Error(Errc::config, "no takes for validation subject " + a.validation);
  const fs::path out(a.common.out);

  if (a.kalman) {
    std::vector<const Take*> all = train_set;
    all.insert(all.end(), val_set.begin(), val_set.end());
    save_kalman(fit_kalman(all), out);
    std::cout << "kalman model fitted on " << all.size() << " takes -> " << out.string() << '\n';
    return 0;
  }

  const TrainResult result = train(train_set, val_set, cfg.train, [](const EpochRecord& r) {
    std::cout << "epoch " << r.epoch << " lr " << r.lr << " beta " << r.beta_effective << " train " << r.train_loss
              << " val " << r.val_loss << (r.improved ? " *" : "") << '\n';
  });
  save_model(result.model, out);
  fs::path log_path = out;
  log_path.replace_extension(".log.csv");
  write_train_log(result.log, log_path);
  std::cout << "best epoch " << result.log.best_epoch << " val " << result.log.best_val << " max_lr "
            << result.log.max_lr << (result.log.early_stopped ? " (early stop)" : "") << '\n'
            << "model -> " << out.string() << ", log -> " << log_path.string() << '\n';
  return 0;
}

int eval_loso(const EvalLosoArgs& a) {
  AppConfig cfg = load(a.common);
  if (a.max_epochs > 0) cfg.train.max_epochs = a.max_epochs;
  const Score score = corpus_score(a.corpus);
  auto corpus = read_takes(a.corpus);
  std::set<std::string> subjects;
  if (!a.subjects.empty()) {
    const std::set<std::string> keep(a.subjects.begin(), a.subjects.end());
    std::erase_if(corpus, [&](const Take& t) { return !keep.contains(t.subject_id); });
  }
  for (const auto& t : corpus) subjects.insert(t.subject_id);
  const auto pairs = loso_pairs({subjects.begin(), subjects.end()}, a.validations);

  LosoConfig lc;
  lc.train = cfg.train;
  lc.controller = cfg.controller;
  lc.with_kalman = !a.no_kalman;
  lc.with_sessions = !a.no_sessions;
  const EvalReport report = run_loso(corpus, score, pairs, lc, [&](int fold, const LosoPair& p) {
    std::cout << "fold " << fold + 1 << '/' << pairs.size() << ": test " << p.test << ", validation " << p.validation
              << std::endl;
  });

  const fs::path dir(a.common.out);
  fs::create_directories(dir);
  write_text(dir / "report.json", report.to_json().dump(2) + "\n");
  {
    std::ofstream out = open_out(dir / "takes.csv");
    out << "fold,subject,tempo_factor,estimator,mspe,mspe_wrapped,mspe_regular,mspe_fermata,upbeat_delay,"
           "beat_bar_mean,beat_bar_std,pct_of_bar,speed_std\n";
    for (const auto& r : report.takes) {
      out << r.fold << ',' << r.subject << ',' << r.tempo_factor << ',' << r.estimator << ',' << cell(r.mspe) << ','
          << cell(r.mspe_wrapped) << ',' << cell(r.mspe_regular) << ',' << cell(r.mspe_fermata) << ','
          << cell(r.upbeat_delay) << ',' << cell(r.beat_bar_mean) << ',' << cell(r.beat_bar_std) << ','
          << cell(r.pct_of_bar) << ',' << cell(r.speed_std) << '\n';
    }
  }
  std::ofstream subj = open_out(dir / "subjects.csv");
  subj << "subject,estimator,mspe_mean,mspe_std,mspe_wrapped_mean,mspe_wrapped_std,takes\n";
  std::cout << "\nsubject  estimator  MSPE              MSPE (wrapped)\n";
  for (const auto& s : report.subjects) {
    subj << s.subject << ',' << s.estimator << ',' << cell(s.mspe.mean) << ',' << cell(s.mspe.std) << ','
         << cell(s.mspe_wrapped.mean) << ',' << cell(s.mspe_wrapped.std) << ',' << s.mspe.n << '\n';
    std::cout << std::left << std::setw(9) << s.subject << std::setw(11) << s.estimator << std::fixed
              << std::setprecision(3) << s.mspe.mean << " +- " << std::setw(9) << s.mspe.std << s.mspe_wrapped.mean
              << " +- " << s.mspe_wrapped.std << '\n';
  }
  std::cout << "full coverage: " << (report.full_coverage ? "yes" : "no") << ", report hash " << report.hash << '\n';
  return 0;
}

int simulate(const SimulateArgs& a) {
  AppConfig cfg = load(a.common);
  if (!a.strategy.empty()) cfg.controller.strategy = parse_strategy(a.strategy);
  SessionOptions opts;
  opts.clamp = a.clamp;

  std::vector<std::pair<fs::path, Score>> files;
  for (const auto& p : a.takes) {
    if (fs::is_directory(p)) {
      const Score s = corpus_score(p);
      for (const auto& f : list_takes(p)) files.emplace_back(f, s);
    } else {
      files.emplace_back(p, fs::exists(fs::path(p).parent_path() / "score.json") ? corpus_score(fs::path(p).parent_path())
                                                                                : Score::demo());
    }
  }
  std::unique_ptr<PhaseEstimator> est;
  if (a.estimator != "oracle") est = load_estimator(a.estimator, a.checkpoint);

  const fs::path dir(a.common.out);
  fs::create_directories(dir);
  std::ofstream summary = open_out(dir / "summary.csv");
  summary << "take,subject,tempo_factor,beats,beat_bar_mean,beat_bar_std,pct_of_bar,speed_std,original_duration,"
             "conducted_duration,percent_difference\n";
  for (const auto& [path, full] : files) {
    const Take take = read_take(path);
    const Score piece = score_for_take(full, take);
    ControllerConfig cc = cfg.controller;
    cc.rate_hz = take.rate.hz;
    const auto phases = est ? estimate(*est, take) : label_phases(take);
    const SessionLog log = run_session(phases, piece, cc, opts);
    const std::string stem = path.stem().string();
    write_session_csv(log, piece, dir / (stem + ".session.csv"));
    const EndSummary es = end_summary(log, piece);
    const double after = cfg.stability_after_bar ? *cfg.stability_after_bar : piece.last_fermata();
    summary << stem << ',' << take.subject_id << ',' << take.tempo_factor << ',' << log.beat_steps.size() << ','
            << cell(or_nan([&] { return beat_bar_distance(log).mean; })) << ','
            << cell(or_nan([&] { return beat_bar_distance(log).std; })) << ','
            << cell(or_nan([&] { return pct_of_bar(log, piece); })) << ','
            << cell(or_nan([&] { return speed_stability(log, piece, static_cast<int>(after)); })) << ','
            << cell(es.original_duration) << ',' << cell(es.conducted_duration) << ','
            << cell(es.defined ? es.percent_difference : std::numeric_limits<double>::quiet_NaN()) << '\n';
  }
  std::cout << "simulated " << files.size() << " takes -> " << dir.string() << '\n';
  return 0;
}

int metrics(const MetricsArgs& a) {
  const AppConfig cfg = load(a.common);
  const Take take = read_take(a.take);
  const fs::path parent = fs::path(a.take).parent_path();
  const Score piece = score_for_take(fs::exists(parent / "score.json") ? corpus_score(parent) : Score::demo(), take);
  std::vector<double> est;
  if (a.estimator == "oracle") {
    est = label_phases(take);
  } else {
    est = estimate(*load_estimator(a.estimator, a.checkpoint), take);
  }
  const auto accel = arm_accel(take.frames, take.keypoints);

  std::ofstream out = open_out(a.common.out);
  out << "k,t,bar,phase_gt,phase_est,arm_accel\n";
  for (std::size_t i = 0; i < take.frames.size(); ++i) {
    out << i << ',' << cell(static_cast<double>(i) * take.rate.step()) << ',' << take.labels[i].bar << ','
        << cell(take.labels[i].phase) << ',' << cell(est[i]) << ',' << cell(accel[i]) << '\n';
  }

  ControllerConfig cc = cfg.controller;
  cc.rate_hz = take.rate.hz;
  const auto delays = upbeat_delays(take, piece, est, cc);
  std::cout << std::setprecision(4) << "frames          " << take.frames.size() << '\n'
            << "mspe            " << mspe(take.labels, est, false) << '\n'
            << "mspe_wrapped    " << mspe(take.labels, est, true) << '\n'
            << "mspe_regular    " << cell(or_nan([&] { return mspe(take.labels, est, regular_bar_mask(take.labels, piece), true); })) << '\n'
            << "mspe_fermata    " << cell(or_nan([&] { return mspe(take.labels, est, fermata_bar_mask(take.labels, piece), true); })) << '\n'
            << "upbeat_delays  ";
  for (int d : delays) std::cout << ' ' << d;
  std::cout << '\n';
  return 0;
}

namespace {
volatile std::sig_atomic_t g_stop = 0;
extern "C" void on_signal(int) { g_stop = 1; }
}  // namespace

int serve(const ServeArgs& a) {
  AppConfig cfg = load(a.common);
  auto& sc = cfg.service;
  if (!a.bind.empty()) sc.bind = a.bind;
  if (a.port >= 0) sc.port = a.port;
  if (!a.estimator.empty()) sc.estimator = a.estimator;
  if (!a.checkpoint.empty()) sc.checkpoint = a.checkpoint;
  if (!a.score.empty()) sc.score = a.score;
  if (!a.record_dir.empty()) sc.record_dir = a.record_dir;

  auto model = std::make_shared<ServiceModel>();
  model->score = sc.score.empty() ? Score::demo() : load_score(sc.score);
  model->controller = cfg.controller;
  model->options = sc.session;
  model->height_scale = sc.height_scale;
  model->record_dir = sc.record_dir;
  model->estimator = load_estimator(sc.estimator, sc.checkpoint);

  if (!a.replay.empty()) {
    std::vector<nlohmann::json> transcript;
    const SessionLog log = replay_file(*model, a.replay, &transcript);
    if (a.common.out.empty()) {
      write_session_csv(log, model->score, std::cout);
    } else {
      const fs::path out(a.common.out);
      write_session_csv(log, model->score, out);
      fs::path tpath = out;
      tpath.replace_extension(".transcript.jsonl");
      std::ofstream t = open_out(tpath);
      for (const auto& m : transcript) t << m.dump() << '\n';
    }
    return 0;
  }

  Server server(model, sc.bind, sc.port);
  const int port = server.start();
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "listening on " << sc.bind << ':' << port << " (" << sc.estimator << ", " << cfg.controller.rate_hz
            << " Hz, protocol v" << kProtocolVersion << ")" << std::endl;
  while (g_stop == 0) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return 0;
}

}  // namespace ictus::cli
