#include "ictus/session.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>

#include "ictus/error.hpp"

namespace ictus {

bool SessionLog::operator==(const SessionLog& o) const {
  auto same_starts = [](const std::vector<BarStart>& a, const std::vector<BarStart>& b) {
    return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                      [](const BarStart& x, const BarStart& y) { return x.bar == y.bar && x.wall == y.wall && x.jump == y.jump; });
  };
  return rate_hz == o.rate_hz && steps == o.steps && beat_steps == o.beat_steps && beat_walls == o.beat_walls &&
         same_starts(bar_starts, o.bar_starts) && notes == o.notes && end_wall == o.end_wall &&
         end_playhead == o.end_playhead && first_played_bar == o.first_played_bar && finished == o.finished;
}

SessionEngine::SessionEngine(const Score& score, const ControllerConfig& cfg, SessionOptions options)
    : score_(&score), controller_(score, cfg), playback_(score), options_(options) {
  log_.rate_hz = cfg.rate_hz;
}

void SessionEngine::reset() {
  controller_.reset();
  playback_.reset();
  log_ = SessionLog{};
  log_.rate_hz = controller_.config().rate_hz;
  k_ = 0;
}

const StepRecord& SessionEngine::step(double phase) {
  const long k = k_++;
  const auto& ps = playback_.state();
  const BarCursor cursor{ps.bar, playback_.bar_fraction(), ps.halted};
  const ControllerStep cs = controller_.step(phase, k, cursor);

  StepRecord rec;
  rec.k = k;
  rec.wall = ps.wall;
  rec.phase = phase;
  rec.upbeat = cs.upbeat;
  rec.downbeat = cs.downbeat;
  if (cs.downbeat) {
    log_.beat_steps.push_back(k);
    log_.beat_walls.push_back(ps.wall);
  }
  if (cs.command) {
    double s = cs.command->s;
    if (options_.clamp) {
      const double c = std::clamp(s, options_.clamp_min, options_.clamp_max);
      if (c != s) {
        rec.clamped = true;
        log_.notes.push_back("step " + std::to_string(k) + ": speed " + std::to_string(s) + " clamped to " + std::to_string(c));
        s = c;
      }
    }
    rec.command = s;
    std::string note = playback_.command(s, cs.command->resume);
    if (!note.empty()) log_.notes.push_back("step " + std::to_string(k) + ": " + note);
  }
  const auto& after = playback_.state();
  const auto& cst = controller_.state();
  rec.fsm = cst.fsm;
  rec.s = cst.s;
  rec.stretch = after.stretch;
  rec.playhead = after.playhead;
  rec.bar = after.bar;
  rec.halted = after.halted;
  log_.steps.push_back(rec);
  playback_.advance(1.0 / controller_.config().rate_hz);
  return log_.steps.back();
}

const SessionLog& SessionEngine::log() const {
  log_.bar_starts = playback_.bar_starts();
  log_.end_wall = playback_.state().wall;
  log_.end_playhead = playback_.state().playhead;
  log_.first_played_bar = playback_.first_played_bar();
  log_.finished = playback_.state().finished;
  return log_;
}

SessionLog SessionEngine::take_log() {
  log();
  SessionLog out = std::move(log_);
  log_ = SessionLog{};
  log_.rate_hz = controller_.config().rate_hz;
  return out;
}

EndSummary end_summary(const SessionLog& log, const Score& score) {
  EndSummary out;
  if (log.first_played_bar < 0 || log.bar_starts.empty()) return out;
  out.original_duration = log.end_playhead - score.bar_start(log.first_played_bar);
  double end = log.end_wall;
  if (log.finished) {
    // The wall time the playhead reached the end of the score.
    for (auto it = log.steps.rbegin(); it != log.steps.rend(); ++it) {
      if (it->playhead < score.total_duration()) {
        end = it->wall + (score.total_duration() - it->playhead) * it->stretch;
        break;
      }
    }
  }
  out.conducted_duration = std::max(0.0, end - log.bar_starts.front().wall);
  if (out.original_duration > 0.0) {
    out.percent_difference = 100.0 * (out.conducted_duration / out.original_duration - 1.0);
    out.defined = true;
  }
  return out;
}

SessionLog run_session(std::span<const double> phases, const Score& score, const ControllerConfig& cfg,
                       SessionOptions options) {
  SessionEngine engine(score, cfg, options);
  for (double p : phases) engine.step(p);
  return engine.take_log();
}

SessionLog run_session(PhaseEstimator& estimator, std::span<const KinematicFrame> frames, const Score& score,
                       const ControllerConfig& cfg, SessionOptions options) {
  estimator.reset();
  SessionEngine engine(score, cfg, options);
  for (const auto& f : frames) engine.step(estimator.step(f));
  return engine.take_log();
}

void write_session_csv(const SessionLog& log, const Score& score, std::ostream& out) {
  out << std::setprecision(17);
  out << "k,wall,phase,fsm,s,stretch,playhead,bar,halted,upbeat,downbeat,command,clamped\n";
  for (const auto& r : log.steps) {
    out << r.k << ',' << r.wall << ',' << r.phase << ',' << to_string(r.fsm) << ',' << r.s << ',' << r.stretch << ','
        << r.playhead << ',' << r.bar << ',' << r.halted << ',' << r.upbeat << ',' << r.downbeat << ',';
    if (r.command) out << *r.command;
    out << ',' << r.clamped << '\n';
  }
  const EndSummary sum = end_summary(log, score);
  out << "# rate_hz=" << log.rate_hz << "\n";
  out << "# beats=" << log.beat_steps.size() << " bar_starts=" << log.bar_starts.size() << "\n";
  out << "# original_duration=" << sum.original_duration << "\n";
  out << "# conducted_duration=" << sum.conducted_duration << "\n";
  out << "# percent_difference=" << sum.percent_difference << " defined=" << sum.defined << "\n";
  for (const auto& n : log.notes) out << "# note: " << n << "\n";
}

void write_session_csv(const SessionLog& log, const Score& score, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  write_session_csv(log, score, out);
}

}  // namespace ictus
