#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ictus {

/// Position within a take: bar index and phase in [0, 2*pi).
struct PhaseSample {
  int bar = 0;
  double phase = 0.0;

  bool operator==(const PhaseSample&) const = default;
};

/// Sampling rate of a frame stream.
struct Timebase {
  int hz = 20;

  double step() const { return 1.0 / hz; }
  bool operator==(const Timebase&) const = default;
};

/// Bar layout of the recording. Durations are seconds on the original
/// recording timeline; bar starts are exact cumulative sums.
class Score {
 public:
  Score() = default;
  /// Throws Errc::config when an invariant is violated.
  Score(std::vector<double> bar_durations, std::set<int> fermata_bars, std::string label = {});

  /// 122 one-beat bars with fermatas in {2, 4, 20, 22}.
  static Score demo();
  /// The first `bars` bars of this score.
  Score truncated(int bars) const;

  int bar_count() const { return static_cast<int>(durations_.size()); }
  const std::vector<double>& bar_durations() const { return durations_; }
  double duration(int bar) const { return durations_.at(static_cast<std::size_t>(bar)); }
  const std::set<int>& fermata_bars() const { return fermatas_; }
  const std::string& label() const { return label_; }

  bool is_fermata(int bar) const { return fermatas_.contains(bar); }
  /// Bars that contain a waiting time followed by a silent upbeat: the
  /// fermata bars and the opening bar 0.
  bool has_wait(int bar) const { return bar == 0 || is_fermata(bar); }

  /// Start of `bar` on the original timeline; bar_start(bar_count()) is the end.
  double bar_start(int bar) const { return starts_.at(static_cast<std::size_t>(bar)); }
  double total_duration() const { return starts_.back(); }
  /// Largest fermata bar index, or -1 without fermatas.
  int last_fermata() const { return fermatas_.empty() ? -1 : *fermatas_.rbegin(); }
  /// Bar containing `position`, clamped to [0, bar_count() - 1].
  int bar_at(double position) const;

  bool operator==(const Score& other) const {
    return durations_ == other.durations_ && fermatas_ == other.fermatas_ && label_ == other.label_;
  }

 private:
  std::vector<double> durations_;
  std::vector<double> starts_{0.0};
  std::set<int> fermatas_;
  std::string label_;
};

void to_json(nlohmann::json& j, const Score& score);
void from_json(const nlohmann::json& j, Score& score);

/// Score files are JSON documents with bar_count, bar_durations, fermata_bars
/// and an optional label. Invariants are checked on load.
Score load_score(const std::filesystem::path& path);
void save_score(const Score& score, const std::filesystem::path& path);

}  // namespace ictus
