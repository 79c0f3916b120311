#include "ictus/score.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ictus/error.hpp"

namespace ictus {

Score::Score(std::vector<double> bar_durations, std::set<int> fermata_bars, std::string label)
    : durations_(std::move(bar_durations)), fermatas_(std::move(fermata_bars)), label_(std::move(label)) {
  if (durations_.empty()) throw Error(Errc::config, "score needs at least one bar");
  for (double d : durations_) {
    if (!(d > 0.0) || !std::isfinite(d)) throw Error(Errc::config, "bar durations must be positive and finite");
  }
  for (int b : fermatas_) {
    if (b < 0 || b >= bar_count()) throw Error(Errc::config, "fermata bar " + std::to_string(b) + " out of range");
  }
  starts_.assign(1, 0.0);
  starts_.reserve(durations_.size() + 1);
  for (double d : durations_) starts_.push_back(starts_.back() + d);
}

Score Score::demo() {
  std::vector<double> durations(122, 0.7);
  durations[0] = 1.4;
  durations[2] = 2.4;
  durations[4] = 2.8;
  durations[20] = 2.6;
  durations[22] = 3.0;
  return Score(std::move(durations), {2, 4, 20, 22}, "demo-122");
}

Score Score::truncated(int bars) const {
  if (bars < 1 || bars > bar_count()) throw Error(Errc::config, "truncation length out of range");
  std::set<int> kept;
  for (int b : fermatas_) {
    if (b < bars) kept.insert(b);
  }
  return Score(std::vector<double>(durations_.begin(), durations_.begin() + bars), std::move(kept),
               label_ + ":first" + std::to_string(bars));
}

int Score::bar_at(double position) const {
  auto it = std::upper_bound(starts_.begin(), starts_.end(), position);
  const auto idx = static_cast<int>(it - starts_.begin()) - 1;
  return std::clamp(idx, 0, bar_count() - 1);
}

void to_json(nlohmann::json& j, const Score& score) {
  j = nlohmann::json{{"bar_count", score.bar_count()},
                     {"bar_durations", score.bar_durations()},
                     {"fermata_bars", std::vector<int>(score.fermata_bars().begin(), score.fermata_bars().end())},
                     {"label", score.label()}};
}

void from_json(const nlohmann::json& j, Score& score) {
  try {
    const int count = j.at("bar_count").get<int>();
    auto durations = j.at("bar_durations").get<std::vector<double>>();
    auto fermatas = j.at("fermata_bars").get<std::vector<int>>();
    if (static_cast<int>(durations.size()) != count) {
      throw Error(Errc::config, "bar_durations has " + std::to_string(durations.size()) + " entries, bar_count is " +
                                    std::to_string(count));
    }
    score = Score(std::move(durations), std::set<int>(fermatas.begin(), fermatas.end()), j.value("label", ""));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::format, std::string("malformed score: ") + e.what());
  }
}

Score load_score(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open score file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::format, "score file " + path.string() + ": " + e.what());
  }
  return j.get<Score>();
}

void save_score(const Score& score, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write score file " + path.string());
  out << nlohmann::json(score).dump(2) << '\n';
}

}  // namespace ictus
