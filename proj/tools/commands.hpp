#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ictus::cli {

struct Common {
  std::string config;               // JSON config, optional
  std::optional<std::uint64_t> seed;
  std::string out;
};

struct GenCorpusArgs {
  Common common;
  std::string score;  // empty: demo score
  int subjects = 12;  // first n subjects of the recording plan
  int rate_hz = 0;    // 0: config value
};

struct TrainArgs {
  Common common;
  std::string corpus;
  std::string validation;
  std::vector<std::string> exclude;
  int max_epochs = 0;  // 0: config value
  double beta = -1.0;  // < 0: config value
  bool kalman = false;
};

struct EvalLosoArgs {
  Common common;
  std::string corpus;
  std::vector<std::string> subjects;  // empty: every subject in the corpus
  int validations = 2;
  int max_epochs = 0;
  bool no_sessions = false;
  bool no_kalman = false;
};

struct SimulateArgs {
  Common common;
  std::vector<std::string> takes;  // take files or directories
  std::string estimator = "oracle";
  std::string checkpoint;
  std::string strategy;  // empty: config value
  bool clamp = false;
};

struct MetricsArgs {
  Common common;
  std::string take;
  std::string estimator = "oracle";
  std::string checkpoint;
};

struct ServeArgs {
  Common common;
  std::string bind;
  int port = -1;
  std::string estimator;
  std::string checkpoint;
  std::string score;
  std::string record_dir;
  std::string replay;  // take file: run headless and exit
};

int gen_corpus(const GenCorpusArgs& a);
int train(const TrainArgs& a);
int eval_loso(const EvalLosoArgs& a);
int simulate(const SimulateArgs& a);
int metrics(const MetricsArgs& a);
int serve(const ServeArgs& a);

}  // namespace ictus::cli
