#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "ictus/error.hpp"

namespace {

void add_common(CLI::App* cmd, ictus::cli::Common& c, bool out_required) {
  cmd->add_option("-c,--config", c.config, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Override the seed");
  auto* out = cmd->add_option("-o,--out", c.out, "Output directory or file");
  if (out_required) out->required();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ictus::cli;
  CLI::App app{"ictus: conductor phase tracking and tempo control"};
  app.require_subcommand(1);

  GenCorpusArgs gen;
  auto* c_gen = app.add_subcommand("gen-corpus", "Generate a synthetic conducting corpus");
  add_common(c_gen, gen.common, true);
  c_gen->add_option("--score", gen.score, "Score JSON (default: built-in demo score)")->check(CLI::ExistingFile);
  c_gen->add_option("--subjects", gen.subjects, "Number of subjects (1-12)")->check(CLI::Range(1, 12));
  c_gen->add_option("--rate", gen.rate_hz, "Frame rate in Hz");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train an LSTM phase model (or fit a Kalman model)");
  add_common(c_train, tr.common, true);
  c_train->add_option("--corpus", tr.corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  c_train->add_option("--validation", tr.validation, "Validation subject")->required();
  c_train->add_option("--exclude", tr.exclude, "Subjects withheld from training");
  c_train->add_option("--epochs", tr.max_epochs, "Maximum epochs");
  c_train->add_option("--beta", tr.beta, "Monotonicity weight");
  c_train->add_flag("--kalman", tr.kalman, "Fit the Kalman baseline instead");

  EvalLosoArgs ev;
  auto* c_eval = app.add_subcommand("eval-loso", "Leave-one-subject-out evaluation");
  add_common(c_eval, ev.common, true);
  c_eval->add_option("--corpus", ev.corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  c_eval->add_option("--subjects", ev.subjects, "Subjects to include");
  c_eval->add_option("--validations", ev.validations, "Validation subjects per test subject")->check(CLI::Range(1, 11));
  c_eval->add_option("--epochs", ev.max_epochs, "Maximum epochs");
  c_eval->add_flag("--no-sessions", ev.no_sessions, "Skip controller sessions");
  c_eval->add_flag("--no-kalman", ev.no_kalman, "Skip the Kalman baseline");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Run controller sessions on takes");
  add_common(c_sim, sim.common, true);
  c_sim->add_option("takes", sim.takes, "Take files or directories")->required();
  c_sim->add_option("--estimator", sim.estimator, "oracle, lstm or kalman")
      ->check(CLI::IsMember({"oracle", "lstm", "kalman"}));
  c_sim->add_option("--checkpoint", sim.checkpoint, "Model parameter file")->check(CLI::ExistingFile);
  c_sim->add_option("--strategy", sim.strategy, "raw, median or average")
      ->check(CLI::IsMember({"raw", "median", "average"}));
  c_sim->add_flag("--clamp", sim.clamp, "Clamp speed commands");

  MetricsArgs met;
  auto* c_met = app.add_subcommand("metrics", "Per-frame phase and acceleration table for one take");
  add_common(c_met, met.common, true);
  c_met->add_option("take", met.take, "Take file")->required()->check(CLI::ExistingFile);
  c_met->add_option("--estimator", met.estimator, "oracle, lstm or kalman")
      ->check(CLI::IsMember({"oracle", "lstm", "kalman"}));
  c_met->add_option("--checkpoint", met.checkpoint, "Model parameter file")->check(CLI::ExistingFile);

  ServeArgs srv;
  auto* c_srv = app.add_subcommand("serve", "Run the live session server");
  add_common(c_srv, srv.common, false);
  c_srv->add_option("--bind", srv.bind, "Bind address");
  c_srv->add_option("--port", srv.port, "TCP port (0: any free port)");
  c_srv->add_option("--estimator", srv.estimator, "lstm or kalman")->check(CLI::IsMember({"lstm", "kalman"}));
  c_srv->add_option("--checkpoint", srv.checkpoint, "Model parameter file")->check(CLI::ExistingFile);
  c_srv->add_option("--score", srv.score, "Score JSON")->check(CLI::ExistingFile);
  c_srv->add_option("--record-dir", srv.record_dir, "Directory for recorded session logs");
  c_srv->add_option("--replay", srv.replay, "Replay a take headless, write its log to --out, and exit")
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_gen->parsed()) return gen_corpus(gen);
    if (c_train->parsed()) return train(tr);
    if (c_eval->parsed()) return eval_loso(ev);
    if (c_sim->parsed()) return simulate(sim);
    if (c_met->parsed()) return metrics(met);
    if (c_srv->parsed()) return serve(srv);
  } catch (const ictus::Error& e) {
    std::cerr << "error [" << ictus::to_string(e.code()) << "]: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
