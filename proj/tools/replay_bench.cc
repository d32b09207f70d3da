// replay-bench: command-line front end of the experiment harness.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "replay/equilibrium.h"
#include "replay/errors.h"
#include "replay/harness/config.h"
#include "replay/harness/experiment.h"
#include "replay/harness/models.h"
#include "replay/harness/report.h"
#include "replay/neural/checkpoint.h"
#include "replay/neural/train.h"
#include "replay/synth.h"

namespace {

using namespace replay;
using namespace replay::harness;
namespace fs = std::filesystem;

constexpr int kExitCellsFailed = 1;
constexpr int kExitUsage = 2;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> jobs;
};

ExperimentConfig ResolveConfig(const Options& o) {
  ExperimentConfig c =
      o.config_path.empty() ? ExperimentConfig{} : LoadConfig(o.config_path);
  if (o.seed) c.seed = *o.seed;
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.jobs) c.jobs = *o.jobs;
  c.Validate();
  return c;
}

void PrintRows(const std::vector<MetricRow>& rows) {
  std::printf("%-18s %-8s %8s %9s %9s %9s\n", "model", "game", "steps",
              "loss", "acc%", "value%");
  for (const MetricRow& r : rows) {
    std::printf("%-18s %-8s %8ld %9.4f %9.2f %9.2f\n", r.model.c_str(),
                r.game.c_str(), r.steps, r.loss, r.accuracy, r.econ_value);
  }
}

void PrintErrors(const std::vector<CellError>& errors) {
  for (const CellError& e : errors) {
    std::fprintf(stderr, "cell failed: %s %s: %s\n", e.model.c_str(),
                 e.split.c_str(), e.message.c_str());
  }
}

// Prints every fixed point as JSON and also writes it to solve.json.
int Solve(const ExperimentConfig& c) {
  const Corpus corpus = Corpus::Load(c);
  nlohmann::json out = nlohmann::json::array();
  int failures = 0;
  for (const Game2x2& game : corpus.games) {
    for (const std::string& name : c.concepts) {
      EquilibriumParams params;
      params.lambda = c.lambda;
      params.sample_size = c.sample_size;
      nlohmann::json entry = {{"game", game.id}, {"concept", name}};
      const Concept kind = ParseConcept(name);
      if (kind == Concept::kQre) entry["lambda"] = c.lambda;
      if (kind == Concept::kPse || kind == Concept::kAse) {
        entry["sample_size"] = c.sample_size;
      }
      try {
        entry["profiles"] = nlohmann::json::array();
        for (const auto& p : SolveAll(game, kind, params)) {
          entry["profiles"].push_back({{"row_p0", p.row.p0()},
                                       {"col_p0", p.col.p0()},
                                       {"residual", p.residual}});
        }
      } catch (const Error& e) {
        ++failures;
        entry.erase("profiles");
        entry["error"] = e.what();
      }
      out.push_back(entry);
    }
  }
  const std::string text = out.dump(2) + "\n";
  std::fputs(text.c_str(), stdout);
  fs::create_directories(c.out_dir);
  WriteTextFile(fs::path(c.out_dir) / "solve.json", text);
  return failures == 0 ? 0 : kExitCellsFailed;
}

int Simulate(const ExperimentConfig& c) {
  if (!c.games_path.empty()) {
    throw ConfigError("simulate needs a synth corpus, not files");
  }
  const Corpus corpus = Corpus::Load(c);
  fs::create_directories(c.out_dir);
  WriteGamesFile(fs::path(c.out_dir) / "corpus.game", corpus.games);
  WriteSessionsFile(fs::path(c.out_dir) / "corpus.sessions", corpus.sessions);
  nlohmann::json m = {{"command", "simulate"},
                      {"config", c.Echo()},
                      {"seeds", {{"root", c.seed},
                                 {"corpus", DeriveSeed(c.seed, "corpus")}}},
                      {"games", corpus.games.size()},
                      {"sessions", corpus.sessions.size()}};
  WriteTextFile(fs::path(c.out_dir) / "simulate.json", m.dump(2) + "\n");
  std::printf("wrote %zu games, %zu sessions to %s\n", corpus.games.size(),
              corpus.sessions.size(), c.out_dir.c_str());
  return 0;
}

int Train(const ExperimentConfig& c) {
  const Corpus corpus = Corpus::Load(c);
  std::string model = "mlp";
  for (const auto& m : c.roster) {
    if (IsNeuralModel(m)) {
      model = m;
      break;
    }
  }
  const neural::NetworkSpec spec = model == "mlp"
                                       ? c.MlpSpec(c.history, c.encoding)
                                       : c.CnnSpec(c.history, c.encoding);
  // With a splits key, train on the training side of the first split.
  std::vector<const Session*> sessions;
  for (const Session& s : corpus.sessions) {
    if (c.splits.empty() || s.game_id != c.splits.front()) {
      sessions.push_back(&s);
    }
  }
  std::vector<PlayerView> views;
  for (const Session* s : sessions) {
    const auto pv = PlayerViews(*s, corpus.catalog.at(s->game_id));
    views.insert(views.end(), pv.begin(), pv.end());
  }
  const neural::Dataset data = neural::EncodeDataset(views, spec.input, c.trim);
  neural::Network net(spec, DeriveSeed(c.seed, "train/init"));
  neural::TrainConfig tc = c.train;
  tc.seed = DeriveSeed(c.seed, "train/train");
  const neural::TrainResult result = neural::Train(net, data, tc);
  fs::create_directories(c.out_dir);
  neural::SaveCheckpoint(net, fs::path(c.out_dir) / "model.ckpt");
  std::ostringstream log;
  log << "epoch,train_loss,validation_loss,validation_accuracy\n";
  for (const auto& e : result.log) {
    char line[160];
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g\n", e.epoch,
                  e.train_loss, e.validation_loss, e.validation_accuracy);
    log << line;
    std::printf("epoch %3d  train %.4f  val %.4f  val-acc %.2f%%\n", e.epoch,
                e.train_loss, e.validation_loss, e.validation_accuracy);
  }
  WriteTextFile(fs::path(c.out_dir) / "train_log.csv", log.str());
  nlohmann::json m = {{"command", "train"},
                      {"config", c.Echo()},
                      {"model", model},
                      {"spec", spec.Describe()},
                      {"rows", data.size()},
                      {"best_epoch", result.best_epoch},
                      {"best_validation_loss", result.best_validation_loss}};
  WriteTextFile(fs::path(c.out_dir) / "train.json", m.dump(2) + "\n");
  return 0;
}

int Eval(const ExperimentConfig& c) {
  const Corpus corpus = Corpus::Load(c);
  const EvalReport r = c.protocol == Protocol::kCrossGame
                           ? RunCrossGame(c, corpus)
                           : RunGameSpecific(c, corpus);
  EmitReport(r, c, c.out_dir);
  PrintRows(r.aggregate);
  PrintErrors(r.errors);
  std::printf("leakage violations: %d of %d cells; oracle self-test "
              "failures: %d\n",
              r.audit.violations, r.audit.cells, r.oracle.failures);
  return r.ok() ? 0 : kExitCellsFailed;
}

int Sweep(const ExperimentConfig& c) {
  const Corpus corpus = Corpus::Load(c);
  const SweepReport s = SweepHistoryLength(c, corpus);
  EmitSweep(s, c, c.out_dir);
  std::printf("%4s %-7s %-5s %9s %9s %9s\n", "k", "enc", "model", "loss",
              "acc%", "value%");
  for (const SweepRow& r : s.rows) {
    std::printf("%4d %-7s %-5s %9.4f %9.2f %9.2f\n", r.history,
                neural::EncodingName(r.encoding), r.metrics.model.c_str(),
                r.metrics.loss, r.metrics.accuracy, r.metrics.econ_value);
  }
  for (const EvalReport& p : s.points) PrintErrors(p.errors);
  return s.ok() ? 0 : kExitCellsFailed;
}

// Recomputes the aggregates from games.csv and checks them against
// aggregate.csv.
int Report(const ExperimentConfig& c) {
  const fs::path dir = c.out_dir;
  std::ifstream games(dir / "games.csv"), agg(dir / "aggregate.csv");
  if (!games || !agg) {
    throw Error("no games.csv / aggregate.csv in " + dir.string());
  }
  const auto rows = ReadMetricCsv(games, (dir / "games.csv").string());
  const auto stored = ReadMetricCsv(agg, (dir / "aggregate.csv").string());
  const auto recomputed = Aggregate(rows);
  PrintRows(rows);
  std::printf("\n");
  PrintRows(recomputed);
  bool match = recomputed.size() == stored.size();
  for (std::size_t i = 0; match && i < stored.size(); ++i) {
    const MetricRow& a = stored[i];
    const MetricRow& b = recomputed[i];
    match = a.model == b.model && a.steps == b.steps &&
            std::abs(a.loss - b.loss) <= 1e-12 &&
            std::abs(a.accuracy - b.accuracy) <= 1e-12 &&
            std::abs(a.econ_value - b.econ_value) <= 1e-12;
  }
  std::printf("aggregates %s the per-game rows\n",
              match ? "match" : "DO NOT match");
  return match ? 0 : kExitCellsFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Replay bench: predicting actions in repeated 2x2 games"};
  app.require_subcommand(1);
  Options opts;
  auto add_common = [&opts](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "keyed text config file");
    sub->add_option("--seed", opts.seed, "root seed");
    sub->add_option("--out-dir", opts.out_dir, "output directory");
    sub->add_option("--jobs", opts.jobs, "cells evaluated in parallel")
        ->check(CLI::PositiveNumber);
  };
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const ExperimentConfig&);
  };
  const Command commands[] = {
      {"solve", "equilibrium profiles of every game", Solve},
      {"simulate", "write a synthetic corpus", Simulate},
      {"train", "train one network and save a checkpoint", Train},
      {"eval", "run the configured protocol and write reports", Eval},
      {"sweep", "history-length sweep", Sweep},
      {"report", "check and print an existing report", Report},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub);
    subs.emplace_back(sub, &c);
  }
  CLI11_PARSE(app, argc, argv);
  try {
    for (auto& [sub, cmd] : subs) {
      if (sub->parsed()) return cmd->run(ResolveConfig(opts));
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitCellsFailed;
  }
  return kExitUsage;
}
