#ifndef REPLAY_HARNESS_EXPERIMENT_H_
#define REPLAY_HARNESS_EXPERIMENT_H_

#include <string>
#include <vector>

#include "json.hpp"
#include "replay/harness/config.h"
#include "replay/harness/models.h"

namespace replay::harness {

// One CSV row. `game` is "ALL" for aggregates.
struct MetricRow {
  std::string model;
  std::string game;
  long steps = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  double econ_value = 0.0;
};

struct CellError {
  std::string model;
  std::string split;
  std::string message;
};

struct LeakageAudit {
  int cells = 0;
  int violations = 0;
  std::vector<std::string> details;
};

// Every split's perfect predictor must earn exactly the hindsight optimum.
struct OracleSelfTest {
  int cells = 0;
  int failures = 0;
  double min_value = 100.0;
  double max_value = 100.0;
};

struct EvalReport {
  Protocol protocol = Protocol::kCrossGame;
  int history = 0;
  neural::Encoding encoding = neural::Encoding::kActionOnly;
  std::vector<MetricRow> rows;       // per (model, game), roster order
  std::vector<MetricRow> aggregate;  // per model, step-weighted
  std::vector<CellError> errors;
  nlohmann::json cells = nlohmann::json::array();
  LeakageAudit audit;
  OracleSelfTest oracle;

  bool ok() const {
    return errors.empty() && audit.violations == 0 && oracle.failures == 0;
  }
};

// Step-weighted mean of the rows of each model, in first-seen order.
std::vector<MetricRow> Aggregate(const std::vector<MetricRow>& rows);

struct RunSpec {
  Protocol protocol = Protocol::kCrossGame;
  std::vector<std::string> roster;
  int history = 20;
  neural::Encoding encoding = neural::Encoding::kActionOnly;
  std::string label = "eval";  // seeds differ between labels
};

// Leave-one-game-out or leave-one-session-out evaluation of `spec.roster`.
// A failing cell is recorded and the others still run. cnn_gs always uses
// leave-one-session-out within the test game.
EvalReport RunProtocol(Context& ctx, const RunSpec& spec);

EvalReport RunCrossGame(const ExperimentConfig& config, const Corpus& corpus);
EvalReport RunGameSpecific(const ExperimentConfig& config,
                           const Corpus& corpus);

struct SweepRow {
  int history = 0;
  neural::Encoding encoding = neural::Encoding::kActionOnly;
  MetricRow metrics;  // aggregate of the sweep model
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::vector<EvalReport> points;
  bool ok() const;
};

// Cross-game runs of the sweep model for every (k, encoding).
SweepReport SweepHistoryLength(const ExperimentConfig& config,
                               const Corpus& corpus);

}  // namespace replay::harness

#endif  // REPLAY_HARNESS_EXPERIMENT_H_
