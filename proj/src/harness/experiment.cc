#include "replay/harness/experiment.h"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "replay/errors.h"
#include "replay/metrics.h"

namespace replay::harness {
namespace {

using nlohmann::json;

struct Cell {
  std::string model;
  SplitSpec split;
};

struct CellOutcome {
  bool ok = false;
  std::string error;
  long steps = 0;
  double loss_sum = 0.0;
  long correct = 0;
  EconValue econ;
  json info;
  bool leak = false;
  std::string leak_detail;
  double oracle_value = 100.0;
  bool oracle_ok = true;
};

std::string SplitLabel(const SplitSpec& s) {
  return s.held_out_session ? s.test_game + "/" + *s.held_out_session
                            : s.test_game;
}

void Audit(const Context& ctx, std::span<const int> train,
           std::span<const int> test, const SplitSpec& split,
           CellOutcome& out) {
  std::set<std::string> train_keys, test_keys;
  std::set<std::string> train_games;
  for (int v : train) {
    train_keys.insert(ctx.views()[v].SessionKey());
    train_games.insert(ctx.views()[v].view.game->id);
  }
  for (int v : test) test_keys.insert(ctx.views()[v].SessionKey());
  std::vector<std::string> shared;
  std::set_intersection(train_keys.begin(), train_keys.end(),
                        test_keys.begin(), test_keys.end(),
                        std::back_inserter(shared));
  if (!shared.empty()) {
    out.leak = true;
    out.leak_detail = SplitLabel(split) + ": shared session " + shared[0];
  }
  if (split.mode == SplitMode::kCrossGame &&
      train_games.count(split.test_game)) {
    out.leak = true;
    out.leak_detail = SplitLabel(split) + ": test game in training";
  }
}

void OracleCheck(const Context& ctx, std::span<const int> test,
                 CellOutcome& out) {
  EconValue total;
  for (int v : test) {
    const IndexedView& iv = ctx.views()[v];
    const IndexedView& opp = ctx.views()[iv.opponent];
    const auto actual = opp.view.own().subspan(iv.first, iv.end - iv.first);
    std::vector<MixedStrategy> perfect;
    for (Action a : actual) perfect.push_back(MixedStrategy::Pure(a));
    total += EconomicValue(*iv.view.game, iv.view.role, perfect, actual);
  }
  out.oracle_value = total.Percent();
  out.oracle_ok = std::abs(out.oracle_value - 100.0) < 1e-9;
}

CellOutcome RunCell(Context& ctx, const RunSpec& spec, const Cell& cell) {
  CellOutcome out;
  const Corpus& corpus = ctx.corpus();
  const auto train_sessions = TrainSessions(corpus.sessions, cell.split);
  const auto test_sessions = TestSessions(corpus.sessions, cell.split);
  const std::vector<int> train = ctx.ViewsOf(train_sessions);
  const std::vector<int> test = ctx.ViewsOf(test_sessions);
  Audit(ctx, train, test, cell.split, out);
  try {
    OracleCheck(ctx, test, out);
    if (test.empty()) throw ContractError("split has no test sessions");
    ModelRequest req;
    req.name = cell.model;
    req.history = spec.history;
    req.encoding = spec.encoding;
    req.seed = DeriveSeed(ctx.config().seed,
                          spec.label + "/" + cell.model + "/" +
                              SplitLabel(cell.split) + "/k" +
                              std::to_string(spec.history) + "/" +
                              neural::EncodingName(spec.encoding));
    const auto model = FitModel(ctx, req, train, test);
    const auto predictions = model->Predict(test);
    std::map<int, std::size_t> slot;
    for (std::size_t i = 0; i < test.size(); ++i) slot[test[i]] = i;
    std::vector<double> terms;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const IndexedView& iv = ctx.views()[test[i]];
      const auto& p = predictions[i];
      const auto own = iv.view.own().subspan(iv.first, iv.end - iv.first);
      std::vector<MixedStrategy> yhat;
      for (std::size_t t = 0; t < own.size(); ++t) {
        if (!std::isfinite(p[t])) {
          throw NumericalError("non-finite prediction", p[t]);
        }
        yhat.emplace_back(p[t]);
        terms.push_back(LogLoss(own[t], yhat.back()));
        out.correct += Harden(yhat.back()) == own[t] ? 1 : 0;
      }
      out.steps += static_cast<long>(own.size());
      // Econ value: this player best-responds to the forecast of the
      // opponent's action.
      const IndexedView& opp = ctx.views()[iv.opponent];
      const auto& q = predictions.at(slot.at(iv.opponent));
      std::vector<MixedStrategy> opp_hat;
      for (double x : q) opp_hat.emplace_back(x);
      out.econ += EconomicValue(
          *iv.view.game, iv.view.role, opp_hat,
          opp.view.own().subspan(iv.first, iv.end - iv.first));
    }
    out.loss_sum = OrderedSum(terms);
    out.info = model->info;
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  out.info["train_sessions"] = train_sessions.size();
  out.info["test_sessions"] = test_sessions.size();
  return out;
}

}  // namespace

std::vector<MetricRow> Aggregate(const std::vector<MetricRow>& rows) {
  std::vector<MetricRow> out;
  std::map<std::string, std::size_t> index;
  for (const MetricRow& r : rows) {
    if (!index.count(r.model)) {
      index[r.model] = out.size();
      out.push_back({r.model, "ALL", 0, 0.0, 0.0, 0.0});
    }
    MetricRow& a = out[index[r.model]];
    a.steps += r.steps;
    a.loss += r.loss * r.steps;
    a.accuracy += r.accuracy * r.steps;
    a.econ_value += r.econ_value * r.steps;
  }
  for (MetricRow& a : out) {
    a.loss /= a.steps;
    a.accuracy /= a.steps;
    a.econ_value /= a.steps;
  }
  return out;
}

EvalReport RunProtocol(Context& ctx, const RunSpec& spec) {
  const ExperimentConfig& cfg = ctx.config();
  const Corpus& corpus = ctx.corpus();
  if (spec.roster.empty()) throw ConfigError("roster is empty");
  const SplitMode mode = spec.protocol == Protocol::kCrossGame
                             ? SplitMode::kCrossGame
                             : SplitMode::kGameSpecific;
  auto wanted = [&cfg](const SplitSpec& s) {
    return cfg.splits.empty() ||
           std::find(cfg.splits.begin(), cfg.splits.end(), s.test_game) !=
               cfg.splits.end();
  };
  std::vector<SplitSpec> splits;
  for (auto& s : MakeSplits(corpus.sessions, mode)) {
    if (wanted(s)) splits.push_back(std::move(s));
  }
  std::vector<SplitSpec> gs_splits;
  if (std::find(spec.roster.begin(), spec.roster.end(), "cnn_gs") !=
      spec.roster.end()) {
    for (auto& s : MakeSplits(corpus.sessions, SplitMode::kGameSpecific)) {
      if (wanted(s)) gs_splits.push_back(std::move(s));
    }
  }
  if (splits.empty()) throw ConfigError("no split matches the splits key");

  std::vector<Cell> cells;
  for (const std::string& m : spec.roster) {
    for (const SplitSpec& s : m == "cnn_gs" ? gs_splits : splits) {
      cells.push_back({m, s});
    }
  }
  ctx.Prepare(spec.roster);

  std::vector<CellOutcome> outcomes(cells.size());
  const int n = static_cast<int>(cells.size());
  if (cfg.jobs > 1) {
    // Cells in parallel, kernels inside each cell serial.
    const int saved_levels = omp_get_max_active_levels();
    omp_set_max_active_levels(1);
#pragma omp parallel for schedule(dynamic) num_threads(cfg.jobs)
    for (int i = 0; i < n; ++i) outcomes[i] = RunCell(ctx, spec, cells[i]);
    omp_set_max_active_levels(saved_levels);
  } else {
    for (int i = 0; i < n; ++i) outcomes[i] = RunCell(ctx, spec, cells[i]);
  }

  EvalReport report;
  report.protocol = spec.protocol;
  report.history = spec.history;
  report.encoding = spec.encoding;
  struct Acc {
    long steps = 0;
    double loss = 0.0;
    long correct = 0;
    EconValue econ;
    bool failed = false;
  };
  std::map<std::pair<std::string, std::string>, Acc> acc;
  for (int i = 0; i < n; ++i) {
    const Cell& cell = cells[i];
    const CellOutcome& o = outcomes[i];
    ++report.audit.cells;
    if (o.leak) {
      ++report.audit.violations;
      report.audit.details.push_back(cell.model + " " + o.leak_detail);
    }
    ++report.oracle.cells;
    report.oracle.min_value = std::min(report.oracle.min_value, o.oracle_value);
    report.oracle.max_value = std::max(report.oracle.max_value, o.oracle_value);
    if (!o.oracle_ok) ++report.oracle.failures;
    json entry = {{"model", cell.model},
                  {"split", SplitLabel(cell.split)},
                  {"ok", o.ok},
                  {"fitted", o.info}};
    Acc& a = acc[{cell.model, cell.split.test_game}];
    if (!o.ok) {
      entry["error"] = o.error;
      report.errors.push_back({cell.model, SplitLabel(cell.split), o.error});
      a.failed = true;
    } else {
      a.steps += o.steps;
      a.loss += o.loss_sum;
      a.correct += o.correct;
      a.econ += o.econ;
    }
    report.cells.push_back(entry);
  }
  std::set<std::string> games;
  for (const Cell& c : cells) games.insert(c.split.test_game);
  for (const std::string& m : spec.roster) {
    for (const std::string& g : games) {
      auto it = acc.find({m, g});
      if (it == acc.end() || it->second.failed) continue;
      const Acc& a = it->second;
      MetricRow row{m, g, a.steps, a.loss / a.steps,
                    100.0 * static_cast<double>(a.correct) / a.steps, 0.0};
      try {
        row.econ_value = a.econ.Percent();
      } catch (const DegenerateError& e) {
        report.errors.push_back({m, g, e.what()});
        continue;
      }
      report.rows.push_back(row);
    }
  }
  report.aggregate = Aggregate(report.rows);
  return report;
}

EvalReport RunCrossGame(const ExperimentConfig& config, const Corpus& corpus) {
  Context ctx(config, corpus);
  return RunProtocol(ctx, {Protocol::kCrossGame, config.roster,
                           config.history, config.encoding, "eval"});
}

EvalReport RunGameSpecific(const ExperimentConfig& config,
                           const Corpus& corpus) {
  Context ctx(config, corpus);
  return RunProtocol(ctx, {Protocol::kGameSpecific, config.roster,
                           config.history, config.encoding, "eval"});
}

bool SweepReport::ok() const {
  return std::all_of(points.begin(), points.end(),
                     [](const EvalReport& r) { return r.ok(); });
}

SweepReport SweepHistoryLength(const ExperimentConfig& config,
                               const Corpus& corpus) {
  Context ctx(config, corpus);
  SweepReport sweep;
  for (int k : config.sweep_k) {
    for (neural::Encoding e : config.sweep_encodings) {
      const std::string model = config.SweepModelFor(k);
      EvalReport r = RunProtocol(
          ctx, {Protocol::kCrossGame, {model}, k, e, "sweep"});
      for (const MetricRow& a : r.aggregate) sweep.rows.push_back({k, e, a});
      if (r.aggregate.empty()) {
        sweep.rows.push_back(
            {k, e, {model, "ALL", 0, std::nan(""), std::nan(""),
                    std::nan("")}});
      }
      sweep.points.push_back(std::move(r));
    }
  }
  return sweep;
}

}  // namespace replay::harness
