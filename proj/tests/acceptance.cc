// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "oracles.h"
#include "replay/data.h"
#include "replay/equilibrium.h"
#include "replay/harness/config.h"
#include "replay/harness/experiment.h"
#include "replay/harness/models.h"
#include "replay/harness/report.h"
#include "replay/metrics.h"
#include "replay/neural/gradcheck.h"
#include "replay/synth.h"

namespace {

using namespace replay;
using namespace replay::harness;
using Clock = std::chrono::steady_clock;

int failures = 0;

struct Outcome {
  bool pass = true;
  std::string detail;
  void Require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [FAILED]");
  }
};

std::string Fmt(const char* fmt, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c);
  return buf;
}

void Run(int id, const std::string& name, double budget_seconds,
         const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(Clock::now() - start).count();
  out.Require(secs < budget_seconds,
              Fmt("%.1fs (budget %.0fs)", secs, budget_seconds));
  if (!out.pass) ++failures;
  std::printf("%s criterion %d: %s: %s\n", out.pass ? "PASS" : "FAIL", id,
              name.c_str(), out.detail.c_str());
  std::fflush(stdout);
}

const MetricRow* Find(const std::vector<MetricRow>& rows,
                      const std::string& model) {
  for (const auto& r : rows) {
    if (r.model == model) return &r;
  }
  return nullptr;
}

Outcome GradientCheck() {
  Outcome out;
  const neural::FeatureLayout layout{neural::Encoding::kEconAware, 20};
  for (auto spec : {neural::NetworkSpec::Mlp(layout),
                    neural::NetworkSpec::Cnn(layout)}) {
    const auto r = neural::GradCheck(spec, 1e-4);
    out.Require(r.passed, std::string(neural::ArchitectureName(spec.arch)) +
                              Fmt(" max rel err %.2e over %.0f entries",
                                  r.max_relative_error, r.checked));
  }
  return out;
}

Outcome MetricsMatchNaive() {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Game2x2 game = RandomInteriorGame(rng, "g");
    const Role role = trial % 2 ? Role::kColumn : Role::kRow;
    const int n = 1 + static_cast<int>(rng() % 1000);
    std::vector<Action> y(n), opp(n);
    std::vector<MixedStrategy> p, q;
    for (int i = 0; i < n; ++i) {
      y[i] = Uniform01(rng) < 0.5 ? Action::kZero : Action::kOne;
      opp[i] = Uniform01(rng) < 0.5 ? Action::kZero : Action::kOne;
      p.emplace_back(i % 50 == 0 ? 0.5 : Uniform01(rng));
      q.emplace_back(Uniform01(rng));
    }
    double ce = 0.0, hits = 0.0, gained = 0.0, optimal = 0.0;
    for (int i = 0; i < n; ++i) {
      const double p0 = p[i].p0();
      double prob = y[i] == Action::kZero ? p0 : 1.0 - p0;
      prob = std::min(std::max(prob, 1e-7), 1.0 - 1e-7);
      ce -= std::log(prob);
      hits += ((p0 >= 0.5) == (y[i] == Action::kZero)) ? 1.0 : 0.0;
      const int b = static_cast<int>(opp[i]);
      auto u = [&](int own, int o) { return oracle::U(game, role, own, o); };
      const double e0 = q[i].p0() * u(0, 0) + q[i].p1() * u(0, 1);
      const double e1 = q[i].p0() * u(1, 0) + q[i].p1() * u(1, 1);
      const int chosen = oracle::Share(e0, e1) >= 0.5 ? 0 : 1;
      gained += u(chosen, b);
      optimal += std::max(u(0, b), u(1, b));
    }
    const EconValue ev = EconomicValue(game, role, q, opp);
    worst = std::max({worst, std::abs(CrossEntropy(y, p) - ce / n),
                      std::abs(Accuracy(y, p) - 100.0 * hits / n),
                      std::abs(ev.gained - gained),
                      std::abs(ev.optimal - optimal)});
  }
  Outcome out;
  out.Require(worst <= 1e-12, Fmt("max |diff| %.2e over 100 traces", worst));
  return out;
}

Outcome Equilibria() {
  Outcome out;
  const Game2x2 mp = MatchingPennies();
  double mp_err = 0.0;
  for (const auto& e :
       {NashMixed(mp), QreLogit(mp, 2.0), PayoffSampling(mp, 5),
        ActionSampling(mp, 5), ImpulseBalance(mp)}) {
    mp_err = std::max({mp_err, std::abs(e.row.p0() - 0.5),
                       std::abs(e.col.p0() - 0.5)});
  }
  out.Require(mp_err <= 1e-9, Fmt("matching pennies max err %.1e", mp_err));

  std::mt19937_64 rng(77);
  double qre_err = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Game2x2 g = RandomInteriorGame(rng, "r");
    const auto nash = NashMixed(g);
    const auto qre = QreLogit(g, 1000.0);
    qre_err = std::max({qre_err, std::abs(qre.row.p0() - nash.row.p0()),
                        std::abs(qre.col.p0() - nash.col.p0())});
  }
  out.Require(qre_err <= 1e-3, Fmt("QRE(1000) vs Nash max err %.1e", qre_err));

  double grid_err = 0.0;
  bool counts_match = true;
  for (int i = 0; i < 8; ++i) {
    const Game2x2 g = RandomInteriorGame(rng, "s");
    for (int n : {1, 2, 3, 5}) {
      for (bool payoff : {false, true}) {
        const auto got = payoff ? PayoffSamplingAll(g, n)
                                : ActionSamplingAll(g, n);
        const auto want = oracle::GridScan([&](Role r, double q) {
          return payoff ? oracle::PayoffSampling(g, r, q, n)
                        : oracle::ActionSampling(g, r, q, n);
        });
        if (got.size() != want.size()) {
          counts_match = false;
          continue;
        }
        for (std::size_t k = 0; k < got.size(); ++k) {
          grid_err = std::max({grid_err,
                               std::abs(got[k].row.p0() - want[k].row),
                               std::abs(got[k].col.p0() - want[k].col)});
        }
      }
    }
  }
  out.Require(counts_match && grid_err <= 2e-4,
              Fmt("sampling vs grid scan max err %.1e", grid_err));
  return out;
}

ExperimentConfig Config(const std::string& text) {
  return ParseConfig(text, "<acceptance>");
}

Outcome MlpOnIid() {
  const ExperimentConfig c = Config(
      "synth = iid(p=0.7)\nshape = reference\nroster = mlp\nsplits = G01\n"
      "epochs = 2\nseed = 1\n");
  const EvalReport r = RunCrossGame(c, Corpus::Load(c));
  Outcome out;
  const MetricRow* m = Find(r.aggregate, "mlp");
  if (!r.ok() || m == nullptr) {
    out.Require(false, "evaluation failed");
    return out;
  }
  const double h = -(0.7 * std::log(0.7) + 0.3 * std::log(0.3));
  out.Require(std::abs(m->loss - h) <= 0.01,
              Fmt("held-out CE %.4f vs H(0.7) %.4f", m->loss, h));
  out.Require(std::abs(m->accuracy - 70.0) <= 2.0,
              Fmt("accuracy %.2f%%", m->accuracy));
  return out;
}

Outcome CnnLearnsStructure() {
  Outcome out;
  const std::string common =
      "shape = 4x2\npairs = 4\nperiods = 200\nroster = cnn, best_static\n"
      "splits = G01\nhistory = 20\nepochs = 15\nseed = 3\n";
  {
    const ExperimentConfig c =
        Config(common + "synth = alternator(period=1)\n");
    const EvalReport r = RunCrossGame(c, Corpus::Load(c));
    const MetricRow* m = Find(r.aggregate, "cnn");
    if (!r.ok() || m == nullptr) {
      out.Require(false, "alternator evaluation failed");
    } else {
      out.Require(m->accuracy >= 99.0 && m->loss < 0.05,
                  Fmt("alternator acc %.2f%% loss %.4f", m->accuracy,
                      m->loss));
    }
  }
  {
    const ExperimentConfig c =
        Config(common + "synth = inertia_agent(stay_prob=0.9)\n");
    const EvalReport r = RunCrossGame(c, Corpus::Load(c));
    const MetricRow* cnn = Find(r.aggregate, "cnn");
    const MetricRow* bs = Find(r.aggregate, "best_static");
    if (!r.ok() || cnn == nullptr || bs == nullptr) {
      out.Require(false, "inertia evaluation failed");
    } else {
      out.Require(cnn->accuracy - bs->accuracy >= 15.0,
                  Fmt("inertia cnn %.2f%% vs best_static %.2f%%",
                      cnn->accuracy, bs->accuracy));
    }
  }
  return out;
}

Outcome InertiaSweep() {
  const ExperimentConfig c = Config(
      "synth = inertia_agent(stay_prob=0.9)\nshape = 8x3\npairs = 4\n"
      "periods = 200\nroster = inertia\nsplits = G01\nsweep_k = 1, 20\n"
      "sweep_encodings = action\nepochs = 15\nseed = 4\n");
  const Corpus corpus = Corpus::Load(c);
  Outcome out;
  const EvalReport base = RunCrossGame(c, corpus);
  const SweepReport sweep = SweepHistoryLength(c, corpus);
  const MetricRow* inertia = Find(base.aggregate, "inertia");
  if (!base.ok() || !sweep.ok() || inertia == nullptr ||
      sweep.rows.size() != 2) {
    out.Require(false, "evaluation failed");
    return out;
  }
  const double k1 = sweep.rows[0].metrics.accuracy;
  const double k20 = sweep.rows[1].metrics.accuracy;
  out.Require(std::abs(k1 - inertia->accuracy) <= 1.0,
              Fmt("k=1 %.2f%% vs inertia %.2f%%", k1, inertia->accuracy));
  out.Require(k20 >= k1, Fmt("k=20 %.2f%% >= k=1 %.2f%%", k20, k1));
  return out;
}

Outcome NoLeakage() {
  Outcome out;
  for (const char* protocol : {"cross", "specific"}) {
    const ExperimentConfig c = Config(
        std::string("synth = rl_population\nshape = 3x3\npairs = 2\n"
                    "periods = 60\nhistory = 9\nhidden = 16\nconv_filters = 4\n"
                    "fc_units = 8\nepochs = 1\nseed = 8\n"
                    "roster = oracle, random, nash, qre, ibe, rl, nfp, mf, "
                    "best_static_train, mlp, cnn, cnn_gs\nprotocol = ") +
        protocol + "\n");
    const Corpus corpus = Corpus::Load(c);
    const EvalReport r = c.protocol == Protocol::kCrossGame
                             ? RunCrossGame(c, corpus)
                             : RunGameSpecific(c, corpus);
    bool oracle_rows = true;
    for (const auto& row : r.rows) {
      if (row.model == "oracle" && std::abs(row.econ_value - 100.0) > 1e-9) {
        oracle_rows = false;
      }
    }
    out.Require(r.audit.cells > 0 && r.audit.violations == 0,
                std::string(protocol) + Fmt(": %.0f leaks in %.0f cells",
                                            r.audit.violations, r.audit.cells));
    out.Require(r.oracle.cells > 0 && r.oracle.failures == 0 && oracle_rows,
                Fmt("oracle value %.2f..%.2f%%", r.oracle.min_value,
                    r.oracle.max_value));
    out.Require(r.errors.empty(), Fmt("%.0f cell errors", r.errors.size()));
  }
  return out;
}

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome Reproducible() {
  const auto root = std::filesystem::temp_directory_path() /
                    ("replay_acceptance_" + std::to_string(::getpid()));
  Outcome out;
  std::vector<std::string> outputs;
  for (int run = 0; run < 3; ++run) {
    const ExperimentConfig c = Config(
        "synth = nfp_population\nshape = 3x2\npairs = 2\nperiods = 80\n"
        "history = 10\nhidden = 16\nconv_filters = 4\nfc_units = 8\n"
        "epochs = 2\nsweep_k = 2, 10\nseed = 12\n"
        "roster = random, qre, pse, rl, inertia, mlp, cnn\njobs = " +
        std::to_string(run == 2 ? 3 : 1) + "\n");
    const auto dir = root / std::to_string(run);
    const Corpus corpus = Corpus::Load(c);
    EmitReport(RunCrossGame(c, corpus), c, dir);
    EmitSweep(SweepHistoryLength(c, corpus), c, dir);
    outputs.push_back(Slurp(dir / "games.csv") + Slurp(dir / "aggregate.csv") +
                      Slurp(dir / "sweep.csv"));
  }
  std::filesystem::remove_all(root);
  out.Require(!outputs[0].empty() && outputs[0] == outputs[1],
              "repeat run byte-identical");
  out.Require(outputs[0] == outputs[2], "jobs=3 run byte-identical");
  return out;
}

Outcome SampleCount() {
  const SyntheticCorpus corpus =
      SynthGenerate(GeneratorConfig::Parse("iid(p=0.5)"), 1);
  const auto samples =
      Windowize(corpus.sessions, MakeCatalog(corpus.games), 20, kDefaultTrim);
  Outcome out;
  out.Require(samples.size() == 155520,
              Fmt("%.0f samples from %.0f sessions", samples.size(),
                  corpus.sessions.size()));
  return out;
}

}  // namespace

int main() {
  const auto start = Clock::now();
  Run(1, "gradient check", 60, GradientCheck);
  Run(2, "vectorized metrics", 60, MetricsMatchNaive);
  Run(3, "equilibrium concepts", 120, Equilibria);
  Run(4, "mlp on iid(0.7)", 300, MlpOnIid);
  Run(5, "cnn on structured agents", 300, CnnLearnsStructure);
  Run(6, "history sweep on inertia", 420, InertiaSweep);
  Run(7, "leakage and oracle value", 300, NoLeakage);
  Run(8, "byte-identical csv", 300, Reproducible);
  Run(9, "reference-shape sample count", 60, SampleCount);
  const double total =
      std::chrono::duration<double>(Clock::now() - start).count();
  const bool in_time = total < 900.0;
  std::printf("%s total time %.1fs (budget 900s)\n",
              in_time ? "PASS" : "FAIL", total);
  return failures == 0 && in_time ? 0 : 1;
}
