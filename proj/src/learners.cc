#include "replay/learners.h"

#include <algorithm>
#include <cmath>

#include "replay/errors.h"

namespace replay {
namespace {

double Logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void Require(bool ok, const char* what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void RlParams::Validate() const {
  Require(initial_strength > 0.0, "rl: initial strength must be positive");
  Require(forgetting >= 0.0 && forgetting <= 1.0,
          "rl: forgetting must be in [0, 1]");
  Require(experimentation >= 0.0 && experimentation < 1.0,
          "rl: experimentation must be in [0, 1)");
}

void NfpParams::Validate() const {
  Require(recency > 0.0 && recency <= 1.0, "nfp: recency must be in (0, 1]");
  Require(precision >= 0.0 && std::isfinite(precision),
          "nfp: precision must be finite and non-negative");
}

void InertiaParams::Validate() const {
  Require(stay_prob > 0.0 && stay_prob < 1.0,
          "inertia: stay probability must be in (0, 1)");
}

void MfParams::Validate() const {
  Require(window >= 2, "mf: window must be at least 2");
  Require(confidence > 0.0 && confidence < 1.0,
          "mf: confidence must be in (0, 1)");
}

RlState RlState::Fresh(const RlParams& params, const Game2x2& game) {
  RlState s;
  s.propensity[0] = s.propensity[1] = params.initial_strength;
  s.payoff_shift = -game.MinPayoff();
  return s;
}

std::pair<MixedStrategy, RlState> RlPredictUpdate(const RlState& state,
                                                  const RlParams& params,
                                                  const StepRecord& observed) {
  const double total = state.propensity[0] + state.propensity[1];
  const MixedStrategy prediction(state.propensity[0] / total);
  RlState next = state;
  const double r = std::max(0.0, observed.own_payoff + state.payoff_shift);
  const int played = Index(observed.own);
  for (int a = 0; a < 2; ++a) {
    const double reinforcement = a == played
                                     ? (1.0 - params.experimentation) * r
                                     : params.experimentation * r;
    next.propensity[a] = std::max(
        kPropensityFloor,
        (1.0 - params.forgetting) * state.propensity[a] + reinforcement);
  }
  return {prediction, next};
}

NfpState NfpState::Fresh(const Game2x2& game, Role role) {
  NfpState s;
  s.own_payoffs = game.OwnView(role);
  return s;
}

std::pair<MixedStrategy, NfpState> NfpPredictUpdate(
    const NfpState& state, const NfpParams& params,
    const StepRecord& observed) {
  const double q = state.OpponentP0();
  const Matrix2x2& u = state.own_payoffs;
  const double advantage =
      q * (u[0][0] - u[1][0]) + (1.0 - q) * (u[0][1] - u[1][1]);
  const MixedStrategy prediction(Logistic(params.precision * advantage));
  NfpState next = state;
  for (int b = 0; b < 2; ++b) {
    next.belief[b] = params.recency * state.belief[b] +
                     (Index(observed.opp) == b ? 1.0 : 0.0);
  }
  return {prediction, next};
}

MixedStrategy InertiaPredict(Action last_action, double stay_prob) {
  return MixedStrategy(last_action == Action::kZero ? stay_prob
                                                    : 1.0 - stay_prob);
}

MixedStrategy MfPredict(std::span<const Action> window, double confidence) {
  const auto zeros = std::count(window.begin(), window.end(), Action::kZero);
  const auto ones = static_cast<std::ptrdiff_t>(window.size()) - zeros;
  if (zeros == ones) return MixedStrategy::Uniform();
  return MixedStrategy(zeros > ones ? confidence : 1.0 - confidence);
}

std::vector<double> RlTrace(const Game2x2& game, Role role,
                            std::span<const Action> own,
                            std::span<const Action> opp,
                            const RlParams& params) {
  std::vector<double> out(own.size());
  RlState state = RlState::Fresh(params, game);
  for (std::size_t t = 0; t < own.size(); ++t) {
    auto [pred, next] =
        RlPredictUpdate(state, params, MakeStepRecord(game, role, own[t], opp[t]));
    out[t] = pred.p0();
    state = next;
  }
  return out;
}

std::vector<double> NfpTrace(const Game2x2& game, Role role,
                             std::span<const Action> own,
                             std::span<const Action> opp,
                             const NfpParams& params) {
  std::vector<double> out(own.size());
  NfpState state = NfpState::Fresh(game, role);
  for (std::size_t t = 0; t < own.size(); ++t) {
    auto [pred, next] = NfpPredictUpdate(
        state, params, MakeStepRecord(game, role, own[t], opp[t]));
    out[t] = pred.p0();
    state = next;
  }
  return out;
}

std::vector<double> InertiaTrace(std::span<const Action> own,
                                 const InertiaParams& params) {
  std::vector<double> out(own.size(), 0.5);
  for (std::size_t t = 1; t < own.size(); ++t) {
    out[t] = InertiaPredict(own[t - 1], params.stay_prob).p0();
  }
  return out;
}

std::vector<double> MfTrace(std::span<const Action> own,
                            const MfParams& params) {
  std::vector<double> out(own.size(), 0.5);
  for (std::size_t t = 1; t < own.size(); ++t) {
    const std::size_t begin =
        t > static_cast<std::size_t>(params.window) ? t - params.window : 0;
    out[t] = MfPredict(own.subspan(begin, t - begin), params.confidence).p0();
  }
  return out;
}

std::vector<RlParams> RlGrid() {
  std::vector<RlParams> grid;
  for (double s : {0.1, 1.0, 10.0}) {
    for (int f = 0; f <= 10; ++f) {
      for (int e = 0; e <= 6; ++e) {
        grid.push_back({s, 0.05 * f, 0.05 * e});
      }
    }
  }
  return grid;
}

std::vector<NfpParams> NfpGrid() {
  std::vector<NfpParams> grid;
  for (int r = 0; r <= 10; ++r) {
    for (int l = 0; l < 30; ++l) {
      // 30 log-spaced precisions on [0.01, 100].
      const double lambda = std::pow(10.0, -2.0 + 4.0 * l / 29.0);
      grid.push_back({std::min(1.0, 0.8 + 0.02 * r), lambda});
    }
  }
  return grid;
}

std::vector<InertiaParams> InertiaGrid() {
  std::vector<InertiaParams> grid;
  for (int i = 0; i <= 8; ++i) grid.push_back({0.55 + 0.05 * i});
  return grid;
}

std::vector<MfParams> MfGrid() {
  std::vector<MfParams> grid;
  for (int k = 2; k <= 20; ++k) {
    for (int i = 0; i <= 8; ++i) grid.push_back({k, 0.55 + 0.05 * i});
  }
  return grid;
}

}  // namespace replay
