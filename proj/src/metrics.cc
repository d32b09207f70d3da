#include "replay/metrics.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "replay/errors.h"

namespace replay {
namespace {

constexpr std::ptrdiff_t kParallelThreshold = 4096;

void CheckLengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ContractError(std::string(what) + ": length mismatch (" +
                        std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
  if (a == 0) throw ContractError(std::string(what) + ": empty input");
}

}  // namespace

Action Harden(const MixedStrategy& p) {
  return p.p0() >= 0.5 ? Action::kZero : Action::kOne;
}

double OrderedSum(std::span<const double> terms) {
  if (terms.size() <= 8) {
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
  }
  const std::size_t half = terms.size() / 2;
  return OrderedSum(terms.first(half)) + OrderedSum(terms.subspan(half));
}

double LogLoss(Action y, const MixedStrategy& yhat) {
  return -std::log(std::clamp(yhat.Prob(y), kLogClip, 1.0 - kLogClip));
}

double CrossEntropy(std::span<const Action> y,
                    std::span<const MixedStrategy> yhat) {
  CheckLengths(y.size(), yhat.size(), "CrossEntropy");
  const auto n = static_cast<std::ptrdiff_t>(y.size());
  std::vector<double> terms(y.size());
#pragma omp parallel for schedule(static) if (n > kParallelThreshold)
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    terms[t] = LogLoss(y[t], yhat[t]);
  }
  return OrderedSum(terms) / static_cast<double>(n);
}

double Accuracy(std::span<const Action> y,
                std::span<const MixedStrategy> yhat) {
  CheckLengths(y.size(), yhat.size(), "Accuracy");
  const auto n = static_cast<std::ptrdiff_t>(y.size());
  std::ptrdiff_t hits = 0;
#pragma omp parallel for schedule(static) reduction(+ : hits) \
    if (n > kParallelThreshold)
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    hits += Harden(yhat[t]) == y[t] ? 1 : 0;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(n);
}

double EconValue::Percent() const {
  if (optimal == 0.0) {
    throw DegenerateError("economic value: hindsight optimum is zero");
  }
  return 100.0 * gained / optimal;
}

EconValue EconomicValue(const Game2x2& game, Role role,
                        std::span<const MixedStrategy> yhat_opp,
                        std::span<const Action> opp_actual) {
  CheckLengths(yhat_opp.size(), opp_actual.size(), "EconomicValue");
  const auto n = static_cast<std::ptrdiff_t>(opp_actual.size());
  std::vector<double> gained(opp_actual.size());
  std::vector<double> optimal(opp_actual.size());
#pragma omp parallel for schedule(static) if (n > kParallelThreshold)
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    const Action played = BestResponse(game, role, yhat_opp[t]);
    const Action best = HindsightBest(game, role, opp_actual[t]);
    gained[t] = Payoff(game, role, played, opp_actual[t]);
    optimal[t] = Payoff(game, role, best, opp_actual[t]);
  }
  return {OrderedSum(gained), OrderedSum(optimal)};
}

}  // namespace replay
