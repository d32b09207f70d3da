#ifndef REPLAY_METRICS_H_
#define REPLAY_METRICS_H_

#include <span>

#include "replay/game.h"

namespace replay {

// Predictions are clipped into [kLogClip, 1 - kLogClip] before the log.
inline constexpr double kLogClip = 1e-7;

// p0 >= 0.5 hardens to action 0.
Action Harden(const MixedStrategy& p);

// -ln of the clipped probability `yhat` assigns to `y`.
double LogLoss(Action y, const MixedStrategy& yhat);

// Mean over steps of -ln(probability assigned to the realized action).
// Throws ContractError on empty input or a length mismatch.
double CrossEntropy(std::span<const Action> y,
                    std::span<const MixedStrategy> yhat);

// Percentage of steps where Harden(yhat) == y.
double Accuracy(std::span<const Action> y,
                std::span<const MixedStrategy> yhat);

struct EconValue {
  double gained = 0.0;
  double optimal = 0.0;

  EconValue& operator+=(const EconValue& o) {
    gained += o.gained;
    optimal += o.optimal;
    return *this;
  }
  // 100 * gained / optimal. Throws DegenerateError when optimal == 0.
  double Percent() const;
};

// Utility collected by `role` when it best-responds to `yhat_opp` (a
// forecast of the opponent's action at each step), scored against what the
// opponent actually played, alongside the hindsight optimum.
EconValue EconomicValue(const Game2x2& game, Role role,
                        std::span<const MixedStrategy> yhat_opp,
                        std::span<const Action> opp_actual);

// Fixed-order pairwise summation; the result does not depend on how the
// terms were produced.
double OrderedSum(std::span<const double> terms);

}  // namespace replay

#endif  // REPLAY_METRICS_H_
