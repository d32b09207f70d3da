#ifndef REPLAY_LEARNERS_H_
#define REPLAY_LEARNERS_H_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "replay/game.h"

namespace replay {

// Roth-Erev reinforcement learning.
struct RlParams {
  double initial_strength = 1.0;  // s > 0
  double forgetting = 0.0;        // phi in [0, 1]
  double experimentation = 0.0;   // epsilon in [0, 1)
  void Validate() const;
};

struct RlState {
  double propensity[2] = {1.0, 1.0};
  // Reinforcements are payoffs shifted by this value so they are >= 0.
  double payoff_shift = 0.0;

  static RlState Fresh(const RlParams& params, const Game2x2& game);
};

inline constexpr double kPropensityFloor = 1e-9;

// Emits the prediction for the coming period, then folds in `observed`.
std::pair<MixedStrategy, RlState> RlPredictUpdate(const RlState& state,
                                                  const RlParams& params,
                                                  const StepRecord& observed);

// Normalized fictitious play: logit choice against discounted beliefs.
struct NfpParams {
  double recency = 1.0;    // rho in (0, 1]
  double precision = 1.0;  // lambda >= 0
  void Validate() const;
};

struct NfpState {
  double belief[2] = {1.0, 1.0};  // discounted opponent-action counts
  Matrix2x2 own_payoffs{};         // [own][opp] for the predicted player

  static NfpState Fresh(const Game2x2& game, Role role);
  double OpponentP0() const { return belief[0] / (belief[0] + belief[1]); }
};

std::pair<MixedStrategy, NfpState> NfpPredictUpdate(const NfpState& state,
                                                    const NfpParams& params,
                                                    const StepRecord& observed);

// Probability `stay_prob` on repeating `last_action`.
MixedStrategy InertiaPredict(Action last_action, double stay_prob);

// Probability `confidence` on the modal action of `window`; an exact tie or
// an empty window gives 0.5.
MixedStrategy MfPredict(std::span<const Action> window, double confidence);

struct InertiaParams {
  double stay_prob = 0.9;  // (0, 1)
  void Validate() const;
};

struct MfParams {
  int window = 5;           // k >= 2
  double confidence = 0.8;  // (0, 1)
  void Validate() const;
};

// Runs a learner over a whole trace, predicting own action t from periods
// [0, t). Period 0 has no history and is predicted as 0.5 by the heuristics.
std::vector<double> RlTrace(const Game2x2& game, Role role,
                            std::span<const Action> own,
                            std::span<const Action> opp,
                            const RlParams& params);
std::vector<double> NfpTrace(const Game2x2& game, Role role,
                             std::span<const Action> own,
                             std::span<const Action> opp,
                             const NfpParams& params);
std::vector<double> InertiaTrace(std::span<const Action> own,
                                 const InertiaParams& params);
std::vector<double> MfTrace(std::span<const Action> own,
                            const MfParams& params);

// Parameter grids searched when fitting each learner.
std::vector<RlParams> RlGrid();
std::vector<NfpParams> NfpGrid();
std::vector<InertiaParams> InertiaGrid();
std::vector<MfParams> MfGrid();

}  // namespace replay

#endif  // REPLAY_LEARNERS_H_
