#ifndef REPLAY_EQUILIBRIUM_H_
#define REPLAY_EQUILIBRIUM_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "replay/data.h"
#include "replay/game.h"

namespace replay {

enum class Concept { kNash, kQre, kPse, kAse, kIbe, kBestStatic, kRandom };

const char* ConceptName(Concept c);
// Accepts the lowercase names printed by ConceptName. Throws ConfigError.
Concept ParseConcept(const std::string& name);

struct EquilibriumParams {
  std::optional<double> lambda;      // QRE precision
  std::optional<int> sample_size;    // PSE / ASE
};

struct EquilibriumProfile {
  MixedStrategy row;
  MixedStrategy col;
  Concept kind = Concept::kNash;
  EquilibriumParams params;
  // Fixed-point residual re-evaluated at the returned profile.
  double residual = 0.0;
};

// Fully mixed Nash equilibrium from the two indifference conditions.
// Throws InapplicableError unless the game has a unique, fully mixed
// equilibrium.
EquilibriumProfile NashMixed(const Game2x2& game);

// Per-role response maps: the probability that `role` plays action 0 given
// that its opponent plays action 0 with probability `opp_p0`.
double QreResponse(const Game2x2& game, Role role, double opp_p0,
                   double lambda);
// Best response to n observed opponent actions; sample ties split 50/50.
double ActionSamplingResponse(const Game2x2& game, Role role, double opp_p0,
                              int n);
// Compares the payoff sums of n independent opponent draws for each own
// action; ties split 50/50.
double PayoffSamplingResponse(const Game2x2& game, Role role, double opp_p0,
                              int n);
// Balances expected impulses on security-level transformed payoffs.
double ImpulseBalanceResponse(const Game2x2& game, Role role, double opp_p0);

// |P(0) * E[impulse 0->1] - P(1) * E[impulse 1->0]|, maximized over roles.
double ImpulseBalanceResidual(const Game2x2& game, double row_p0,
                              double col_p0);

// All distinct fixed points found on the unit interval, ordered by the row
// player's probability of action 0. Each throws NumericalError when no
// fixed point reaches a residual below 1e-9.
std::vector<EquilibriumProfile> QreLogitAll(const Game2x2& game,
                                            double lambda);
std::vector<EquilibriumProfile> ActionSamplingAll(const Game2x2& game, int n);
std::vector<EquilibriumProfile> PayoffSamplingAll(const Game2x2& game, int n);
std::vector<EquilibriumProfile> ImpulseBalanceAll(const Game2x2& game);

// Single-profile forms: the fixed point closest to (0.5, 0.5).
EquilibriumProfile QreLogit(const Game2x2& game, double lambda);
EquilibriumProfile ActionSampling(const Game2x2& game, int n);
EquilibriumProfile PayoffSampling(const Game2x2& game, int n);
EquilibriumProfile ImpulseBalance(const Game2x2& game);

// Dispatch on a parameterized concept. Nash yields a single profile.
std::vector<EquilibriumProfile> SolveAll(const Game2x2& game, Concept kind,
                                         const EquilibriumParams& params);

const EquilibriumProfile& ClosestToUniform(
    std::span<const EquilibriumProfile> profiles);

// Frequency of action 0 among the targets of `role`. Throws
// ValidationError when no sample has that role.
MixedStrategy BestStatic(std::span<const PredictionSample> samples,
                         Role role);

}  // namespace replay

#endif  // REPLAY_EQUILIBRIUM_H_
