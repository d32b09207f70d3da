#ifndef REPLAY_GAME_H_
#define REPLAY_GAME_H_

#include <array>
#include <cstdint>
#include <string>

namespace replay {

// Binary action label. For the row player kZero is Up, for the column
// player kZero is Left.
enum class Action : std::uint8_t { kZero = 0, kOne = 1 };

inline constexpr Action Other(Action a) {
  return a == Action::kZero ? Action::kOne : Action::kZero;
}
inline constexpr int Index(Action a) { return static_cast<int>(a); }
// Throws ValidationError for anything outside {0, 1}.
Action ActionFromInt(int value);

enum class Role : std::uint8_t { kRow = 0, kColumn = 1 };

inline constexpr Role Opponent(Role r) {
  return r == Role::kRow ? Role::kColumn : Role::kRow;
}
const char* RoleName(Role r);

using Matrix2x2 = std::array<std::array<double, 2>, 2>;

// Two-player game with two actions each. Both matrices are indexed
// [row action][column action].
struct Game2x2 {
  std::string id;
  Matrix2x2 payoff_row{};
  Matrix2x2 payoff_col{};

  // Throws ValidationError on non-finite payoffs.
  void Validate() const;

  // Payoffs from the viewpoint of `role`, indexed [own action][opp action].
  Matrix2x2 OwnView(Role role) const;
  double MinPayoff() const;
  double MaxAbsPayoff() const;
};

// Probability of action 0.
class MixedStrategy {
 public:
  MixedStrategy() = default;
  // Throws ContractError unless p0 is in [0, 1]. Values within 1e-12 of
  // the interval are clamped.
  explicit MixedStrategy(double p0);

  double p0() const { return p0_; }
  double p1() const { return 1.0 - p0_; }
  double Prob(Action a) const { return a == Action::kZero ? p0_ : p1(); }

  static MixedStrategy Pure(Action a) {
    return MixedStrategy(a == Action::kZero ? 1.0 : 0.0);
  }
  static MixedStrategy Uniform() { return MixedStrategy(0.5); }

 private:
  double p0_ = 0.5;
};

// One period from one player's viewpoint. Padding records stand in for
// periods before the start of a session.
struct StepRecord {
  Action own = Action::kZero;
  Action opp = Action::kZero;
  bool padding = false;
  double own_payoff = 0.0;
  double opp_payoff = 0.0;
  double own_forgone = 0.0;
  double opp_forgone = 0.0;

  static StepRecord Padding() {
    StepRecord r;
    r.padding = true;
    return r;
  }
};

// u_role(own, opp). For the column role `own` selects the column.
double Payoff(const Game2x2& game, Role role, Action own, Action opp);

// Expected payoff of `own` against an opponent mixing with `opp_dist`.
double ExpectedPayoff(const Game2x2& game, Role role, Action own,
                      const MixedStrategy& opp_dist);

// Argmax of expected payoff; exact indifference (up to 1e-12 relative)
// resolves to action 0.
Action BestResponse(const Game2x2& game, Role role,
                    const MixedStrategy& opp_dist);

// The action that maximizes payoff against a known opponent action, with
// the same tie rule.
Action HindsightBest(const Game2x2& game, Role role, Action opp);

StepRecord MakeStepRecord(const Game2x2& game, Role role, Action own,
                          Action opp);

Game2x2 MatchingPennies();

}  // namespace replay

#endif  // REPLAY_GAME_H_
