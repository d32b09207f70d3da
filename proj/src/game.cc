#include "replay/game.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "replay/errors.h"

namespace replay {

Action ActionFromInt(int value) {
  if (value == 0) return Action::kZero;
  if (value == 1) return Action::kOne;
  throw ValidationError("action must be 0 or 1, got " + std::to_string(value));
}

const char* RoleName(Role r) { return r == Role::kRow ? "row" : "column"; }

void Game2x2::Validate() const {
  for (const Matrix2x2* m : {&payoff_row, &payoff_col}) {
    for (const auto& row : *m) {
      for (double v : row) {
        if (!std::isfinite(v)) {
          throw ValidationError("game " + id + ": non-finite payoff");
        }
      }
    }
  }
}

Matrix2x2 Game2x2::OwnView(Role role) const {
  if (role == Role::kRow) return payoff_row;
  Matrix2x2 view;
  for (int own = 0; own < 2; ++own) {
    for (int opp = 0; opp < 2; ++opp) view[own][opp] = payoff_col[opp][own];
  }
  return view;
}

double Game2x2::MinPayoff() const {
  double lo = payoff_row[0][0];
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      lo = std::min({lo, payoff_row[a][b], payoff_col[a][b]});
    }
  }
  return lo;
}

double Game2x2::MaxAbsPayoff() const {
  double hi = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      hi = std::max({hi, std::abs(payoff_row[a][b]),
                     std::abs(payoff_col[a][b])});
    }
  }
  return hi;
}

MixedStrategy::MixedStrategy(double p0) {
  constexpr double kSlack = 1e-12;
  if (!(p0 >= -kSlack && p0 <= 1.0 + kSlack)) {
    throw ContractError("probability out of [0, 1]: " + std::to_string(p0));
  }
  p0_ = std::clamp(p0, 0.0, 1.0);
}

double Payoff(const Game2x2& game, Role role, Action own, Action opp) {
  if (role == Role::kRow) return game.payoff_row[Index(own)][Index(opp)];
  return game.payoff_col[Index(opp)][Index(own)];
}

double ExpectedPayoff(const Game2x2& game, Role role, Action own,
                      const MixedStrategy& opp_dist) {
  return opp_dist.p0() * Payoff(game, role, own, Action::kZero) +
         opp_dist.p1() * Payoff(game, role, own, Action::kOne);
}

namespace {

Action ArgmaxTowardZero(double u0, double u1) {
  const double scale = std::max({1.0, std::abs(u0), std::abs(u1)});
  return u0 >= u1 - 1e-12 * scale ? Action::kZero : Action::kOne;
}

}  // namespace

Action BestResponse(const Game2x2& game, Role role,
                    const MixedStrategy& opp_dist) {
  return ArgmaxTowardZero(ExpectedPayoff(game, role, Action::kZero, opp_dist),
                          ExpectedPayoff(game, role, Action::kOne, opp_dist));
}

Action HindsightBest(const Game2x2& game, Role role, Action opp) {
  return ArgmaxTowardZero(Payoff(game, role, Action::kZero, opp),
                          Payoff(game, role, Action::kOne, opp));
}

StepRecord MakeStepRecord(const Game2x2& game, Role role, Action own,
                          Action opp) {
  const Role other = Opponent(role);
  StepRecord r;
  r.own = own;
  r.opp = opp;
  r.own_payoff = Payoff(game, role, own, opp);
  r.own_forgone = Payoff(game, role, Other(own), opp);
  r.opp_payoff = Payoff(game, other, opp, own);
  r.opp_forgone = Payoff(game, other, Other(opp), own);
  return r;
}

Game2x2 MatchingPennies() {
  Game2x2 g;
  g.id = "matching_pennies";
  g.payoff_row = {{{1.0, -1.0}, {-1.0, 1.0}}};
  g.payoff_col = {{{-1.0, 1.0}, {1.0, -1.0}}};
  return g;
}

}  // namespace replay
