// Brute-force references shared by the unit and acceptance tests. These
// deliberately avoid the library's binomial and root-finding code.
#ifndef REPLAY_TESTS_ORACLES_H_
#define REPLAY_TESTS_ORACLES_H_

#include <cmath>
#include <functional>
#include <vector>

#include "replay/game.h"

namespace replay::oracle {

inline double Share(double u0, double u1) {
  const double scale = std::max({1.0, std::abs(u0), std::abs(u1)});
  if (std::abs(u0 - u1) <= 1e-12 * scale) return 0.5;
  return u0 > u1 ? 1.0 : 0.0;
}

// Own payoff of `own` against `opp` for `role`, read straight off the
// matrices.
inline double U(const Game2x2& g, Role role, int own, int opp) {
  return role == Role::kRow ? g.payoff_row[own][opp] : g.payoff_col[opp][own];
}

// Probability of a specific sample sequence (bits = opponent plays 1).
inline double SeqProb(unsigned bits, int n, double q0) {
  double p = 1.0;
  for (int i = 0; i < n; ++i) p *= (bits >> i & 1u) ? 1.0 - q0 : q0;
  return p;
}

// Action sampling by enumerating all 2^n ordered samples.
inline double ActionSampling(const Game2x2& g, Role role, double q0, int n) {
  double p = 0.0;
  for (unsigned bits = 0; bits < (1u << n); ++bits) {
    int zeros = 0;
    for (int i = 0; i < n; ++i) zeros += (bits >> i & 1u) ? 0 : 1;
    const double f = static_cast<double>(zeros) / n;
    const double u0 = f * U(g, role, 0, 0) + (1 - f) * U(g, role, 0, 1);
    const double u1 = f * U(g, role, 1, 0) + (1 - f) * U(g, role, 1, 1);
    p += SeqProb(bits, n, q0) * Share(u0, u1);
  }
  return p;
}

// Payoff sampling: independent ordered samples for each own action, all
// 2^n x 2^n joint outcomes.
inline double PayoffSampling(const Game2x2& g, Role role, double q0, int n) {
  double p = 0.0;
  for (unsigned b0 = 0; b0 < (1u << n); ++b0) {
    double s0 = 0.0;
    for (int i = 0; i < n; ++i) s0 += U(g, role, 0, (b0 >> i) & 1u);
    for (unsigned b1 = 0; b1 < (1u << n); ++b1) {
      double s1 = 0.0;
      for (int i = 0; i < n; ++i) s1 += U(g, role, 1, (b1 >> i) & 1u);
      p += SeqProb(b0, n, q0) * SeqProb(b1, n, q0) * Share(s0, s1);
    }
  }
  return p;
}

struct GridRoot {
  double row;
  double col;
};

// Fixed points of p = R_row(R_col(p)) located on a uniform grid: a root is
// reported at the midpoint of every cell whose ends change sign, or at a
// grid point where the map is exactly zero.
inline std::vector<GridRoot> GridScan(
    const std::function<double(Role, double)>& response, double step = 1e-4) {
  std::vector<GridRoot> roots;
  const int cells = static_cast<int>(std::lround(1.0 / step));
  auto h = [&](double p) {
    return p - response(Role::kRow, response(Role::kColumn, p));
  };
  double prev = h(0.0);
  if (prev == 0.0) roots.push_back({0.0, response(Role::kColumn, 0.0)});
  for (int i = 1; i <= cells; ++i) {
    const double x = static_cast<double>(i) / cells;
    const double hx = h(x);
    double at = -1.0;
    if (hx == 0.0) {
      at = x;
    } else if (prev != 0.0 && (hx < 0) != (prev < 0)) {
      at = x - 0.5 / cells;
    }
    if (at >= 0.0) roots.push_back({at, response(Role::kColumn, at)});
    prev = hx;
  }
  return roots;
}

}  // namespace replay::oracle

#endif  // REPLAY_TESTS_ORACLES_H_
