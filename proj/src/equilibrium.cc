#include "replay/equilibrium.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "replay/errors.h"

namespace replay {
namespace {

constexpr double kResidualTarget = 1e-9;
constexpr int kScanCells = 1024;

// Expected payoff advantage of action 0 over action 1 for `role`.
double Advantage(const Game2x2& game, Role role, double opp_p0) {
  const Matrix2x2 u = game.OwnView(role);
  return opp_p0 * (u[0][0] - u[1][0]) + (1.0 - opp_p0) * (u[0][1] - u[1][1]);
}

bool NearlyEqual(double a, double b) {
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= 1e-12 * scale;
}

double Logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> BinomialPmf(int n, double q) {
  std::vector<double> pmf(n + 1);
  double coef = 1.0;
  for (int k = 0; k <= n; ++k) {
    pmf[k] = coef * std::pow(q, k) * std::pow(1.0 - q, n - k);
    coef = coef * (n - k) / (k + 1);
  }
  return pmf;
}

double Bisect(const std::function<double(double)>& g, double lo, double hi,
              double g_lo) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double g_mid = g(mid);
    if (g_mid == 0.0) return mid;
    if ((g_mid < 0) == (g_lo < 0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(g(lo)) <= std::abs(g(hi)) ? lo : hi;
}

// Zeros of g on [lo, hi] located by a sign-change scan and refined by
// bisection.
std::vector<double> FindRoots(const std::function<double(double)>& g,
                              double lo, double hi) {
  std::vector<double> roots;
  auto add = [&roots](double x) {
    if (roots.empty() || std::abs(roots.back() - x) > 1e-9) roots.push_back(x);
  };
  double x_prev = lo;
  double g_prev = g(lo);
  if (g_prev == 0.0) add(lo);
  for (int i = 1; i <= kScanCells; ++i) {
    const double x = i == kScanCells ? hi : lo + (hi - lo) * i / kScanCells;
    const double gx = g(x);
    if (gx == 0.0) {
      add(x);
    } else if (g_prev != 0.0 && (gx < 0) != (g_prev < 0)) {
      add(Bisect(g, x_prev, x, g_prev));
    }
    x_prev = x;
    g_prev = gx;
  }
  return roots;
}

using Response = std::function<double(Role, double)>;

std::vector<EquilibriumProfile> SolveWith(const Response& response,
                                          Concept kind,
                                          const EquilibriumParams& params,
                                          const std::vector<double>& roots) {
  std::vector<EquilibriumProfile> out;
  double best_residual = std::numeric_limits<double>::infinity();
  for (double p : roots) {
    const double q = response(Role::kColumn, p);
    const double residual = std::max(std::abs(p - response(Role::kRow, q)),
                                      std::abs(q - response(Role::kColumn, p)));
    best_residual = std::min(best_residual, residual);
    if (residual >= kResidualTarget) continue;
    EquilibriumProfile profile;
    profile.row = MixedStrategy(p);
    profile.col = MixedStrategy(q);
    profile.kind = kind;
    profile.params = params;
    profile.residual = residual;
    out.push_back(profile);
  }
  if (out.empty()) {
    throw NumericalError(std::string(ConceptName(kind)) +
                             ": no fixed point reached the residual target",
                         best_residual);
  }
  return out;
}

// Fixed points of p = F_row(F_col(p)) in probability space.
std::vector<EquilibriumProfile> SolveComposed(const Response& response,
                                              Concept kind,
                                              const EquilibriumParams& params) {
  auto g = [&response](double p) {
    return p - response(Role::kRow, response(Role::kColumn, p));
  };
  return SolveWith(response, kind, params, FindRoots(g, 0.0, 1.0));
}

}  // namespace

const char* ConceptName(Concept c) {
  switch (c) {
    case Concept::kNash: return "nash";
    case Concept::kQre: return "qre";
    case Concept::kPse: return "pse";
    case Concept::kAse: return "ase";
    case Concept::kIbe: return "ibe";
    case Concept::kBestStatic: return "best_static";
    case Concept::kRandom: return "random";
  }
  return "unknown";
}

Concept ParseConcept(const std::string& name) {
  for (Concept c : {Concept::kNash, Concept::kQre, Concept::kPse,
                    Concept::kAse, Concept::kIbe, Concept::kBestStatic,
                    Concept::kRandom}) {
    if (name == ConceptName(c)) return c;
  }
  throw ConfigError("unknown equilibrium concept '" + name + "'");
}

EquilibriumProfile NashMixed(const Game2x2& game) {
  const Matrix2x2& r = game.payoff_row;
  const Matrix2x2& c = game.payoff_col;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      if (r[a][b] >= r[1 - a][b] && c[a][b] >= c[a][1 - b]) {
        throw InapplicableError("game " + game.id +
                                " has a pure-strategy equilibrium");
      }
    }
  }
  // Row mixes so that the column player is indifferent, and vice versa.
  const double row_den = (c[0][0] - c[0][1]) - (c[1][0] - c[1][1]);
  const double col_den = (r[0][0] - r[1][0]) - (r[0][1] - r[1][1]);
  if (row_den == 0.0 || col_den == 0.0) {
    throw InapplicableError("game " + game.id + " has no interior solution");
  }
  const double p = (c[1][1] - c[1][0]) / row_den;
  const double q = (r[1][1] - r[0][1]) / col_den;
  if (!(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0)) {
    throw InapplicableError("game " + game.id +
                            " has no fully mixed equilibrium");
  }
  EquilibriumProfile profile;
  profile.row = MixedStrategy(p);
  profile.col = MixedStrategy(q);
  profile.kind = Concept::kNash;
  profile.residual = std::max(std::abs(Advantage(game, Role::kRow, q)),
                              std::abs(Advantage(game, Role::kColumn, p)));
  return profile;
}

double QreResponse(const Game2x2& game, Role role, double opp_p0,
                   double lambda) {
  return Logistic(lambda * Advantage(game, role, opp_p0));
}

double ActionSamplingResponse(const Game2x2& game, Role role, double opp_p0,
                              int n) {
  if (n < 1) throw ContractError("sample size must be at least 1");
  const Matrix2x2 u = game.OwnView(role);
  const auto pmf = BinomialPmf(n, opp_p0);
  double p = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double f = static_cast<double>(k) / n;
    const double u0 = f * u[0][0] + (1.0 - f) * u[0][1];
    const double u1 = f * u[1][0] + (1.0 - f) * u[1][1];
    const double share = NearlyEqual(u0, u1) ? 0.5 : (u0 > u1 ? 1.0 : 0.0);
    p += pmf[k] * share;
  }
  return std::clamp(p, 0.0, 1.0);
}

double PayoffSamplingResponse(const Game2x2& game, Role role, double opp_p0,
                              int n) {
  if (n < 1) throw ContractError("sample size must be at least 1");
  const Matrix2x2 u = game.OwnView(role);
  const auto pmf = BinomialPmf(n, opp_p0);
  double p = 0.0;
  for (int k0 = 0; k0 <= n; ++k0) {
    const double s0 = k0 * u[0][0] + (n - k0) * u[0][1];
    double inner = 0.0;
    for (int k1 = 0; k1 <= n; ++k1) {
      const double s1 = k1 * u[1][0] + (n - k1) * u[1][1];
      const double share = NearlyEqual(s0, s1) ? 0.5 : (s0 > s1 ? 1.0 : 0.0);
      inner += pmf[k1] * share;
    }
    p += pmf[k0] * inner;
  }
  return std::clamp(p, 0.0, 1.0);
}

namespace {

struct Impulses {
  double up;    // expected impulse from action 0 toward action 1
  double down;  // expected impulse from action 1 toward action 0
};

Impulses ExpectedImpulses(const Game2x2& game, Role role, double opp_p0) {
  Matrix2x2 u = game.OwnView(role);
  const double security = std::max(std::min(u[0][0], u[0][1]),
                                   std::min(u[1][0], u[1][1]));
  for (auto& row : u) {
    for (double& v : row) {
      if (v > security) v = security + 0.5 * (v - security);
    }
  }
  const double q = opp_p0;
  return {q * std::max(0.0, u[1][0] - u[0][0]) +
              (1.0 - q) * std::max(0.0, u[1][1] - u[0][1]),
          q * std::max(0.0, u[0][0] - u[1][0]) +
              (1.0 - q) * std::max(0.0, u[0][1] - u[1][1])};
}

}  // namespace

double ImpulseBalanceResponse(const Game2x2& game, Role role, double opp_p0) {
  const Impulses imp = ExpectedImpulses(game, role, opp_p0);
  const double total = imp.up + imp.down;
  if (total <= 0.0) return 0.5;
  return imp.down / total;
}

double ImpulseBalanceResidual(const Game2x2& game, double row_p0,
                              double col_p0) {
  const Impulses r = ExpectedImpulses(game, Role::kRow, col_p0);
  const Impulses c = ExpectedImpulses(game, Role::kColumn, row_p0);
  return std::max(std::abs(row_p0 * r.up - (1.0 - row_p0) * r.down),
                  std::abs(col_p0 * c.up - (1.0 - col_p0) * c.down));
}

std::vector<EquilibriumProfile> QreLogitAll(const Game2x2& game,
                                            double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw ContractError("QRE precision must be finite and non-negative");
  }
  EquilibriumParams params;
  params.lambda = lambda;
  Response response = [&game, lambda](Role role, double opp) {
    return QreResponse(game, role, opp, lambda);
  };
  // Search in log-odds so that saturation of the logistic near 0 and 1
  // cannot produce spurious roots.
  auto g = [&](double p) {
    const double q = response(Role::kColumn, p);
    return std::log(p) - std::log1p(-p) -
           lambda * Advantage(game, Role::kRow, q);
  };
  constexpr double kEdge = 1e-15;
  return SolveWith(response, Concept::kQre, params,
                   FindRoots(g, kEdge, 1.0 - kEdge));
}

std::vector<EquilibriumProfile> ActionSamplingAll(const Game2x2& game, int n) {
  if (n < 1) throw ContractError("sample size must be at least 1");
  EquilibriumParams params;
  params.sample_size = n;
  return SolveComposed(
      [&game, n](Role role, double opp) {
        return ActionSamplingResponse(game, role, opp, n);
      },
      Concept::kAse, params);
}

std::vector<EquilibriumProfile> PayoffSamplingAll(const Game2x2& game, int n) {
  if (n < 1) throw ContractError("sample size must be at least 1");
  EquilibriumParams params;
  params.sample_size = n;
  return SolveComposed(
      [&game, n](Role role, double opp) {
        return PayoffSamplingResponse(game, role, opp, n);
      },
      Concept::kPse, params);
}

std::vector<EquilibriumProfile> ImpulseBalanceAll(const Game2x2& game) {
  auto profiles = SolveComposed(
      [&game](Role role, double opp) {
        return ImpulseBalanceResponse(game, role, opp);
      },
      Concept::kIbe, {});
  return profiles;
}

const EquilibriumProfile& ClosestToUniform(
    std::span<const EquilibriumProfile> profiles) {
  if (profiles.empty()) throw ContractError("no profiles to choose from");
  auto distance = [](const EquilibriumProfile& e) {
    return std::max(std::abs(e.row.p0() - 0.5), std::abs(e.col.p0() - 0.5));
  };
  const EquilibriumProfile* best = &profiles.front();
  for (const auto& e : profiles) {
    if (distance(e) < distance(*best)) best = &e;
  }
  return *best;
}

EquilibriumProfile QreLogit(const Game2x2& game, double lambda) {
  return ClosestToUniform(QreLogitAll(game, lambda));
}
EquilibriumProfile ActionSampling(const Game2x2& game, int n) {
  return ClosestToUniform(ActionSamplingAll(game, n));
}
EquilibriumProfile PayoffSampling(const Game2x2& game, int n) {
  return ClosestToUniform(PayoffSamplingAll(game, n));
}
EquilibriumProfile ImpulseBalance(const Game2x2& game) {
  return ClosestToUniform(ImpulseBalanceAll(game));
}

std::vector<EquilibriumProfile> SolveAll(const Game2x2& game, Concept kind,
                                         const EquilibriumParams& params) {
  auto need_n = [&params]() {
    if (!params.sample_size) throw ConfigError("missing sample size n");
    return *params.sample_size;
  };
  switch (kind) {
    case Concept::kNash: return {NashMixed(game)};
    case Concept::kQre:
      if (!params.lambda) throw ConfigError("missing QRE precision lambda");
      return QreLogitAll(game, *params.lambda);
    case Concept::kAse: return ActionSamplingAll(game, need_n());
    case Concept::kPse: return PayoffSamplingAll(game, need_n());
    case Concept::kIbe: return ImpulseBalanceAll(game);
    case Concept::kRandom: {
      EquilibriumProfile e;
      e.kind = Concept::kRandom;
      return {e};
    }
    case Concept::kBestStatic:
      throw ConfigError("best_static is fitted from data, not solved");
  }
  throw ConfigError("unknown concept");
}

MixedStrategy BestStatic(std::span<const PredictionSample> samples,
                         Role role) {
  std::size_t total = 0;
  std::size_t zeros = 0;
  for (const PredictionSample& s : samples) {
    if (s.role != role) continue;
    ++total;
    zeros += s.target == Action::kZero ? 1 : 0;
  }
  if (total == 0) {
    throw ValidationError(std::string("best_static: no samples for the ") +
                          RoleName(role) + " role");
  }
  return MixedStrategy(static_cast<double>(zeros) / total);
}

}  // namespace replay
