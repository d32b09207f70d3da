#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "replay/data.h"
#include "replay/errors.h"
#include "replay/game.h"
#include "replay/metrics.h"
#include "replay/synth.h"

namespace replay {
namespace {

using A = Action;

std::vector<MixedStrategy> Probs(std::initializer_list<double> p0s) {
  std::vector<MixedStrategy> out;
  for (double p : p0s) out.emplace_back(p);
  return out;
}

Game2x2 RowGame(Matrix2x2 row) {
  Game2x2 g;
  g.id = "g";
  g.payoff_row = row;
  g.payoff_col = {{{0, 0}, {0, 0}}};
  return g;
}

TEST(Game, MatchingPenniesPayoffs) {
  const Game2x2 mp = MatchingPennies();
  EXPECT_EQ(Payoff(mp, Role::kRow, A::kZero, A::kZero), 1.0);
  EXPECT_EQ(Payoff(mp, Role::kColumn, A::kZero, A::kZero), -1.0);
  EXPECT_EQ(Payoff(mp, Role::kRow, A::kZero, A::kOne), -1.0);
}

TEST(Game, BestResponse) {
  const Game2x2 mp = MatchingPennies();
  EXPECT_EQ(BestResponse(mp, Role::kRow, MixedStrategy(1.0)), A::kZero);
  // exact indifference goes to action 0
  EXPECT_EQ(BestResponse(mp, Role::kRow, MixedStrategy(0.5)), A::kZero);

  const Game2x2 g = RowGame({{{3, 0}, {1, 1}}});
  const MixedStrategy q(0.2);
  EXPECT_NEAR(ExpectedPayoff(g, Role::kRow, A::kZero, q), 0.6, 1e-15);
  EXPECT_NEAR(ExpectedPayoff(g, Role::kRow, A::kOne, q), 1.0, 1e-15);
  EXPECT_EQ(BestResponse(g, Role::kRow, q), A::kOne);
}

TEST(Game, ColumnViewUsesTransposedIndexing) {
  Game2x2 g;
  g.payoff_row = {{{1, 2}, {3, 4}}};
  g.payoff_col = {{{5, 6}, {7, 8}}};
  // column plays own=1 while row plays 0: entry [0][1] of the column matrix
  EXPECT_EQ(Payoff(g, Role::kColumn, A::kOne, A::kZero), 6.0);
  const StepRecord r = MakeStepRecord(g, Role::kColumn, A::kOne, A::kZero);
  EXPECT_EQ(r.own_payoff, 6.0);
  EXPECT_EQ(r.opp_payoff, 2.0);
  EXPECT_EQ(r.own_forgone, 5.0);
  EXPECT_EQ(r.opp_forgone, 4.0);
}

TEST(Game, Validation) {
  EXPECT_THROW(MixedStrategy(1.5), ContractError);
  EXPECT_THROW(ActionFromInt(2), ValidationError);
  Game2x2 g = MatchingPennies();
  g.payoff_row[0][0] = std::nan("");
  EXPECT_THROW(g.Validate(), ValidationError);
}

TEST(Metrics, CrossEntropyExamples) {
  const std::vector<A> y2 = {A::kZero, A::kOne};
  EXPECT_NEAR(CrossEntropy(y2, Probs({0.5, 0.5})), std::log(2.0), 1e-15);

  const std::vector<A> y1 = {A::kZero};
  EXPECT_NEAR(CrossEntropy(y1, Probs({1.0 - 1e-7})), 1e-7, 1e-12);
  // a confident miss is clipped, not infinite
  EXPECT_NEAR(CrossEntropy(y1, Probs({0.0})), -std::log(1e-7), 1e-9);

  const std::vector<A> y3 = {A::kZero, A::kZero, A::kOne};
  const double expect = -(std::log(0.9) + std::log(0.8) + std::log(0.7)) / 3;
  EXPECT_NEAR(CrossEntropy(y3, Probs({0.9, 0.8, 0.3})), expect, 1e-15);
  EXPECT_NEAR(expect, 0.2284, 5e-5);
}

TEST(Metrics, AccuracyExamples) {
  const std::vector<A> y = {A::kZero, A::kOne, A::kZero, A::kOne};
  EXPECT_DOUBLE_EQ(Accuracy(y, Probs({0.5, 0.5, 0.5, 0.5})), 50.0);
  const std::vector<A> ones = {A::kOne, A::kOne};
  EXPECT_DOUBLE_EQ(Accuracy(ones, Probs({0.1, 0.2})), 100.0);
  const std::vector<A> y3 = {A::kZero, A::kOne, A::kOne};
  EXPECT_NEAR(Accuracy(y3, Probs({0.6, 0.6, 0.4})), 200.0 / 3.0, 1e-12);
}

TEST(Metrics, Errors) {
  const std::vector<A> y = {A::kZero};
  EXPECT_THROW(CrossEntropy(y, Probs({0.5, 0.5})), ContractError);
  EXPECT_THROW(Accuracy({}, {}), ContractError);
}

TEST(Metrics, MatchNaiveLoops) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 1000);
    std::vector<A> y(n);
    std::vector<MixedStrategy> p;
    for (int i = 0; i < n; ++i) {
      y[i] = Uniform01(rng) < 0.5 ? A::kZero : A::kOne;
      double p0 = Uniform01(rng);
      if (i % 17 == 0) p0 = 0.5;
      if (i % 29 == 0) p0 = 0.0;
      p.emplace_back(p0);
    }
    double ce = 0.0, hits = 0.0;
    for (int i = 0; i < n; ++i) {
      double q = y[i] == A::kZero ? p[i].p0() : 1.0 - p[i].p0();
      q = std::min(std::max(q, 1e-7), 1.0 - 1e-7);
      ce -= std::log(q);
      const A h = p[i].p0() >= 0.5 ? A::kZero : A::kOne;
      hits += h == y[i] ? 1.0 : 0.0;
    }
    EXPECT_NEAR(CrossEntropy(y, p), ce / n, 1e-12);
    EXPECT_NEAR(Accuracy(y, p), 100.0 * hits / n, 1e-12);
  }
}

TEST(Metrics, OrderedSumIsPairwiseDeterministic) {
  std::vector<double> v(10000);
  for (int i = 0; i < 10000; ++i) v[i] = 1.0 / (i + 1);
  double naive = 0.0;
  for (double x : v) naive += x;
  EXPECT_NEAR(OrderedSum(v), naive, 1e-12);
  EXPECT_EQ(OrderedSum(v), OrderedSum(v));
  EXPECT_EQ(OrderedSum({}), 0.0);
}

TEST(Metrics, EconomicValueOracleIsPerfect) {
  Game2x2 g;
  g.payoff_row = {{{3, 0}, {1, 2}}};
  g.payoff_col = {{{1, 2}, {0, 4}}};
  const std::vector<A> opp = {A::kZero, A::kOne, A::kOne, A::kZero};
  std::vector<MixedStrategy> oracle;
  for (A a : opp) oracle.push_back(MixedStrategy::Pure(a));
  for (Role role : {Role::kRow, Role::kColumn}) {
    const EconValue v = EconomicValue(g, role, oracle, opp);
    EXPECT_EQ(v.gained, v.optimal);
    EXPECT_DOUBLE_EQ(v.Percent(), 100.0);
  }
}

TEST(Metrics, EconomicValueTieBreakTrace) {
  const Game2x2 mp = MatchingPennies();
  const std::vector<A> opp(5, A::kZero);
  const std::vector<MixedStrategy> yhat(5, MixedStrategy(0.5));
  const EconValue v = EconomicValue(mp, Role::kRow, yhat, opp);
  EXPECT_EQ(v.gained, 5.0);
  EXPECT_EQ(v.optimal, 5.0);
}

TEST(Metrics, EconomicValueShortfall) {
  // row: hindsight best vs opp=1 is action 1 worth 2; predicting opp=0 picks
  // action 0 worth 0.
  Game2x2 g;
  g.payoff_row = {{{3, 0}, {1, 2}}};
  g.payoff_col = {{{0, 0}, {0, 0}}};
  const std::vector<A> opp = {A::kOne, A::kZero};
  const std::vector<MixedStrategy> yhat = {MixedStrategy(1.0),
                                           MixedStrategy(1.0)};
  const EconValue v = EconomicValue(g, Role::kRow, yhat, opp);
  EXPECT_DOUBLE_EQ(v.gained, 3.0);
  EXPECT_DOUBLE_EQ(v.optimal, 5.0);
  EXPECT_DOUBLE_EQ(v.Percent(), 60.0);
}

TEST(Metrics, EconomicValueZeroOptimumIsDegenerate) {
  const Game2x2 g = RowGame({{{0, 0}, {0, 0}}});
  const std::vector<A> opp = {A::kZero};
  const std::vector<MixedStrategy> yhat = {MixedStrategy(0.5)};
  EXPECT_THROW(EconomicValue(g, Role::kRow, yhat, opp).Percent(),
               DegenerateError);
}

constexpr const char* kGames =
    "# two games\n"
    "game G1\n"
    "1 -1 -1 1\n"
    "-1 1 1 -1\n"
    "\n"
    "game G2\n"
    "0 2 1 0\n"
    "2 0 0 1.5\n";

constexpr const char* kSessions =
    "session G1 S1 1 3\n"
    "0 1 0\n"
    "1 1 0\n";

TEST(Data, ParseGames) {
  std::istringstream in(kGames);
  const auto games = ParseGames(in, "t.game");
  ASSERT_EQ(games.size(), 2u);
  EXPECT_EQ(games[1].id, "G2");
  EXPECT_EQ(games[1].payoff_row[1][0], 1.0);
  EXPECT_EQ(games[1].payoff_col[1][1], 1.5);
}

TEST(Data, ParseSessionsDirect) {
  std::istringstream in(kSessions);
  const auto s = ParseSessions(in, "t.sessions");
  ASSERT_EQ(s.size(), 1u);
  ASSERT_EQ(s[0].pairs.size(), 1u);
  EXPECT_EQ(s[0].pairs[0].row, (std::vector<A>{A::kZero, A::kOne, A::kZero}));
  EXPECT_EQ(s[0].pairs[0].col, (std::vector<A>{A::kOne, A::kOne, A::kZero}));
}

TEST(Data, RoundTrip) {
  std::istringstream gin(kGames), sin(kSessions);
  const auto games = ParseGames(gin, "g");
  const auto sessions = ParseSessions(sin, "s");
  std::ostringstream gout, sout;
  WriteGames(gout, games);
  WriteSessions(sout, sessions);
  std::istringstream gin2(gout.str()), sin2(sout.str());
  const auto games2 = ParseGames(gin2, "g2");
  const auto sessions2 = ParseSessions(sin2, "s2");
  ASSERT_EQ(games2.size(), games.size());
  for (std::size_t i = 0; i < games.size(); ++i) {
    EXPECT_EQ(games2[i].payoff_row, games[i].payoff_row);
    EXPECT_EQ(games2[i].payoff_col, games[i].payoff_col);
  }
  EXPECT_EQ(sessions2[0].pairs[0].row, sessions[0].pairs[0].row);
}

TEST(Data, EmptyFileIsEmpty) {
  std::istringstream a(""), b("# nothing\n\n");
  EXPECT_TRUE(ParseGames(a, "e").empty());
  EXPECT_TRUE(ParseSessions(b, "e").empty());
}

TEST(Data, ParseErrorsCarryLine) {
  std::istringstream in("game G1\n1 2 3\n4 5 6 7\n");
  try {
    ParseGames(in, "bad.game");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.file(), "bad.game");
    EXPECT_EQ(e.line(), 2);
  }
  std::istringstream s("session G1 S1 1 3\n0 1 2\n1 1 0\n");
  try {
    ParseSessions(s, "bad.sessions");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  std::istringstream n("game G1\n1 x 3 4\n1 2 3 4\n");
  EXPECT_THROW(ParseGames(n, "x"), ParseError);
}

TEST(Data, LengthMismatchIsValidationError) {
  std::istringstream in("session G1 S1 1 3\n0 1\n1 1 0\n");
  EXPECT_THROW(ParseSessions(in, "x"), ValidationError);
}

TEST(Data, DuplicateGameId) {
  std::istringstream in(kGames);
  auto games = ParseGames(in, "g");
  games[1].id = "G1";
  EXPECT_THROW(MakeCatalog(games), ValidationError);
}

Session MakeSession(const std::string& game, const std::string& id, int T,
                    int pairs = 1) {
  Session s;
  s.game_id = game;
  s.session_id = id;
  s.periods = T;
  for (int p = 0; p < pairs; ++p) {
    SessionPair pair;
    for (int t = 0; t < T; ++t) {
      pair.row.push_back(t % 2 ? A::kOne : A::kZero);
      pair.col.push_back(t % 3 ? A::kOne : A::kZero);
    }
    s.pairs.push_back(pair);
  }
  return s;
}

TEST(Data, WindowCounts) {
  const Game2x2 mp = MatchingPennies();
  const std::vector<Session> a = {MakeSession(mp.id, "S1", 22)};
  const auto samples = Windowize(a, mp, 1, 10);
  ASSERT_EQ(samples.size(), 4u);
  EXPECT_EQ(samples[0].period, 10);
  EXPECT_EQ(samples[1].period, 11);

  const std::vector<Session> b = {MakeSession(mp.id, "S1", 2)};
  const auto tiny = Windowize(b, mp, 1, 0);
  ASSERT_EQ(tiny.size(), 2u);
  EXPECT_EQ(tiny[0].period, 1);
  EXPECT_EQ(TargetCount(200, 10), 180);
  EXPECT_EQ(TargetCount(2, 0), 1);
}

TEST(Data, WindowPaddingAndOrder) {
  const Game2x2 mp = MatchingPennies();
  const std::vector<Session> s = {MakeSession(mp.id, "S1", 30)};
  const auto samples = Windowize(s, mp, 5, 2);
  const PredictionSample& first = samples.front();
  EXPECT_EQ(first.period, 2);
  ASSERT_EQ(first.history.size(), 5u);
  EXPECT_TRUE(first.history[0].padding);
  EXPECT_TRUE(first.history[2].padding);
  EXPECT_FALSE(first.history[3].padding);
  // history[3] is period 0, history[4] period 1 (row plays 0 then 1)
  EXPECT_EQ(first.history[3].own, A::kZero);
  EXPECT_EQ(first.history[4].own, A::kOne);
  EXPECT_EQ(first.target, A::kZero);
}

TEST(Data, WindowErrors) {
  const Game2x2 mp = MatchingPennies();
  const std::vector<Session> s = {MakeSession(mp.id, "S1", 21)};
  EXPECT_THROW(Windowize(s, mp, 1, 10), ValidationError);
  const std::vector<Session> ok = {MakeSession(mp.id, "S1", 40)};
  EXPECT_THROW(Windowize(ok, mp, 0, 10), ConfigError);
  EXPECT_THROW(Windowize(ok, mp, 1, -1), ConfigError);
}

TEST(Data, ReferenceShapeSampleCount) {
  GeneratorConfig config = GeneratorConfig::Parse("iid(p=0.5)");
  const SyntheticCorpus corpus = SynthGenerate(config, 3);
  EXPECT_EQ(corpus.sessions.size(), 108u);
  const GameCatalog catalog = MakeCatalog(corpus.games);
  EXPECT_EQ(Windowize(corpus.sessions, catalog, 1, 10).size(), 155520u);
}

TEST(Data, Splits) {
  std::vector<Session> corpus;
  for (int g = 0; g < 3; ++g) {
    for (int s = 0; s < 2 + g; ++s) {
      corpus.push_back(MakeSession("G" + std::to_string(g),
                                   "S" + std::to_string(s), 30));
    }
  }
  const auto cross = MakeSplits(corpus, SplitMode::kCrossGame);
  ASSERT_EQ(cross.size(), 3u);
  for (const SplitSpec& split : cross) {
    EXPECT_EQ(split.train_games.size(), 2u);
    EXPECT_FALSE(split.train_games.count(split.test_game));
    for (const Session* s : TrainSessions(corpus, split)) {
      EXPECT_NE(s->game_id, split.test_game);
    }
  }
  const auto specific = MakeSplits(corpus, SplitMode::kGameSpecific);
  ASSERT_EQ(specific.size(), 2u + 3u + 4u);
  for (const SplitSpec& split : specific) {
    const auto train = TrainSessions(corpus, split);
    const auto test = TestSessions(corpus, split);
    ASSERT_EQ(test.size(), 1u);
    EXPECT_EQ(test[0]->session_id, *split.held_out_session);
    for (const Session* s : train) {
      EXPECT_EQ(s->game_id, split.test_game);
      EXPECT_NE(s->session_id, *split.held_out_session);
    }
  }
  const std::vector<Session> one = {MakeSession("G", "S", 30)};
  EXPECT_THROW(MakeSplits(one, SplitMode::kCrossGame), ConfigError);
  EXPECT_THROW(MakeSplits(one, SplitMode::kGameSpecific), ConfigError);
}

TEST(Synth, ParseGenerators) {
  const auto g = GeneratorConfig::Parse("inertia_agent(stay_prob=0.8)");
  EXPECT_EQ(g.params.at("stay_prob"), 0.8);
  EXPECT_EQ(GeneratorConfig::Parse("iid(0.7)").params.at("p"), 0.7);
  EXPECT_EQ(GeneratorConfig::Parse("alternator").params.at("period"), 1.0);
  EXPECT_THROW(GeneratorConfig::Parse("bogus(1)"), ConfigError);
  EXPECT_THROW(GeneratorConfig::Parse("iid(p=2)"), ConfigError);
  EXPECT_THROW(GeneratorConfig::Parse("iid(q=0.1)"), ConfigError);
}

GeneratorConfig Small(const std::string& text, int periods = 200) {
  GeneratorConfig c = GeneratorConfig::Parse(text);
  c.shape.sessions_per_game = {2, 2};
  c.shape.pairs = 4;
  c.shape.periods = periods;
  return c;
}

TEST(Synth, Deterministic) {
  const auto a = SynthGenerate(Small("rl_population"), 5);
  const auto b = SynthGenerate(Small("rl_population"), 5);
  const auto c = SynthGenerate(Small("rl_population"), 6);
  std::ostringstream sa, sb, sc;
  WriteSessions(sa, a.sessions);
  WriteSessions(sb, b.sessions);
  WriteSessions(sc, c.sessions);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_NE(sa.str(), sc.str());
}

TEST(Synth, IidFrequency) {
  const auto corpus = SynthGenerate(Small("iid(p=0.5)", 1000), 11);
  long zeros = 0, total = 0;
  for (const Session& s : corpus.sessions) {
    for (const SessionPair& p : s.pairs) {
      for (const auto* seq : {&p.row, &p.col}) {
        for (A a : *seq) zeros += a == A::kZero;
        total += seq->size();
      }
    }
  }
  const double sigma = std::sqrt(0.25 / total);
  EXPECT_NEAR(static_cast<double>(zeros) / total, 0.5, 3 * sigma);
}

TEST(Synth, Alternator) {
  const auto corpus = SynthGenerate(Small("alternator(period=1)", 10), 1);
  const auto& row = corpus.sessions[0].pairs[0].row;
  for (int t = 0; t < 10; ++t) {
    EXPECT_EQ(row[t], t % 2 ? A::kOne : A::kZero);
  }
}

TEST(Synth, InertiaRepeatRate) {
  const auto corpus =
      SynthGenerate(Small("inertia_agent(stay_prob=0.9)", 10000), 2);
  const auto& row = corpus.sessions[0].pairs[0].row;
  int repeats = 0;
  for (int t = 1; t < 10000; ++t) repeats += row[t] == row[t - 1];
  EXPECT_NEAR(repeats / 9999.0, 0.9, 0.02);
}

TEST(Synth, InteriorGames) {
  const auto corpus = SynthGenerate(Small("iid"), 9);
  EXPECT_EQ(corpus.games.size(), 2u);
  EXPECT_EQ(corpus.games[0].id, "G01");
  EXPECT_EQ(corpus.sessions[0].session_id, "S01");
}

}  // namespace
}  // namespace replay
