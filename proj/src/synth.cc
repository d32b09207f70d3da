#include "replay/synth.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

#include "replay/equilibrium.h"
#include "replay/errors.h"
#include "replay/learners.h"

namespace replay {
namespace {

struct GeneratorInfo {
  const char* name;
  std::vector<std::pair<const char*, double>> defaults;
};

const std::vector<GeneratorInfo>& Generators() {
  static const std::vector<GeneratorInfo> kGenerators = {
      {"iid", {{"p", 0.5}}},
      {"alternator", {{"period", 1.0}}},
      {"inertia_agent", {{"stay_prob", 0.9}}},
      {"rl_population", {{"s", 1.0}, {"phi", 0.1}, {"eps", 0.05}}},
      {"nfp_population", {{"rho", 0.9}, {"lambda", 2.0}}},
  };
  return kGenerators;
}

const GeneratorInfo& FindGenerator(const std::string& name) {
  for (const auto& g : Generators()) {
    if (name == g.name) return g;
  }
  throw ConfigError("unknown generator '" + name + "'");
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double ParseNumber(const std::string& text) {
  double v = 0.0;
  const std::string t = Trim(text);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError("generator parameter is not a number: '" + text + "'");
  }
  return v;
}

std::string IdWithIndex(char prefix, int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%02d", prefix, index);
  return buf;
}

// A generative player: emits an action for the coming period, then observes
// the outcome.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual Action Act(std::mt19937_64& rng, int t) = 0;
  virtual void Observe(const StepRecord& record) = 0;
};

class IidAgent : public Agent {
 public:
  explicit IidAgent(double p) : p_(p) {}
  Action Act(std::mt19937_64& rng, int) override {
    return Uniform01(rng) < p_ ? Action::kZero : Action::kOne;
  }
  void Observe(const StepRecord&) override {}

 private:
  double p_;
};

class AlternatorAgent : public Agent {
 public:
  AlternatorAgent(int period, int phase) : period_(period), phase_(phase) {}
  Action Act(std::mt19937_64&, int t) override {
    return ((t / period_ + phase_) % 2) == 0 ? Action::kZero : Action::kOne;
  }
  void Observe(const StepRecord&) override {}

 private:
  int period_;
  int phase_;
};

class InertiaAgent : public Agent {
 public:
  explicit InertiaAgent(double stay) : stay_(stay) {}
  Action Act(std::mt19937_64& rng, int t) override {
    if (t == 0) {
      last_ = Uniform01(rng) < 0.5 ? Action::kZero : Action::kOne;
    } else if (Uniform01(rng) >= stay_) {
      last_ = Other(last_);
    }
    return last_;
  }
  void Observe(const StepRecord&) override {}

 private:
  double stay_;
  Action last_ = Action::kZero;
};

class RlAgent : public Agent {
 public:
  RlAgent(const RlParams& params, const Game2x2& game)
      : params_(params), state_(RlState::Fresh(params, game)) {}
  Action Act(std::mt19937_64& rng, int) override {
    const double p0 =
        state_.propensity[0] / (state_.propensity[0] + state_.propensity[1]);
    return Uniform01(rng) < p0 ? Action::kZero : Action::kOne;
  }
  void Observe(const StepRecord& record) override {
    state_ = RlPredictUpdate(state_, params_, record).second;
  }

 private:
  RlParams params_;
  RlState state_;
};

class NfpAgent : public Agent {
 public:
  NfpAgent(const NfpParams& params, const Game2x2& game, Role role)
      : params_(params), state_(NfpState::Fresh(game, role)) {}
  Action Act(std::mt19937_64& rng, int) override {
    // The prediction does not depend on the observation passed here.
    const double p0 =
        NfpPredictUpdate(state_, params_, StepRecord{}).first.p0();
    return Uniform01(rng) < p0 ? Action::kZero : Action::kOne;
  }
  void Observe(const StepRecord& record) override {
    state_ = NfpPredictUpdate(state_, params_, record).second;
  }

 private:
  NfpParams params_;
  NfpState state_;
};

std::unique_ptr<Agent> MakeAgent(const GeneratorConfig& config,
                                 const Game2x2& game, Role role,
                                 std::mt19937_64& rng) {
  const auto& p = config.params;
  if (config.name == "iid") {
    return std::make_unique<IidAgent>(p.at("p"));
  }
  if (config.name == "alternator") {
    const int phase =
        role == Role::kRow ? 0 : (Uniform01(rng) < 0.5 ? 0 : 1);
    return std::make_unique<AlternatorAgent>(
        static_cast<int>(p.at("period")), phase);
  }
  if (config.name == "inertia_agent") {
    return std::make_unique<InertiaAgent>(p.at("stay_prob"));
  }
  if (config.name == "rl_population") {
    RlParams params{p.at("s"), p.at("phi"), p.at("eps")};
    params.Validate();
    return std::make_unique<RlAgent>(params, game);
  }
  if (config.name == "nfp_population") {
    NfpParams params{p.at("rho"), p.at("lambda")};
    params.Validate();
    return std::make_unique<NfpAgent>(params, game, role);
  }
  throw ConfigError("unknown generator '" + config.name + "'");
}

void ValidateParams(const GeneratorConfig& config) {
  const auto& p = config.params;
  if (config.name == "iid" && !(p.at("p") >= 0.0 && p.at("p") <= 1.0)) {
    throw ConfigError("iid: p must be in [0, 1]");
  }
  if (config.name == "alternator" &&
      (p.at("period") < 1.0 || p.at("period") != std::floor(p.at("period")))) {
    throw ConfigError("alternator: period must be a positive integer");
  }
  if (config.name == "inertia_agent" &&
      !(p.at("stay_prob") >= 0.0 && p.at("stay_prob") <= 1.0)) {
    throw ConfigError("inertia_agent: stay_prob must be in [0, 1]");
  }
}

}  // namespace

CorpusShape CorpusShape::ReferenceShape() {
  CorpusShape shape;
  shape.sessions_per_game = {12, 12, 12, 12, 12, 12, 6, 6, 6, 6, 6, 6};
  shape.pairs = 4;
  shape.periods = 200;
  return shape;
}

void CorpusShape::Validate() const {
  if (sessions_per_game.empty()) throw ConfigError("shape: no games");
  for (int n : sessions_per_game) {
    if (n < 1) throw ConfigError("shape: every game needs a session");
  }
  if (pairs < 1) throw ConfigError("shape: pairs must be positive");
  if (periods < 1) throw ConfigError("shape: periods must be positive");
}

GeneratorConfig GeneratorConfig::Parse(const std::string& text) {
  GeneratorConfig config;
  const std::string t = Trim(text);
  const auto open = t.find('(');
  config.name = Trim(t.substr(0, open));
  const GeneratorInfo& info = FindGenerator(config.name);
  for (const auto& [key, value] : info.defaults) config.params[key] = value;
  if (open != std::string::npos) {
    if (t.back() != ')') throw ConfigError("generator: missing ')'");
    const std::string body = t.substr(open + 1, t.size() - open - 2);
    std::stringstream items(body);
    int position = 0;
    for (std::string item; std::getline(items, item, ',');) {
      item = Trim(item);
      if (item.empty()) continue;
      const auto eq = item.find('=');
      std::string key;
      if (eq == std::string::npos) {
        if (position >= static_cast<int>(info.defaults.size())) {
          throw ConfigError("generator " + config.name +
                            ": too many parameters");
        }
        key = info.defaults[position].first;
      } else {
        key = Trim(item.substr(0, eq));
        if (!config.params.count(key)) {
          throw ConfigError("generator " + config.name +
                            ": unknown parameter '" + key + "'");
        }
      }
      config.params[key] =
          ParseNumber(eq == std::string::npos ? item : item.substr(eq + 1));
      ++position;
    }
  }
  ValidateParams(config);
  return config;
}

std::string GeneratorConfig::ToString() const {
  std::ostringstream out;
  out << name << '(';
  bool first = true;
  for (const auto& [key, unused] : FindGenerator(name).defaults) {
    out << (first ? "" : ",") << key << '=' << params.at(key);
    first = false;
  }
  out << ')';
  return out.str();
}

double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Game2x2 RandomInteriorGame(std::mt19937_64& rng, const std::string& id) {
  Game2x2 g;
  g.id = id;
  for (;;) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        g.payoff_row[a][b] = static_cast<double>(rng() % 11);
        g.payoff_col[a][b] = static_cast<double>(rng() % 11);
      }
    }
    try {
      NashMixed(g);
      return g;
    } catch (const InapplicableError&) {
    }
  }
}

SyntheticCorpus SynthGenerate(const GeneratorConfig& config,
                              std::uint64_t seed) {
  config.shape.Validate();
  ValidateParams(config);
  std::mt19937_64 rng(seed);
  SyntheticCorpus corpus;
  const int num_games = static_cast<int>(config.shape.sessions_per_game.size());
  for (int g = 0; g < num_games; ++g) {
    corpus.games.push_back(RandomInteriorGame(rng, IdWithIndex('G', g + 1)));
  }
  for (int g = 0; g < num_games; ++g) {
    const Game2x2& game = corpus.games[g];
    for (int s = 0; s < config.shape.sessions_per_game[g]; ++s) {
      Session session;
      session.game_id = game.id;
      session.session_id = IdWithIndex('S', s + 1);
      session.periods = config.shape.periods;
      for (int p = 0; p < config.shape.pairs; ++p) {
        auto row = MakeAgent(config, game, Role::kRow, rng);
        auto col = MakeAgent(config, game, Role::kColumn, rng);
        SessionPair pair;
        for (int t = 0; t < config.shape.periods; ++t) {
          const Action a = row->Act(rng, t);
          const Action b = col->Act(rng, t);
          row->Observe(MakeStepRecord(game, Role::kRow, a, b));
          col->Observe(MakeStepRecord(game, Role::kColumn, b, a));
          pair.row.push_back(a);
          pair.col.push_back(b);
        }
        session.pairs.push_back(std::move(pair));
      }
      corpus.sessions.push_back(std::move(session));
    }
  }
  return corpus;
}

}  // namespace replay
