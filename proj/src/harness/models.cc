#include "replay/harness/models.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "replay/errors.h"
#include "replay/learners.h"
#include "replay/metrics.h"
#include "replay/synth.h"

namespace replay::harness {
namespace {

using nlohmann::json;

bool IsLearner(const std::string& m) {
  return m == "rl" || m == "nfp" || m == "inertia" || m == "mf";
}

bool IsConcept(const std::string& m) {
  return m == "nash" || m == "qre" || m == "pse" || m == "ase" || m == "ibe";
}

std::vector<double> LearnerTrace(const std::string& learner, std::size_t g,
                                 const PlayerView& v) {
  if (learner == "rl") {
    return RlTrace(*v.game, v.role, v.own(), v.opp(), RlGrid()[g]);
  }
  if (learner == "nfp") {
    return NfpTrace(*v.game, v.role, v.own(), v.opp(), NfpGrid()[g]);
  }
  if (learner == "inertia") return InertiaTrace(v.own(), InertiaGrid()[g]);
  return MfTrace(v.own(), MfGrid()[g]);
}

std::vector<json> LearnerParams(const std::string& learner) {
  std::vector<json> out;
  if (learner == "rl") {
    for (const auto& p : RlGrid()) {
      out.push_back({{"initial_strength", p.initial_strength},
                     {"forgetting", p.forgetting},
                     {"experimentation", p.experimentation}});
    }
  } else if (learner == "nfp") {
    for (const auto& p : NfpGrid()) {
      out.push_back({{"recency", p.recency}, {"precision", p.precision}});
    }
  } else if (learner == "inertia") {
    for (const auto& p : InertiaGrid()) out.push_back({{"stay_prob", p.stay_prob}});
  } else {
    for (const auto& p : MfGrid()) {
      out.push_back({{"window", p.window}, {"confidence", p.confidence}});
    }
  }
  return out;
}

EquilibriumParams ConceptParams(const std::string& model, std::size_t g) {
  EquilibriumParams p;
  if (model == "qre") p.lambda = QreLambdaGrid()[g];
  if (model == "pse" || model == "ase") p.sample_size = SampleSizeGrid()[g];
  return p;
}

json ConceptParamsJson(const std::string& model, std::size_t g) {
  if (model == "qre") return {{"lambda", QreLambdaGrid()[g]}};
  if (model == "pse" || model == "ase") {
    return {{"n", SampleSizeGrid()[g]}};
  }
  return json::object();
}

double ConstantLoss(std::pair<int, int> counts, double p0) {
  const MixedStrategy p(p0);
  return counts.first * LogLoss(Action::kZero, p) +
         counts.second * LogLoss(Action::kOne, p);
}

// Same prediction at every target, per role.
class ConstantModel : public FittedModel {
 public:
  ConstantModel(const Context& ctx, std::map<std::string, double> row_p0,
                std::map<std::string, double> col_p0)
      : ctx_(ctx), row_(std::move(row_p0)), col_(std::move(col_p0)) {}

  std::vector<std::vector<double>> Predict(
      std::span<const int> views) const override {
    std::vector<std::vector<double>> out;
    for (int v : views) {
      const IndexedView& iv = ctx_.views()[v];
      const auto& table = iv.view.role == Role::kRow ? row_ : col_;
      auto it = table.find(iv.view.game->id);
      if (it == table.end()) {
        throw ContractError("no prediction for game " + iv.view.game->id);
      }
      out.emplace_back(iv.end - iv.first, it->second);
    }
    return out;
  }

 private:
  const Context& ctx_;
  std::map<std::string, double> row_, col_;
};

class LearnerModel : public FittedModel {
 public:
  LearnerModel(const Context& ctx, std::string learner, std::size_t grid)
      : ctx_(ctx), learner_(std::move(learner)), grid_(grid) {}

  std::vector<std::vector<double>> Predict(
      std::span<const int> views) const override {
    std::vector<std::vector<double>> out;
    for (int v : views) {
      const IndexedView& iv = ctx_.views()[v];
      const auto trace = LearnerTrace(learner_, grid_, iv.view);
      out.emplace_back(trace.begin() + iv.first, trace.begin() + iv.end);
    }
    return out;
  }

 private:
  const Context& ctx_;
  std::string learner_;
  std::size_t grid_;
};

class OracleModel : public FittedModel {
 public:
  explicit OracleModel(const Context& ctx) : ctx_(ctx) {}
  std::vector<std::vector<double>> Predict(
      std::span<const int> views) const override {
    std::vector<std::vector<double>> out;
    for (int v : views) {
      const IndexedView& iv = ctx_.views()[v];
      std::vector<double> p;
      for (int t = iv.first; t < iv.end; ++t) {
        p.push_back(iv.view.own()[t] == Action::kZero ? 1.0 : 0.0);
      }
      out.push_back(std::move(p));
    }
    return out;
  }

 private:
  const Context& ctx_;
};

class NetworkModel : public FittedModel {
 public:
  NetworkModel(Context& ctx, neural::Network net)
      : ctx_(ctx), net_(std::move(net)) {}

  std::vector<std::vector<double>> Predict(
      std::span<const int> views) const override {
    std::map<int, std::vector<double>> by_session;
    for (int v : views) {
      const int s = ctx_.views()[v].session;
      if (by_session.count(s)) continue;
      const auto data = ctx_.SessionDataset(s, net_.spec().input);
      by_session[s] = neural::PredictP0(net_, data->inputs);
    }
    std::vector<std::vector<double>> out;
    for (int v : views) {
      const IndexedView& iv = ctx_.views()[v];
      const std::vector<double>& p = by_session[iv.session];
      // Rows of a session dataset follow the session's view order and every
      // view of a session has the same number of targets.
      const std::size_t per_view = iv.end - iv.first;
      const std::size_t offset = per_view * iv.slot;
      out.emplace_back(p.begin() + offset, p.begin() + offset + per_view);
    }
    return out;
  }

 private:
  Context& ctx_;
  neural::Network net_;
};

std::vector<int> SessionsOf(const Context& ctx, std::span<const int> views) {
  std::set<int> s;
  for (int v : views) s.insert(ctx.views()[v].session);
  return {s.begin(), s.end()};
}

// Views grouped by game id (sorted).
std::map<std::string, std::vector<int>> ByGame(const Context& ctx,
                                               std::span<const int> views) {
  std::map<std::string, std::vector<int>> out;
  for (int v : views) out[ctx.views()[v].view.game->id].push_back(v);
  return out;
}

// Training loss of `profile` on a game's views.
double ProfileLoss(const Context& ctx, const EquilibriumProfile& profile,
                   std::span<const int> views) {
  double total = 0.0;
  for (int v : views) {
    const Role role = ctx.views()[v].view.role;
    total += ConstantLoss(ctx.TargetCounts(v),
                          role == Role::kRow ? profile.row.p0()
                                             : profile.col.p0());
  }
  return total;
}

// Index of the lowest-loss profile; first wins ties.
std::size_t BestProfile(const Context& ctx,
                        const std::vector<EquilibriumProfile>& profiles,
                        std::span<const int> views, double* loss) {
  std::size_t best = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const double l = ProfileLoss(ctx, profiles[i], views);
    if (l < best_loss) {
      best_loss = l;
      best = i;
    }
  }
  if (loss) *loss = best_loss;
  return best;
}

std::unique_ptr<FittedModel> FitConcept(Context& ctx, const std::string& model,
                                        std::span<const int> train,
                                        std::span<const int> test) {
  const auto train_games = ByGame(ctx, train);
  const std::size_t grid_size = ctx.GridSize(model);
  std::size_t chosen = 0;
  json info = json::object();
  if (grid_size > 1) {
    double best = std::numeric_limits<double>::infinity();
    int failed = 0;
    for (std::size_t g = 0; g < grid_size; ++g) {
      double total = 0.0;
      bool ok = true;
      for (const auto& [game, views] : train_games) {
        const auto& profiles = ctx.Profiles(model, game, g);
        if (profiles.empty()) {
          ok = false;
          break;
        }
        double l = 0.0;
        BestProfile(ctx, profiles, views, &l);
        total += l;
      }
      if (!ok) {
        ++failed;
        continue;
      }
      if (total < best) {
        best = total;
        chosen = g;
      }
    }
    if (!std::isfinite(best)) {
      throw NumericalError(model + ": no grid point could be solved", 0.0);
    }
    int steps = 0;
    for (int v : train) {
      steps += ctx.TargetCounts(v).first + ctx.TargetCounts(v).second;
    }
    info["params"] = ConceptParamsJson(model, chosen);
    info["train_loss"] = best / steps;
    info["unsolved_grid_points"] = failed;
  }
  std::map<std::string, double> row, col;
  for (const auto& [game, views] : ByGame(ctx, test)) {
    const auto& profiles = ctx.Profiles(model, game, chosen);
    if (profiles.empty()) {
      // Re-solve to surface the original error.
      SolveAll(ctx.corpus().catalog.at(game),
               ParseConcept(model), ConceptParams(model, chosen));
      throw NumericalError(model + ": no profile for game " + game, 0.0);
    }
    // A game seen in training keeps the profile that fit its training
    // sessions; an unseen game takes the profile nearest to uniform play.
    auto it = train_games.find(game);
    const EquilibriumProfile& p =
        it != train_games.end()
            ? profiles[BestProfile(ctx, profiles, it->second, nullptr)]
            : ClosestToUniform(profiles);
    row[game] = p.row.p0();
    col[game] = p.col.p0();
    info["profiles"][game] = {{"row_p0", p.row.p0()},
                              {"col_p0", p.col.p0()},
                              {"fixed_points", profiles.size()}};
  }
  auto m = std::make_unique<ConstantModel>(ctx, row, col);
  m->info = info;
  return m;
}

std::unique_ptr<FittedModel> FitLearner(Context& ctx,
                                        const std::string& learner,
                                        std::span<const int> train) {
  const GridTable& table = ctx.LearnerTable(learner);
  const std::size_t n_views = ctx.views().size();
  std::size_t best = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < table.params.size(); ++g) {
    double total = 0.0;
    for (int v : train) total += table.loss[g * n_views + v];
    if (total < best_loss) {
      best_loss = total;
      best = g;
    }
  }
  int steps = 0;
  for (int v : train) {
    steps += ctx.TargetCounts(v).first + ctx.TargetCounts(v).second;
  }
  auto m = std::make_unique<LearnerModel>(ctx, learner, best);
  m->info = {{"params", table.params[best]},
             {"train_loss", best_loss / steps}};
  return m;
}

std::unique_ptr<FittedModel> FitStatic(Context& ctx, std::span<const int> from,
                                       std::span<const int> targets_of) {
  // Pooled frequency of action 0 per role over `from`, applied to every
  // game in `targets_of`.
  long n0[2] = {0, 0}, n[2] = {0, 0};
  for (int v : from) {
    const int r = ctx.views()[v].view.role == Role::kRow ? 0 : 1;
    n0[r] += ctx.TargetCounts(v).first;
    n[r] += ctx.TargetCounts(v).first + ctx.TargetCounts(v).second;
  }
  const double p_row = n[0] ? static_cast<double>(n0[0]) / n[0] : 0.5;
  const double p_col = n[1] ? static_cast<double>(n0[1]) / n[1] : 0.5;
  std::map<std::string, double> row, col;
  for (int v : targets_of) {
    row[ctx.views()[v].view.game->id] = p_row;
    col[ctx.views()[v].view.game->id] = p_col;
  }
  auto m = std::make_unique<ConstantModel>(ctx, row, col);
  m->info = {{"row_p0", p_row}, {"col_p0", p_col}};
  return m;
}

std::unique_ptr<FittedModel> FitNetwork(Context& ctx,
                                        const ModelRequest& req,
                                        std::span<const int> train) {
  const ExperimentConfig& cfg = ctx.config();
  const bool cnn = req.name != "mlp";
  const neural::NetworkSpec spec = cnn ? cfg.CnnSpec(req.history, req.encoding)
                                       : cfg.MlpSpec(req.history, req.encoding);
  spec.Validate();
  std::vector<std::shared_ptr<const neural::Dataset>> parts;
  std::vector<const neural::Dataset*> raw;
  for (int s : SessionsOf(ctx, train)) {
    parts.push_back(ctx.SessionDataset(s, spec.input));
    raw.push_back(parts.back().get());
  }
  if (raw.empty()) throw ContractError(req.name + ": no training sessions");
  const neural::Dataset data = neural::Concat(raw);
  parts.clear();
  neural::Network net(spec, DeriveSeed(req.seed, "init"));
  neural::TrainConfig tc = cfg.train;
  tc.seed = DeriveSeed(req.seed, "train");
  const neural::TrainResult result = neural::Train(net, data, tc);
  json info = {{"spec", spec.Describe()},
               {"parameters", net.ParameterCount()},
               {"train_rows", result.train_rows},
               {"validation_rows", result.validation_rows},
               {"epochs_run", result.log.size()},
               {"best_epoch", result.best_epoch},
               {"best_validation_loss", result.best_validation_loss}};
  auto m = std::make_unique<NetworkModel>(ctx, std::move(net));
  m->info = info;
  return m;
}

}  // namespace

Corpus Corpus::FromParts(std::vector<Game2x2> games,
                         std::vector<Session> sessions) {
  Corpus c;
  c.games = std::move(games);
  c.sessions = std::move(sessions);
  c.catalog = MakeCatalog(c.games);
  for (const Session& s : c.sessions) {
    if (!c.catalog.count(s.game_id)) {
      throw ValidationError("session " + s.session_id +
                            " refers to unknown game " + s.game_id);
    }
    s.Validate();
  }
  return c;
}

Corpus Corpus::Load(const ExperimentConfig& config) {
  if (!config.games_path.empty()) {
    return FromParts(LoadGames(config.games_path),
                     LoadSessions(config.sessions_path));
  }
  GeneratorConfig gen = GeneratorConfig::Parse(config.synth);
  gen.shape = config.shape;
  SyntheticCorpus synth =
      SynthGenerate(gen, DeriveSeed(config.seed, "corpus"));
  return FromParts(std::move(synth.games), std::move(synth.sessions));
}

std::string IndexedView::SessionKey() const {
  return view.session->game_id + "/" + view.session->session_id;
}

std::vector<double> QreLambdaGrid() {
  std::vector<double> grid = {0.0};
  for (int i = 0; i < 49; ++i) {
    grid.push_back(0.1 * std::pow(100.0, i / 48.0));
  }
  return grid;
}

std::vector<int> SampleSizeGrid() {
  std::vector<int> grid;
  for (int n = 1; n <= 20; ++n) grid.push_back(n);
  return grid;
}

Context::Context(const ExperimentConfig& config, const Corpus& corpus)
    : config_(config), corpus_(corpus) {
  for (std::size_t s = 0; s < corpus.sessions.size(); ++s) {
    const Session& session = corpus.sessions[s];
    const Game2x2& game = corpus.catalog.at(session.game_id);
    const auto pv = PlayerViews(session, game);
    const int base = static_cast<int>(views_.size());
    session_views_.emplace_back();
    for (std::size_t i = 0; i < pv.size(); ++i) {
      IndexedView iv;
      iv.view = pv[i];
      iv.session = static_cast<int>(s);
      iv.slot = static_cast<int>(i);
      iv.opponent = base + static_cast<int>(i ^ 1);
      iv.first = FirstTarget(config.trim);
      iv.end = session.periods - config.trim;
      if (iv.end <= iv.first) {
        throw ValidationError("session " + session.session_id +
                              " is too short for trim " +
                              std::to_string(config.trim));
      }
      int n0 = 0;
      for (int t = iv.first; t < iv.end; ++t) {
        n0 += iv.view.own()[t] == Action::kZero ? 1 : 0;
      }
      counts_.emplace_back(n0, iv.end - iv.first - n0);
      session_views_.back().push_back(static_cast<int>(views_.size()));
      views_.push_back(iv);
    }
  }
}

std::vector<int> Context::ViewsOf(
    std::span<const Session* const> sessions) const {
  std::set<const Session*> wanted(sessions.begin(), sessions.end());
  std::vector<int> out;
  for (std::size_t s = 0; s < corpus_.sessions.size(); ++s) {
    if (!wanted.count(&corpus_.sessions[s])) continue;
    out.insert(out.end(), session_views_[s].begin(), session_views_[s].end());
  }
  return out;
}

std::size_t Context::GridSize(const std::string& model) const {
  if (model == "qre") return QreLambdaGrid().size();
  if (model == "pse" || model == "ase") return SampleSizeGrid().size();
  return 1;
}

void Context::Prepare(const std::vector<std::string>& roster) {
  for (const std::string& m : roster) {
    if (IsLearner(m) && !tables_.count(m)) {
      GridTable table;
      table.params = LearnerParams(m);
      const std::size_t n_grid = table.params.size();
      const std::size_t n_views = views_.size();
      table.loss.assign(n_grid * n_views, 0.0);
#pragma omp parallel for schedule(dynamic)
      for (std::size_t v = 0; v < n_views; ++v) {
        const IndexedView& iv = views_[v];
        std::vector<double> terms(iv.end - iv.first);
        for (std::size_t g = 0; g < n_grid; ++g) {
          const auto trace = LearnerTrace(m, g, iv.view);
          for (int t = iv.first; t < iv.end; ++t) {
            terms[t - iv.first] =
                LogLoss(iv.view.own()[t], MixedStrategy(trace[t]));
          }
          table.loss[g * n_views + v] = OrderedSum(terms);
        }
      }
      tables_[m] = std::move(table);
    }
    if (IsConcept(m) && !profiles_.count(m)) {
      auto& per_game = profiles_[m];
      const Concept kind = ParseConcept(m);
      for (const Game2x2& game : corpus_.games) {
        auto& grid = per_game[game.id];
        grid.resize(GridSize(m));
        for (std::size_t g = 0; g < grid.size(); ++g) {
          try {
            grid[g] = SolveAll(game, kind, ConceptParams(m, g));
          } catch (const Error&) {
            grid[g].clear();
          }
        }
      }
    }
  }
}

const GridTable& Context::LearnerTable(const std::string& learner) const {
  auto it = tables_.find(learner);
  if (it == tables_.end()) {
    throw ContractError("learner table for " + learner + " not prepared");
  }
  return it->second;
}

const std::vector<EquilibriumProfile>& Context::Profiles(
    const std::string& model, const std::string& game,
    std::size_t grid) const {
  auto it = profiles_.find(model);
  if (it == profiles_.end()) {
    throw ContractError("profiles for " + model + " not prepared");
  }
  return it->second.at(game).at(grid);
}

std::shared_ptr<const neural::Dataset> Context::SessionDataset(
    int session, const neural::FeatureLayout& layout) {
  const auto key = std::make_tuple(session, layout.history,
                                   static_cast<int>(layout.encoding));
  std::lock_guard<std::mutex> lock(dataset_mutex_);
  auto it = datasets_.find(key);
  if (it != datasets_.end()) return it->second;
  std::vector<PlayerView> pv;
  for (int v : session_views_[session]) pv.push_back(views_[v].view);
  auto data = std::make_shared<const neural::Dataset>(
      neural::EncodeDataset(pv, layout, config_.trim));
  datasets_[key] = data;
  return data;
}

bool ReadsTestData(const std::string& name) {
  return name == "best_static" || name == "oracle";
}

std::unique_ptr<FittedModel> FitModel(Context& ctx,
                                      const ModelRequest& request,
                                      std::span<const int> train,
                                      std::span<const int> test) {
  const std::string& m = request.name;
  if (m == "random") {
    std::map<std::string, double> half;
    for (int v : test) half[ctx.views()[v].view.game->id] = 0.5;
    return std::make_unique<ConstantModel>(ctx, half, half);
  }
  if (m == "oracle") return std::make_unique<OracleModel>(ctx);
  if (m == "best_static") {
    auto model = FitStatic(ctx, test, test);
    model->info["benchmark"] = "test-game empirical distribution (oracle)";
    return model;
  }
  if (m == "best_static_train") return FitStatic(ctx, train, test);
  if (IsConcept(m)) return FitConcept(ctx, m, train, test);
  if (IsLearner(m)) return FitLearner(ctx, m, train);
  if (IsNeuralModel(m)) return FitNetwork(ctx, request, train);
  throw ConfigError("unknown model '" + m + "'");
}

}  // namespace replay::harness
