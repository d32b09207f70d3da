#ifndef REPLAY_HARNESS_MODELS_H_
#define REPLAY_HARNESS_MODELS_H_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "replay/data.h"
#include "replay/equilibrium.h"
#include "replay/harness/config.h"
#include "replay/neural/train.h"

namespace replay::harness {

struct Corpus {
  std::vector<Game2x2> games;
  std::vector<Session> sessions;
  GameCatalog catalog;

  // Files when the config names them, otherwise a synthetic corpus drawn
  // from the config's root seed.
  static Corpus Load(const ExperimentConfig& config);
  static Corpus FromParts(std::vector<Game2x2> games,
                          std::vector<Session> sessions);
};

// A player view with its place in the corpus.
struct IndexedView {
  PlayerView view;
  int session = 0;   // index into Corpus::sessions
  int slot = 0;      // position among the session's views
  int opponent = 0;  // index of the opponent's view
  int first = 0;     // target periods [first, end)
  int end = 0;
  std::string SessionKey() const;
};

// Parameter grids searched by the static concepts.
std::vector<double> QreLambdaGrid();
std::vector<int> SampleSizeGrid();

// Per-view training losses of every grid point of a learner.
struct GridTable {
  std::vector<nlohmann::json> params;  // grid order
  std::vector<double> loss;            // [grid point][view], summed over targets
};

// Shared read-mostly state for one corpus: the indexed views and the caches
// that several cells reuse. Call Prepare before fitting from several
// threads; the dataset cache is internally locked.
class Context {
 public:
  Context(const ExperimentConfig& config, const Corpus& corpus);

  const ExperimentConfig& config() const { return config_; }
  const Corpus& corpus() const { return corpus_; }
  const std::vector<IndexedView>& views() const { return views_; }
  // Views of the given sessions, in corpus order.
  std::vector<int> ViewsOf(std::span<const Session* const> sessions) const;

  void Prepare(const std::vector<std::string>& roster);
  const GridTable& LearnerTable(const std::string& learner) const;
  const std::vector<EquilibriumProfile>& Profiles(const std::string& model,
                                                  const std::string& game,
                                                  std::size_t grid) const;
  std::size_t GridSize(const std::string& model) const;
  // Targets with action 0 / 1 in view v.
  std::pair<int, int> TargetCounts(int v) const { return counts_[v]; }

  std::shared_ptr<const neural::Dataset> SessionDataset(
      int session, const neural::FeatureLayout& layout);

 private:
  const ExperimentConfig& config_;
  const Corpus& corpus_;
  std::vector<IndexedView> views_;
  std::vector<std::vector<int>> session_views_;
  std::vector<std::pair<int, int>> counts_;
  std::map<std::string, GridTable> tables_;
  // model -> game -> grid point -> profiles (empty when solving failed)
  std::map<std::string,
           std::map<std::string, std::vector<std::vector<EquilibriumProfile>>>>
      profiles_;
  std::mutex dataset_mutex_;
  std::map<std::tuple<int, int, int>, std::shared_ptr<const neural::Dataset>>
      datasets_;
};

class FittedModel {
 public:
  virtual ~FittedModel() = default;
  // Probability of action 0 at each target of each view.
  virtual std::vector<std::vector<double>> Predict(
      std::span<const int> views) const = 0;
  // Fitted parameters and training summary, for the manifest.
  nlohmann::json info = nlohmann::json::object();
};

struct ModelRequest {
  std::string name;
  int history = 20;
  neural::Encoding encoding = neural::Encoding::kActionOnly;
  std::uint64_t seed = 0;
};

// Models that read the test side by design (labelled oracle benchmarks).
bool ReadsTestData(const std::string& name);

// Fits `request.name` on `train` views. `test` is read only by the oracle
// benchmarks.
std::unique_ptr<FittedModel> FitModel(Context& ctx,
                                      const ModelRequest& request,
                                      std::span<const int> train,
                                      std::span<const int> test);

}  // namespace replay::harness

#endif  // REPLAY_HARNESS_MODELS_H_
