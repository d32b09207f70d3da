#ifndef REPLAY_HARNESS_CONFIG_H_
#define REPLAY_HARNESS_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "replay/neural/encode.h"
#include "replay/neural/network.h"
#include "replay/neural/train.h"
#include "replay/synth.h"

namespace replay::harness {

enum class Protocol { kCrossGame, kGameSpecific };
const char* ProtocolName(Protocol p);

// Every knob of an experiment. Read from a keyed text file:
//
//   # comment
//   roster = mlp, cnn, qre, rl
//   synth = iid(p=0.7)
//
// Unknown keys are errors. See README for the full key list.
struct ExperimentConfig {
  // Corpus: files when `games` is set, otherwise a synthetic corpus.
  std::string games_path;
  std::string sessions_path;
  std::string synth = "iid(p=0.5)";
  CorpusShape shape = CorpusShape::ReferenceShape();

  std::vector<std::string> roster = {"random"};
  Protocol protocol = Protocol::kCrossGame;
  // Test games to evaluate; empty means all of them.
  std::vector<std::string> splits;
  int trim = 10;

  // Networks.
  int history = 20;
  neural::Encoding encoding = neural::Encoding::kActionOnly;
  std::vector<int> hidden = {512, 512};
  int conv_layers = 2;
  int conv_filters = 64;
  int conv_extent = 5;
  int fc_units = 256;
  double dropout = 0.3;
  neural::TrainConfig train;

  // History-length sweep.
  std::vector<int> sweep_k = {1, 2, 5, 10, 15, 20};
  std::vector<neural::Encoding> sweep_encodings = {
      neural::Encoding::kActionOnly, neural::Encoding::kEconAware};
  std::string sweep_model = "auto";  // auto | mlp | cnn

  // solve
  std::vector<std::string> concepts = {"nash", "qre", "pse", "ase", "ibe"};
  double lambda = 1.0;
  int sample_size = 5;

  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int jobs = 1;

  // Throws ConfigError.
  void Validate() const;
  neural::NetworkSpec MlpSpec(int history, neural::Encoding e) const;
  neural::NetworkSpec CnnSpec(int history, neural::Encoding e) const;
  // Sweep architecture for history k.
  std::string SweepModelFor(int k) const;
  // Canonical key/value echo for manifests.
  std::map<std::string, std::string> Echo() const;
};

// Throws ConfigError (with the source and line) on bad input.
ExperimentConfig ParseConfig(const std::string& text,
                             const std::string& source = "<config>");
ExperimentConfig LoadConfig(const std::filesystem::path& path);

// Models the harness knows how to fit.
const std::vector<std::string>& KnownModels();
bool IsNeuralModel(const std::string& name);

// Child seed for a labelled purpose; a pure function of its inputs.
std::uint64_t DeriveSeed(std::uint64_t root, const std::string& label);

}  // namespace replay::harness

#endif  // REPLAY_HARNESS_CONFIG_H_
