#ifndef REPLAY_NEURAL_TRAIN_H_
#define REPLAY_NEURAL_TRAIN_H_

#include <cstdint>
#include <span>
#include <vector>

#include "replay/data.h"
#include "replay/neural/encode.h"
#include "replay/neural/network.h"
#include "replay/neural/tensor.h"

namespace replay::neural {

// Encoded samples. `sequence` tags every row with the player trace it came
// from so the validation split can hold out whole sequences.
struct Dataset {
  FeatureLayout layout;
  Tensor inputs;  // (size x layout.size())
  std::vector<Action> targets;
  std::vector<int> sequence;

  std::size_t size() const { return targets.size(); }
};

// Windowizes and encodes every view in one pass. Sequence ids are the view
// indices.
Dataset EncodeDataset(std::span<const PlayerView> views,
                      const FeatureLayout& layout, int trim);
// Sequence ids are renumbered so they stay distinct across parts.
Dataset Concat(std::span<const Dataset* const> parts);
// Rows `rows` of `data`, in that order.
Tensor GatherRows(const Tensor& data, std::span<const std::size_t> rows);

struct TrainConfig {
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 64;
  double validation_fraction = 0.05;
  int patience = 10;
  int max_epochs = 200;
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void Validate() const;
};

class Adam {
 public:
  Adam(const std::vector<Parameter>& params, const TrainConfig& config);
  // One update from the gradients currently stored in `params`.
  void Step(std::vector<Parameter>& params);
  int steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double validation_accuracy = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = 0;  // 0: the initial parameters were kept
  double best_validation_loss = 0.0;
  std::size_t train_rows = 0;
  std::size_t validation_rows = 0;
};

// Trains `net` in place and leaves it at the snapshot with the lowest
// validation loss. Throws TrainingError when a loss turns NaN.
TrainResult Train(Network& net, const Dataset& data,
                  const TrainConfig& config);

// Inference-mode probabilities of action 0, evaluated in chunks.
std::vector<double> PredictP0(const Network& net, const Tensor& inputs);

// Mean cross-entropy and accuracy of inference-mode predictions.
struct EvalStats {
  double loss = 0.0;
  double accuracy = 0.0;
};
EvalStats Evaluate(const Network& net, const Tensor& inputs,
                   std::span<const Action> targets);

}  // namespace replay::neural

#endif  // REPLAY_NEURAL_TRAIN_H_
