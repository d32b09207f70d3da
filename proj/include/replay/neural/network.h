#ifndef REPLAY_NEURAL_NETWORK_H_
#define REPLAY_NEURAL_NETWORK_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "replay/game.h"
#include "replay/neural/encode.h"
#include "replay/neural/tensor.h"

namespace replay::neural {

enum class Architecture { kMlp, kCnn };

const char* ArchitectureName(Architecture a);

// Defaults follow the reference architectures: an MLP with two hidden
// layers of 512 ReLU units, and a CNN with two valid-padded temporal
// convolutions of 64 filters of extent 5 followed by one 256-unit layer.
// Both end in a two-way softmax and use dropout 0.3.
struct NetworkSpec {
  Architecture arch = Architecture::kMlp;
  FeatureLayout input;
  std::vector<int> hidden = {512, 512};
  int conv_layers = 2;
  int conv_filters = 64;
  int conv_extent = 5;
  int fc_units = 256;
  double dropout = 0.3;

  static NetworkSpec Mlp(FeatureLayout input);
  static NetworkSpec Cnn(FeatureLayout input);

  // Shortest history the convolution stack accepts.
  int MinHistory() const;
  // Length of the sequence after the convolutions.
  int ConvOutputLength() const;
  // Throws ConfigError.
  void Validate() const;

  // Single-line key=value form, parsed back by Parse.
  std::string Describe() const;
  static NetworkSpec Parse(const std::string& text);
};

struct Parameter {
  std::string name;
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;
};

struct ForwardOptions {
  bool train = false;             // enables dropout
  std::uint64_t dropout_seed = 0; // masks are a pure function of this seed
};

class Network {
 public:
  // Fan-in scaled uniform initialization drawn from `seed`.
  Network(const NetworkSpec& spec, std::uint64_t seed);

  const NetworkSpec& spec() const { return spec_; }
  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  std::size_t ParameterCount() const;

  // inputs: (batch x input.size()) rows in the FeatureLayout order.
  // Returns (batch x 2) action probabilities.
  Tensor Forward(const Tensor& inputs, const ForwardOptions& opts = {}) const;
  // Single rank-1 input.
  MixedStrategy Predict(const Tensor& input) const;

  // Mean cross-entropy of the batch against target distributions
  // (batch x 2); parameter gradients are overwritten.
  double LossAndGradient(const Tensor& inputs, const Tensor& targets,
                         const ForwardOptions& opts);
  double LossAndGradient(const Tensor& inputs, std::span<const Action> targets,
                         const ForwardOptions& opts);
  double Loss(const Tensor& inputs, const Tensor& targets,
              const ForwardOptions& opts) const;

  // 1 for every ReLU unit that is active on `inputs`, in a fixed order.
  std::vector<std::uint8_t> ActivationPattern(
      const Tensor& inputs, const ForwardOptions& opts) const;

  std::vector<double> Snapshot() const;
  // Throws ContractError when the size does not match.
  void Restore(std::span<const double> values);

 private:
  struct Trace;
  Trace Run(const Tensor& inputs, const ForwardOptions& opts) const;
  void CheckInputs(const Tensor& inputs) const;

  NetworkSpec spec_;
  std::vector<Parameter> params_;
};

// Targets as one-hot rows.
Tensor OneHot(std::span<const Action> targets);

// Softmax/cross-entropy gradient with respect to the logits: probs - targets,
// divided by the batch size.
Tensor SoftmaxCrossEntropyGrad(const Tensor& probs, const Tensor& targets);

// Encode a sample for `spec`, rejecting histories the spec cannot accept.
Tensor EncodeFor(const NetworkSpec& spec, const PredictionSample& sample,
                 const Game2x2& game);

}  // namespace replay::neural

#endif  // REPLAY_NEURAL_NETWORK_H_
