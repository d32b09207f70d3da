#include "replay/neural/train.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "replay/errors.h"
#include "replay/metrics.h"
#include "replay/rng.h"

namespace replay::neural {
namespace {

constexpr int kEvalChunk = 2048;

}  // namespace

Dataset EncodeDataset(std::span<const PlayerView> views,
                      const FeatureLayout& layout, int trim) {
  std::size_t rows = 0;
  for (const PlayerView& v : views) rows += TargetCount(v.periods(), trim);
  Dataset out;
  out.layout = layout;
  out.inputs = Tensor({static_cast<int>(rows), layout.size()});
  out.targets.reserve(rows);
  out.sequence.reserve(rows);
  std::size_t r = 0;
  for (std::size_t i = 0; i < views.size(); ++i) {
    const PlayerView& v = views[i];
    const int end = v.periods() - trim;
    for (int t = FirstTarget(trim); t < end; ++t, ++r) {
      const auto history = HistoryWindow(v, t, layout.history);
      EncodeHistory(history, *v.game, v.role, layout, out.inputs.row(r));
      out.targets.push_back(v.own()[t]);
      out.sequence.push_back(static_cast<int>(i));
    }
  }
  return out;
}

Dataset Concat(std::span<const Dataset* const> parts) {
  if (parts.empty()) throw ContractError("nothing to concatenate");
  Dataset out;
  out.layout = parts[0]->layout;
  std::size_t rows = 0;
  for (const Dataset* d : parts) {
    if (d->layout.size() != out.layout.size() ||
        d->layout.encoding != out.layout.encoding) {
      throw ContractError("datasets have different layouts");
    }
    rows += d->size();
  }
  const int width = out.layout.size();
  out.inputs = Tensor({static_cast<int>(rows), width});
  std::size_t offset = 0;
  int seq_offset = 0;
  for (const Dataset* d : parts) {
    std::copy_n(d->inputs.data(), d->inputs.size(),
                out.inputs.data() + offset * width);
    out.targets.insert(out.targets.end(), d->targets.begin(),
                       d->targets.end());
    int max_seq = -1;
    for (int s : d->sequence) {
      out.sequence.push_back(s + seq_offset);
      max_seq = std::max(max_seq, s);
    }
    seq_offset += max_seq + 1;
    offset += d->size();
  }
  return out;
}

Tensor GatherRows(const Tensor& data, std::span<const std::size_t> rows) {
  const int width = data.dim(1);
  Tensor out({static_cast<int>(rows.size()), width});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(data.data() + rows[i] * width, width,
                out.data() + i * width);
  }
  return out;
}

void TrainConfig::Validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must be in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be > 0");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation fraction must be in (0, 1)");
  }
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (max_epochs < 0) throw ConfigError("max epochs must be >= 0");
}

Adam::Adam(const std::vector<Parameter>& params, const TrainConfig& config)
    : lr_(config.learning_rate),
      beta1_(config.beta1),
      beta2_(config.beta2),
      eps_(config.epsilon) {
  for (const Parameter& p : params) {
    m_.emplace_back(p.value.size(), 0.0);
    v_.emplace_back(p.value.size(), 0.0);
  }
}

void Adam::Step(std::vector<Parameter>& params) {
  if (params.size() != m_.size()) {
    throw ContractError("optimizer built for a different parameter list");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& value = params[i].value;
    const auto& grad = params[i].grad;
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < value.size(); ++j) {
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * grad[j];
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * grad[j] * grad[j];
      value[j] -= lr_ * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps_);
    }
  }
}

std::vector<double> PredictP0(const Network& net, const Tensor& inputs) {
  const std::size_t rows = inputs.dim(0);
  std::vector<double> p0(rows);
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < rows; start += kEvalChunk) {
    const std::size_t n = std::min<std::size_t>(kEvalChunk, rows - start);
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), start);
    const Tensor probs = net.Forward(GatherRows(inputs, idx));
    for (std::size_t i = 0; i < n; ++i) p0[start + i] = probs[2 * i];
  }
  return p0;
}

EvalStats Evaluate(const Network& net, const Tensor& inputs,
                   std::span<const Action> targets) {
  const std::vector<double> p0 = PredictP0(net, inputs);
  for (double p : p0) {
    if (!std::isfinite(p)) return {std::nan(""), std::nan("")};
  }
  std::vector<MixedStrategy> yhat;
  yhat.reserve(p0.size());
  for (double p : p0) yhat.emplace_back(p);
  return {CrossEntropy(targets, yhat), Accuracy(targets, yhat)};
}

TrainResult Train(Network& net, const Dataset& data,
                  const TrainConfig& config) {
  config.Validate();
  if (data.size() == 0) throw ContractError("no training samples");
  std::mt19937_64 rng(config.seed);

  // Hold out whole sequences; fall back to rows when there are too few.
  std::vector<int> seqs(data.sequence.begin(), data.sequence.end());
  std::sort(seqs.begin(), seqs.end());
  seqs.erase(std::unique(seqs.begin(), seqs.end()), seqs.end());
  std::vector<std::size_t> train_rows, val_rows;
  if (seqs.size() >= 2) {
    Shuffle(std::span<int>(seqs), rng);
    const std::size_t n_val = std::clamp<std::size_t>(
        static_cast<std::size_t>(
            std::llround(config.validation_fraction * seqs.size())),
        1, seqs.size() - 1);
    const std::vector<int> held(seqs.begin(), seqs.begin() + n_val);
    std::vector<char> is_val(*std::max_element(seqs.begin(), seqs.end()) + 1,
                             0);
    for (int s : held) is_val[s] = 1;
    for (std::size_t r = 0; r < data.size(); ++r) {
      (is_val[data.sequence[r]] ? val_rows : train_rows).push_back(r);
    }
  } else {
    if (data.size() < 2) throw ContractError("need at least two samples");
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), 0);
    Shuffle(std::span<std::size_t>(all), rng);
    const std::size_t n_val = std::clamp<std::size_t>(
        static_cast<std::size_t>(
            std::llround(config.validation_fraction * all.size())),
        1, all.size() - 1);
    val_rows.assign(all.begin(), all.begin() + n_val);
    train_rows.assign(all.begin() + n_val, all.end());
    std::sort(val_rows.begin(), val_rows.end());
    std::sort(train_rows.begin(), train_rows.end());
  }

  const Tensor val_inputs = GatherRows(data.inputs, val_rows);
  std::vector<Action> val_targets;
  for (std::size_t r : val_rows) val_targets.push_back(data.targets[r]);

  TrainResult result;
  result.train_rows = train_rows.size();
  result.validation_rows = val_rows.size();
  result.best_validation_loss = Evaluate(net, val_inputs, val_targets).loss;
  std::vector<double> best = net.Snapshot();
  Adam adam(net.parameters(), config);
  int since_best = 0;
  std::vector<Action> batch_targets;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Shuffle(std::span<std::size_t>(train_rows), rng);
    std::vector<double> batch_losses;
    for (std::size_t start = 0; start < train_rows.size();
         start += config.batch_size) {
      const std::size_t n = std::min<std::size_t>(config.batch_size,
                                                  train_rows.size() - start);
      const std::span<const std::size_t> rows(train_rows.data() + start, n);
      batch_targets.clear();
      for (std::size_t r : rows) batch_targets.push_back(data.targets[r]);
      const ForwardOptions opts{true, rng()};
      const double loss = net.LossAndGradient(GatherRows(data.inputs, rows),
                                              batch_targets, opts);
      if (!std::isfinite(loss)) {
        throw TrainingError("training loss is not finite", epoch);
      }
      batch_losses.push_back(loss * static_cast<double>(n));
      adam.Step(net.parameters());
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = OrderedSum(batch_losses) / train_rows.size();
    const EvalStats val = Evaluate(net, val_inputs, val_targets);
    if (!std::isfinite(val.loss)) {
      throw TrainingError("validation loss is not finite", epoch);
    }
    entry.validation_loss = val.loss;
    entry.validation_accuracy = val.accuracy;
    result.log.push_back(entry);
    if (val.loss < result.best_validation_loss) {
      result.best_validation_loss = val.loss;
      result.best_epoch = epoch;
      best = net.Snapshot();
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  net.Restore(best);
  return result;
}

}  // namespace replay::neural
