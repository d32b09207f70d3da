#include "replay/neural/encode.h"

#include <string>

#include "replay/errors.h"

namespace replay::neural {

const char* EncodingName(Encoding e) {
  return e == Encoding::kActionOnly ? "action" : "econ";
}

Encoding ParseEncoding(const std::string& name) {
  if (name == "action") return Encoding::kActionOnly;
  if (name == "econ") return Encoding::kEconAware;
  throw ConfigError("unknown encoding '" + name + "' (expected action|econ)");
}

void EncodeHistory(std::span<const StepRecord> history, const Game2x2& game,
                   Role role, const FeatureLayout& layout,
                   std::span<double> out) {
  if (static_cast<int>(history.size()) != layout.history) {
    throw ContractError("history has " + std::to_string(history.size()) +
                        " steps, layout expects " +
                        std::to_string(layout.history));
  }
  if (static_cast<int>(out.size()) != layout.size()) {
    throw ContractError("output row has the wrong size");
  }
  const bool econ = layout.encoding == Encoding::kEconAware;
  const double max_abs = game.MaxAbsPayoff();
  const double scale = max_abs > 0.0 ? 1.0 / max_abs : 1.0;
  for (int t = 0; t < layout.history; ++t) {
    const StepRecord& r = history[t];
    out[layout.SequenceIndex(0, t)] = r.padding ? 0.5 : Index(r.own);
    out[layout.SequenceIndex(1, t)] = r.padding ? 0.5 : Index(r.opp);
    if (!econ) continue;
    out[layout.SequenceIndex(2, t)] = r.padding ? 0.0 : r.own_payoff * scale;
    out[layout.SequenceIndex(3, t)] = r.padding ? 0.0 : r.own_forgone * scale;
    out[layout.SequenceIndex(4, t)] = r.padding ? 0.0 : r.opp_payoff * scale;
    out[layout.SequenceIndex(5, t)] = r.padding ? 0.0 : r.opp_forgone * scale;
  }
  if (!econ) return;
  const Matrix2x2 own = game.OwnView(role);
  const Matrix2x2 opp = game.OwnView(Opponent(role));
  double* appendix = out.data() + layout.sequence_size();
  for (int k = 0; k < 4; ++k) {
    appendix[k] = own[k / 2][k % 2] * scale;
    appendix[4 + k] = opp[k / 2][k % 2] * scale;
  }
}

Tensor Encode(const PredictionSample& sample, const Game2x2& game,
              Encoding encoding) {
  const FeatureLayout layout{encoding,
                             static_cast<int>(sample.history.size())};
  Tensor out({layout.size()});
  EncodeHistory(sample.history, game, sample.role, layout, out.values());
  return out;
}

}  // namespace replay::neural
