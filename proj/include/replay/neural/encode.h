#ifndef REPLAY_NEURAL_ENCODE_H_
#define REPLAY_NEURAL_ENCODE_H_

#include <span>

#include "replay/data.h"
#include "replay/game.h"
#include "replay/neural/tensor.h"

namespace replay::neural {

enum class Encoding { kActionOnly, kEconAware };

const char* EncodingName(Encoding e);
// "action" or "econ". Throws ConfigError.
Encoding ParseEncoding(const std::string& name);

// Input row layout: `channels` sequences of length `history`, channel-major,
// followed by `appendix` values.
//
//   ActionOnly: ch0 own action, ch1 opponent action (0/1, padding 0.5).
//   EconAware:  the two action channels, then own obtained, own forgone,
//               opponent obtained, opponent forgone payoffs (padding 0),
//               then an 8-value appendix: the predicted player's payoff
//               matrix [own][opp] and the opponent's matrix [opp][own].
//   Payoffs are divided by the game's largest absolute payoff.
struct FeatureLayout {
  Encoding encoding = Encoding::kActionOnly;
  int history = 20;

  int channels() const { return encoding == Encoding::kActionOnly ? 2 : 6; }
  int appendix() const { return encoding == Encoding::kActionOnly ? 0 : 8; }
  int sequence_size() const { return channels() * history; }
  int size() const { return sequence_size() + appendix(); }
  int SequenceIndex(int channel, int t) const { return channel * history + t; }
};

// Writes one input row for `history` (oldest first, length layout.history).
void EncodeHistory(std::span<const StepRecord> history, const Game2x2& game,
                   Role role, const FeatureLayout& layout,
                   std::span<double> out);

// Rank-1 tensor of layout.size() values.
Tensor Encode(const PredictionSample& sample, const Game2x2& game,
              Encoding encoding);

}  // namespace replay::neural

#endif  // REPLAY_NEURAL_ENCODE_H_
