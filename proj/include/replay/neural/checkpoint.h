#ifndef REPLAY_NEURAL_CHECKPOINT_H_
#define REPLAY_NEURAL_CHECKPOINT_H_

#include <filesystem>
#include <iosfwd>

#include "replay/neural/network.h"

namespace replay::neural {

// Layout: magic "RPLYCKPT", uint32 version, uint32 length + spec text
// (NetworkSpec::Describe), uint32 parameter count, then per parameter
// uint32 length + name, uint64 value count, float64 values. Little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void SaveCheckpoint(const Network& net, std::ostream& out);
void SaveCheckpoint(const Network& net, const std::filesystem::path& path);
// Throws ParseError on a malformed or mismatched file.
Network LoadCheckpoint(std::istream& in, const std::string& source);
Network LoadCheckpoint(const std::filesystem::path& path);

}  // namespace replay::neural

#endif  // REPLAY_NEURAL_CHECKPOINT_H_
