#ifndef REPLAY_NEURAL_GRADCHECK_H_
#define REPLAY_NEURAL_GRADCHECK_H_

#include <cstdint>
#include <string>

#include "replay/neural/network.h"

namespace replay::neural {

struct GradCheckOptions {
  double step = 1e-5;
  int batch = 4;
  // Entries checked per parameter tensor; smaller tensors are checked fully.
  int samples_per_tensor = 64;
  std::uint64_t seed = 1;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  int checked = 0;
  // Entries whose perturbation flips a ReLU unit; finite differences are
  // meaningless across the kink.
  int skipped = 0;
  double tolerance = 0.0;
  bool passed = false;
};

// Compares backpropagated gradients of a randomly initialized `spec` on a
// random batch (dropout active with fixed masks) against central
// differences. Relative error: |a - n| / max(|a|, |n|, 1e-6). Passing needs
// max error < tolerance, so tolerance 0 always fails.
GradCheckReport GradCheck(const NetworkSpec& spec, double tolerance,
                          const GradCheckOptions& options = {});

}  // namespace replay::neural

#endif  // REPLAY_NEURAL_GRADCHECK_H_
