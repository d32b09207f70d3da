#include "replay/neural/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "replay/rng.h"

namespace replay::neural {

GradCheckReport GradCheck(const NetworkSpec& spec, double tolerance,
                          const GradCheckOptions& options) {
  std::mt19937_64 rng(options.seed);
  Network net(spec, rng());
  const int width = spec.input.size();
  Tensor inputs({options.batch, width});
  for (double& x : inputs.values()) {
    x = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  }
  std::vector<Action> targets;
  for (int b = 0; b < options.batch; ++b) {
    targets.push_back(rng() & 1 ? Action::kOne : Action::kZero);
  }
  const Tensor onehot = OneHot(targets);
  const ForwardOptions opts{spec.dropout > 0.0, rng()};

  net.LossAndGradient(inputs, onehot, opts);
  const auto base_pattern = net.ActivationPattern(inputs, opts);

  GradCheckReport report;
  report.tolerance = tolerance;
  for (Parameter& p : net.parameters()) {
    const std::vector<double> analytic = p.grad;
    std::vector<std::size_t> entries(p.value.size());
    std::iota(entries.begin(), entries.end(), 0);
    if (entries.size() > static_cast<std::size_t>(options.samples_per_tensor)) {
      Shuffle(std::span<std::size_t>(entries), rng);
      entries.resize(options.samples_per_tensor);
    }
    for (std::size_t j : entries) {
      const double saved = p.value[j];
      p.value[j] = saved + options.step;
      const bool kink_up = net.ActivationPattern(inputs, opts) != base_pattern;
      const double up = net.Loss(inputs, onehot, opts);
      p.value[j] = saved - options.step;
      const bool kink_down =
          net.ActivationPattern(inputs, opts) != base_pattern;
      const double down = net.Loss(inputs, onehot, opts);
      p.value[j] = saved;
      if (kink_up || kink_down) {
        ++report.skipped;
        continue;
      }
      const double numeric = (up - down) / (2.0 * options.step);
      const double a = analytic[j];
      const double rel = std::abs(a - numeric) /
                         std::max({std::abs(a), std::abs(numeric), 1e-6});
      if (++report.checked == 1 || rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_parameter = p.name;
      }
    }
  }
  report.passed =
      report.checked > 0 && report.max_relative_error < tolerance;
  return report;
}

}  // namespace replay::neural
