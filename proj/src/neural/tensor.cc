#include "replay/neural/tensor.h"

#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "replay/errors.h"

namespace replay::neural {
namespace {

std::size_t Volume(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ContractError("negative tensor dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape, double fill)
    : shape_(std::move(shape)), values_(Volume(shape_), fill) {}

Tensor::Tensor(std::vector<int> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != Volume(shape_)) {
    throw ContractError("tensor has " + std::to_string(values_.size()) +
                        " values for a shape of volume " +
                        std::to_string(Volume(shape_)));
  }
}

std::span<double> Tensor::row(int r) {
  const auto cols = static_cast<std::size_t>(shape_.at(1));
  return std::span<double>(values_).subspan(r * cols, cols);
}

std::span<const double> Tensor::row(int r) const {
  const auto cols = static_cast<std::size_t>(shape_.at(1));
  return std::span<const double>(values_).subspan(r * cols, cols);
}

bool Tensor::AllFinite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace replay::neural
