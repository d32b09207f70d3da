#ifndef REPLAY_NEURAL_TENSOR_H_
#define REPLAY_NEURAL_TENSOR_H_

#include <cstddef>
#include <span>
#include <vector>

namespace replay::neural {

// Dense row-major buffer of doubles with a shape.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, double fill = 0.0);
  // Throws ContractError when the value count does not match the shape.
  Tensor(std::vector<int> shape, std::vector<double> values);

  const std::vector<int>& shape() const { return shape_; }
  int dim(int axis) const { return shape_.at(axis); }
  int rank() const { return static_cast<int>(shape_.size()); }
  std::size_t size() const { return values_.size(); }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  // Row `r` of a rank-2 tensor.
  std::span<double> row(int r);
  std::span<const double> row(int r) const;

  bool AllFinite() const;

 private:
  std::vector<int> shape_;
  std::vector<double> values_;
};

}  // namespace replay::neural

#endif  // REPLAY_NEURAL_TENSOR_H_
