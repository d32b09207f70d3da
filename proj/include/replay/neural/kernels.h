#ifndef REPLAY_NEURAL_KERNELS_H_
#define REPLAY_NEURAL_KERNELS_H_

#include <span>

namespace replay::neural::kernels {

// Strided row-major views. `stride` is the distance between row starts.
struct ConstMatrixView {
  const double* data = nullptr;
  int rows = 0;
  int cols = 0;
  int stride = 0;

  double at(int r, int c) const { return data[r * stride + c]; }
};

struct MatrixView {
  double* data = nullptr;
  int rows = 0;
  int cols = 0;
  int stride = 0;

  double& at(int r, int c) const { return data[r * stride + c]; }
  operator ConstMatrixView() const { return {data, rows, cols, stride}; }
};

inline ConstMatrixView View(const double* data, int rows, int cols) {
  return {data, rows, cols, cols};
}
inline MatrixView View(double* data, int rows, int cols) {
  return {data, rows, cols, cols};
}

enum class Op { kNone, kTranspose };

// c = op(a) * b, or c += op(a) * b when `accumulate`. With kTranspose `a` is
// stored as (k x m). Every output element accumulates over k in ascending
// order, so the result is independent of the thread count and matches the
// serial reference bit for bit.
void Gemm(ConstMatrixView a, Op op_a, ConstMatrixView b, MatrixView c,
          bool accumulate);

void Transpose(ConstMatrixView in, MatrixView out);

// Sequences are time-major: sample b, time t, channel ch lives at
// x[(b * length + t) * channels + ch]. Patch row (b, t) holds the `extent`
// consecutive time steps starting at t, flattened time-major.
void Im2Col(std::span<const double> x, int batch, int length, int channels,
            int extent, std::span<double> patches);
// Adjoint of Im2Col: overwrites dx with the scatter-sum of dpatches.
void Col2Im(std::span<const double> dpatches, int batch, int length,
            int channels, int extent, std::span<double> dx);

void AddBias(MatrixView m, std::span<const double> bias);
// out[j] = sum over rows of m[i][j], rows in ascending order.
void ColumnSums(ConstMatrixView m, std::span<double> out);

void ReluForward(std::span<double> x);
// Zeroes grad where the forward output was not positive.
void ReluBackward(std::span<const double> output, std::span<double> grad);

// Serial implementations kept as the reference the parallel kernels are
// tested and benchmarked against.
namespace reference {

void Gemm(ConstMatrixView a, Op op_a, ConstMatrixView b, MatrixView c,
          bool accumulate);
void Im2Col(std::span<const double> x, int batch, int length, int channels,
            int extent, std::span<double> patches);
void Col2Im(std::span<const double> dpatches, int batch, int length,
            int channels, int extent, std::span<double> dx);
void ReluForward(std::span<double> x);

}  // namespace reference

}  // namespace replay::neural::kernels

#endif  // REPLAY_NEURAL_KERNELS_H_
