#include "replay/neural/kernels.h"

#include <algorithm>
#include <cstddef>
#include <string>

#include "replay/errors.h"

namespace replay::neural::kernels {
namespace {

constexpr long kParallelWork = 1L << 15;

void CheckGemm(ConstMatrixView a, Op op_a, ConstMatrixView b, MatrixView c) {
  const int m = op_a == Op::kNone ? a.rows : a.cols;
  const int k = op_a == Op::kNone ? a.cols : a.rows;
  if (m != c.rows || k != b.rows || b.cols != c.cols) {
    throw ContractError("gemm: shape mismatch (" + std::to_string(m) + "x" +
                        std::to_string(k) + " * " + std::to_string(b.rows) +
                        "x" + std::to_string(b.cols) + " -> " +
                        std::to_string(c.rows) + "x" +
                        std::to_string(c.cols) + ")");
  }
}

void CheckIm2Col(std::size_t x_size, std::size_t patch_size, int batch,
                 int length, int channels, int extent) {
  if (extent < 1 || length < extent) {
    throw ContractError("im2col: extent longer than the sequence");
  }
  const std::size_t out_len = length - extent + 1;
  if (x_size != static_cast<std::size_t>(batch) * length * channels ||
      patch_size != batch * out_len * extent * channels) {
    throw ContractError("im2col: buffer sizes do not match the shape");
  }
}

// Rows [i0, i0 + rows) of c, 1 <= rows <= 4.
template <int kRows>
void GemmRows(ConstMatrixView a, Op op_a, ConstMatrixView b, MatrixView c,
              int i0, int k, bool accumulate) {
  const int n = c.cols;
  double* out[kRows];
  for (int r = 0; r < kRows; ++r) {
    out[r] = c.data + static_cast<std::ptrdiff_t>(i0 + r) * c.stride;
    if (!accumulate) std::fill(out[r], out[r] + n, 0.0);
  }
  for (int kk = 0; kk < k; ++kk) {
    double coef[kRows];
    for (int r = 0; r < kRows; ++r) {
      coef[r] = op_a == Op::kNone ? a.at(i0 + r, kk) : a.at(kk, i0 + r);
    }
    const double* brow = b.data + static_cast<std::ptrdiff_t>(kk) * b.stride;
    for (int r = 0; r < kRows; ++r) {
      double* __restrict__ dst = out[r];
      const double s = coef[r];
      for (int j = 0; j < n; ++j) dst[j] += s * brow[j];
    }
  }
}

}  // namespace

void Gemm(ConstMatrixView a, Op op_a, ConstMatrixView b, MatrixView c,
          bool accumulate) {
  CheckGemm(a, op_a, b, c);
  const int m = c.rows;
  const int k = b.rows;
  const int blocks = (m + 3) / 4;
  const long work = static_cast<long>(m) * c.cols * std::max(k, 1);
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (int blk = 0; blk < blocks; ++blk) {
    const int i0 = blk * 4;
    switch (std::min(4, m - i0)) {
      case 4: GemmRows<4>(a, op_a, b, c, i0, k, accumulate); break;
      case 3: GemmRows<3>(a, op_a, b, c, i0, k, accumulate); break;
      case 2: GemmRows<2>(a, op_a, b, c, i0, k, accumulate); break;
      default: GemmRows<1>(a, op_a, b, c, i0, k, accumulate); break;
    }
  }
}

void Transpose(ConstMatrixView in, MatrixView out) {
  if (in.rows != out.cols || in.cols != out.rows) {
    throw ContractError("transpose: shape mismatch");
  }
#pragma omp parallel for schedule(static) \
    if (static_cast<long>(in.rows) * in.cols > kParallelWork)
  for (int r = 0; r < in.rows; ++r) {
    for (int c = 0; c < in.cols; ++c) out.at(c, r) = in.at(r, c);
  }
}

void Im2Col(std::span<const double> x, int batch, int length, int channels,
            int extent, std::span<double> patches) {
  CheckIm2Col(x.size(), patches.size(), batch, length, channels, extent);
  const int out_len = length - extent + 1;
  const std::size_t width = static_cast<std::size_t>(extent) * channels;
#pragma omp parallel for schedule(static) if (patches.size() > kParallelWork)
  for (int b = 0; b < batch; ++b) {
    for (int t = 0; t < out_len; ++t) {
      const double* src = x.data() + (static_cast<std::size_t>(b) * length + t) *
                                         channels;
      double* dst = patches.data() +
                    (static_cast<std::size_t>(b) * out_len + t) * width;
      std::copy(src, src + width, dst);
    }
  }
}

void Col2Im(std::span<const double> dpatches, int batch, int length,
            int channels, int extent, std::span<double> dx) {
  CheckIm2Col(dx.size(), dpatches.size(), batch, length, channels, extent);
  const int out_len = length - extent + 1;
  const std::size_t width = static_cast<std::size_t>(extent) * channels;
#pragma omp parallel for schedule(static) if (dpatches.size() > kParallelWork)
  for (int b = 0; b < batch; ++b) {
    double* dst = dx.data() + static_cast<std::size_t>(b) * length * channels;
    std::fill(dst, dst + static_cast<std::size_t>(length) * channels, 0.0);
    for (int t = 0; t < out_len; ++t) {
      const double* src =
          dpatches.data() + (static_cast<std::size_t>(b) * out_len + t) * width;
      double* window = dst + static_cast<std::size_t>(t) * channels;
      for (std::size_t j = 0; j < width; ++j) window[j] += src[j];
    }
  }
}

void AddBias(MatrixView m, std::span<const double> bias) {
  if (static_cast<int>(bias.size()) != m.cols) {
    throw ContractError("bias length does not match the matrix");
  }
  for (int r = 0; r < m.rows; ++r) {
    double* row = m.data + static_cast<std::ptrdiff_t>(r) * m.stride;
    for (int c = 0; c < m.cols; ++c) row[c] += bias[c];
  }
}

void ColumnSums(ConstMatrixView m, std::span<double> out) {
  if (static_cast<int>(out.size()) != m.cols) {
    throw ContractError("column sum length does not match the matrix");
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (int r = 0; r < m.rows; ++r) {
    const double* row = m.data + static_cast<std::ptrdiff_t>(r) * m.stride;
    for (int c = 0; c < m.cols; ++c) out[c] += row[c];
  }
}

void ReluForward(std::span<double> x) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) if (n > kParallelWork)
  for (std::ptrdiff_t i = 0; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void ReluBackward(std::span<const double> output, std::span<double> grad) {
  if (output.size() != grad.size()) {
    throw ContractError("relu backward: size mismatch");
  }
  const auto n = static_cast<std::ptrdiff_t>(grad.size());
#pragma omp parallel for schedule(static) if (n > kParallelWork)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    grad[i] = output[i] > 0.0 ? grad[i] : 0.0;
  }
}

namespace reference {

void Gemm(ConstMatrixView a, Op op_a, ConstMatrixView b, MatrixView c,
          bool accumulate) {
  CheckGemm(a, op_a, b, c);
  for (int i = 0; i < c.rows; ++i) {
    for (int j = 0; j < c.cols; ++j) {
      double sum = accumulate ? c.at(i, j) : 0.0;
      for (int kk = 0; kk < b.rows; ++kk) {
        const double aik = op_a == Op::kNone ? a.at(i, kk) : a.at(kk, i);
        sum += aik * b.at(kk, j);
      }
      c.at(i, j) = sum;
    }
  }
}

void Im2Col(std::span<const double> x, int batch, int length, int channels,
            int extent, std::span<double> patches) {
  CheckIm2Col(x.size(), patches.size(), batch, length, channels, extent);
  const int out_len = length - extent + 1;
  std::size_t p = 0;
  for (int b = 0; b < batch; ++b) {
    for (int t = 0; t < out_len; ++t) {
      for (int j = 0; j < extent; ++j) {
        for (int ch = 0; ch < channels; ++ch) {
          patches[p++] =
              x[(static_cast<std::size_t>(b) * length + t + j) * channels + ch];
        }
      }
    }
  }
}

void Col2Im(std::span<const double> dpatches, int batch, int length,
            int channels, int extent, std::span<double> dx) {
  CheckIm2Col(dx.size(), dpatches.size(), batch, length, channels, extent);
  std::fill(dx.begin(), dx.end(), 0.0);
  const int out_len = length - extent + 1;
  std::size_t p = 0;
  for (int b = 0; b < batch; ++b) {
    for (int t = 0; t < out_len; ++t) {
      for (int j = 0; j < extent; ++j) {
        for (int ch = 0; ch < channels; ++ch) {
          dx[(static_cast<std::size_t>(b) * length + t + j) * channels + ch] +=
              dpatches[p++];
        }
      }
    }
  }
}

void ReluForward(std::span<double> x) {
  for (double& v : x) v = v > 0.0 ? v : 0.0;
}

}  // namespace reference
}  // namespace replay::neural::kernels
