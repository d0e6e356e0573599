#pragma once

// Dense double-precision kernels used by the Q-network and the optimizer.
//
// Every kernel is element-wise: each output element is produced by the same
// sequence of IEEE operations regardless of vector width, so the scalar and
// SIMD variants agree bit-for-bit. Reductions are kept out of this table on
// purpose; callers that need a dot product restructure it as a series of
// axpy calls over a transposed operand.

#include <cstddef>
#include <span>
#include <string_view>

namespace powerlab::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct AdamCoefficients {
  double beta1;
  double beta2;
  double epsilon;
  double learning_rate;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

struct KernelTable {
  Backend backend;
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y[o] += sum_i coeffs[i * coeff_stride] * rows[i * row_stride + o] for
  // o < n, summing i in ascending order and skipping zero coefficients.
  void (*accumulate_rows)(const double* coeffs, std::size_t coeff_stride, std::size_t count,
                          const double* rows, std::size_t row_stride, double* y, std::size_t n);
  // y = max(y, 0)
  void (*relu)(double* y, std::size_t n);
  // grad[i] = 0 wherever activation[i] <= 0
  void (*relu_mask)(const double* activation, double* grad, std::size_t n);
  // Adam moment update and parameter step with bias correction.
  void (*adam)(const AdamCoefficients& c, const double* grad, double* m, double* v,
               double* param, std::size_t n);
};

namespace scalar {
const KernelTable& table();
}
#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
const KernelTable& table();
}
#endif
#if defined(__aarch64__)
namespace neon {
const KernelTable& table();
}
#endif

// Best table for the running CPU, unless overridden with select_backend() or
// the POWERLAB_KERNELS environment variable ("scalar", "avx2", "neon").
const KernelTable& active();

// Throws std::invalid_argument if the backend is not supported here.
void select_backend(Backend backend);
bool backend_supported(Backend backend);

std::string_view backend_name(Backend backend);
Backend parse_backend(std::string_view name);

// Convenience wrappers over active().
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), y.size());
}

}  // namespace powerlab::kernels
