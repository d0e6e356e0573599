#include "powerlab/kernels.hpp"

#include <cmath>

namespace powerlab::kernels::scalar {
namespace {

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = y[i] + alpha * x[i];
  }
}

void accumulate_rows(const double* coeffs, std::size_t coeff_stride, std::size_t count,
                     const double* rows, std::size_t row_stride, double* y, std::size_t n) {
  for (std::size_t i = 0; i < count; ++i) {
    const double c = coeffs[i * coeff_stride];
    if (c == 0.0) continue;
    const double* row = rows + i * row_stride;
    for (std::size_t o = 0; o < n; ++o) {
      y[o] = y[o] + c * row[o];
    }
  }
}

void relu(double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    // Matches _mm256_max_pd(y, 0): returns the second operand when y is NaN.
    y[i] = y[i] > 0.0 ? y[i] : 0.0;
  }
}

void relu_mask(const double* activation, double* grad, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!(activation[i] > 0.0)) grad[i] = 0.0;
  }
}

void adam(const AdamCoefficients& c, const double* grad, double* m, double* v, double* param,
          std::size_t n) {
  const double one_minus_b1 = 1.0 - c.beta1;
  const double one_minus_b2 = 1.0 - c.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + one_minus_b1 * g;
    v[i] = c.beta2 * v[i] + one_minus_b2 * (g * g);
    const double m_hat = m[i] / c.bias_correction1;
    const double v_hat = v[i] / c.bias_correction2;
    param[i] = param[i] - c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

const KernelTable kTable{Backend::Scalar, &axpy, &accumulate_rows, &relu, &relu_mask, &adam};

}  // namespace

const KernelTable& table() { return kTable; }

}  // namespace powerlab::kernels::scalar
