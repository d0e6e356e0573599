#include "powerlab/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace powerlab::kernels::avx2 {
namespace {

constexpr std::size_t kLanes = 4;

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d vy = _mm256_loadu_pd(y + i);
    const __m256d vx = _mm256_loadu_pd(x + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(a, vx));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) {
    y[i] = y[i] + alpha * x[i];
  }
}

// Output columns are processed in blocks of 16 held in four registers while
// the coefficient loop runs, so each block of y is loaded and stored once.
void accumulate_rows(const double* coeffs, std::size_t coeff_stride, std::size_t count,
                     const double* rows, std::size_t row_stride, double* y, std::size_t n) {
  constexpr std::size_t kBlock = 4 * kLanes;
  std::size_t o = 0;
  for (; o + kBlock <= n; o += kBlock) {
    __m256d acc0 = _mm256_loadu_pd(y + o);
    __m256d acc1 = _mm256_loadu_pd(y + o + 4);
    __m256d acc2 = _mm256_loadu_pd(y + o + 8);
    __m256d acc3 = _mm256_loadu_pd(y + o + 12);
    for (std::size_t i = 0; i < count; ++i) {
      const double c = coeffs[i * coeff_stride];
      if (c == 0.0) continue;
      const __m256d vc = _mm256_set1_pd(c);
      const double* row = rows + i * row_stride + o;
      acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(vc, _mm256_loadu_pd(row)));
      acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(vc, _mm256_loadu_pd(row + 4)));
      acc2 = _mm256_add_pd(acc2, _mm256_mul_pd(vc, _mm256_loadu_pd(row + 8)));
      acc3 = _mm256_add_pd(acc3, _mm256_mul_pd(vc, _mm256_loadu_pd(row + 12)));
    }
    _mm256_storeu_pd(y + o, acc0);
    _mm256_storeu_pd(y + o + 4, acc1);
    _mm256_storeu_pd(y + o + 8, acc2);
    _mm256_storeu_pd(y + o + 12, acc3);
  }
  for (; o + kLanes <= n; o += kLanes) {
    __m256d acc = _mm256_loadu_pd(y + o);
    for (std::size_t i = 0; i < count; ++i) {
      const double c = coeffs[i * coeff_stride];
      if (c == 0.0) continue;
      acc = _mm256_add_pd(acc,
                          _mm256_mul_pd(_mm256_set1_pd(c), _mm256_loadu_pd(rows + i * row_stride + o)));
    }
    _mm256_storeu_pd(y + o, acc);
  }
  for (; o < n; ++o) {
    double acc = y[o];
    for (std::size_t i = 0; i < count; ++i) {
      const double c = coeffs[i * coeff_stride];
      if (c == 0.0) continue;
      acc = acc + c * rows[i * row_stride + o];
    }
    y[o] = acc;
  }
}

void relu(double* y, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(y + i), zero));
  }
  for (; i < n; ++i) {
    y[i] = y[i] > 0.0 ? y[i] : 0.0;
  }
}

void relu_mask(const double* activation, double* grad, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d keep = _mm256_cmp_pd(_mm256_loadu_pd(activation + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(grad + i, _mm256_and_pd(_mm256_loadu_pd(grad + i), keep));
  }
  for (; i < n; ++i) {
    if (!(activation[i] > 0.0)) grad[i] = 0.0;
  }
}

void adam(const AdamCoefficients& c, const double* grad, double* m, double* v, double* param,
          std::size_t n) {
  const double one_minus_b1 = 1.0 - c.beta1;
  const double one_minus_b2 = 1.0 - c.beta2;
  const __m256d b1 = _mm256_set1_pd(c.beta1);
  const __m256d b2 = _mm256_set1_pd(c.beta2);
  const __m256d omb1 = _mm256_set1_pd(one_minus_b1);
  const __m256d omb2 = _mm256_set1_pd(one_minus_b2);
  const __m256d bc1 = _mm256_set1_pd(c.bias_correction1);
  const __m256d bc2 = _mm256_set1_pd(c.bias_correction2);
  const __m256d lr = _mm256_set1_pd(c.learning_rate);
  const __m256d eps = _mm256_set1_pd(c.epsilon);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    __m256d vm = _mm256_loadu_pd(m + i);
    __m256d vv = _mm256_loadu_pd(v + i);
    vm = _mm256_add_pd(_mm256_mul_pd(b1, vm), _mm256_mul_pd(omb1, g));
    vv = _mm256_add_pd(_mm256_mul_pd(b2, vv), _mm256_mul_pd(omb2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, vm);
    _mm256_storeu_pd(v + i, vv);
    const __m256d m_hat = _mm256_div_pd(vm, bc1);
    const __m256d v_hat = _mm256_div_pd(vv, bc2);
    const __m256d step =
        _mm256_div_pd(_mm256_mul_pd(lr, m_hat), _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps));
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
  }
  for (; i < n; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + one_minus_b1 * g;
    v[i] = c.beta2 * v[i] + one_minus_b2 * (g * g);
    const double m_hat = m[i] / c.bias_correction1;
    const double v_hat = v[i] / c.bias_correction2;
    param[i] = param[i] - c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

const KernelTable kTable{Backend::Avx2, &axpy, &accumulate_rows, &relu, &relu_mask, &adam};

}  // namespace

const KernelTable& table() { return kTable; }

}  // namespace powerlab::kernels::avx2
