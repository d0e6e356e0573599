#include "powerlab/kernels.hpp"

#include <arm_neon.h>

#include <cmath>

namespace powerlab::kernels::neon {
namespace {

constexpr std::size_t kLanes = 2;

// vmulq/vaddq are used instead of vfmaq so results round like the scalar path.
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t a = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const float64x2_t vy = vld1q_f64(y + i);
    vst1q_f64(y + i, vaddq_f64(vy, vmulq_f64(a, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) {
    y[i] = y[i] + alpha * x[i];
  }
}

void accumulate_rows(const double* coeffs, std::size_t coeff_stride, std::size_t count,
                     const double* rows, std::size_t row_stride, double* y, std::size_t n) {
  constexpr std::size_t kBlock = 4 * kLanes;
  std::size_t o = 0;
  for (; o + kBlock <= n; o += kBlock) {
    float64x2_t acc0 = vld1q_f64(y + o);
    float64x2_t acc1 = vld1q_f64(y + o + 2);
    float64x2_t acc2 = vld1q_f64(y + o + 4);
    float64x2_t acc3 = vld1q_f64(y + o + 6);
    for (std::size_t i = 0; i < count; ++i) {
      const double c = coeffs[i * coeff_stride];
      if (c == 0.0) continue;
      const float64x2_t vc = vdupq_n_f64(c);
      const double* row = rows + i * row_stride + o;
      acc0 = vaddq_f64(acc0, vmulq_f64(vc, vld1q_f64(row)));
      acc1 = vaddq_f64(acc1, vmulq_f64(vc, vld1q_f64(row + 2)));
      acc2 = vaddq_f64(acc2, vmulq_f64(vc, vld1q_f64(row + 4)));
      acc3 = vaddq_f64(acc3, vmulq_f64(vc, vld1q_f64(row + 6)));
    }
    vst1q_f64(y + o, acc0);
    vst1q_f64(y + o + 2, acc1);
    vst1q_f64(y + o + 4, acc2);
    vst1q_f64(y + o + 6, acc3);
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
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const float64x2_t vy = vld1q_f64(y + i);
    vst1q_f64(y + i, vbslq_f64(vcgtq_f64(vy, zero), vy, zero));
  }
  for (; i < n; ++i) {
    y[i] = y[i] > 0.0 ? y[i] : 0.0;
  }
}

void relu_mask(const double* activation, double* grad, std::size_t n) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const uint64x2_t keep = vcgtq_f64(vld1q_f64(activation + i), zero);
    vst1q_f64(grad + i, vbslq_f64(keep, vld1q_f64(grad + i), zero));
  }
  for (; i < n; ++i) {
    if (!(activation[i] > 0.0)) grad[i] = 0.0;
  }
}

void adam(const AdamCoefficients& c, const double* grad, double* m, double* v, double* param,
          std::size_t n) {
  const double one_minus_b1 = 1.0 - c.beta1;
  const double one_minus_b2 = 1.0 - c.beta2;
  const float64x2_t b1 = vdupq_n_f64(c.beta1);
  const float64x2_t b2 = vdupq_n_f64(c.beta2);
  const float64x2_t omb1 = vdupq_n_f64(one_minus_b1);
  const float64x2_t omb2 = vdupq_n_f64(one_minus_b2);
  const float64x2_t bc1 = vdupq_n_f64(c.bias_correction1);
  const float64x2_t bc2 = vdupq_n_f64(c.bias_correction2);
  const float64x2_t lr = vdupq_n_f64(c.learning_rate);
  const float64x2_t eps = vdupq_n_f64(c.epsilon);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const float64x2_t g = vld1q_f64(grad + i);
    float64x2_t vm = vaddq_f64(vmulq_f64(b1, vld1q_f64(m + i)), vmulq_f64(omb1, g));
    float64x2_t vv =
        vaddq_f64(vmulq_f64(b2, vld1q_f64(v + i)), vmulq_f64(omb2, vmulq_f64(g, g)));
    vst1q_f64(m + i, vm);
    vst1q_f64(v + i, vv);
    const float64x2_t m_hat = vdivq_f64(vm, bc1);
    const float64x2_t v_hat = vdivq_f64(vv, bc2);
    const float64x2_t step =
        vdivq_f64(vmulq_f64(lr, m_hat), vaddq_f64(vsqrtq_f64(v_hat), eps));
    vst1q_f64(param + i, vsubq_f64(vld1q_f64(param + i), step));
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

const KernelTable kTable{Backend::Neon, &axpy, &accumulate_rows, &relu, &relu_mask, &adam};

}  // namespace

const KernelTable& table() { return kTable; }

}  // namespace powerlab::kernels::neon
