#include "powerlab/neural.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "powerlab/errors.hpp"
#include "powerlab/kernels.hpp"

namespace powerlab {

ParameterSet::ParameterSet(std::vector<std::size_t> layer_dims) : dims_(std::move(layer_dims)) {
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    offsets_.push_back(total);
    total += dims_[l] * dims_[l + 1] + dims_[l + 1];
  }
  values_.assign(total, 0.0);
}

std::span<double> ParameterSet::weights(std::size_t layer) {
  return std::span<double>(values_).subspan(offsets_[layer], fan_in(layer) * fan_out(layer));
}

std::span<const double> ParameterSet::weights(std::size_t layer) const {
  return std::span<const double>(values_).subspan(offsets_[layer],
                                                  fan_in(layer) * fan_out(layer));
}

std::span<double> ParameterSet::biases(std::size_t layer) {
  return std::span<double>(values_).subspan(offsets_[layer] + fan_in(layer) * fan_out(layer),
                                            fan_out(layer));
}

std::span<const double> ParameterSet::biases(std::size_t layer) const {
  return std::span<const double>(values_).subspan(
      offsets_[layer] + fan_in(layer) * fan_out(layer), fan_out(layer));
}

void ParameterSet::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

bool operator==(const ParameterSet& a, const ParameterSet& b) {
  if (a.dims_ != b.dims_) return false;
  return std::equal(a.values_.begin(), a.values_.end(), b.values_.begin(), b.values_.end(),
                    [](double x, double y) {
                      return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
                    });
}

MlpNetwork init_network(const std::vector<std::size_t>& layer_dims, Rng& rng,
                        InitScheme scheme) {
  if (layer_dims.size() < 2) throw ConfigError("init_network: need at least two layer widths");
  for (std::size_t d : layer_dims) {
    if (d == 0) throw ConfigError("init_network: layer widths must be positive");
  }
  MlpNetwork net(layer_dims);
  if (scheme == InitScheme::Zero) return net;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const double bound =
        std::sqrt(6.0 / static_cast<double>(net.fan_in(l) + net.fan_out(l)));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : net.weights(l)) w = dist(rng);
  }
  return net;
}

std::span<const double> ForwardCache::output_row(std::size_t b) const {
  const std::size_t width = activations.back().size() / batch;
  return std::span<const double>(activations.back()).subspan(b * width, width);
}

ForwardCache forward_batch(const MlpNetwork& net, std::span<const double> inputs,
                           std::size_t batch) {
  if (batch == 0 || inputs.size() != batch * net.input_size()) {
    throw ContractViolation("forward: input has " + std::to_string(inputs.size()) +
                            " values, expected " + std::to_string(batch * net.input_size()));
  }
  const kernels::KernelTable& k = kernels::active();
  ForwardCache cache;
  cache.batch = batch;
  cache.activations.reserve(net.num_layers() + 1);
  cache.activations.emplace_back(inputs.begin(), inputs.end());

  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const std::size_t in = net.fan_in(l);
    const std::size_t out = net.fan_out(l);
    const auto w = net.weights(l);
    const auto bias = net.biases(l);
    const std::vector<double>& x = cache.activations[l];
    std::vector<double> y(batch * out);
    for (std::size_t b = 0; b < batch; ++b) {
      double* row = y.data() + b * out;
      std::copy(bias.begin(), bias.end(), row);
      k.accumulate_rows(x.data() + b * in, 1, in, w.data(), out, row, out);
    }
    if (l + 1 < net.num_layers()) k.relu(y.data(), y.size());
    cache.activations.push_back(std::move(y));
  }
  return cache;
}

std::vector<double> forward(const MlpNetwork& net, std::span<const double> input) {
  ForwardCache cache = forward_batch(net, input, 1);
  return std::move(cache.activations.back());
}

double mse_loss(std::span<const double> predicted, std::span<const double> target) {
  if (predicted.size() != target.size()) {
    throw ContractViolation("mse_loss: length mismatch");
  }
  if (predicted.empty()) throw ContractViolation("mse_loss: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - target[i];
    sum += d * d;
  }
  return sum / static_cast<double>(predicted.size());
}

void backward_batch(const MlpNetwork& net, const ForwardCache& cache,
                    std::span<const double> output_grad, GradientSet& grads) {
  const std::size_t batch = cache.batch;
  if (!grads.same_shape(net)) throw ContractViolation("backward: gradient shape mismatch");
  if (cache.activations.size() != net.num_layers() + 1) {
    throw ContractViolation("backward: cache does not belong to this network");
  }
  if (output_grad.size() != batch * net.output_size()) {
    throw ContractViolation("backward: output gradient has wrong size");
  }
  const kernels::KernelTable& k = kernels::active();

  std::vector<double> delta(output_grad.begin(), output_grad.end());
  std::vector<double> transposed;
  for (std::size_t l = net.num_layers(); l-- > 0;) {
    const std::size_t in = net.fan_in(l);
    const std::size_t out = net.fan_out(l);
    const std::vector<double>& x = cache.activations[l];
    auto dw = grads.weights(l);
    auto db = grads.biases(l);

    for (std::size_t b = 0; b < batch; ++b) {
      k.axpy(1.0, delta.data() + b * out, db.data(), out);
    }
    // Row i of dW gathers x[b, i] * delta[b, :] over the batch.
    for (std::size_t i = 0; i < in; ++i) {
      k.accumulate_rows(x.data() + i, in, batch, delta.data(), out, dw.data() + i * out, out);
    }
    if (l == 0) break;

    // delta_prev[b, :] = sum_o delta[b, o] * W[:, o], written as a weighted sum
    // of the rows of W^T, then gated by the ReLU of layer l-1.
    const auto w = net.weights(l);
    transposed.resize(in * out);
    for (std::size_t i = 0; i < in; ++i) {
      for (std::size_t o = 0; o < out; ++o) transposed[o * in + i] = w[i * out + o];
    }
    std::vector<double> prev(batch * in, 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
      k.accumulate_rows(delta.data() + b * out, 1, out, transposed.data(), in,
                        prev.data() + b * in, in);
    }
    k.relu_mask(x.data(), prev.data(), prev.size());
    delta = std::move(prev);
  }
}

GradientSet backward(const MlpNetwork& net, std::span<const double> input,
                     std::span<const double> loss_grad_at_output) {
  const ForwardCache cache = forward_batch(net, input, 1);
  GradientSet grads = GradientSet::zeros_like(net);
  backward_batch(net, cache, loss_grad_at_output, grads);
  return grads;
}

AdamState AdamState::for_network(const MlpNetwork& net) {
  AdamState s;
  s.first_moment = GradientSet::zeros_like(net);
  s.second_moment = GradientSet::zeros_like(net);
  return s;
}

void adam_step(MlpNetwork& net, const GradientSet& grads, AdamState& opt, double learning_rate) {
  if (!(learning_rate > 0.0)) throw ConfigError("adam_step: learning_rate must be positive");
  if (!grads.same_shape(net) || !opt.first_moment.same_shape(net) ||
      !opt.second_moment.same_shape(net)) {
    throw ContractViolation("adam_step: parameter shapes differ");
  }
  const auto g = grads.values();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) {
      throw TrainingError("adam_step: non-finite gradient at parameter " + std::to_string(i) +
                          " (optimizer step " + std::to_string(opt.step_count + 1) + ")");
    }
  }
  ++opt.step_count;
  const double t = static_cast<double>(opt.step_count);
  const kernels::AdamCoefficients c{
      opt.beta1,
      opt.beta2,
      opt.epsilon,
      learning_rate,
      1.0 - std::pow(opt.beta1, t),
      1.0 - std::pow(opt.beta2, t),
  };
  kernels::active().adam(c, g.data(), opt.first_moment.values().data(),
                         opt.second_moment.values().data(), net.values().data(), g.size());
}

double clip_gradient_norm(GradientSet& grads, double max_norm) {
  double sq = 0.0;
  for (double g : grads.values()) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& g : grads.values()) g *= scale;
  }
  return norm;
}

MlpNetwork copy_parameters(const MlpNetwork& source) { return source; }

}  // namespace powerlab
