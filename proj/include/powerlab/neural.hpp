#pragma once

// Fully connected ReLU network with hand-written backpropagation and Adam.
//
// Parameters live in one contiguous buffer. Layer l owns a weight block of
// fan_in x fan_out doubles stored row-major (row i holds the outgoing weights
// of input unit i, so a forward pass is a sum of axpy calls over rows) followed
// by fan_out biases. Hidden layers use max(0, x); the output layer is linear.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "powerlab/rng.hpp"

namespace powerlab {

class ParameterSet {
 public:
  ParameterSet() = default;
  // All-zero parameters for the given layer widths.
  explicit ParameterSet(std::vector<std::size_t> layer_dims);

  const std::vector<std::size_t>& layer_dims() const { return dims_; }
  std::size_t num_layers() const { return dims_.empty() ? 0 : dims_.size() - 1; }
  std::size_t fan_in(std::size_t layer) const { return dims_[layer]; }
  std::size_t fan_out(std::size_t layer) const { return dims_[layer + 1]; }
  std::size_t input_size() const { return dims_.front(); }
  std::size_t output_size() const { return dims_.back(); }
  std::size_t size() const { return values_.size(); }

  std::span<double> weights(std::size_t layer);
  std::span<const double> weights(std::size_t layer) const;
  std::span<double> biases(std::size_t layer);
  std::span<const double> biases(std::size_t layer) const;
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool same_shape(const ParameterSet& other) const { return dims_ == other.dims_; }
  void fill(double value);

  // Bitwise equality of shapes and values.
  friend bool operator==(const ParameterSet& a, const ParameterSet& b);

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> offsets_;  // start of each layer's weight block
  std::vector<double> values_;
};

class MlpNetwork : public ParameterSet {
 public:
  using ParameterSet::ParameterSet;
};

class GradientSet : public ParameterSet {
 public:
  using ParameterSet::ParameterSet;
  static GradientSet zeros_like(const ParameterSet& p) { return GradientSet(p.layer_dims()); }
};

enum class InitScheme { GlorotUniform, Zero };

MlpNetwork init_network(const std::vector<std::size_t>& layer_dims, Rng& rng,
                        InitScheme scheme = InitScheme::GlorotUniform);

// Row-major activations of a batch, kept for the backward pass.
struct ForwardCache {
  std::size_t batch = 0;
  // activations[0] is the input; activations[l] is the output of layer l
  // (after ReLU for hidden layers). The last entry holds the network output.
  std::vector<std::vector<double>> activations;

  std::span<const double> output() const { return activations.back(); }
  std::span<const double> output_row(std::size_t b) const;
};

ForwardCache forward_batch(const MlpNetwork& net, std::span<const double> inputs,
                           std::size_t batch);
std::vector<double> forward(const MlpNetwork& net, std::span<const double> input);

double mse_loss(std::span<const double> predicted, std::span<const double> target);

// Accumulates parameter gradients of a scalar loss into `grads`, given the
// loss gradient at every output of the batch (row-major, batch x outputs).
void backward_batch(const MlpNetwork& net, const ForwardCache& cache,
                    std::span<const double> output_grad, GradientSet& grads);
GradientSet backward(const MlpNetwork& net, std::span<const double> input,
                     std::span<const double> loss_grad_at_output);

struct AdamState {
  GradientSet first_moment;
  GradientSet second_moment;
  std::uint64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_network(const MlpNetwork& net);
};

// Throws TrainingError when a gradient is NaN or infinite.
void adam_step(MlpNetwork& net, const GradientSet& grads, AdamState& opt, double learning_rate);

// Rescales grads in place so their L2 norm is at most max_norm; returns the
// norm before clipping.
double clip_gradient_norm(GradientSet& grads, double max_norm);

MlpNetwork copy_parameters(const MlpNetwork& source);

// Checkpoint file: 8-byte magic "PWLABQN\0", uint32 format version, uint32
// number of layer widths, that many uint64 widths, then for each layer its
// weights and biases as little-endian IEEE-754 doubles.
inline constexpr std::uint32_t kCheckpointVersion = 1;
void write_checkpoint(const MlpNetwork& net, std::ostream& out);
MlpNetwork read_checkpoint(std::istream& in);
void save_checkpoint(const MlpNetwork& net, const std::filesystem::path& path);
MlpNetwork load_checkpoint(const std::filesystem::path& path);

}  // namespace powerlab
