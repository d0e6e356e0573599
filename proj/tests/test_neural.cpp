#include <cmath>
#include <sstream>

#include "doctest.h"
#include "powerlab/errors.hpp"
#include "powerlab/neural.hpp"

using namespace powerlab;

namespace {

double loss_of(const MlpNetwork& net, std::span<const double> x, std::span<const double> y) {
  return mse_loss(forward(net, x), y);
}

}  // namespace

TEST_SUITE("neural") {
  TEST_CASE("forward on a hand-built network") {
    MlpNetwork net({2, 2, 1});
    // layer 0: W = [[1, -1], [2, 1]] (row i = input i), b = [0, 0.5]
    auto w0 = net.weights(0);
    w0[0] = 1; w0[1] = -1; w0[2] = 2; w0[3] = 1;
    net.biases(0)[1] = 0.5;
    auto w1 = net.weights(1);
    w1[0] = 3; w1[1] = -2;
    net.biases(1)[0] = 0.25;
    // x = (1, -1): pre = (1 - 2, -1 - 1 + 0.5) = (-1, -1.5) -> relu (0, 0)
    CHECK(forward(net, std::vector<double>{1, -1})[0] == 0.25);
    // x = (1, 1): pre = (3, 0.5) -> out = 9 - 1 + 0.25
    CHECK(forward(net, std::vector<double>{1, 1})[0] == 8.25);
  }

  TEST_CASE("batch forward matches single-sample forward") {
    Rng rng(3);
    const MlpNetwork net = init_network({3, 8, 5}, rng);
    const std::vector<double> xs{0.1, 0.2, 0.3, 0.9, 0.5, 0.4};
    const ForwardCache cache = forward_batch(net, xs, 2);
    for (std::size_t b = 0; b < 2; ++b) {
      const auto single = forward(net, std::span(xs).subspan(3 * b, 3));
      const auto row = cache.output_row(b);
      CHECK(std::equal(single.begin(), single.end(), row.begin()));
    }
  }

  TEST_CASE("glorot init bounds and zero biases") {
    Rng rng(1);
    const MlpNetwork net = init_network({3, 64, 128, 64}, rng);
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      const double bound = std::sqrt(6.0 / static_cast<double>(net.fan_in(l) + net.fan_out(l)));
      for (double w : net.weights(l)) CHECK(std::abs(w) <= bound);
      for (double b : net.biases(l)) CHECK(b == 0.0);
    }
    CHECK(net.size() == 3 * 64 + 64 + 64 * 128 + 128 + 128 * 64 + 64);
  }

  TEST_CASE("gradients match central differences") {
    Rng rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int checked = 0;
    for (int trial = 0; trial < 20; ++trial) {
      const std::vector<std::size_t> dims{3, 4 + std::size_t(trial % 3), 5, 2 + std::size_t(trial % 4)};
      const MlpNetwork net = init_network(dims, rng);
      std::vector<double> x(3), y(dims.back());
      for (double& v : x) v = u(rng);
      for (double& v : y) v = u(rng);
      const auto out = forward(net, x);
      std::vector<double> g(out.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = 2.0 * (out[i] - y[i]) / static_cast<double>(g.size());
      }
      const GradientSet grad = backward(net, x, g);
      for (std::size_t p = 0; p < net.size(); p += 7) {
        MlpNetwork plus = copy_parameters(net), minus = copy_parameters(net);
        const double h = 1e-6;
        plus.values()[p] += h;
        minus.values()[p] -= h;
        const double numeric = (loss_of(plus, x, y) - loss_of(minus, x, y)) / (2 * h);
        const double analytic = grad.values()[p];
        const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
        CHECK(std::abs(numeric - analytic) / scale <= 1e-4);
        ++checked;
      }
    }
    CHECK(checked >= 100);
  }

  TEST_CASE("adam first step moves by the learning rate") {
    MlpNetwork net({1, 1});
    net.weights(0)[0] = 1.0;
    GradientSet g = GradientSet::zeros_like(net);
    g.weights(0)[0] = 4.0;
    g.biases(0)[0] = -0.5;
    AdamState opt = AdamState::for_network(net);
    adam_step(net, g, opt, 0.01);
    CHECK(net.weights(0)[0] == doctest::Approx(0.99).epsilon(1e-9));
    CHECK(net.biases(0)[0] == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(opt.step_count == 1);
  }

  TEST_CASE("adam rejects non-finite gradients and bad rates") {
    MlpNetwork net({1, 1});
    GradientSet g = GradientSet::zeros_like(net);
    AdamState opt = AdamState::for_network(net);
    CHECK_THROWS_AS(adam_step(net, g, opt, 0.0), ConfigError);
    g.weights(0)[0] = std::nan("");
    CHECK_THROWS_AS(adam_step(net, g, opt, 1e-3), TrainingError);
  }

  TEST_CASE("gradient clipping") {
    GradientSet g({1, 2});
    g.weights(0)[0] = 3.0;
    g.weights(0)[1] = 4.0;
    CHECK(clip_gradient_norm(g, 1.0) == doctest::Approx(5.0));
    CHECK(g.weights(0)[0] == doctest::Approx(0.6));
    CHECK(g.weights(0)[1] == doctest::Approx(0.8));
    CHECK(clip_gradient_norm(g, 10.0) == doctest::Approx(1.0));
    CHECK(g.weights(0)[0] == doctest::Approx(0.6));
  }

  TEST_CASE("checkpoints round-trip bit-exactly") {
    Rng rng(5);
    const MlpNetwork net = init_network({3, 6, 4}, rng);
    std::stringstream buf;
    write_checkpoint(net, buf);
    const std::string bytes = buf.str();
    CHECK(bytes.size() == 8 + 4 + 4 + 3 * 8 + net.size() * 8);
    std::stringstream in(bytes);
    CHECK(read_checkpoint(in) == net);

    std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(read_checkpoint(truncated), ConfigError);
    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    std::stringstream bm(bad_magic);
    CHECK_THROWS_AS(read_checkpoint(bm), ConfigError);
    std::stringstream trailing(bytes + "x");
    CHECK_THROWS_AS(read_checkpoint(trailing), ConfigError);
  }
}
