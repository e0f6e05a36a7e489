#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "sclarsim/nn.hpp"

using namespace sclarsim;
using nn::Activation;
using nn::LayerKind;
using nn::LayerSpec;
using nn::Network;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, int n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("layer factories produce the documented shapes") {
  const auto res = nn::resdnn_layers(120, 64, 2, 2);
  REQUIRE(res.size() == 4);
  CHECK(res[0].kind == LayerKind::Dense);
  CHECK(res[0].in == 120);
  CHECK(res[0].out == 64);
  CHECK(res[0].act == Activation::ReLU);
  CHECK(res[1].kind == LayerKind::Residual);
  CHECK(res[2].kind == LayerKind::Residual);
  CHECK(res[3].kind == LayerKind::Dense);
  CHECK(res[3].out == 2);
  CHECK(res[3].act == Activation::Linear);

  // the skip-free twin has the same depth in affine maps
  const auto fc = nn::fcdnn_layers(120, 64, 2, 2);
  REQUIRE(fc.size() == 6);
  std::size_t res_params = 0, fc_params = 0;
  for (const auto& l : res) res_params += l.param_count();
  for (const auto& l : fc) fc_params += l.param_count();
  CHECK(res_params == fc_params);

  const Network net = Network::he_init(res, 1);
  CHECK(net.param_count() == res_params);
  CHECK(net.input_size() == 120);
  CHECK(net.output_size() == 2);
}

TEST_CASE("ill-formed layer stacks are rejected") {
  CHECK_THROWS_AS(Network::zeros({{LayerKind::Residual, 8, 16, Activation::ReLU}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(Network::zeros({{LayerKind::Dense, 8, 16, Activation::ReLU},
                                  {LayerKind::Dense, 8, 2, Activation::Linear}}),
                  std::invalid_argument);
}

TEST_CASE("zero parameters give zero output through a linear head") {
  const Network net = Network::zeros(nn::resdnn_layers(10, 8, 2, 2));
  std::mt19937_64 rng(3);
  const auto out = nn::forward(net, random_vec(rng, 10));
  REQUIRE(out.size() == 2);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);
}

TEST_CASE("a zeroed residual block is the identity under ReLU inputs") {
  Network net = Network::zeros({{LayerKind::Residual, 4, 4, Activation::ReLU}});
  const std::vector<double> x{0.5, 2.0, 0.0, 3.0};  // non-negative so ReLU passes it through
  CHECK(nn::forward(net, x) == x);
}

TEST_CASE("forward pass matches the layout-based reference implementation") {
  std::mt19937_64 rng(41);
  for (int it = 0; it < 20; ++it) {
    const bool residual = (it % 2) == 0;
    const auto layers = residual ? nn::resdnn_layers(7, 9, 2, 3) : nn::fcdnn_layers(7, 9, 2, 3);
    const Network net = Network::he_init(layers, 1000 + it);
    const auto x = random_vec(rng, 7, -2.0, 2.0);
    const auto got = nn::forward(net, x);
    const auto want = oracles::nn_forward_reference(net, x);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i)
      CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("forward rejects mismatched input width") {
  const Network net = Network::he_init(nn::fcdnn_layers(6, 4, 1, 2), 9);
  CHECK_THROWS_AS(nn::forward(net, std::vector<double>(5, 0.0)), std::invalid_argument);
}

TEST_CASE("mse loss basics") {
  CHECK(nn::mse_loss(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 2.0}) == 0.0);
  CHECK(nn::mse_loss(std::vector<double>{0.0}, std::vector<double>{2.0}) == 4.0);
  CHECK(nn::mse_loss(std::vector<double>{0.0, 2.0}, std::vector<double>{2.0, 2.0}) == 2.0);
  CHECK_THROWS_AS(nn::mse_loss(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}),
                  std::invalid_argument);
}

TEST_CASE("single linear layer gradient equals the closed form") {
  // f(x) = Wx + b, L = mean((f - y)^2); dL/dW = (2/d) diff x^T, dL/db = (2/d) diff
  Network net = Network::he_init({{LayerKind::Dense, 3, 2, Activation::Linear}}, 8);
  std::mt19937_64 rng(12);
  const auto x = random_vec(rng, 3);
  const auto y = random_vec(rng, 2);
  const auto out = nn::forward(net, x);
  const auto grad = nn::analytic_mse_gradient(net, x, y);
  REQUIRE(grad.size() == net.param_count());
  for (int r = 0; r < 2; ++r) {
    const double diff = 2.0 * (out[r] - y[r]) / 2.0;
    for (int c = 0; c < 3; ++c)
      CHECK(grad[r * 3 + c] == doctest::Approx(diff * x[c]).epsilon(1e-12));
    CHECK(grad[6 + r] == doctest::Approx(diff).epsilon(1e-12));
  }
}

TEST_CASE("zero output error propagates to a zero gradient") {
  Network net = Network::he_init(nn::resdnn_layers(5, 6, 1, 2), 77);
  std::mt19937_64 rng(9);
  const auto x = random_vec(rng, 5);
  const auto y = nn::forward(net, x);  // target equals prediction
  for (double g : nn::analytic_mse_gradient(net, x, y)) CHECK(g == 0.0);
}

TEST_CASE("backprop matches central finite differences on both architectures") {
  const auto res_report = nn::grad_check(nn::resdnn_layers(6, 8, 2, 2), 101);
  CHECK(res_report.pass);
  CHECK(res_report.max_rel_err < 1e-4);
  const auto fc_report = nn::grad_check(nn::fcdnn_layers(6, 8, 2, 2), 202);
  CHECK(fc_report.pass);
  CHECK(fc_report.max_rel_err < 1e-4);
}

TEST_CASE("a corrupted gradient entry is flagged") {
  Network net = Network::he_init(nn::resdnn_layers(4, 5, 1, 2), 55);
  std::mt19937_64 rng(4);
  const auto x = random_vec(rng, 4);
  const auto y = random_vec(rng, 2);
  auto analytic = nn::analytic_mse_gradient(net, x, y);
  const auto numeric = nn::numeric_mse_gradient(net, x, y);
  CHECK(nn::compare_gradients(analytic, numeric).pass);
  analytic[analytic.size() / 2] += 1.0;
  CHECK_FALSE(nn::compare_gradients(analytic, numeric).pass);
}

TEST_CASE("sgd step arithmetic and shape checks") {
  Network net = Network::zeros({{LayerKind::Dense, 1, 1, Activation::Linear}});
  net.params() = {1.0, 0.5};
  nn::apply_sgd(net, std::vector<double>{2.0, 0.0}, 0.1);
  CHECK(net.params()[0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(net.params()[1] == 0.5);

  const Network stepped = nn::sgd_step(net, std::vector<double>{0.0, 0.0}, 0.1);
  CHECK(stepped.params() == net.params());  // zero gradient, unchanged
  CHECK_THROWS_AS(nn::apply_sgd(net, std::vector<double>{1.0}, 0.1), std::invalid_argument);
}

TEST_CASE("soft update endpoints, convexity, and contraction") {
  const auto layers = nn::fcdnn_layers(3, 4, 1, 2);
  const Network pred = Network::he_init(layers, 1);
  Network target = Network::he_init(layers, 2);

  const Network hard = nn::soft_update(target, pred, 1.0);
  CHECK(hard.params() == pred.params());
  const Network frozen = nn::soft_update(target, pred, 0.0);
  CHECK(frozen.params() == target.params());

  Network blended = target;
  nn::apply_soft_update(blended, pred, 0.3);
  for (std::size_t i = 0; i < blended.param_count(); ++i) {
    const double lo = std::min(target.params()[i], pred.params()[i]);
    const double hi = std::max(target.params()[i], pred.params()[i]);
    CHECK(blended.params()[i] >= lo - 1e-15);
    CHECK(blended.params()[i] <= hi + 1e-15);
  }

  // gap norm shrinks exactly by (1 - tau)^k
  for (double tau : {0.01, 0.1, 1.0}) {
    Network t = Network::he_init(layers, 3);
    double gap0 = 0.0;
    for (std::size_t i = 0; i < t.param_count(); ++i) {
      const double d = t.params()[i] - pred.params()[i];
      gap0 += d * d;
    }
    gap0 = std::sqrt(gap0);
    const int k = 7;
    for (int step = 0; step < k; ++step) nn::apply_soft_update(t, pred, tau);
    double gap = 0.0;
    for (std::size_t i = 0; i < t.param_count(); ++i) {
      const double d = t.params()[i] - pred.params()[i];
      gap += d * d;
    }
    gap = std::sqrt(gap);
    CHECK(std::abs(gap - std::pow(1.0 - tau, k) * gap0) <= 1e-10);
  }

  Network other = Network::he_init(nn::fcdnn_layers(3, 5, 1, 2), 4);
  CHECK_THROWS_AS(nn::apply_soft_update(other, pred, 0.5), std::invalid_argument);
}

TEST_CASE("finite detection catches poisoned parameter sets") {
  std::vector<double> ok{1.0, -2.0, 0.0};
  CHECK_NOTHROW(nn::ensure_finite(ok, "test"));
  std::vector<double> bad{1.0, std::nan(""), 0.0};
  CHECK_THROWS_AS(nn::ensure_finite(bad, "test"), std::runtime_error);
  std::vector<double> inf{1.0, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(nn::ensure_finite(inf, "test"), std::runtime_error);
}

TEST_CASE("adaptive optimizer moves against the gradient and stays finite") {
  nn::AdamState adam;
  std::vector<double> params{0.0, 0.0};
  for (int i = 0; i < 100; ++i) adam.step(params, std::vector<double>{1.0, -1.0}, 0.01);
  CHECK(params[0] < 0.0);
  CHECK(params[1] > 0.0);
  CHECK_NOTHROW(nn::ensure_finite(params, "adam"));
}

TEST_CASE("network save/load round-trips exactly") {
  const Network net = Network::he_init(nn::resdnn_layers(5, 7, 2, 2), 321);
  std::stringstream ss;
  nn::save_network(net, ss);
  const Network back = nn::load_network(ss);
  CHECK(back.layers() == net.layers());
  REQUIRE(back.param_count() == net.param_count());
  for (std::size_t i = 0; i < net.param_count(); ++i)
    CHECK(back.params()[i] == net.params()[i]);  // %.17g round-trip is exact

  std::stringstream junk("not-a-network 1\n");
  CHECK_THROWS_AS(nn::load_network(junk), std::runtime_error);
}

TEST_CASE("he init is seed-deterministic and distinct across seeds") {
  const auto layers = nn::resdnn_layers(6, 8, 1, 2);
  const Network a = Network::he_init(layers, 5);
  const Network b = Network::he_init(layers, 5);
  const Network c = Network::he_init(layers, 6);
  CHECK(a.params() == b.params());
  CHECK(a.params() != c.params());
  // biases start at zero: check the first dense layer's bias block
  const std::size_t bias_at = static_cast<std::size_t>(8) * 6;
  for (int i = 0; i < 8; ++i) CHECK(a.params()[bias_at + i] == 0.0);
}
