#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

// Minimal dense-network stack: forward, exact reverse-mode gradients, SGD /
// soft updates, and an optional adaptive optimizer. Doubles throughout.
namespace sclarsim::nn {

enum class Activation { Linear, ReLU };
enum class LayerKind { Dense, Residual };

// Dense: out = act(W x + b), W stored row-major (out x in) then b.
// Residual (in == out == width): h = relu(W1 x + b1), out = act(W2 h + b2 + x),
// stored as W1, b1, W2, b2.
struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  int in = 0;
  int out = 0;
  Activation act = Activation::Linear;

  std::size_t param_count() const;
  bool operator==(const LayerSpec&) const = default;
};

// Input -> Dense(hidden, ReLU) -> `blocks` residual blocks -> Dense(outputs, linear).
std::vector<LayerSpec> resdnn_layers(int input, int hidden, int blocks, int outputs);
// Same depth with the skip connections removed: each block becomes two dense
// ReLU layers.
std::vector<LayerSpec> fcdnn_layers(int input, int hidden, int blocks, int outputs);

class Network {
 public:
  Network() = default;

  // Weights N(0, sqrt(2/fan_in)), biases zero.
  static Network he_init(std::vector<LayerSpec> layers, std::uint64_t seed);
  static Network zeros(std::vector<LayerSpec> layers);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::size_t offset(int layer) const { return offsets_[layer]; }
  std::size_t param_count() const { return params_.size(); }
  int input_size() const { return layers_.empty() ? 0 : layers_.front().in; }
  int output_size() const { return layers_.empty() ? 0 : layers_.back().out; }
  bool same_shape(const Network& other) const { return layers_ == other.layers_; }

 private:
  static Network with_layout(std::vector<LayerSpec> layers);

  std::vector<LayerSpec> layers_;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;
};

std::vector<double> forward(const Network& net, std::span<const double> x);

// Per-layer intermediates needed by backward().
struct LayerTrace {
  std::vector<double> x;    // layer input
  std::vector<double> z1;   // dense pre-activation / residual inner pre-activation
  std::vector<double> a1;   // residual inner activation
  std::vector<double> z2;   // residual pre-activation after the skip add
};
struct ForwardTrace {
  std::vector<LayerTrace> layers;
  std::vector<double> output;
};
ForwardTrace forward_trace(const Network& net, std::span<const double> x);

// dL/d(params) given dL/d(output). Flat, same layout as params().
std::vector<double> backward(const Network& net, const ForwardTrace& trace,
                             std::span<const double> dout);

double mse_loss(std::span<const double> pred, std::span<const double> target);

// Gradient of mse_loss(forward(net, x), target) w.r.t. the parameters,
// analytically and by central finite differences.
std::vector<double> analytic_mse_gradient(const Network& net, std::span<const double> x,
                                          std::span<const double> target);
std::vector<double> numeric_mse_gradient(const Network& net, std::span<const double> x,
                                         std::span<const double> target, double h = 1e-5);

struct GradCheckReport {
  bool pass = false;
  double max_abs_diff = 0.0;
  double max_rel_err = 0.0;  // |a-n| / max(|a|, |n|, abs_floor/rel_tol)
  std::size_t worst_index = 0;
};
// Compares analytic vs numeric gradients on a random net/input/target drawn
// from `seed`. Passes when |a-n| <= max(rel_tol*max(|a|,|n|), abs_floor)
// everywhere.
GradCheckReport grad_check(const std::vector<LayerSpec>& layers, std::uint64_t seed,
                           double rel_tol = 1e-4, double abs_floor = 1e-6);
// The comparison core, reusable against externally produced gradients.
GradCheckReport compare_gradients(std::span<const double> analytic,
                                  std::span<const double> numeric,
                                  double rel_tol = 1e-4, double abs_floor = 1e-6);

void apply_sgd(Network& net, std::span<const double> grad, double alpha);
Network sgd_step(const Network& net, std::span<const double> grad, double alpha);

// target <- (1 - tau) * target + tau * pred. Shapes must match.
void apply_soft_update(Network& target, const Network& pred, double tau);
Network soft_update(const Network& target, const Network& pred, double tau);

// Throws std::runtime_error naming `context` if any entry is NaN/Inf.
void ensure_finite(std::span<const double> values, const char* context);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long t = 0;
  std::vector<double> m, v;

  void step(std::vector<double>& params, std::span<const double> grad, double alpha);
};

// Versioned text format; exact decimal round-trip.
void save_network(const Network& net, std::ostream& os);
Network load_network(std::istream& is);

}  // namespace sclarsim::nn
