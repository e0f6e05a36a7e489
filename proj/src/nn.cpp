#include "sclarsim/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

namespace sclarsim::nn {

namespace {

double act_apply(Activation a, double z) {
  return a == Activation::ReLU ? (z > 0.0 ? z : 0.0) : z;
}

double act_deriv(Activation a, double z) {
  return a == Activation::ReLU ? (z > 0.0 ? 1.0 : 0.0) : 1.0;
}

// y = W x + b with W row-major (rows x cols).
void affine(std::span<const double> w, std::span<const double> b,
            std::span<const double> x, std::vector<double>& y) {
  const std::size_t rows = b.size();
  const std::size_t cols = x.size();
  y.assign(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = w.data() + r * cols;
    double acc = b[r];
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
}

// dx += W^T dz ; dW += dz x^T ; db += dz.
void affine_backward(std::span<const double> w, std::span<const double> x,
                     std::span<const double> dz, std::span<double> dw,
                     std::span<double> db, std::vector<double>* dx) {
  const std::size_t rows = dz.size();
  const std::size_t cols = x.size();
  for (std::size_t r = 0; r < rows; ++r) {
    const double g = dz[r];
    if (g == 0.0) continue;
    double* dwr = dw.data() + r * cols;
    const double* wr = w.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      dwr[c] += g * x[c];
      if (dx) (*dx)[c] += wr[c] * g;
    }
    db[r] += g;
  }
}

void check_input(const Network& net, std::span<const double> x, const char* op) {
  if (static_cast<int>(x.size()) != net.input_size())
    throw std::invalid_argument(std::string(op) + ": input size mismatch");
}

}  // namespace

std::size_t LayerSpec::param_count() const {
  const auto n = static_cast<std::size_t>(in) * out + out;
  return kind == LayerKind::Dense ? n : 2 * n;
}

std::vector<LayerSpec> resdnn_layers(int input, int hidden, int blocks, int outputs) {
  std::vector<LayerSpec> layers;
  layers.push_back({LayerKind::Dense, input, hidden, Activation::ReLU});
  for (int b = 0; b < blocks; ++b)
    layers.push_back({LayerKind::Residual, hidden, hidden, Activation::ReLU});
  layers.push_back({LayerKind::Dense, hidden, outputs, Activation::Linear});
  return layers;
}

std::vector<LayerSpec> fcdnn_layers(int input, int hidden, int blocks, int outputs) {
  std::vector<LayerSpec> layers;
  layers.push_back({LayerKind::Dense, input, hidden, Activation::ReLU});
  for (int b = 0; b < 2 * blocks; ++b)
    layers.push_back({LayerKind::Dense, hidden, hidden, Activation::ReLU});
  layers.push_back({LayerKind::Dense, hidden, outputs, Activation::Linear});
  return layers;
}

Network Network::with_layout(std::vector<LayerSpec> layers) {
  Network net;
  net.layers_ = std::move(layers);
  std::size_t total = 0;
  net.offsets_.reserve(net.layers_.size());
  for (std::size_t l = 0; l < net.layers_.size(); ++l) {
    const LayerSpec& spec = net.layers_[l];
    if (spec.in < 1 || spec.out < 1) throw std::invalid_argument("network: layer dims must be positive");
    if (spec.kind == LayerKind::Residual && spec.in != spec.out)
      throw std::invalid_argument("network: residual layer needs in == out");
    if (l > 0 && spec.in != net.layers_[l - 1].out)
      throw std::invalid_argument("network: layer input does not chain");
    net.offsets_.push_back(total);
    total += spec.param_count();
  }
  net.params_.assign(total, 0.0);
  return net;
}

Network Network::zeros(std::vector<LayerSpec> layers) { return with_layout(std::move(layers)); }

Network Network::he_init(std::vector<LayerSpec> layers, std::uint64_t seed) {
  Network net = with_layout(std::move(layers));
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < net.layers_.size(); ++l) {
    const LayerSpec& spec = net.layers_[l];
    double* p = net.params_.data() + net.offsets_[l];
    auto fill_affine = [&rng](double* dst, int rows, int cols) {
      std::normal_distribution<double> nd(0.0, std::sqrt(2.0 / cols));
      const std::size_t nw = static_cast<std::size_t>(rows) * cols;
      for (std::size_t i = 0; i < nw; ++i) dst[i] = nd(rng);
      for (int r = 0; r < rows; ++r) dst[nw + r] = 0.0;
    };
    if (spec.kind == LayerKind::Dense) {
      fill_affine(p, spec.out, spec.in);
    } else {
      const std::size_t half = static_cast<std::size_t>(spec.out) * spec.in + spec.out;
      fill_affine(p, spec.out, spec.in);
      fill_affine(p + half, spec.out, spec.in);
    }
  }
  return net;
}

ForwardTrace forward_trace(const Network& net, std::span<const double> x) {
  check_input(net, x, "forward");
  ForwardTrace trace;
  trace.layers.resize(net.layers().size());
  std::vector<double> cur(x.begin(), x.end());
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const LayerSpec& spec = net.layers()[l];
    LayerTrace& lt = trace.layers[l];
    lt.x = cur;
    const double* p = net.params().data() + net.offset(l);
    const std::size_t wn = static_cast<std::size_t>(spec.out) * spec.in;
    if (spec.kind == LayerKind::Dense) {
      affine({p, wn}, {p + wn, static_cast<std::size_t>(spec.out)}, lt.x, lt.z1);
      cur.resize(spec.out);
      for (int i = 0; i < spec.out; ++i) cur[i] = act_apply(spec.act, lt.z1[i]);
    } else {
      const double* p2 = p + wn + spec.out;
      affine({p, wn}, {p + wn, static_cast<std::size_t>(spec.out)}, lt.x, lt.z1);
      lt.a1.resize(spec.out);
      for (int i = 0; i < spec.out; ++i) lt.a1[i] = act_apply(Activation::ReLU, lt.z1[i]);
      affine({p2, wn}, {p2 + wn, static_cast<std::size_t>(spec.out)}, lt.a1, lt.z2);
      for (int i = 0; i < spec.out; ++i) lt.z2[i] += lt.x[i];  // skip connection
      cur.resize(spec.out);
      for (int i = 0; i < spec.out; ++i) cur[i] = act_apply(spec.act, lt.z2[i]);
    }
  }
  trace.output = std::move(cur);
  return trace;
}

std::vector<double> forward(const Network& net, std::span<const double> x) {
  return forward_trace(net, x).output;
}

std::vector<double> backward(const Network& net, const ForwardTrace& trace,
                             std::span<const double> dout) {
  if (dout.size() != static_cast<std::size_t>(net.output_size()))
    throw std::invalid_argument("backward: dout size mismatch");
  std::vector<double> grad(net.param_count(), 0.0);
  std::vector<double> dcur(dout.begin(), dout.end());
  for (int l = static_cast<int>(net.layers().size()) - 1; l >= 0; --l) {
    const LayerSpec& spec = net.layers()[l];
    const LayerTrace& lt = trace.layers[l];
    const double* p = net.params().data() + net.offset(l);
    double* g = grad.data() + net.offset(l);
    const std::size_t wn = static_cast<std::size_t>(spec.out) * spec.in;
    if (spec.kind == LayerKind::Dense) {
      std::vector<double> dz(spec.out);
      for (int i = 0; i < spec.out; ++i) dz[i] = dcur[i] * act_deriv(spec.act, lt.z1[i]);
      std::vector<double> dx(spec.in, 0.0);
      affine_backward({p, wn}, lt.x, dz, {g, wn}, {g + wn, static_cast<std::size_t>(spec.out)},
                      l > 0 ? &dx : nullptr);
      dcur = std::move(dx);
    } else {
      const double* p2 = p + wn + spec.out;
      double* g2 = g + wn + spec.out;
      std::vector<double> dsum(spec.out);
      for (int i = 0; i < spec.out; ++i) dsum[i] = dcur[i] * act_deriv(spec.act, lt.z2[i]);
      std::vector<double> da1(spec.out, 0.0);
      affine_backward({p2, wn}, lt.a1, dsum, {g2, wn}, {g2 + wn, static_cast<std::size_t>(spec.out)}, &da1);
      std::vector<double> dz1(spec.out);
      for (int i = 0; i < spec.out; ++i) dz1[i] = da1[i] * act_deriv(Activation::ReLU, lt.z1[i]);
      std::vector<double> dx(spec.in, 0.0);
      affine_backward({p, wn}, lt.x, dz1, {g, wn}, {g + wn, static_cast<std::size_t>(spec.out)}, &dx);
      for (int i = 0; i < spec.out; ++i) dx[i] += dsum[i];  // skip path
      dcur = std::move(dx);
    }
  }
  return grad;
}

double mse_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty())
    throw std::invalid_argument("mse_loss: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size());
}

std::vector<double> analytic_mse_gradient(const Network& net, std::span<const double> x,
                                          std::span<const double> target) {
  ForwardTrace trace = forward_trace(net, x);
  if (target.size() != trace.output.size())
    throw std::invalid_argument("analytic_mse_gradient: target size mismatch");
  std::vector<double> dout(trace.output.size());
  for (std::size_t i = 0; i < dout.size(); ++i)
    dout[i] = 2.0 * (trace.output[i] - target[i]) / static_cast<double>(dout.size());
  return backward(net, trace, dout);
}

std::vector<double> numeric_mse_gradient(const Network& net, std::span<const double> x,
                                         std::span<const double> target, double h) {
  Network probe = net;
  std::vector<double> grad(net.param_count(), 0.0);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double saved = probe.params()[i];
    probe.params()[i] = saved + h;
    const double up = mse_loss(forward(probe, x), target);
    probe.params()[i] = saved - h;
    const double down = mse_loss(forward(probe, x), target);
    probe.params()[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

GradCheckReport compare_gradients(std::span<const double> analytic,
                                  std::span<const double> numeric,
                                  double rel_tol, double abs_floor) {
  if (analytic.size() != numeric.size())
    throw std::invalid_argument("compare_gradients: size mismatch");
  GradCheckReport rep;
  rep.pass = true;
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double diff = std::fabs(analytic[i] - numeric[i]);
    const double scale = std::max(std::fabs(analytic[i]), std::fabs(numeric[i]));
    const double allowed = std::max(rel_tol * scale, abs_floor);
    const double ratio = diff / allowed;
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      rep.worst_index = i;
      rep.max_abs_diff = diff;
      rep.max_rel_err = diff / std::max(scale, abs_floor / rel_tol);
    }
    if (diff > allowed) rep.pass = false;
  }
  return rep;
}

GradCheckReport grad_check(const std::vector<LayerSpec>& layers, std::uint64_t seed,
                           double rel_tol, double abs_floor) {
  Network net = Network::he_init(layers, seed);
  std::mt19937_64 rng(seed ^ 0xABCDEF1234567890ULL);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(net.input_size());
  for (double& v : x) v = u(rng);
  std::vector<double> target(net.output_size());
  for (double& v : target) v = u(rng);
  const auto analytic = analytic_mse_gradient(net, x, target);
  const auto numeric = numeric_mse_gradient(net, x, target);
  return compare_gradients(analytic, numeric, rel_tol, abs_floor);
}

void apply_sgd(Network& net, std::span<const double> grad, double alpha) {
  if (grad.size() != net.param_count()) throw std::invalid_argument("apply_sgd: gradient size mismatch");
  double* p = net.params().data();
  for (std::size_t i = 0; i < grad.size(); ++i) p[i] -= alpha * grad[i];
}

Network sgd_step(const Network& net, std::span<const double> grad, double alpha) {
  Network out = net;
  apply_sgd(out, grad, alpha);
  return out;
}

void apply_soft_update(Network& target, const Network& pred, double tau) {
  if (!target.same_shape(pred)) throw std::invalid_argument("soft_update: shape mismatch");
  double* t = target.params().data();
  const double* p = pred.params().data();
  for (std::size_t i = 0; i < target.param_count(); ++i)
    t[i] = (1.0 - tau) * t[i] + tau * p[i];
}

Network soft_update(const Network& target, const Network& pred, double tau) {
  Network out = target;
  apply_soft_update(out, pred, tau);
  return out;
}

void ensure_finite(std::span<const double> values, const char* context) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      throw std::runtime_error(std::string(context) + ": non-finite value at index " + std::to_string(i));
  }
}

void AdamState::step(std::vector<double>& params, std::span<const double> grad, double alpha) {
  if (m.empty()) {
    m.assign(params.size(), 0.0);
    v.assign(params.size(), 0.0);
  }
  if (grad.size() != params.size() || m.size() != params.size())
    throw std::invalid_argument("adam: size mismatch");
  ++t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    params[i] -= alpha * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
  }
}

void save_network(const Network& net, std::ostream& os) {
  os << "sclarsim-net 1\n";
  os << "layers " << net.layers().size() << "\n";
  for (const LayerSpec& spec : net.layers()) {
    os << (spec.kind == LayerKind::Dense ? "dense" : "residual") << ' ' << spec.in << ' '
       << spec.out << ' ' << (spec.act == Activation::ReLU ? "relu" : "linear") << "\n";
  }
  os << "params " << net.param_count() << "\n";
  char buf[64];
  for (double p : net.params()) {
    std::snprintf(buf, sizeof buf, "%.17g", p);
    os << buf << "\n";
  }
  if (!os) throw std::runtime_error("save_network: write failed");
}

Network load_network(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != "sclarsim-net" || version != 1)
    throw std::runtime_error("load_network: bad header");
  std::string word;
  std::size_t n_layers = 0;
  if (!(is >> word >> n_layers) || word != "layers") throw std::runtime_error("load_network: bad layer count");
  std::vector<LayerSpec> layers(n_layers);
  for (LayerSpec& spec : layers) {
    std::string kind, act;
    if (!(is >> kind >> spec.in >> spec.out >> act)) throw std::runtime_error("load_network: bad layer line");
    if (kind == "dense") spec.kind = LayerKind::Dense;
    else if (kind == "residual") spec.kind = LayerKind::Residual;
    else throw std::runtime_error("load_network: unknown layer kind");
    if (act == "relu") spec.act = Activation::ReLU;
    else if (act == "linear") spec.act = Activation::Linear;
    else throw std::runtime_error("load_network: unknown activation");
  }
  std::size_t n_params = 0;
  if (!(is >> word >> n_params) || word != "params") throw std::runtime_error("load_network: bad param count");
  Network net = Network::zeros(std::move(layers));
  if (net.param_count() != n_params) throw std::runtime_error("load_network: param count mismatch");
  for (double& p : net.params())
    if (!(is >> p)) throw std::runtime_error("load_network: truncated params");
  return net;
}

}  // namespace sclarsim::nn
