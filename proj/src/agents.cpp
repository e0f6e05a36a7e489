#include "sclarsim/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sclarsim::agents {

AgentKind agent_kind_from_name(const std::string& name) {
  if (name == "tabular") return AgentKind::Tabular;
  if (name == "fcdnn") return AgentKind::FcDnn;
  if (name == "resdnn") return AgentKind::ResDnn;
  throw std::invalid_argument("unknown agent: " + name);
}

const char* to_string(AgentKind k) {
  switch (k) {
    case AgentKind::Tabular: return "tabular";
    case AgentKind::FcDnn: return "fcdnn";
    case AgentKind::ResDnn: return "resdnn";
  }
  return "?";
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : cap_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay: capacity must be positive");
  ring_.reserve(capacity);
}

void ReplayBuffer::deposit(Experience e) {
  if (size_ < cap_) {
    ring_.push_back(std::move(e));
    ++size_;
  } else {
    ring_[next_] = std::move(e);
  }
  next_ = (next_ + 1) % cap_;
}

const Experience& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay: index out of range");
  if (size_ < cap_) return ring_[i];
  return ring_[(next_ + i) % cap_];
}

std::vector<const Experience*> ReplayBuffer::sample(std::size_t n, std::mt19937_64& rng) const {
  if (n > size_) throw std::logic_error("replay: not enough stored experiences to sample a batch");
  std::vector<std::size_t> picked;
  picked.reserve(n);
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  while (picked.size() < n) {
    const std::size_t idx = pick(rng);
    if (std::find(picked.begin(), picked.end(), idx) == picked.end()) picked.push_back(idx);
  }
  std::vector<const Experience*> batch;
  batch.reserve(n);
  for (std::size_t idx : picked) batch.push_back(&ring_[idx]);
  return batch;
}

double EpsilonSchedule::value(long long t) const {
  if (t < 0) throw std::invalid_argument("epsilon schedule: negative step");
  return std::max(eps_min, eps0 * std::pow(decay, static_cast<double>(t)));
}

int select_action_eps_greedy(double q_hold, double q_dispatch, double eps, std::mt19937_64& rng) {
  if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("select_action: eps must be in [0, 1]");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) < eps) return std::uniform_int_distribution<int>(0, 1)(rng);
  if (q_hold == q_dispatch) return std::uniform_int_distribution<int>(0, 1)(rng);
  return q_dispatch > q_hold ? 1 : 0;
}

int greedy_action(double q_hold, double q_dispatch) { return q_dispatch > q_hold ? 1 : 0; }

std::string TabularQ::discretize(std::span<const double> state) {
  if (state.size() % 6 != 0) throw std::invalid_argument("discretize: state is not a multiple of the per-UD record");
  std::string key;
  key.reserve(state.size() / 6);
  for (std::size_t base = 0; base < state.size(); base += 6) {
    const int action = state[base] > 0.5 ? 1 : 0;
    int outcome = 0;
    double best = state[base + 1];
    for (int k = 1; k < 4; ++k) {
      if (state[base + 1 + k] > best) {
        best = state[base + 1 + k];
        outcome = k;
      }
    }
    key.push_back(static_cast<char>('0' + action * 4 + outcome));
  }
  return key;
}

std::array<double, 2> TabularQ::q(const std::string& key) const {
  auto it = table.find(key);
  return it == table.end() ? std::array<double, 2>{0.0, 0.0} : it->second;
}

void tabular_update(TabularQ& q, const Experience& e) {
  if (e.a != 0 && e.a != 1) throw std::invalid_argument("tabular_update: action out of range");
  const std::string key = TabularQ::discretize(e.s);
  const std::string next_key = TabularQ::discretize(e.s_next);
  const std::array<double, 2> qn = q.q(next_key);
  const double boot = std::max(qn[0], qn[1]);
  std::array<double, 2>& cell = q.table[key];  // inserts (0, 0) on first visit
  cell[e.a] += q.alpha * (e.r + q.gamma * boot - cell[e.a]);
}

double dqn_train_step(nn::Network& pred, const nn::Network& target,
                      std::span<const Experience* const> batch, const DqnOptions& opt,
                      nn::AdamState* adam) {
  if (batch.size() != static_cast<std::size_t>(opt.batch_size))
    throw std::invalid_argument("dqn_train_step: batch size mismatch");
  if (!pred.same_shape(target)) throw std::invalid_argument("dqn_train_step: net shapes differ");

  const double n = static_cast<double>(batch.size());
  std::vector<double> grad(pred.param_count(), 0.0);
  double loss = 0.0;
  for (const Experience* e : batch) {
    if (e->a != 0 && e->a != 1) throw std::invalid_argument("dqn_train_step: action out of range");
    const nn::Network& boot = opt.faithful ? pred : target;
    const std::vector<double> qn = nn::forward(boot, e->s_next);
    const double y = e->r + opt.gamma * std::max(qn[0], qn[1]);  // constant target

    nn::ForwardTrace trace = nn::forward_trace(pred, e->s);
    const double diff = trace.output[e->a] - y;
    loss += diff * diff;

    std::vector<double> dout(pred.output_size(), 0.0);
    dout[e->a] = 2.0 * diff / n;
    const std::vector<double> g = nn::backward(pred, trace, dout);
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += g[i];
  }
  loss /= n;
  if (!std::isfinite(loss)) throw std::runtime_error("dqn_train_step: non-finite batch loss");

  if (opt.use_adam) {
    if (!adam) throw std::invalid_argument("dqn_train_step: adam state required");
    adam->step(pred.params(), grad, opt.alpha);
  } else {
    nn::apply_sgd(pred, grad, opt.alpha);
  }
  nn::ensure_finite(pred.params(), "dqn_train_step: parameters after update");
  return loss;
}

void maybe_sync_target(long long step, int sync_period, double tau, nn::Network& target,
                       const nn::Network& pred) {
  if (sync_period < 1) throw std::invalid_argument("maybe_sync_target: sync_period must be >= 1");
  if (step % sync_period != 0) return;
  nn::apply_soft_update(target, pred, tau);
}

}  // namespace sclarsim::agents
