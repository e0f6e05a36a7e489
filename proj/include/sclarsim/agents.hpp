#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sclarsim/nn.hpp"

// Learning agents: replay memory, epsilon-greedy action selection, tabular
// Q-learning, and the semi-gradient DQN update.
namespace sclarsim::agents {

enum class AgentKind { Tabular, FcDnn, ResDnn };
AgentKind agent_kind_from_name(const std::string& name);
const char* to_string(AgentKind k);

struct Experience {
  std::vector<double> s;
  int a = 0;
  double r = 0.0;
  std::vector<double> s_next;
};

// Fixed-capacity FIFO ring with uniform batch sampling (no replacement).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void deposit(Experience e);
  // n distinct uniformly random items; requires size() >= n.
  std::vector<const Experience*> sample(std::size_t n, std::mt19937_64& rng) const;
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return cap_; }
  // i-th oldest item still stored.
  const Experience& at(std::size_t i) const;

 private:
  std::vector<Experience> ring_;
  std::size_t cap_ = 0;
  std::size_t next_ = 0;
  std::size_t size_ = 0;
};

// eps(t) = max(eps_min, eps0 * decay^t).
struct EpsilonSchedule {
  double eps0 = 1.0;
  double eps_min = 0.02;
  double decay = 0.999;
  double value(long long t) const;
};

// Exploration policy: probability eps uniform, otherwise argmax with exact
// ties broken uniformly at random.
int select_action_eps_greedy(double q_hold, double q_dispatch, double eps, std::mt19937_64& rng);

// Deterministic policy extraction for evaluation: argmax, ties -> Hold.
int greedy_action(double q_hold, double q_dispatch);

// Table keyed on the discretized observation (per-UD action bits and outcome
// codes; rates dropped). Unseen keys read as (0, 0).
struct TabularQ {
  double alpha = 0.5;
  double gamma = 0.9;
  std::unordered_map<std::string, std::array<double, 2>> table;

  static std::string discretize(std::span<const double> state);
  std::array<double, 2> q(const std::string& key) const;
};

// One-cell update: Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)).
void tabular_update(TabularQ& q, const Experience& e);

struct DqnOptions {
  double alpha = 1e-3;
  double gamma = 0.9;
  int batch_size = 32;
  bool faithful = false;  // bootstrap y with the prediction net
  bool use_adam = false;
};

// One semi-gradient step over the batch; updates `pred` in place and returns
// the batch loss. Targets are treated as constants.
double dqn_train_step(nn::Network& pred, const nn::Network& target,
                      std::span<const Experience* const> batch, const DqnOptions& opt,
                      nn::AdamState* adam = nullptr);

// Soft-syncs the target net every sync_period steps (step counter is absolute).
void maybe_sync_target(long long step, int sync_period, double tau, nn::Network& target,
                       const nn::Network& pred);

}  // namespace sclarsim::agents
