#include "sclarsim/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <sstream>
#include <stdexcept>

#include "sclarsim/io.hpp"

namespace sclarsim::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kAgentRngSalt = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kNetInitSalt = 0xC2B2AE3D27D4EB4FULL;

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": " + v);
}

double parse_double(const std::string& v, const std::string& key) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for " + key + ": " + v);
  }
  if (used != v.size()) throw std::invalid_argument("config: bad number for " + key + ": " + v);
  return out;
}

long long parse_int(const std::string& v, const std::string& key) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer for " + key + ": " + v);
  }
  if (used != v.size()) throw std::invalid_argument("config: bad integer for " + key + ": " + v);
  return out;
}

std::vector<std::string> split(const std::string& v, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : v) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string run_dir_name(const std::string& scenario, agents::AgentKind kind, int frame_size,
                         std::uint64_t seed) {
  std::ostringstream os;
  os << scenario << '_' << agents::to_string(kind) << "_S" << frame_size << "_seed" << seed;
  return os.str();
}

double mean_of(std::span<const double> xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return xs.empty() ? 0.0 : acc / static_cast<double>(xs.size());
}

double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean_of(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - mu) * (x - mu);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

}  // namespace

void ExperimentConfig::validate() const {
  base.validate();
  if (agent_kinds.empty()) throw std::invalid_argument("experiment: no agents selected");
  if (seeds.empty()) throw std::invalid_argument("experiment: no seeds given");
  for (int s : frame_sizes)
    if (s < 1) throw std::invalid_argument("experiment: frame sizes must be >= 1");
  if (eval_frames < 1) throw std::invalid_argument("experiment: eval_frames must be >= 1");
  if (ma_window < 1) throw std::invalid_argument("experiment: ma_window must be >= 1");
  if (jobs < 1) throw std::invalid_argument("experiment: jobs must be >= 1");
  if (out_dir.empty()) throw std::invalid_argument("experiment: out_dir must be set");
}

NetworkConfig scenario_by_name(const std::string& name) {
  NetworkConfig c;
  if (name == "D1") {
    // Fully deterministic drill: jam-first periods plus one scripted fUD give
    // frame classes [jam, jam, jam, occupied, free]; unit channels and point
    // power/noise ranges pin every reward to a constant.
    c.n_uds = 2;
    c.m_jammers = 1;
    c.k_antennas = 4;
    c.slots_per_frame = 5;
    c.jam_period = 5;
    c.jam_quiet = 3;
    c.invert_jam_pattern = true;
    c.fixed_fud_bits = {{1, 0, 0, 1, 0}};
    c.frames = 400;
    c.ud_power_dbm_min = c.ud_power_dbm_max = 22.5;
    c.noise_dbm_min = c.noise_dbm_max = 3.5;
    c.fixed_unit_channels = true;
    // Actions never change the slot dynamics, so the optimal policy is the
    // per-class argmax of immediate reward for every discount; valuing
    // myopically keeps it unique (any discount leaves both actions in a
    // jammed slot exactly tied through the bootstrap term) and lets the
    // zero-reward cells stay at their (0,0) init, where greedy extraction
    // already prefers hold.
    c.drl.gamma = 0.0;
  } else if (name == "S1") {
    c.frames = 1500;
  } else if (name == "S2") {
    c.slots_per_frame = 10;
    c.frames = 1000;
  } else if (name == "S3") {
    c.slots_per_frame = 20;
    c.frames = 600;
  } else if (name == "custom") {
    // library defaults, meant to be overridden by net.* keys
  } else {
    throw std::invalid_argument("unknown scenario: " + name + " (known: D1, S1, S2, S3, custom)");
  }
  return c;
}

std::vector<std::string> scenario_names() { return {"D1", "S1", "S2", "S3", "custom"}; }

std::map<std::string, std::string> parse_kv_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) + " is not key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("config: empty key on line " + std::to_string(lineno));
    kv[key] = value;
  }
  return kv;
}

void apply_kv_overrides(const std::map<std::string, std::string>& kv, ExperimentConfig& ec) {
  auto scen = kv.find("run.scenario");
  if (scen != kv.end()) {
    ec.scenario = scen->second;
    ec.base = scenario_by_name(ec.scenario);
  }
  for (const auto& [key, value] : kv) {
    NetworkConfig& net = ec.base;
    DrlConfig& drl = ec.base.drl;
    if (key == "run.scenario") continue;  // handled first
    else if (key == "net.n_uds") net.n_uds = static_cast<int>(parse_int(value, key));
    else if (key == "net.m_jammers") net.m_jammers = static_cast<int>(parse_int(value, key));
    else if (key == "net.k_antennas") net.k_antennas = static_cast<int>(parse_int(value, key));
    else if (key == "net.slots_per_frame") net.slots_per_frame = static_cast<int>(parse_int(value, key));
    else if (key == "net.frames") net.frames = static_cast<int>(parse_int(value, key));
    else if (key == "net.omega") net.omega = parse_double(value, key);
    else if (key == "net.jam_period") net.jam_period = static_cast<int>(parse_int(value, key));
    else if (key == "net.jam_quiet") net.jam_quiet = static_cast<int>(parse_int(value, key));
    else if (key == "net.ud_power_dbm_min") net.ud_power_dbm_min = parse_double(value, key);
    else if (key == "net.ud_power_dbm_max") net.ud_power_dbm_max = parse_double(value, key);
    else if (key == "net.noise_dbm_min") net.noise_dbm_min = parse_double(value, key);
    else if (key == "net.noise_dbm_max") net.noise_dbm_max = parse_double(value, key);
    else if (key == "net.history_window") net.history_window = static_cast<int>(parse_int(value, key));
    else if (key == "net.redraw_fud_per_frame") net.redraw_fud_per_frame = parse_bool(value, key);
    else if (key == "net.redraw_channels_per_frame") net.redraw_channels_per_frame = parse_bool(value, key);
    else if (key == "net.ideal_sic") net.ideal_sic = parse_bool(value, key);
    else if (key == "net.invert_jam_pattern") net.invert_jam_pattern = parse_bool(value, key);
    else if (key == "net.fixed_unit_channels") net.fixed_unit_channels = parse_bool(value, key);
    else if (key == "net.seed") net.seed = static_cast<std::uint64_t>(parse_int(value, key));
    else if (key == "net.fud_bits") {
      net.fixed_fud_bits.clear();
      for (const std::string& row : split(value, ';')) {
        std::vector<std::uint8_t> bits;
        for (char c : trim(row)) {
          if (c != '0' && c != '1') throw std::invalid_argument("config: net.fud_bits rows must be 0/1 strings");
          bits.push_back(c == '1' ? 1 : 0);
        }
        net.fixed_fud_bits.push_back(std::move(bits));
      }
    }
    else if (key == "drl.alpha") drl.alpha = parse_double(value, key);
    else if (key == "drl.tabular_alpha") drl.tabular_alpha = parse_double(value, key);
    else if (key == "drl.gamma") drl.gamma = parse_double(value, key);
    else if (key == "drl.eps0") drl.eps0 = parse_double(value, key);
    else if (key == "drl.eps_min") drl.eps_min = parse_double(value, key);
    else if (key == "drl.eps_decay") drl.eps_decay = parse_double(value, key);
    else if (key == "drl.replay_capacity") drl.replay_capacity = static_cast<std::size_t>(parse_int(value, key));
    else if (key == "drl.batch_size") drl.batch_size = static_cast<int>(parse_int(value, key));
    else if (key == "drl.sync_period") drl.sync_period = static_cast<int>(parse_int(value, key));
    else if (key == "drl.tau_soft") drl.tau_soft = parse_double(value, key);
    else if (key == "drl.hidden_width") drl.hidden_width = static_cast<int>(parse_int(value, key));
    else if (key == "drl.res_blocks") drl.res_blocks = static_cast<int>(parse_int(value, key));
    else if (key == "drl.use_adam") drl.use_adam = parse_bool(value, key);
    else if (key == "drl.faithful_dqn") drl.faithful_dqn = parse_bool(value, key);
    else if (key == "run.agents") {
      ec.agent_kinds.clear();
      for (const std::string& a : split(value, ','))
        ec.agent_kinds.push_back(agents::agent_kind_from_name(trim(a)));
    }
    else if (key == "run.seeds") {
      ec.seeds.clear();
      for (const std::string& s : split(value, ','))
        ec.seeds.push_back(static_cast<std::uint64_t>(parse_int(trim(s), key)));
    }
    else if (key == "run.frame_sizes") {
      ec.frame_sizes.clear();
      for (const std::string& s : split(value, ','))
        ec.frame_sizes.push_back(static_cast<int>(parse_int(trim(s), key)));
    }
    else if (key == "run.out_dir") ec.out_dir = value;
    else if (key == "run.eval_frames") ec.eval_frames = static_cast<int>(parse_int(value, key));
    else if (key == "run.ma_window") ec.ma_window = static_cast<int>(parse_int(value, key));
    else if (key == "run.trace") ec.trace = parse_bool(value, key);
    else if (key == "run.jobs") ec.jobs = static_cast<int>(parse_int(value, key));
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

ExperimentConfig config_from_file(const std::string& path) {
  ExperimentConfig ec;
  apply_kv_overrides(parse_kv_text(io::read_file(path)), ec);
  return ec;
}

TrainResult run_training(env::Environment& env, agents::AgentKind kind) {
  const NetworkConfig& cfg = env.config();
  const DrlConfig& drl = cfg.drl;

  TrainResult out;
  out.kind = kind;
  const bool is_dqn = kind != agents::AgentKind::Tabular;
  if (is_dqn) {
    const auto layers = kind == agents::AgentKind::ResDnn
                            ? nn::resdnn_layers(env.state_size(), drl.hidden_width, drl.res_blocks, 2)
                            : nn::fcdnn_layers(env.state_size(), drl.hidden_width, drl.res_blocks, 2);
    out.pred = nn::Network::he_init(layers, cfg.seed ^ (kNetInitSalt + static_cast<int>(kind)));
    out.target = out.pred;
  } else {
    out.table.alpha = drl.tabular_alpha;
    out.table.gamma = drl.gamma;
  }

  // Per-(seed, agent) stream: two agent kinds on the same scenario seed must
  // not share exploration draws, or their action sequences can lock together.
  std::mt19937_64 agent_rng(cfg.seed ^
                            (kAgentRngSalt + 0x100000001B3ULL * static_cast<std::uint64_t>(kind)));
  agents::ReplayBuffer buffer(drl.replay_capacity);
  agents::EpsilonSchedule schedule{drl.eps0, drl.eps_min, drl.eps_decay};
  agents::DqnOptions opt{drl.alpha, drl.gamma, drl.batch_size, drl.faithful_dqn,
                         drl.use_adam && !drl.faithful_dqn};
  nn::AdamState adam;
  metrics::FrameAccumulator acc(cfg.n_uds);

  std::vector<double> state = env.reset();
  const long long total = static_cast<long long>(cfg.frames) * cfg.slots_per_frame;
  for (long long t = 0; t < total; ++t) {
    const double eps = schedule.value(t);
    double q_hold = 0.0, q_dispatch = 0.0;
    if (is_dqn) {
      const std::vector<double> qv = nn::forward(out.pred, state);
      q_hold = qv[0];
      q_dispatch = qv[1];
    } else {
      const std::array<double, 2> qv = out.table.q(agents::TabularQ::discretize(state));
      q_hold = qv[0];
      q_dispatch = qv[1];
    }
    const int a = agents::select_action_eps_greedy(q_hold, q_dispatch, eps, agent_rng);
    env::Environment::StepResult sr = env.step(static_cast<env::Action>(a));

    agents::Experience e{state, a, sr.reward, sr.state};
    if (!is_dqn) agents::tabular_update(out.table, e);
    buffer.deposit(std::move(e));
    if (is_dqn && buffer.size() >= static_cast<std::size_t>(drl.batch_size)) {
      const auto batch = buffer.sample(static_cast<std::size_t>(drl.batch_size), agent_rng);
      out.series.loss.push_back(dqn_train_step(out.pred, out.target, batch, opt, &adam));
      agents::maybe_sync_target(t, drl.sync_period, drl.tau_soft, out.target, out.pred);
    }

    out.series.reward.push_back(sr.reward);
    out.series.epsilon.push_back(eps);
    out.series.action.push_back(a);
    out.series.slot_class.push_back(sr.outcome.slot_class);
    out.tx.push_back(sr.outcome.tx);
    acc.add_slot(sr.outcome, static_cast<env::Action>(a));
    if ((t + 1) % cfg.slots_per_frame == 0) out.series.frames.push_back(acc.finish());
    state = std::move(sr.state);
  }
  return out;
}

PolicyFn greedy_policy(const TrainResult& tr) {
  if (tr.kind == agents::AgentKind::Tabular) {
    const agents::TabularQ* table = &tr.table;
    return [table](std::span<const double> s) {
      const std::array<double, 2> qv = table->q(agents::TabularQ::discretize(s));
      return agents::greedy_action(qv[0], qv[1]);
    };
  }
  const nn::Network* net = &tr.pred;
  return [net](std::span<const double> s) {
    const std::vector<double> qv = nn::forward(*net, s);
    return agents::greedy_action(qv[0], qv[1]);
  };
}

PolicyFn always_hold_policy() {
  return [](std::span<const double>) { return 0; };
}

EvalSummary evaluate_policy(env::Environment& env, const PolicyFn& policy, int frames) {
  if (frames < 1) throw std::invalid_argument("evaluate_policy: frames must be >= 1");
  EvalSummary sum;
  metrics::FrameAccumulator acc(env.config().n_uds);
  // A live environment is continued in place so the policy is scored with its
  // observation history intact; a fresh one starts cold from an empty slate.
  std::vector<double> state;
  if (env.live()) {
    env.extend(frames);
    state = env.observation();
  } else {
    state = env.reset(frames);
  }
  const long long total = static_cast<long long>(frames) * env.config().slots_per_frame;
  for (long long t = 0; t < total; ++t) {
    const int a = policy(state);
    env::Environment::StepResult sr = env.step(static_cast<env::Action>(a));
    acc.add_slot(sr.outcome, static_cast<env::Action>(a));
    if ((t + 1) % env.config().slots_per_frame == 0) sum.frames.push_back(acc.finish());
    state = std::move(sr.state);
  }
  for (const metrics::FrameMetrics& f : sum.frames) {
    sum.sclar_total += f.sclar;
    sum.free_slots += f.free_slots;
    sum.free_dispatches += f.free_dispatches;
    sum.collisions += f.iud_collisions;
    sum.jammed_tx += f.iud_jammed_tx;
  }
  sum.utilization = sum.free_slots > 0
                        ? static_cast<double>(sum.free_dispatches) / sum.free_slots
                        : 0.0;
  return sum;
}

void save_policy(const TrainResult& tr, const std::string& path) {
  std::ostringstream os;
  if (tr.kind == agents::AgentKind::Tabular) {
    os << "sclarsim-table 1\n";
    os << "entries " << tr.table.table.size() << "\n";
    std::vector<std::string> keys;
    keys.reserve(tr.table.table.size());
    for (const auto& [key, q] : tr.table.table) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    char buf[64];
    for (const std::string& key : keys) {
      const std::array<double, 2> q = tr.table.q(key);
      os << key;
      for (double v : q) {
        std::snprintf(buf, sizeof buf, " %.17g", v);
        os << buf;
      }
      os << "\n";
    }
  } else {
    nn::save_network(tr.pred, os);
  }
  io::atomic_write_file(path, os.str());
}

LoadedPolicy load_policy(const std::string& path) {
  const std::string content = io::read_file(path);
  std::istringstream is(content);
  LoadedPolicy lp;
  if (content.rfind("sclarsim-table", 0) == 0) {
    lp.is_table = true;
    std::string magic, word;
    int version = 0;
    std::size_t entries = 0;
    if (!(is >> magic >> version >> word >> entries) || version != 1 || word != "entries")
      throw std::runtime_error("load_policy: bad table header");
    for (std::size_t i = 0; i < entries; ++i) {
      std::string key;
      double q0 = 0.0, q1 = 0.0;
      if (!(is >> key >> q0 >> q1)) throw std::runtime_error("load_policy: truncated table");
      lp.table.table[key] = {q0, q1};
    }
  } else {
    lp.net = nn::load_network(is);
  }
  return lp;
}

PolicyFn LoadedPolicy::policy() const {
  if (is_table) {
    const agents::TabularQ* table = &this->table;
    return [table](std::span<const double> s) {
      const std::array<double, 2> qv = table->q(agents::TabularQ::discretize(s));
      return agents::greedy_action(qv[0], qv[1]);
    };
  }
  const nn::Network* net = &this->net;
  return [net](std::span<const double> s) {
    const std::vector<double> qv = nn::forward(*net, s);
    return agents::greedy_action(qv[0], qv[1]);
  };
}

namespace {

json network_config_to_json(const NetworkConfig& c) {
  json j;
  j["n_uds"] = c.n_uds;
  j["m_jammers"] = c.m_jammers;
  j["k_antennas"] = c.k_antennas;
  j["slots_per_frame"] = c.slots_per_frame;
  j["frames"] = c.frames;
  j["omega"] = c.omega;
  j["jam_period"] = c.jam_period;
  j["jam_quiet"] = c.jam_quiet;
  j["ud_power_dbm_min"] = c.ud_power_dbm_min;
  j["ud_power_dbm_max"] = c.ud_power_dbm_max;
  j["noise_dbm_min"] = c.noise_dbm_min;
  j["noise_dbm_max"] = c.noise_dbm_max;
  j["history_window"] = c.history_window;
  j["redraw_fud_per_frame"] = c.redraw_fud_per_frame;
  j["redraw_channels_per_frame"] = c.redraw_channels_per_frame;
  j["ideal_sic"] = c.ideal_sic;
  j["invert_jam_pattern"] = c.invert_jam_pattern;
  j["fixed_unit_channels"] = c.fixed_unit_channels;
  j["fixed_fud_bits"] = c.fixed_fud_bits;
  j["seed"] = c.seed;
  j["drl"] = {
      {"alpha", c.drl.alpha},
      {"tabular_alpha", c.drl.tabular_alpha},
      {"gamma", c.drl.gamma},
      {"eps0", c.drl.eps0},
      {"eps_min", c.drl.eps_min},
      {"eps_decay", c.drl.eps_decay},
      {"replay_capacity", c.drl.replay_capacity},
      {"batch_size", c.drl.batch_size},
      {"sync_period", c.drl.sync_period},
      {"tau_soft", c.drl.tau_soft},
      {"hidden_width", c.drl.hidden_width},
      {"res_blocks", c.drl.res_blocks},
      {"use_adam", c.drl.use_adam},
      {"faithful_dqn", c.drl.faithful_dqn},
  };
  return j;
}

NetworkConfig network_config_from_json(const json& j) {
  NetworkConfig c;
  c.n_uds = j.at("n_uds").get<int>();
  c.m_jammers = j.at("m_jammers").get<int>();
  c.k_antennas = j.at("k_antennas").get<int>();
  c.slots_per_frame = j.at("slots_per_frame").get<int>();
  c.frames = j.at("frames").get<int>();
  c.omega = j.at("omega").get<double>();
  c.jam_period = j.at("jam_period").get<int>();
  c.jam_quiet = j.at("jam_quiet").get<int>();
  c.ud_power_dbm_min = j.at("ud_power_dbm_min").get<double>();
  c.ud_power_dbm_max = j.at("ud_power_dbm_max").get<double>();
  c.noise_dbm_min = j.at("noise_dbm_min").get<double>();
  c.noise_dbm_max = j.at("noise_dbm_max").get<double>();
  c.history_window = j.at("history_window").get<int>();
  c.redraw_fud_per_frame = j.at("redraw_fud_per_frame").get<bool>();
  c.redraw_channels_per_frame = j.at("redraw_channels_per_frame").get<bool>();
  c.ideal_sic = j.at("ideal_sic").get<bool>();
  c.invert_jam_pattern = j.at("invert_jam_pattern").get<bool>();
  c.fixed_unit_channels = j.at("fixed_unit_channels").get<bool>();
  c.fixed_fud_bits = j.at("fixed_fud_bits").get<std::vector<std::vector<std::uint8_t>>>();
  c.seed = j.at("seed").get<std::uint64_t>();
  const json& d = j.at("drl");
  c.drl.alpha = d.at("alpha").get<double>();
  c.drl.tabular_alpha = d.at("tabular_alpha").get<double>();
  c.drl.gamma = d.at("gamma").get<double>();
  c.drl.eps0 = d.at("eps0").get<double>();
  c.drl.eps_min = d.at("eps_min").get<double>();
  c.drl.eps_decay = d.at("eps_decay").get<double>();
  c.drl.replay_capacity = d.at("replay_capacity").get<std::size_t>();
  c.drl.batch_size = d.at("batch_size").get<int>();
  c.drl.sync_period = d.at("sync_period").get<int>();
  c.drl.tau_soft = d.at("tau_soft").get<double>();
  c.drl.hidden_width = d.at("hidden_width").get<int>();
  c.drl.res_blocks = d.at("res_blocks").get<int>();
  c.drl.use_adam = d.at("use_adam").get<bool>();
  c.drl.faithful_dqn = d.at("faithful_dqn").get<bool>();
  return c;
}

// Everything that must match for two manifests to be comparable.
std::string fingerprint(const ExperimentConfig& ec) {
  json j;
  j["scenario"] = ec.scenario;
  j["net"] = network_config_to_json(ec.base);
  j["seeds"] = ec.seeds;
  j["frame_sizes"] = ec.frame_sizes;
  j["eval_frames"] = ec.eval_frames;
  j["ma_window"] = ec.ma_window;
  return j.dump();
}

struct RunSpec {
  agents::AgentKind kind;
  std::uint64_t seed;
  int frame_size;
};

json run_one(const ExperimentConfig& ec, const RunSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();

  NetworkConfig nc = ec.base;
  nc.slots_per_frame = spec.frame_size;
  nc.seed = spec.seed;
  env::Environment env(nc);

  TrainResult tr = run_training(env, spec.kind);
  const EvalSummary eval = evaluate_policy(env, greedy_policy(tr), ec.eval_frames);
  const EvalSummary baseline = evaluate_policy(env, always_hold_policy(), ec.eval_frames);

  const std::string dir_name = run_dir_name(ec.scenario, spec.kind, spec.frame_size, spec.seed);
  const fs::path dir = fs::path(ec.out_dir) / dir_name;
  fs::create_directories(dir);

  metrics::write_learning_curve_csv((dir / "learning_curve.csv").string(), tr.series, ec.ma_window);
  metrics::write_loss_curve_csv((dir / "loss_curve.csv").string(), tr.series);
  metrics::write_sclar_csv((dir / "sclar.csv").string(), tr.series.frames);
  metrics::write_sclar_csv((dir / "eval_sclar.csv").string(), eval.frames);
  save_policy(tr, (dir / "policy.txt").string());
  if (ec.trace) {
    std::ostringstream os;
    os << "frame,slot,fud_bits,jam,iud_action,slot_class,reward\n";
    for (std::size_t t = 0; t < tr.series.reward.size(); ++t) {
      std::string bits;
      for (std::size_t f = 0; f + 1 < tr.tx[t].size(); ++f) bits.push_back(tr.tx[t][f] ? '1' : '0');
      os << t / spec.frame_size << ',' << t % spec.frame_size << ',' << bits << ','
         << (tr.series.slot_class[t] == env::SlotClass::Jammed ? 1 : 0) << ','
         << tr.series.action[t] << ',' << env::to_string(tr.series.slot_class[t]) << ','
         << io::fmt_double(tr.series.reward[t]) << '\n';
    }
    io::atomic_write_file((dir / "trace.csv").string(), os.str());
  }

  const std::vector<double> ma = metrics::moving_average(tr.series.reward, ec.ma_window);
  const std::size_t n_frames = tr.series.frames.size();
  const std::size_t decile = std::max<std::size_t>(1, n_frames / 10);
  double first_decile = 0.0, last_decile = 0.0;
  for (std::size_t f = 0; f < decile; ++f) first_decile += tr.series.frames[f].sclar;
  for (std::size_t f = n_frames - decile; f < n_frames; ++f) last_decile += tr.series.frames[f].sclar;
  first_decile /= static_cast<double>(decile);
  last_decile /= static_cast<double>(decile);

  const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - t0)
                           .count();

  json rj;
  rj["agent"] = agents::to_string(spec.kind);
  rj["seed"] = spec.seed;
  rj["frame_size"] = spec.frame_size;
  rj["dir"] = dir_name;
  rj["files"] = {
      {"learning_curve", dir_name + "/learning_curve.csv"},
      {"loss_curve", dir_name + "/loss_curve.csv"},
      {"sclar", dir_name + "/sclar.csv"},
      {"eval_sclar", dir_name + "/eval_sclar.csv"},
      {"policy", dir_name + "/policy.txt"},
  };
  rj["wall_ms"] = wall_ms;
  rj["train"] = {
      {"final_reward_ma", ma.empty() ? 0.0 : ma.back()},
      {"final_frame_sclar", n_frames ? tr.series.frames.back().sclar : 0.0},
      {"first_decile_sclar_mean", first_decile},
      {"last_decile_sclar_mean", last_decile},
      {"loss_steps", tr.series.loss.size()},
  };
  rj["eval"] = {
      {"sclar_total", eval.sclar_total},
      {"utilization", eval.utilization},
      {"collisions", eval.collisions},
      {"jammed_tx", eval.jammed_tx},
      {"free_slots", eval.free_slots},
      {"free_dispatches", eval.free_dispatches},
  };
  rj["baseline"] = {
      {"sclar_total", baseline.sclar_total},
      {"utilization", baseline.utilization},
  };
  return rj;
}

}  // namespace

json experiment_to_json(const ExperimentConfig& ec) {
  json j;
  j["scenario"] = ec.scenario;
  j["net"] = network_config_to_json(ec.base);
  std::vector<std::string> agent_names;
  for (agents::AgentKind k : ec.agent_kinds) agent_names.emplace_back(agents::to_string(k));
  j["agents"] = agent_names;
  j["seeds"] = ec.seeds;
  j["frame_sizes"] = ec.frame_sizes;
  j["out_dir"] = ec.out_dir;
  j["eval_frames"] = ec.eval_frames;
  j["ma_window"] = ec.ma_window;
  j["trace"] = ec.trace;
  j["jobs"] = ec.jobs;
  return j;
}

ExperimentConfig experiment_from_json(const json& j) {
  ExperimentConfig ec;
  ec.scenario = j.at("scenario").get<std::string>();
  ec.base = network_config_from_json(j.at("net"));
  ec.agent_kinds.clear();
  for (const auto& name : j.at("agents"))
    ec.agent_kinds.push_back(agents::agent_kind_from_name(name.get<std::string>()));
  ec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  ec.frame_sizes = j.at("frame_sizes").get<std::vector<int>>();
  ec.out_dir = j.at("out_dir").get<std::string>();
  ec.eval_frames = j.at("eval_frames").get<int>();
  ec.ma_window = j.at("ma_window").get<int>();
  ec.trace = j.at("trace").get<bool>();
  ec.jobs = j.at("jobs").get<int>();
  return ec;
}

ExperimentConfig experiment_from_manifest(const std::string& manifest_path) {
  const json manifest = json::parse(io::read_file(manifest_path));
  return experiment_from_json(manifest.at("config"));
}

json run_experiment(const ExperimentConfig& ec) {
  ec.validate();
  fs::create_directories(ec.out_dir);

  std::vector<int> sizes = ec.frame_sizes;
  if (sizes.empty()) sizes.push_back(ec.base.slots_per_frame);

  std::vector<RunSpec> specs;
  for (int size : sizes)
    for (agents::AgentKind kind : ec.agent_kinds)
      for (std::uint64_t seed : ec.seeds) specs.push_back({kind, seed, size});

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<json> results(specs.size());
  if (ec.jobs <= 1) {
    for (std::size_t i = 0; i < specs.size(); ++i) results[i] = run_one(ec, specs[i]);
  } else {
    std::size_t next = 0;
    while (next < specs.size()) {
      std::vector<std::pair<std::size_t, std::future<json>>> wave;
      for (int j = 0; j < ec.jobs && next < specs.size(); ++j, ++next)
        wave.emplace_back(next, std::async(std::launch::async, run_one, std::cref(ec), specs[next]));
      for (auto& [idx, fut] : wave) results[idx] = fut.get();
    }
  }
  const auto total_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - t0)
                            .count();

  json manifest;
  manifest["format"] = "sclarsim-manifest";
  manifest["version"] = 1;
  manifest["scenario"] = ec.scenario;
  manifest["fingerprint"] = fingerprint(ec);
  manifest["config"] = experiment_to_json(ec);
  manifest["ma_window"] = ec.ma_window;
  manifest["runs"] = results;
  manifest["total_wall_ms"] = total_ms;
  io::atomic_write_file((fs::path(ec.out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  return manifest;
}

json compare_agents(const std::vector<std::string>& manifest_paths, const std::string& out_csv_path) {
  if (manifest_paths.size() < 2)
    throw std::invalid_argument("compare: need at least two manifests");
  std::vector<json> manifests;
  for (const std::string& path : manifest_paths)
    manifests.push_back(json::parse(io::read_file(path)));
  const std::string fp = manifests.front().at("fingerprint").get<std::string>();
  for (std::size_t i = 1; i < manifests.size(); ++i) {
    if (manifests[i].at("fingerprint").get<std::string>() != fp)
      throw std::runtime_error("compare: manifests cover different scenarios/seeds and are not comparable");
  }

  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_agent;
  for (const json& m : manifests) {
    for (const json& run : m.at("runs")) {
      auto& [rewards, sclars] = by_agent[run.at("agent").get<std::string>()];
      rewards.push_back(run.at("train").at("final_reward_ma").get<double>());
      sclars.push_back(run.at("train").at("final_frame_sclar").get<double>());
    }
  }

  std::vector<json> rows;
  for (const auto& [agent, data] : by_agent) {
    json row;
    row["agent"] = agent;
    row["runs"] = data.first.size();
    row["final_reward_ma_mean"] = mean_of(data.first);
    row["final_reward_ma_std"] = sample_std(data.first);
    row["final_frame_sclar_mean"] = mean_of(data.second);
    row["final_frame_sclar_std"] = sample_std(data.second);
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const json& a, const json& b) {
    return a.at("final_reward_ma_mean").get<double>() > b.at("final_reward_ma_mean").get<double>();
  });
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i]["rank"] = i + 1;

  if (!out_csv_path.empty()) {
    std::ostringstream os;
    os << "rank,agent,runs,final_reward_ma_mean,final_reward_ma_std,final_frame_sclar_mean,final_frame_sclar_std\n";
    for (const json& row : rows) {
      os << row.at("rank").get<std::size_t>() << ',' << row.at("agent").get<std::string>() << ','
         << row.at("runs").get<std::size_t>() << ','
         << io::fmt_double(row.at("final_reward_ma_mean").get<double>()) << ','
         << io::fmt_double(row.at("final_reward_ma_std").get<double>()) << ','
         << io::fmt_double(row.at("final_frame_sclar_mean").get<double>()) << ','
         << io::fmt_double(row.at("final_frame_sclar_std").get<double>()) << '\n';
    }
    io::atomic_write_file(out_csv_path, os.str());
  }
  json out;
  out["rows"] = rows;
  return out;
}

}  // namespace sclarsim::harness
