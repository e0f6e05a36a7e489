#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sclarsim/agents.hpp"
#include "sclarsim/env.hpp"
#include "sclarsim/metrics.hpp"

// Experiment driver: named scenarios, key=value config files, the training
// loop, greedy evaluation, and manifest/CSV output for whole seed x agent
// grids.
namespace sclarsim::harness {

struct ExperimentConfig {
  NetworkConfig base;
  std::string scenario = "S1";
  std::vector<agents::AgentKind> agent_kinds{agents::AgentKind::ResDnn};
  std::vector<std::uint64_t> seeds{1};
  std::vector<int> frame_sizes;  // empty -> just base.slots_per_frame
  std::string out_dir = "out";
  int eval_frames = 100;
  int ma_window = 100;
  bool trace = false;
  int jobs = 1;

  void validate() const;
};

// D1 (scripted two-UD drill), S1 (four UDs, S=5), S2/S3 (S=10/20 sweeps),
// custom (library defaults, meant to be overridden).
NetworkConfig scenario_by_name(const std::string& name);
std::vector<std::string> scenario_names();

// Flat `section.key = value` text; '#' comments. Unknown keys are errors at
// apply time.
std::map<std::string, std::string> parse_kv_text(const std::string& text);
void apply_kv_overrides(const std::map<std::string, std::string>& kv, ExperimentConfig& ec);
ExperimentConfig config_from_file(const std::string& path);

// One training run's full record plus whichever learner it produced.
struct TrainResult {
  agents::AgentKind kind = agents::AgentKind::Tabular;
  metrics::TrainingSeries series;
  std::vector<std::vector<std::uint8_t>> tx;  // per-slot transmit indicators
  agents::TabularQ table;
  nn::Network pred;
  nn::Network target;
};

TrainResult run_training(env::Environment& env, agents::AgentKind kind);

using PolicyFn = std::function<int(std::span<const double>)>;
// Deterministic greedy policy over the trained learner. The returned function
// references `tr`; keep it alive.
PolicyFn greedy_policy(const TrainResult& tr);
PolicyFn always_hold_policy();

struct EvalSummary {
  std::vector<metrics::FrameMetrics> frames;
  double sclar_total = 0.0;
  int free_slots = 0;
  int free_dispatches = 0;
  int collisions = 0;
  int jammed_tx = 0;
  double utilization = 0.0;
};
EvalSummary evaluate_policy(env::Environment& env, const PolicyFn& policy, int frames);

void save_policy(const TrainResult& tr, const std::string& path);
struct LoadedPolicy {
  bool is_table = false;
  agents::TabularQ table;
  nn::Network net;
  // References *this; keep the LoadedPolicy alive while using the function.
  PolicyFn policy() const;
};
LoadedPolicy load_policy(const std::string& path);

// Runs the whole seed x agent x frame-size grid, writing per-run CSVs and
// policies under out_dir plus a manifest.json describing everything. Returns
// the manifest.
nlohmann::json run_experiment(const ExperimentConfig& ec);

nlohmann::json experiment_to_json(const ExperimentConfig& ec);
ExperimentConfig experiment_from_json(const nlohmann::json& j);
// Rehydrates the config echoed into a manifest, for exact reruns.
ExperimentConfig experiment_from_manifest(const std::string& manifest_path);

// Cross-manifest summary table (mean/stddev of final reward MA and final
// frame SCLAR per agent, ranked). All manifests must share a fingerprint.
nlohmann::json compare_agents(const std::vector<std::string>& manifest_paths,
                              const std::string& out_csv_path);

}  // namespace sclarsim::harness
