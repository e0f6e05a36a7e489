// Command-line front end: train full seed/agent grids, evaluate saved
// policies, and compare manifests.
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sclarsim/harness.hpp"
#include "sclarsim/io.hpp"

namespace {

namespace hn = sclarsim::harness;
namespace ag = sclarsim::agents;

std::vector<std::string> split_commas(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

int cmd_train(const std::string& config_path, const std::string& manifest_path,
              const std::string& scenario, const std::string& agents_csv,
              const std::string& seeds_csv, const std::string& sizes_csv,
              const std::string& out_dir, int frames, int eval_frames, int jobs,
              bool trace, bool use_adam, bool plain_sgd, bool faithful) {
  hn::ExperimentConfig ec;
  if (!manifest_path.empty()) {
    ec = hn::experiment_from_manifest(manifest_path);
  } else if (!config_path.empty()) {
    ec = hn::config_from_file(config_path);
  } else {
    ec.base = hn::scenario_by_name(ec.scenario);
  }
  if (!scenario.empty()) {
    ec.scenario = scenario;
    ec.base = hn::scenario_by_name(scenario);
  }
  if (!agents_csv.empty()) {
    ec.agent_kinds.clear();
    for (const std::string& name : split_commas(agents_csv))
      ec.agent_kinds.push_back(ag::agent_kind_from_name(name));
  }
  if (!seeds_csv.empty()) {
    ec.seeds.clear();
    for (const std::string& s : split_commas(seeds_csv)) ec.seeds.push_back(std::stoull(s));
  }
  if (!sizes_csv.empty()) {
    ec.frame_sizes.clear();
    for (const std::string& s : split_commas(sizes_csv)) ec.frame_sizes.push_back(std::stoi(s));
  }
  if (!out_dir.empty()) ec.out_dir = out_dir;
  if (frames > 0) ec.base.frames = frames;
  if (eval_frames > 0) ec.eval_frames = eval_frames;
  if (jobs > 0) ec.jobs = jobs;
  if (trace) ec.trace = true;
  if (use_adam) ec.base.drl.use_adam = true;
  if (plain_sgd) ec.base.drl.use_adam = false;
  if (faithful) ec.base.drl.faithful_dqn = true;

  const nlohmann::json manifest = hn::run_experiment(ec);
  for (const auto& run : manifest.at("runs")) {
    std::printf("%-8s seed=%-4llu S=%-3d final_reward_ma=%-12.4f eval_util=%.3f\n",
                run.at("agent").get<std::string>().c_str(),
                static_cast<unsigned long long>(run.at("seed").get<std::uint64_t>()),
                run.at("frame_size").get<int>(),
                run.at("train").at("final_reward_ma").get<double>(),
                run.at("eval").at("utilization").get<double>());
  }
  std::printf("wrote %s/manifest.json (%zu runs, %lld ms)\n", ec.out_dir.c_str(),
              manifest.at("runs").size(),
              manifest.at("total_wall_ms").get<long long>());
  return 0;
}

int cmd_eval(const std::string& policy_path, const std::string& scenario, std::uint64_t seed,
             int frames, const std::string& out_dir) {
  sclarsim::NetworkConfig nc = hn::scenario_by_name(scenario);
  nc.seed = seed;
  sclarsim::env::Environment env(nc);
  const hn::LoadedPolicy lp = hn::load_policy(policy_path);
  const hn::EvalSummary sum = hn::evaluate_policy(env, lp.policy(), frames);
  std::filesystem::create_directories(out_dir);
  sclarsim::metrics::write_sclar_csv((std::filesystem::path(out_dir) / "eval_sclar.csv").string(),
                                     sum.frames);
  std::printf("frames=%d sclar_total=%.4f utilization=%.3f collisions=%d jammed_tx=%d\n", frames,
              sum.sclar_total, sum.utilization, sum.collisions, sum.jammed_tx);
  std::printf("wrote %s/eval_sclar.csv\n", out_dir.c_str());
  return 0;
}

int cmd_compare(const std::string& manifests_csv, const std::string& out_csv) {
  const nlohmann::json table = hn::compare_agents(split_commas(manifests_csv), out_csv);
  for (const auto& row : table.at("rows")) {
    std::printf("#%zu %-8s runs=%-3zu final_reward_ma=%.4f +- %.4f\n",
                row.at("rank").get<std::size_t>(), row.at("agent").get<std::string>().c_str(),
                row.at("runs").get<std::size_t>(), row.at("final_reward_ma_mean").get<double>(),
                row.at("final_reward_ma_std").get<double>());
  }
  std::printf("wrote %s\n", out_csv.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slotted uplink anti-jamming simulator + learning harness"};
  app.require_subcommand(1);

  std::string config_path, manifest_path, scenario, agents_csv, seeds_csv, sizes_csv, out_dir;
  int frames = 0, eval_frames = 0, jobs = 0;
  bool trace = false, use_adam = false, plain_sgd = false, faithful = false;

  CLI::App* train = app.add_subcommand("train", "train agents over a seed grid");
  train->add_option("--config", config_path, "key=value config file");
  train->add_option("--from-manifest", manifest_path, "reproduce a previous run from its manifest");
  train->add_option("--scenario", scenario, "scenario preset (D1, S1, S2, S3, custom)");
  train->add_option("--agent", agents_csv, "comma list: tabular,fcdnn,resdnn");
  train->add_option("--seeds", seeds_csv, "comma list of seeds");
  train->add_option("--frame-sizes", sizes_csv, "comma list of slots-per-frame values");
  train->add_option("--out", out_dir, "output directory");
  train->add_option("--frames", frames, "training frames per run");
  train->add_option("--eval-frames", eval_frames, "greedy evaluation frames per run");
  train->add_option("--jobs", jobs, "parallel runs");
  train->add_flag("--trace", trace, "write per-slot trace.csv for each run");
  train->add_flag("--use-adam", use_adam, "adaptive optimizer (the default outside faithful mode)");
  train->add_flag("--plain-sgd", plain_sgd, "literal gradient step instead of adaptive moments");
  train->add_flag("--faithful-dqn", faithful, "bootstrap targets with the prediction net");

  std::string policy_path, eval_scenario = "S1", eval_out = "eval_out";
  std::uint64_t eval_seed = 1;
  int eval_n_frames = 100;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a saved policy greedily");
  eval->add_option("--policy", policy_path, "saved policy file")->required();
  eval->add_option("--scenario", eval_scenario, "scenario preset");
  eval->add_option("--seed", eval_seed, "environment seed");
  eval->add_option("--frames", eval_n_frames, "evaluation frames");
  eval->add_option("--out", eval_out, "output directory");

  std::string manifests_csv, compare_out = "comparison.csv";
  CLI::App* compare = app.add_subcommand("compare", "summarize manifests side by side");
  compare->add_option("--manifests", manifests_csv, "comma list of manifest.json paths")->required();
  compare->add_option("--out", compare_out, "comparison CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed())
      return cmd_train(config_path, manifest_path, scenario, agents_csv, seeds_csv, sizes_csv,
                       out_dir, frames, eval_frames, jobs, trace, use_adam, plain_sgd, faithful);
    if (eval->parsed()) return cmd_eval(policy_path, eval_scenario, eval_seed, eval_n_frames, eval_out);
    if (compare->parsed()) return cmd_compare(manifests_csv, compare_out);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
