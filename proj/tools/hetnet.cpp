#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hetnet/errors.hpp"
#include "hetnet/harness.hpp"
#include "hetnet/plots.hpp"
#include "hetnet/tsia.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kInfeasible = 3;

int run(const std::string& config_path, std::optional<int> drops,
        std::optional<std::uint64_t> seed, std::optional<std::string> out_dir,
        std::optional<int> threads) {
  hetnet::ExperimentConfig config = hetnet::load_config(config_path);
  if (drops) config.drops = *drops;
  if (seed) config.master_seed = *seed;
  if (out_dir) config.output_dir = *out_dir;
  if (threads) config.threads = *threads;
  config.validate();

  std::cerr << "config " << config.hash() << ": " << config.drops << " drops, "
            << config.algorithms.size() << " algorithms, " << config.sweep.size()
            << " power points\n";
  const auto output = hetnet::run_experiment(config, [](int done, int total) {
    std::cerr << "\rdrop " << done << "/" << total << std::flush;
  });
  std::cerr << '\n';
  if (output.resumed_drops > 0) {
    std::cerr << "resumed after " << output.resumed_drops << " complete drops\n";
  }
  std::cout << output.raw_csv.string() << '\n' << output.table_csv.string() << '\n';
  for (const auto& path : hetnet::emit_plots(output.table, config.output_dir, config.hash(),
                                             hetnet::utc_timestamp())) {
    std::cout << path.string() << '\n';
  }
  return 0;
}

int plot(const std::string& table_path, const std::string& out_dir) {
  std::ifstream in(table_path, std::ios::binary);
  if (!in) throw hetnet::IoError("cannot read " + table_path);
  std::stringstream content;
  content << in.rdbuf();
  const auto table = hetnet::read_table_csv(table_path);
  for (const auto& path : hetnet::emit_plots(table, out_dir, hetnet::hash_text(content.str()),
                                             hetnet::utc_timestamp())) {
    std::cout << path.string() << '\n';
  }
  return 0;
}

int feasibility(const std::string& config_path) {
  const hetnet::ExperimentConfig config = hetnet::load_config(config_path);
  config.scenario.validate();
  const auto& s = config.scenario;
  const auto result = hetnet::check_feasibility(s.antenna_profile, s.l1, s.l2);
  std::cout << "nullified pUEs: " << result.nullified << '\n';
  if (result.feasible) {
    std::cout << "TSIA feasible\n";
    return 0;
  }
  std::cout << "TSIA infeasible: " << result.reason << '\n';
  return kInfeasible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-tier MIMO HetNet simulator: MMSE GIA and TSIA transceiver design"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<int> drops;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  auto* run_cmd = app.add_subcommand("run", "Run a Monte Carlo experiment and plot it");
  run_cmd->add_option("--config", config_path, "JSON experiment config")->required();
  run_cmd->add_option("--drops", drops, "Override the number of drops");
  run_cmd->add_option("--seed", seed, "Override the master seed");
  run_cmd->add_option("--out", out_dir, "Override the output directory");
  run_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");

  std::string table_path;
  std::string plot_out;
  auto* plot_cmd = app.add_subcommand("plot", "Render figures from an aggregated table CSV");
  plot_cmd->add_option("--table", table_path, "Aggregated table CSV")->required();
  plot_cmd->add_option("--out", plot_out, "Output directory")->required();

  std::string feas_config;
  auto* feas_cmd = app.add_subcommand("feasibility", "Check TSIA feasibility of a config");
  feas_cmd->add_option("--config", feas_config, "JSON experiment config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run_cmd) return run(config_path, drops, seed, out_dir, threads);
    if (*plot_cmd) return plot(table_path, plot_out);
    if (*feas_cmd) return feasibility(feas_config);
  } catch (const hetnet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const hetnet::TsiaInfeasible& e) {
    std::cerr << e.what() << '\n';
    return kInfeasible;
  } catch (const hetnet::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
