#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rfm/error.hpp"
#include "rfm/runner.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCheckFailed = 3;

int run_command(const std::string& path, const std::string& out_dir, const rfm::RunOverrides& ov) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "config: cannot read " << path << "\n";
    return kExitConfig;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    const rfm::ExperimentConfig cfg = rfm::parse_experiment_config(ss.str());
    const rfm::RunOutcome out = rfm::run_experiment(cfg, ov);
    const std::string dir = !out_dir.empty() ? out_dir : cfg.output_dir.value_or(".");
    const std::string written = rfm::write_outputs(out, dir);
    for (const auto& c : out.checks) {
      std::cout << (c.passed ? "PASS " : "FAIL ") << out.experiment << "." << c.name << " (" << c.detail << ")\n";
    }
    std::cout << "report " << written << "\n";
    return out.passed() ? 0 : kExitCheckFailed;
  } catch (const rfm::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const rfm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frechet-mean statistics on model manifolds"};
  app.set_version_flag("--version", rfm::library_version());
  app.require_subcommand(1);

  std::string config, out_dir;
  std::uint64_t seed = 0;
  int par = 1;
  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config, "config JSON file")->required();
  run->add_option("--output-dir", out_dir, "directory for report files (default: config output_dir or .)");
  auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
  auto* par_opt = run->add_option("--trials-parallelism", par, "worker threads for CLT trials")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list", "list experiments and their fields");

  CLI11_PARSE(app, argc, argv);

  if (list->parsed()) {
    std::cout << rfm::list_experiments();
    return 0;
  }
  rfm::RunOverrides ov;
  if (seed_opt->count()) ov.seed = seed;
  if (par_opt->count()) ov.parallelism = par;
  return run_command(config, out_dir, ov);
}
