// Copyright 2026 The LeakChain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line entry point. Exit status: 0 success, 1 a check failed or some
// runs could not be produced, 2 bad usage or configuration.

#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "leakchain/harness/commands.hpp"

namespace {

namespace fs = std::filesystem;
namespace h = leakchain::harness;

fs::path DefaultRoot() {
  if (const char* env = std::getenv("LEAKCHAIN_OUT"); env && *env) return env;
  return "out";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"leakchain: compositional leakage verification and regularized training"};
  app.require_subcommand(1);

  h::VerifyOptions verify;
  std::string verify_out;
  auto* verify_cmd = app.add_subcommand("verify-bound", "fuzz the cumulative bound on exact pipelines");
  verify_cmd->add_option("--count", verify.count, "pipelines per N")->capture_default_str();
  verify_cmd->add_option("--n-min", verify.n_min, "smallest pipeline depth")->capture_default_str();
  verify_cmd->add_option("--n-max", verify.n_max, "largest pipeline depth")->capture_default_str();
  verify_cmd->add_option("--seed", verify.seed, "fuzzing seed")->capture_default_str();
  verify_cmd->add_option("--max-alphabet", verify.max_alphabet, "largest alphabet size")
      ->capture_default_str();
  verify_cmd->add_option("--out", verify_out, "output directory (default <root>/verify)");
  std::string verify_config;
  verify_cmd->add_option("--config", verify_config, "take verify_* keys from a YAML config")
      ->check(CLI::ExistingFile);

  std::string config_path;
  auto* train_cmd = app.add_subcommand("train", "train and evaluate one configuration per seed");
  train_cmd->add_option("--config", config_path, "YAML config")->required()->check(CLI::ExistingFile);

  int jobs = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "run a grid of depths, betas and selective modes");
  sweep_cmd->add_option("--config", config_path, "YAML config")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--jobs", jobs, "concurrent runs")->capture_default_str()->check(CLI::PositiveNumber);

  std::string run_dir;
  auto* probe_cmd = app.add_subcommand("probe", "re-run the leakage probes of a stored run");
  probe_cmd->add_option("--run", run_dir, "run directory")->required()->check(CLI::ExistingDirectory);

  std::string pattern, report_out;
  auto* report_cmd = app.add_subcommand("report", "aggregate run directories");
  report_cmd->add_option("--glob", pattern, "glob matching run directories")->required();
  report_cmd->add_option("--out", report_out, "output directory (default <root>/report)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*verify_cmd) {
      fs::path root = DefaultRoot();
      if (!verify_config.empty()) {
        // Flags given on the command line win over the file.
        const auto c = h::load_config(verify_config);
        if (!verify_cmd->count("--count")) verify.count = c.verify_count;
        if (!verify_cmd->count("--n-min")) verify.n_min = c.verify_n_min;
        if (!verify_cmd->count("--n-max")) verify.n_max = c.verify_n_max;
        if (!verify_cmd->count("--max-alphabet")) verify.max_alphabet = c.verify_max_alphabet;
        if (!verify_cmd->count("--seed")) verify.seed = c.verify_seed;
        root = h::output_root(c);
      }
      const fs::path out = verify_out.empty() ? root / "verify" : fs::path(verify_out);
      return h::cmd_verify_bound(verify, out, std::cout);
    }
    if (*train_cmd) return h::cmd_train(h::load_config(config_path), std::cout);
    if (*sweep_cmd) return h::cmd_sweep(h::load_config(config_path), jobs, std::cout);
    if (*probe_cmd) return h::cmd_probe(run_dir, std::cout);
    if (*report_cmd) {
      const fs::path out = report_out.empty() ? DefaultRoot() / "report" : fs::path(report_out);
      return h::cmd_report(pattern, out, std::cout);
    }
  } catch (const h::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
