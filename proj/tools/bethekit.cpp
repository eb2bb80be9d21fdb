// Command-line front end: solve, verify and count Bethe root sets from JSON
// configurations, or run the built-in six-vertex preset.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "bethekit/cli.hpp"

namespace {

std::string read_input(const std::string& path) {
  std::ostringstream buf;
  if (path == "-") {
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path);
  if (!in) throw bethekit::ConfigError(path + ": cannot open configuration file");
  buf << in.rdbuf();
  return buf.str();
}

int emit(const bethekit::RunResult& result, const std::string& out_path, bool quiet) {
  const std::string text = result.report.dump(2) + "\n";
  if (out_path.empty()) {
    if (!quiet) std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return 2;
    }
    out << text;
  }
  if (!quiet) {
    const auto& summary = result.report["summary"];
    std::cerr << (result.pass ? "PASS" : "FAIL") << ": " << summary["instances"].get<std::size_t>() << " instance(s), "
              << summary["failures"].size() << " failure(s)\n";
  }
  return result.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bethe ansatz root solver and identity checker"};
  app.require_subcommand(1);

  std::string out_path;
  double tol_identity = 1e-8;
  double tol_sumrule = 1e-10;
  bool quiet = false;
  app.add_option("--out", out_path, "Write the JSON report to this file instead of stdout");
  app.add_option("--tol-identity", tol_identity, "Normalized tolerance for the vanishing identities")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--tol-sumrule", tol_sumrule, "Relative tolerance for sum rules")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--quiet", quiet, "Print nothing; rely on the exit status");

  std::string config_path;
  auto add_config_command = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", config_path, "Configuration file (\"-\" for stdin)")->required();
    return sub;
  };
  auto* solve_cmd = add_config_command("solve", "Solve and classify");
  auto* verify_cmd = add_config_command("verify", "Solve, classify, check identities and sum rules, count");
  auto* count_cmd = add_config_command("count", "Solve, classify and compare counts with the expected dimension");
  auto* run_cmd = add_config_command("run", "Run the tasks listed in the configuration");

  int fm_n = 0;
  double fm_gamma = 0.6180339887498949;
  auto* fm_cmd = app.add_subcommand("reproduce-fm", "Homogeneous periodic six-vertex chain, every sector");
  fm_cmd->add_option("--n", fm_n, "Even chain length")->required();
  fm_cmd->add_option("--gamma", fm_gamma, "Anisotropy, q = exp(i gamma)")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  using bethekit::Task;
  bethekit::RunOptions opt;
  opt.thresholds.identity = tol_identity;
  opt.thresholds.sumrule = tol_sumrule;
  opt.threads = bethekit::threads_from_environment();

  try {
    bethekit::RunConfig config;
    if (fm_cmd->parsed()) {
      opt.command = "reproduce-fm";
      config = bethekit::preset_fm(fm_n, fm_gamma);
    } else {
      config = bethekit::parse_config_text(read_input(config_path));
      if (solve_cmd->parsed()) {
        opt.command = "solve";
        opt.tasks = std::vector<Task>{Task::solve, Task::classify};
      } else if (verify_cmd->parsed()) {
        opt.command = "verify";
        opt.tasks = std::vector<Task>{Task::solve, Task::classify, Task::identities, Task::sumrules, Task::count};
      } else if (count_cmd->parsed()) {
        opt.command = "count";
        opt.tasks = std::vector<Task>{Task::solve, Task::classify, Task::count};
      } else if (run_cmd->parsed()) {
        opt.command = "run";
      }
    }
    return emit(bethekit::run(config, opt), out_path, quiet);
  } catch (const bethekit::Error& e) {
    if (!quiet) std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
