// Command-line front end: loss sweeps, signal-intensity optimization, and the
// randomized self-verification suite.
//
// Exit codes: 0 success, 1 validation/usage error, 2 property failure.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "mdiqkd/mdiqkd.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitProperty = 2;

struct CommonFlags {
  std::string config;
  std::string out;
  std::uint64_t seed = 1;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonFlags* flags, bool config_required) {
  auto* c = cmd->add_option("--config", flags->config, "scenario JSON file");
  if (config_required) c->required();
  cmd->add_option("--out", flags->out, "output CSV file (stdout when omitted)");
  cmd->add_option("--seed", flags->seed, "base RNG seed");
  cmd->add_option("--threads", flags->threads, "worker threads, 0 = auto")
      ->check(CLI::NonNegativeNumber);
}

void emit(const mdiqkd::CsvTable& csv, const std::string& out) {
  if (out.empty())
    std::fputs(csv.str().c_str(), stdout);
  else
    csv.write(out);
}

int cmd_sweep(const CommonFlags& flags) {
  const mdiqkd::Scenario sc = mdiqkd::load_scenario(flags.config);
  emit(mdiqkd::run_sweep(sc, flags.threads), flags.out);
  return kExitOk;
}

int cmd_optimize(const CommonFlags& flags) {
  const mdiqkd::Scenario sc = mdiqkd::load_scenario(flags.config);
  emit(mdiqkd::run_optimize(sc, flags.threads), flags.out);
  return kExitOk;
}

int cmd_verify(const CommonFlags& flags, int instances, int n_max, bool lp) {
  if (instances <= 0) throw std::invalid_argument("verify: --instances must be > 0");
  if (n_max != 0 && n_max < 3)
    throw std::invalid_argument("verify: --n-max must be >= 3 (0 = cycle 4/6/10)");

  mdiqkd::SuiteOptions options;
  options.instances = instances;
  options.seed = flags.seed;
  if (n_max != 0) options.n_max_cycle = {n_max};
  options.lp = lp;
  options.threads = flags.threads;

  const mdiqkd::SuiteResult suite = mdiqkd::run_suite(options);
  if (!flags.out.empty()) mdiqkd::margins_csv(suite).write(flags.out);

  std::printf("instances: %d\n", suite.instances);
  std::printf("failed:    %d\n", suite.failed_instances);
  if (lp) std::printf("lp runs:   %d\n", suite.lp_evaluated);
  std::printf("worst margin: %.3e (%s)\n", suite.worst_margin, suite.worst_check.c_str());
  std::printf("%s\n", suite.all_pass() ? "PASS" : "FAIL");
  return suite.all_pass() ? kExitOk : kExitProperty;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-intensity decoy-state analysis for MDI-QKD"};
  app.require_subcommand(1);

  CommonFlags sweep_flags, optimize_flags, verify_flags;
  int instances = 1000;
  int n_max = 0;
  bool lp = false;

  CLI::App* sweep = app.add_subcommand("sweep", "loss sweep of bounds and key rates");
  add_common(sweep, &sweep_flags, true);

  CLI::App* optimize =
      app.add_subcommand("optimize", "signal-intensity optimization over a loss sweep");
  add_common(optimize, &optimize_flags, true);

  CLI::App* verify =
      app.add_subcommand("verify", "randomized property suite over synthetic instances");
  add_common(verify, &verify_flags, false);
  verify->add_option("--instances", instances, "number of random instances");
  verify->add_option("--n-max", n_max, "photon-number cutoff (0 = cycle 4/6/10)");
  verify->add_flag("--lp", lp, "also solve the LP tightness reference");

  try {
    app.parse(argc, argv);
    if (sweep->parsed()) return cmd_sweep(sweep_flags);
    if (optimize->parsed()) return cmd_optimize(optimize_flags);
    return cmd_verify(verify_flags, instances, n_max, lp);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  }
}
