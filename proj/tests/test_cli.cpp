#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace {

const std::string kCli = MDIQKD_CLI_PATH;

int run_cli(const std::string& args, const std::string& capture = "") {
  std::string cmd = kCli + " " + args;
  if (!capture.empty()) cmd += " > " + capture + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  out << text;
}

const char* kGoodConfig = R"({
  "version": 1,
  "alice": {"family": "coherent", "intensities": [0.01, 0.1, 0.5], "n_max": 15},
  "bob":   {"family": "coherent", "intensities": [0.01, 0.1, 0.5], "n_max": 15},
  "channel": {"total_loss_db": 10.0},
  "f_ec": 1.16,
  "sweep": {"loss_db_start": 0.0, "loss_db_end": 2.0, "loss_db_step": 1.0},
  "methods": ["y11_123", "y11_14", "infinite"]
})";

size_t count_lines(const std::string& s) {
  size_t n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("sweep command") {
  write_file("cli_cfg.json", kGoodConfig);

  SECTION("writes the CSV and exits cleanly") {
    REQUIRE(run_cli("sweep --config cli_cfg.json --out cli_sweep.csv") == 0);
    const std::string csv = slurp("cli_sweep.csv");
    REQUIRE(csv.rfind("loss_db,y11_true,bound_y11_123", 0) == 0);
    REQUIRE(count_lines(csv) == 4);  // header + 3 points
  }

  SECTION("stdout when --out is omitted") {
    REQUIRE(run_cli("sweep --config cli_cfg.json", "cli_stdout.txt") == 0);
    REQUIRE(slurp("cli_stdout.txt").rfind("loss_db,", 0) == 0);
  }

  SECTION("byte-identical across runs and thread counts") {
    REQUIRE(run_cli("sweep --config cli_cfg.json --out cli_a.csv") == 0);
    REQUIRE(run_cli("sweep --config cli_cfg.json --out cli_b.csv --threads 1") == 0);
    REQUIRE(run_cli("sweep --config cli_cfg.json --out cli_c.csv --threads 3") == 0);
    const std::string a = slurp("cli_a.csv");
    REQUIRE(a == slurp("cli_b.csv"));
    REQUIRE(a == slurp("cli_c.csv"));
  }

  SECTION("bad configs exit with the validation code") {
    write_file("cli_bad.json", "{ not json");
    REQUIRE(run_cli("sweep --config cli_bad.json", "cli_err.txt") == 1);
    write_file("cli_bad.json", R"({"version": 2})");
    REQUIRE(run_cli("sweep --config cli_bad.json", "cli_err.txt") == 1);
    REQUIRE(run_cli("sweep --config cli_missing.json", "cli_err.txt") == 1);
    REQUIRE(slurp("cli_err.txt").rfind("error:", 0) == 0);
  }
}

TEST_CASE("optimize command") {
  write_file("cli_opt.json", R"({
    "version": 1,
    "alice": {"family": "coherent", "intensities": [0.01, 0.1, 0.5], "n_max": 15},
    "bob":   {"family": "coherent", "intensities": [0.01, 0.1, 0.5], "n_max": 15},
    "sweep": {"loss_db_start": 10.0, "loss_db_end": 10.0, "loss_db_step": 1.0},
    "methods": ["y11_123"]
  })");
  REQUIRE(run_cli("optimize --config cli_opt.json --out cli_opt.csv") == 0);
  const std::string csv = slurp("cli_opt.csv");
  REQUIRE(csv.rfind("loss_db,opt_mu_s_y11_123,opt_rate_y11_123", 0) == 0);
  REQUIRE(count_lines(csv) == 2);

  // Custom sources cannot be optimized: validation failure at runtime.
  write_file("cli_opt_bad.json", R"({
    "version": 1,
    "alice": {"family": "custom", "n_max": 3,
              "probs": [[0.9, 0.009, 0.0001, 0.00001],
                        [0.8, 0.08, 0.004, 0.0001],
                        [0.6, 0.24, 0.048, 0.0064]]},
    "bob":   {"family": "custom", "n_max": 3,
              "probs": [[0.9, 0.009, 0.0001, 0.00001],
                        [0.8, 0.08, 0.004, 0.0001],
                        [0.6, 0.24, 0.048, 0.0064]]},
    "sweep": {"loss_db_start": 10.0, "loss_db_end": 10.0, "loss_db_step": 1.0},
    "methods": ["y11_123"]
  })");
  REQUIRE(run_cli("optimize --config cli_opt_bad.json", "cli_err2.txt") == 1);
}

TEST_CASE("verify command") {
  SECTION("small passing run") {
    REQUIRE(run_cli("verify --instances 40 --n-max 4 --lp --out cli_margins.csv",
                    "cli_verify.txt") == 0);
    const std::string text = slurp("cli_verify.txt");
    REQUIRE(text.find("instances: 40") != std::string::npos);
    REQUIRE(text.find("failed:    0") != std::string::npos);
    REQUIRE(text.find("lp runs:   40") != std::string::npos);
    REQUIRE(text.find("PASS") != std::string::npos);

    const std::string margins = slurp("cli_margins.csv");
    REQUIRE(margins.rfind("instance,seed,n_max,check,pass,skipped,margin", 0) == 0);
    REQUIRE(margins.find("underbound_123") != std::string::npos);
  }

  SECTION("deterministic for a fixed seed") {
    REQUIRE(run_cli("verify --instances 15 --n-max 4 --seed 9 --out cli_m1.csv",
                    "cli_v1.txt") == 0);
    REQUIRE(run_cli("verify --instances 15 --n-max 4 --seed 9 --out cli_m2.csv "
                    "--threads 2",
                    "cli_v2.txt") == 0);
    REQUIRE(slurp("cli_m1.csv") == slurp("cli_m2.csv"));
  }

  SECTION("flag validation") {
    REQUIRE(run_cli("verify --instances 0", "cli_err3.txt") == 1);
    REQUIRE(run_cli("verify --n-max 2", "cli_err3.txt") == 1);
    REQUIRE(run_cli("verify --threads -1", "cli_err3.txt") == 1);
  }
}

TEST_CASE("usage errors") {
  REQUIRE(run_cli("", "cli_usage.txt") == 1);          // missing subcommand
  REQUIRE(run_cli("frobnicate", "cli_usage.txt") == 1);
  REQUIRE(run_cli("sweep", "cli_usage.txt") == 1);     // missing --config
  REQUIRE(run_cli("sweep --config", "cli_usage.txt") == 1);
  REQUIRE(run_cli("--help", "cli_usage.txt") == 0);
  REQUIRE(slurp("cli_usage.txt").find("sweep") != std::string::npos);
}
