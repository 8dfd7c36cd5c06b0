#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "lselab/csv.hpp"
#include "lselab/experiments.hpp"

namespace {

using lselab::CheckRow;
using lselab::Verdict;

void print_verdict(const Verdict& v) {
  std::cout << "experiment: " << v.experiment << "\n";
  for (const auto& c : v.checks)
    std::cout << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.label
              << "  measured=" << lselab::csv_number(c.measured)
              << " bound=" << lselab::csv_number(c.bound) << "\n";
  std::cout << "verdict: " << (v.pass() ? "PASS" : "FAIL") << "\n";
}

int exit_code_for(const std::vector<Verdict>& verdicts) {
  for (const auto& v : verdicts)
    if (!v.pass()) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for the lattice logarithmic Schrodinger equation"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 1;
  bool quick = false;
  std::string experiment;

  if (const char* env = std::getenv("LAB_OUT")) out_dir = env;
  if (out_dir.empty()) out_dir = "lab_out";

  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("experiment", experiment, "experiment name (see `lab list`)")->required();
  run->add_option("--config", config_path, "config file");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed, "base RNG seed");

  auto* list = app.add_subcommand("list", "list experiments");

  auto* verify = app.add_subcommand("verify", "run the full suite");
  verify->add_flag("--quick", quick, "abbreviated parameters");
  verify->add_option("--config", config_path, "config file");
  verify->add_option("--out", out_dir, "output directory");
  verify->add_option("--seed", seed, "base RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  lselab::ExperimentContext ctx;
  ctx.out_dir = out_dir;
  ctx.seed = seed;
  ctx.quick = quick;
  if (!config_path.empty()) {
    try {
      ctx.config = lselab::ConfigFile::parse_file(config_path);
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
  }

  try {
    if (list->parsed()) {
      for (const auto& info : lselab::experiment_registry()) {
        std::cout << info.name << "  (" << info.claim << "; ";
        for (size_t i = 0; i < info.theorems.size(); ++i)
          std::cout << (i ? ", " : "") << info.theorems[i];
        std::cout << ")\n";
      }
      return 0;
    }
    if (run->parsed()) {
      Verdict v;
      try {
        v = lselab::run_experiment(experiment, ctx);
      } catch (const std::invalid_argument& e) {
        if (std::string(e.what()) == "unknown experiment") {
          std::cerr << "unknown experiment: " << experiment << "\n";
          return 2;
        }
        throw;
      }
      print_verdict(v);
      return v.pass() ? 0 : 1;
    }
    // verify
    auto verdicts = lselab::verify_all(ctx);
    std::cout << "check table (claim verified per experiment):\n";
    for (size_t i = 0; i < verdicts.size(); ++i) {
      const auto& info = lselab::experiment_registry()[i];
      std::cout << "--- " << info.name << " [";
      for (size_t k = 0; k < info.theorems.size(); ++k)
        std::cout << (k ? ", " : "") << info.theorems[k];
      std::cout << "]\n";
      print_verdict(verdicts[i]);
    }
    int code = exit_code_for(verdicts);
    std::cout << (code == 0 ? "ALL EXPERIMENTS PASS" : "FAILURES PRESENT") << "\n";
    return code;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}
