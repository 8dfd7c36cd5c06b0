#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lselab/config.hpp"
#include "lselab/gibbs.hpp"

namespace lselab {

struct Verdict {
  std::string experiment;
  std::vector<CheckRow> checks;
  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  const CheckRow* find(const std::string& label) const {
    for (const auto& c : checks)
      if (c.label == label) return &c;
    return nullptr;
  }
};

struct ExperimentContext {
  ConfigFile config;
  std::string out_dir = "lab_out";
  std::uint64_t seed = 1;
  bool quick = false;
};

struct ExperimentInfo {
  std::string name;
  std::string claim;                  // theorem family the checks certify
  std::vector<std::string> theorems;  // tags printed in the verify table
};

const std::vector<ExperimentInfo>& experiment_registry();
/// Tags that must be covered by the registry (completeness self-test).
const std::vector<std::string>& required_theorem_tags();

/// Throws std::invalid_argument("unknown experiment") for unknown names.
Verdict run_experiment(const std::string& name, const ExperimentContext& ctx);

/// Every registered experiment, each with a seed derived from the base seed
/// and the experiment name.
std::vector<Verdict> verify_all(const ExperimentContext& ctx);

std::uint64_t derive_seed(std::uint64_t base, const std::string& name);

}  // namespace lselab
