#pragma once

// Experiment configuration, orchestration and reports.
//
// Config files are line oriented:
//
//   # comment
//   [experiment]
//   d = 2
//   n = 25, 65
//   trials = 200
//
// Sections and keys are fixed; anything else is rejected. Relative output
// paths resolve against the directory of the config file.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "arw/algebra.hpp"
#include "arw/experiments.hpp"
#include "arw/lattice.hpp"
#include "arw/nodal.hpp"

namespace arw::cli {

struct ExperimentConfig {
  // [experiment]
  int d = 0;
  std::string sequence = "list";  // list | range | builtin
  std::vector<std::int64_t> n;
  std::int64_t n_min = 0;
  std::int64_t n_max = 0;
  std::string policy = "top_by_dim";  // lattice sequence policy, for range
  std::size_t trials = 0;
  std::uint64_t master_seed = 0;
  std::vector<double> epsilons{0.01, 0.02, 0.05, 0.1};
  std::string epsilon_mode = "relative";  // relative to the median at the largest n, or absolute
  // [grid]
  experiments::MPolicy m_policy = experiments::MPolicy::per_L(16);
  // [run]
  unsigned parallelism = 1;
  double memory_budget_mb = 0.0;  // 0: ARW_MEMORY_BUDGET_MB or its default
  // [output]
  std::string csv = "trials.csv";
  std::string report = "report.json";
  std::string plots;  // directory for plot data; empty disables
  bool timing = false;

  std::filesystem::path base_dir;  // directory of the config file

  // n values after applying the sequence rule.
  std::vector<std::int64_t> resolved_n() const;
  std::filesystem::path output_path(const std::string& relative) const;
};

// "section.key" -> raw value, applied over the file contents before validation.
using Overrides = std::vector<std::pair<std::string, std::string>>;

ExperimentConfig parse_config(const std::string& text, const Overrides& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

// Every key in a fixed order; parsing the result yields the same config.
std::string canonical(const ExperimentConfig& config);

struct RunSummary {
  int status = 0;
  std::size_t records = 0;
  std::size_t flagged = 0;
  std::vector<std::string> notes;  // statistics that could not be computed, and why
};

// Runs every n of the config and writes the CSV, the report and plot data.
RunSummary run_config(const ExperimentConfig& config, std::ostream* log = nullptr);
RunSummary run_config(const std::filesystem::path& path, const Overrides& overrides = {},
                      std::ostream* log = nullptr);

nlohmann::json experiment_report(const ExperimentConfig& config, const std::vector<experiments::TrialRecord>& records,
                                 std::vector<std::string>* notes = nullptr);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
};

// Exact and small-scale checks across all modules.
VerifyReport verify_suite();
void print_verify_table(std::ostream& out, const VerifyReport& report);

nlohmann::json lattice_json(const lattice::LatticeShell& shell, bool include_points);
nlohmann::json summary_json(const nodal::NodalSummary& summary, int d, std::int64_t n);
nlohmann::json identities_json(const algebra::IdentityReport& report);
nlohmann::json proof_exponents_json(const experiments::ProofExponents& e);

}  // namespace arw::cli
