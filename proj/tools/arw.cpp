// Command-line front end: lattice, sample, count, algebra, experiment, verify.
//
// Exit codes: 0 success, 1 hard error, 2 validation error.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "arw/algebra.hpp"
#include "arw/cli.hpp"
#include "arw/errors.hpp"
#include "arw/experiments.hpp"
#include "arw/faults.hpp"
#include "arw/field.hpp"
#include "arw/grid_io.hpp"
#include "arw/lattice.hpp"
#include "arw/nodal.hpp"

namespace {

using nlohmann::json;

void emit(const json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw arw::IoError("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

arw::field::DerivativeTag parse_derivative(const std::string& text, int d) {
  using arw::field::DerivativeTag;
  if (text == "value") return DerivativeTag::value();
  int i = -1, j = -1;
  if (std::sscanf(text.c_str(), "grad:%d", &i) == 1 && text.find(',') == std::string::npos) {
    if (i < 0 || i >= d) throw arw::ValidationError("--derivative", "component out of range");
    return DerivativeTag::gradient(i);
  }
  if (std::sscanf(text.c_str(), "hess:%d,%d", &i, &j) == 2) {
    if (i < 0 || i >= d || j < 0 || j >= d) throw arw::ValidationError("--derivative", "component out of range");
    return DerivativeTag::hessian(i, j);
  }
  throw arw::ValidationError("--derivative", "expected value, grad:i or hess:i,j");
}

int run(int argc, char** argv) {
  CLI::App app{"Arithmetic random waves: sampling, nodal counts and experiments"};
  app.require_subcommand(1);

  // lattice
  auto* lat = app.add_subcommand("lattice", "Lattice shell, orthogonality sums and equidistribution report");
  int lat_d = 2;
  std::int64_t lat_n = 1;
  bool lat_points = false;
  std::string lat_report;
  lat->add_option("--dim", lat_d, "Dimension d")->required();
  lat->add_option("--n", lat_n, "Squared radius n")->required();
  lat->add_flag("--points", lat_points, "Include the lattice points");
  lat->add_option("--report", lat_report, "Write JSON here instead of stdout");

  // sample
  auto* smp = app.add_subcommand("sample", "Evaluate one draw on a periodic grid and write an ARWG file");
  int smp_d = 2;
  std::int64_t smp_n = 1;
  std::uint64_t smp_seed = 0, smp_trial = 0;
  int smp_M = 0;
  std::string smp_out, smp_derivative = "value";
  smp->add_option("--dim", smp_d, "Dimension d")->required();
  smp->add_option("--n", smp_n, "Squared radius n")->required();
  smp->add_option("--seed", smp_seed, "Master seed");
  smp->add_option("--trial", smp_trial, "Trial index");
  smp->add_option("--grid", smp_M, "Points per axis M")->required();
  smp->add_option("--out", smp_out, "Output grid file")->required();
  smp->add_option("--derivative", smp_derivative, "value, grad:i or hess:i,j");

  // count
  auto* cnt = app.add_subcommand("count", "Nodal components and domains of a stored value grid");
  std::string cnt_in, cnt_report;
  std::vector<std::string> cnt_grad;
  bool cnt_refine = false;
  cnt->add_option("--in", cnt_in, "Value grid file")->required();
  cnt->add_option("--grad-in", cnt_grad, "Gradient grid files, checked against the value grid");
  cnt->add_option("--report", cnt_report, "Write JSON here instead of stdout");
  cnt->add_flag("--auto-refine", cnt_refine, "Refine until the counts stabilize");

  // algebra
  auto* alg = app.add_subcommand("algebra", "Exact C_D/S_D identities and the example Jacobian");
  bool alg_verify = false;
  int alg_dmax = 32;
  std::vector<int> alg_jac;
  std::string alg_report;
  alg->add_flag("--verify-identities", alg_verify, "Check the C_D/S_D identities up to --dmax");
  alg->add_option("--dmax", alg_dmax, "Largest degree D");
  alg->add_option("--jacobian-example", alg_jac, "d D: compare the example Jacobian with its closed form")
      ->expected(2);
  alg->add_option("--report", alg_report, "Write JSON here instead of stdout");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run an experiment config");
  std::string exp_config;
  std::vector<std::string> exp_set;
  std::string exp_trials, exp_seed, exp_parallelism, exp_csv, exp_report, exp_plots;
  bool exp_print = false;
  exp->add_option("--config", exp_config, "Config file")->required();
  exp->add_option("--set", exp_set, "Override: section.key=value (repeatable)");
  exp->add_option("--trials", exp_trials, "Overrides experiment.trials");
  exp->add_option("--seed", exp_seed, "Overrides experiment.master_seed");
  exp->add_option("--parallelism", exp_parallelism, "Overrides run.parallelism");
  exp->add_option("--csv", exp_csv, "Overrides output.csv");
  exp->add_option("--report", exp_report, "Overrides output.report");
  exp->add_option("--plots", exp_plots, "Overrides output.plots");
  exp->add_flag("--print-config", exp_print, "Print the canonical config and exit");

  // verify
  auto* ver = app.add_subcommand("verify", "Run every exact check at small scale");
  std::string ver_fault;
  ver->add_option("--inject-fault", ver_fault, "Negative control: frequency_placement")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*lat) {
    emit(arw::cli::lattice_json(arw::lattice::enumerate_shell(lat_d, lat_n), lat_points), lat_report);
    return 0;
  }

  if (*smp) {
    const auto shell = arw::field::make_shell(smp_d, smp_n);
    if (shell->empty()) throw arw::EmptyShell();
    const auto sample = arw::field::sample_coefficients(shell, smp_seed, smp_trial);
    const auto grid = arw::field::eval_grid(sample, smp_M, parse_derivative(smp_derivative, smp_d));
    arw::field::write_grid(smp_out, grid);
    return 0;
  }

  if (*cnt) {
    const auto grid = arw::field::read_grid(cnt_in);
    if (grid.M < arw::field::min_alias_free_M(grid.n)) {
      throw arw::ValidationError("--in", "grid aliases its own shell");
    }
    const auto sample = arw::field::sample_from_grid(grid);
    for (std::size_t i = 0; i < cnt_grad.size(); ++i) {
      const auto g = arw::field::read_grid(cnt_grad[i]);
      if (g.d != grid.d || g.n != grid.n || g.M != grid.M) {
        throw arw::ValidationError("--grad-in", cnt_grad[i] + " does not match the value grid");
      }
      // Without a stored tag, file i is taken as component i.
      const auto expected = arw::field::eval_grid(sample, grid.M, arw::field::DerivativeTag::gradient(static_cast<int>(i)));
      double scale = 1.0, worst = 0.0;
      for (std::size_t k = 0; k < g.values.size(); ++k) {
        scale = std::max(scale, std::abs(expected.values[k]));
        worst = std::max(worst, std::abs(expected.values[k] - g.values[k]));
      }
      if (worst > 1e-8 * scale) {
        throw arw::ValidationError("--grad-in", cnt_grad[i] + " is not the gradient of the value grid");
      }
    }
    const auto summary = arw::nodal::analyze(sample, grid.M, cnt_refine);
    emit(arw::cli::summary_json(summary, grid.d, grid.n), cnt_report);
    return 0;
  }

  if (*alg) {
    if (!alg_verify && alg_jac.empty()) throw arw::ValidationError("algebra", "nothing to do");
    json j;
    bool pass = true;
    if (alg_verify) {
      if (alg_dmax < 1) throw arw::ValidationError("--dmax", "must be at least 1");
      try {
        j["identities"] = arw::cli::identities_json(arw::algebra::verify_csd_identities(alg_dmax));
      } catch (const arw::IdentityFailure& e) {
        j["identities"] = {{"pass", false}, {"error", e.what()}};
        pass = false;
      }
    }
    if (!alg_jac.empty()) {
      const int d = alg_jac[0], D = alg_jac[1];
      if (d < 1 || D < 1) throw arw::ValidationError("--jacobian-example", "d and D must be positive");
      const auto t = arw::algebra::regular_example(d, D, arw::algebra::Rational(d + 1));
      const auto jac = arw::algebra::gradient_system_jacobian(t);
      const auto closed = arw::algebra::regular_example_jacobian(d, D);
      const bool match = jac == closed;
      pass = pass && match;
      j["jacobian_example"] = {{"d", d},
                               {"D", D},
                               {"pi_power", jac.pi_power},
                               {"jacobian", jac.poly.to_string()},
                               {"matches_closed_form", match}};
    }
    j["pass"] = pass;
    emit(j, alg_report);
    return pass ? 0 : 1;
  }

  if (*exp) {
    arw::cli::Overrides overrides;
    for (const auto& s : exp_set) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw arw::ValidationError("--set", "expected section.key=value, got '" + s + "'");
      overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (!exp_trials.empty()) overrides.emplace_back("experiment.trials", exp_trials);
    if (!exp_seed.empty()) overrides.emplace_back("experiment.master_seed", exp_seed);
    if (!exp_parallelism.empty()) overrides.emplace_back("run.parallelism", exp_parallelism);
    if (!exp_csv.empty()) overrides.emplace_back("output.csv", exp_csv);
    if (!exp_report.empty()) overrides.emplace_back("output.report", exp_report);
    if (!exp_plots.empty()) overrides.emplace_back("output.plots", exp_plots);
    const auto config = arw::cli::load_config(exp_config, overrides);
    if (exp_print) {
      std::cout << arw::cli::canonical(config);
      return 0;
    }
    const auto summary = arw::cli::run_config(config, &std::cerr);
    return summary.status;
  }

  if (*ver) {
    if (!ver_fault.empty() && ver_fault != "frequency_placement") {
      throw arw::ValidationError("--inject-fault", "unknown fault '" + ver_fault + "'");
    }
    const arw::faults::Scoped fault(ver_fault.empty() ? arw::faults::Fault::none
                                                      : arw::faults::Fault::frequency_placement);
    const auto report = arw::cli::verify_suite();
    arw::cli::print_verify_table(std::cout, report);
    return report.all_pass() ? 0 : 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const arw::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const arw::ConfigParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
