#include <cmath>
#include <cstdio>
#include <sstream>
#include <fstream>
#include <ostream>

#include "arw/cli.hpp"
#include "arw/errors.hpp"
#include "arw/field.hpp"

namespace arw::cli {
namespace {

using nlohmann::json;

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed to write " + path.string());
}

std::string rational_string(const experiments::Rational& r) { return r.str(); }

struct PlotRow {
  double x;
  double y;
  std::string series;
};

std::string plot_csv(const std::vector<PlotRow>& rows) {
  std::string out = "x,y,series\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,", r.x, r.y);
    out += buf;
    out += r.series + "\n";
  }
  return out;
}

}  // namespace

nlohmann::json lattice_json(const lattice::LatticeShell& shell, bool include_points) {
  json j;
  j["d"] = shell.d;
  j["n"] = shell.n;
  j["dim_HL"] = shell.dim_HL;
  j["half_size"] = shell.half_points.size();
  if (include_points) j["points"] = shell.points;
  if (shell.empty()) {
    j["orthogonality"] = nullptr;
    j["equidistribution"] = nullptr;
    return j;
  }
  const auto sums = lattice::orthogonality_sums(shell);
  json matrix = json::array();
  for (int i = 0; i < shell.d; ++i) {
    json row = json::array();
    for (int k = 0; k < shell.d; ++k) row.push_back(sums[static_cast<std::size_t>(i * shell.d + k)]);
    matrix.push_back(row);
  }
  j["orthogonality"] = matrix;
  const auto eq = lattice::equidistribution_report(shell);
  json moments = json::array();
  for (const auto& [alpha, dev] : eq.moment_deviations) {
    moments.push_back({{"alpha", alpha}, {"empirical", eq.empirical_moments.at(alpha)},
                       {"sphere", lattice::sphere_moment(shell.d, alpha)}, {"deviation", dev}});
  }
  j["equidistribution"] = {{"moments", moments}, {"max_dev4", eq.max_dev4}};
  j["equidistribution"]["angular_star_discrepancy"] =
      eq.angular_star_discrepancy ? json(*eq.angular_star_discrepancy) : json(nullptr);
  return j;
}

nlohmann::json summary_json(const nodal::NodalSummary& s, int d, std::int64_t n) {
  json j;
  j["d"] = d;
  j["n"] = n;
  j["M"] = s.M;
  j["k"] = s.k;
  j["r"] = s.r;
  j["domain_volumes"] = s.domain_volumes;
  j["component_diameters"] = s.component_diameters;
  j["component_wrapping"] = s.component_wrapping;
  j["alpha"] = s.alpha;
  j["beta"] = s.beta;
  j["mu"] = s.mu;
  j["certified"] = s.certified;
  j["analytic_certified"] = s.analytic_certified;
  j["critical_points"] = s.critical_points;
  j["snapped_saddles"] = s.snapped_saddles;
  j["unresolved_saddles"] = s.unresolved_saddles;
  j["min_critical_value"] = s.min_critical_value;
  j["refinement_levels"] = s.refinement_levels;
  j["zero_hits"] = s.zero_hits;
  j["budget_exhausted"] = s.budget_exhausted;
  j["consistent"] = s.components_domains_consistent(d);
  return j;
}

nlohmann::json identities_json(const algebra::IdentityReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"D", r.D},
                    {"sum_of_squares", r.sum_of_squares},
                    {"factorization", r.factorization},
                    {"determinant", r.determinant}});
  }
  return {{"d_max", report.d_max}, {"rows", rows}, {"pass", report.all_pass}};
}

nlohmann::json proof_exponents_json(const experiments::ProofExponents& e) {
  json ineq = json::array();
  for (bool b : e.inequalities) ineq.push_back(b);
  return {{"d", e.d},
          {"a", rational_string(e.a)},
          {"b", rational_string(e.b)},
          {"k", rational_string(e.k)},
          {"g", rational_string(e.g)},
          {"t", rational_string(e.t)},
          {"h", rational_string(e.h)},
          {"r", rational_string(e.r)},
          {"c_exponent", rational_string(e.c_exponent)},
          {"inequalities", ineq},
          {"all_hold", e.all_hold()}};
}

nlohmann::json experiment_report(const ExperimentConfig& config, const std::vector<experiments::TrialRecord>& records,
                                 std::vector<std::string>* notes) {
  auto note = [&](const std::string& text) {
    if (notes) notes->push_back(text);
  };
  json j;
  j["config"] = canonical(config);
  j["d"] = config.d;
  j["n"] = config.resolved_n();
  j["trials_per_n"] = config.trials;

  json flagged = json::array();
  for (const auto& r : records) {
    if (!r.error.empty()) flagged.push_back({{"n", r.n}, {"trial_index", r.trial_index}, {"error", r.error}});
  }
  j["flagged"] = flagged;

  json diag = json::array();
  for (auto n : config.resolved_n()) {
    const auto shell = lattice::enumerate_shell(config.d, n);
    if (shell.empty()) continue;
    const auto eq = lattice::equidistribution_report(shell);
    diag.push_back({{"n", n},
                    {"dim_HL", shell.dim_HL},
                    {"max_dev4", eq.max_dev4},
                    {"angular_star_discrepancy",
                     eq.angular_star_discrepancy ? json(*eq.angular_star_discrepancy) : json(nullptr)}});
  }
  j["equidistribution"] = diag;

  const auto groups = experiments::group_by_n(records);
  try {
    const auto eps = config.epsilon_mode == "relative"
                         ? experiments::absolute_epsilons(groups, config.d, config.epsilons)
                         : config.epsilons;
    const auto report = experiments::concentration_report(groups, config.d, eps);
    json per_n = json::array();
    for (const auto& s : report.per_n) {
      json tails = json::array();
      for (const auto& t : s.tails) tails.push_back({{"epsilon", t.epsilon}, {"frequency", t.frequency}});
      per_n.push_back({{"n", s.n},
                       {"dim_HL", s.dim_HL},
                       {"trials", s.trials},
                       {"certified", s.certified},
                       {"uncertified_fraction", s.uncertified_fraction},
                       {"mean", s.mean},
                       {"median", s.median},
                       {"variance", s.variance},
                       {"variance_se", s.variance_se},
                       {"min", s.min},
                       {"max", s.max},
                       {"tails", tails}});
    }
    json slopes = json::array();
    for (const auto& s : report.slopes) {
      slopes.push_back({{"epsilon", s.epsilon}, {"slope", s.slope ? json(*s.slope) : json(nullptr)}});
    }
    j["concentration"] = {{"per_n", per_n}, {"slopes", slopes}};
  } catch (const InsufficientTrials& e) {
    j["concentration"] = {{"absent", e.what()}};
    note(std::string("concentration: ") + e.what());
  }

  try {
    const auto nu = experiments::nu_estimate(groups, config.d);
    json means = json::object();
    for (const auto& [n, m] : nu.means) means[std::to_string(n)] = m;
    j["nu"] = {{"means", means},
               {"nu_hat", nu.nu_hat},
               {"standard_error", nu.standard_error},
               {"significance", std::isfinite(nu.significance) ? json(nu.significance) : json(nullptr)},
               {"stabilization_gap", nu.stabilization_gap},
               {"note", "estimate, not ground truth"}};
  } catch (const InsufficientTrials& e) {
    j["nu"] = {{"absent", e.what()}};
    note(std::string("nu: ") + e.what());
  }

  try {
    const auto ds = experiments::diameter_scaling(groups, config.d);
    json means = json::object();
    for (const auto& [n, m] : ds.mean_sum_diameters) means[std::to_string(n)] = m;
    j["diameter_scaling"] = {{"exponent", ds.exponent}, {"mean_sum_diameters", means}, {"target", config.d - 1}};
  } catch (const InsufficientTrials& e) {
    j["diameter_scaling"] = {{"absent", e.what()}};
    note(std::string("diameter scaling: ") + e.what());
  }

  j["proof_exponents"] = proof_exponents_json(experiments::proof_exponents(config.d));
  if (config.timing) {
    double total = 0.0;
    for (const auto& r : records) total += r.wall_time_ms;
    j["wall_time_ms_total"] = total;
  }
  return j;
}

RunSummary run_config(const ExperimentConfig& config, std::ostream* log) {
  RunSummary summary;
  experiments::RunOptions options;
  options.parallelism = config.parallelism;
  if (config.memory_budget_mb > 0.0) {
    options.memory_budget_bytes = static_cast<std::size_t>(config.memory_budget_mb * 1024.0 * 1024.0);
  }

  std::vector<experiments::TrialRecord> records;
  for (auto n : config.resolved_n()) {
    if (lattice::representation_count(config.d, n) == 0) {
      summary.notes.push_back("n = " + std::to_string(n) + " has an empty shell; skipped");
      continue;
    }
    auto batch = experiments::run_trials(config.d, n, config.trials, config.m_policy, config.master_seed, options);
    if (log) {
      std::size_t certified = 0;
      for (const auto& r : batch) certified += r.certified ? 1 : 0;
      *log << "n = " << n << ": " << batch.size() << " trials, " << certified << " certified\n";
    }
    records.insert(records.end(), batch.begin(), batch.end());
  }
  summary.records = records.size();
  for (const auto& r : records) summary.flagged += r.error.empty() ? 0 : 1;

  std::ostringstream csv;
  experiments::write_csv_header(csv);
  for (const auto& r : records) experiments::write_csv_row(csv, r, config.timing);
  write_text(config.output_path(config.csv), csv.str());

  const json report = experiment_report(config, records, &summary.notes);
  write_text(config.output_path(config.report), report.dump(2) + "\n");

  if (!config.plots.empty()) {
    const auto dir = config.output_path(config.plots);
    std::vector<PlotRow> count_rows, variance_rows, tail_rows;
    const auto groups = experiments::group_by_n(records);
    for (const auto& [n, batch] : groups) {
      std::vector<double> values;
      for (const auto& r : batch) {
        if (r.certified && r.error.empty()) values.push_back(r.normalized_count());
      }
      if (values.empty()) continue;
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      const double L = std::sqrt(static_cast<double>(n));
      count_rows.push_back({L, mean, "mean"});
      count_rows.push_back({L, experiments::median(values), "median"});
    }
    if (report.contains("concentration") && report["concentration"].contains("per_n")) {
      for (const auto& s : report["concentration"]["per_n"]) {
        const double dim = s["dim_HL"].get<double>();
        variance_rows.push_back({dim, s["variance"].get<double>(), "variance"});
        for (const auto& t : s["tails"]) {
          char label[64];
          std::snprintf(label, sizeof label, "eps=%.6g", t["epsilon"].get<double>());
          tail_rows.push_back({dim, t["frequency"].get<double>(), label});
        }
      }
    }
    write_text(dir / "count_vs_L.csv", plot_csv(count_rows));
    write_text(dir / "variance_vs_dim.csv", plot_csv(variance_rows));
    write_text(dir / "tail_vs_dim.csv", plot_csv(tail_rows));
  }
  if (log) {
    for (const auto& n : summary.notes) *log << "note: " << n << "\n";
  }
  summary.status = 0;
  return summary;
}

RunSummary run_config(const std::filesystem::path& path, const Overrides& overrides, std::ostream* log) {
  return run_config(load_config(path, overrides), log);
}

}  // namespace arw::cli
