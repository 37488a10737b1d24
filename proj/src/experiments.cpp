#include "arw/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include "arw/errors.hpp"
#include "arw/field.hpp"
#include "arw/nodal.hpp"

namespace arw::experiments {
namespace {

std::int64_t ceil_sqrt(std::int64_t n) {
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r < n) ++r;
  while (r > 0 && (r - 1) * (r - 1) >= n) --r;
  return r;
}

TrialRecord run_one(const field::ShellPtr& shell, std::uint64_t trial_index, const MPolicy& policy,
                    std::uint64_t master_seed, std::size_t budget) {
  const auto start = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.trial_index = trial_index;
  rec.seed = master_seed;
  rec.d = shell->d;
  rec.n = shell->n;
  rec.dim_HL = shell->dim_HL;
  rec.M = grid_size(policy, shell->n);
  try {
    const auto sample = field::sample_coefficients(shell, master_seed, trial_index);
    nodal::AnalyzeOptions options;
    options.auto_refine = policy.kind == MPolicy::Kind::auto_refine;
    options.memory_budget_bytes = budget;
    if (field::grid_memory_bytes(shell->d, rec.M) > budget) throw MemoryBudgetExceeded("grid exceeds the memory budget");
    const auto summary = nodal::analyze(sample, rec.M, options);
    rec.M = summary.M;
    rec.k = summary.k;
    rec.r = summary.r;
    rec.min_domain_vol = summary.min_domain_volume();
    rec.sum_diameters = summary.sum_diameters();
    rec.alpha = summary.alpha;
    rec.beta = summary.beta;
    rec.certified = summary.certified;
  } catch (const MemoryBudgetExceeded&) {
    rec.error = "MemoryBudgetExceeded";
    rec.certified = false;
  }
  rec.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::vector<double> certified_values(const std::vector<TrialRecord>& records) {
  std::vector<double> values;
  for (const auto& r : records) {
    if (r.certified && r.error.empty()) values.push_back(r.normalized_count());
  }
  return values;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

std::string to_string(MPolicy::Kind kind) {
  switch (kind) {
    case MPolicy::Kind::fixed: return "fixed";
    case MPolicy::Kind::per_L: return "per_L";
    case MPolicy::Kind::auto_refine: return "auto_refine";
  }
  return "";
}

MPolicy::Kind parse_m_policy(const std::string& name) {
  if (name == "fixed") return MPolicy::Kind::fixed;
  if (name == "per_L") return MPolicy::Kind::per_L;
  if (name == "auto_refine") return MPolicy::Kind::auto_refine;
  throw UnknownPolicy(name);
}

int grid_size(const MPolicy& policy, std::int64_t n) {
  const int alias_free = field::min_alias_free_M(n);
  if (policy.kind == MPolicy::Kind::fixed) {
    if (policy.M < alias_free) {
      throw AliasError("fixed M = " + std::to_string(policy.M) + " aliases n = " + std::to_string(n));
    }
    return policy.M;
  }
  if (policy.K < 1) throw Error("K must be positive");
  return std::max(alias_free, static_cast<int>(policy.K * ceil_sqrt(n)));
}

double TrialRecord::normalized_count() const {
  return static_cast<double>(k) / std::pow(static_cast<double>(n), d / 2.0);
}

std::vector<TrialRecord> run_trials(int d, std::int64_t n, std::size_t trials, const MPolicy& policy,
                                    std::uint64_t master_seed, const RunOptions& options) {
  if (trials < 1) throw Error("trials must be at least 1");
  const auto shell = field::make_shell(d, n);
  if (shell->empty()) throw EmptyShell();
  grid_size(policy, n);  // validates the policy before any work
  const std::size_t budget = options.memory_budget_bytes ? options.memory_budget_bytes : field::memory_budget_bytes();

  std::vector<TrialRecord> records(trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t; (t = next.fetch_add(1)) < trials;) {
      records[t] = run_one(shell, options.first_trial + t, policy, master_seed, budget);
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(options.parallelism, static_cast<unsigned>(trials)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  return records;
}

const char* const kCsvHeader =
    "trial_index,seed,d,n,dim_HL,M,k,r,min_domain_vol,sum_diameters,alpha,beta,certified,wall_time_ms";

void write_csv_header(std::ostream& out) { out << kCsvHeader << '\n'; }

void write_csv_row(std::ostream& out, const TrialRecord& r, bool timing) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%llu,%llu,%d,%lld,%lld,%d,%zu,%zu,%.17g,%.17g,%.17g,%.17g,%d,",
                static_cast<unsigned long long>(r.trial_index), static_cast<unsigned long long>(r.seed), r.d,
                static_cast<long long>(r.n), static_cast<long long>(r.dim_HL), r.M, r.k, r.r, r.min_domain_vol,
                r.sum_diameters, r.alpha, r.beta, r.certified ? 1 : 0);
  out << buf;
  if (timing) {
    std::snprintf(buf, sizeof buf, "%.3f", r.wall_time_ms);
    out << buf;
  }
  out << '\n';
}

Groups group_by_n(const std::vector<TrialRecord>& records) {
  Groups groups;
  for (const auto& r : records) groups[r.n].push_back(r);
  return groups;
}

double median(std::vector<double> values) {
  if (values.empty()) throw InsufficientTrials("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

std::vector<double> absolute_epsilons(const Groups& groups, int d, const std::vector<double>& relative) {
  (void)d;
  if (groups.empty()) throw InsufficientTrials("no trials");
  const auto values = certified_values(groups.rbegin()->second);
  const double med = median(values);
  std::vector<double> out;
  for (double e : relative) out.push_back(e * med);
  return out;
}

ConcentrationReport concentration_report(const Groups& groups, int d, const std::vector<double>& epsilons,
                                         std::size_t min_certified) {
  ConcentrationReport report;
  report.d = d;
  for (const auto& [n, records] : groups) {
    const auto values = certified_values(records);
    if (values.size() < min_certified) {
      throw InsufficientTrials("n = " + std::to_string(n) + " has " + std::to_string(values.size()) +
                               " certified trials, need " + std::to_string(min_certified));
    }
    NStatistics s;
    s.n = n;
    s.dim_HL = records.front().dim_HL;
    s.trials = records.size();
    s.certified = values.size();
    s.uncertified_fraction = 1.0 - static_cast<double>(s.certified) / static_cast<double>(s.trials);
    const double N = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / N;
    s.median = median(values);
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    // Shifted by the first value, so identical values give exactly zero.
    double shifted = 0.0, shifted2 = 0.0, m4 = 0.0;
    for (double v : values) {
      const double dv = v - values.front();
      shifted += dv;
      shifted2 += dv * dv;
      const double dm = v - s.mean;
      m4 += dm * dm * dm * dm;
    }
    s.variance = std::max(0.0, (shifted2 - shifted * shifted / N) / (N - 1.0));
    m4 /= N;
    // Var(s^2) ~ (m4 - (N-3)/(N-1) sigma^4) / N
    const double var_of_var = (m4 - (N - 3.0) / (N - 1.0) * s.variance * s.variance) / N;
    s.variance_se = std::sqrt(std::max(0.0, var_of_var));
    for (double eps : epsilons) {
      std::size_t count = 0;
      for (double v : values) {
        if (std::abs(v - s.median) > eps) ++count;
      }
      s.tails.push_back({eps, static_cast<double>(count) / N});
    }
    report.per_n.push_back(std::move(s));
  }
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    std::vector<double> x, y;
    for (const auto& s : report.per_n) {
      if (s.tails[e].frequency > 0.0) {
        x.push_back(static_cast<double>(s.dim_HL));
        y.push_back(std::log(s.tails[e].frequency));
      }
    }
    TailSlope ts{epsilons[e], std::nullopt};
    const bool spread = !x.empty() && *std::max_element(x.begin(), x.end()) > *std::min_element(x.begin(), x.end());
    if (x.size() >= 3 && spread) ts.slope = slope(x, y);
    report.slopes.push_back(ts);
  }
  return report;
}

NuEstimate nu_estimate(const Groups& groups, int d) {
  (void)d;
  NuEstimate out;
  for (const auto& [n, records] : groups) {
    const auto values = certified_values(records);
    if (values.empty()) throw InsufficientTrials("n = " + std::to_string(n) + " has no certified trials");
    out.means[n] = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  }
  if (out.means.size() < 2) throw InsufficientTrials("nu estimate needs at least two distinct n");
  const auto last = std::prev(out.means.end());
  const auto second = std::prev(last);
  out.nu_hat = last->second;
  out.stabilization_gap = std::abs(last->second - second->second) / last->second;
  const auto values = certified_values(groups.at(last->first));
  if (values.size() >= 2) {
    double m2 = 0.0;
    for (double v : values) m2 += (v - out.nu_hat) * (v - out.nu_hat);
    out.standard_error = std::sqrt(m2 / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
  }
  out.significance = out.standard_error > 0.0 ? out.nu_hat / out.standard_error
                                              : (out.nu_hat > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  return out;
}

DiameterScaling diameter_scaling(const Groups& groups, int d) {
  (void)d;
  DiameterScaling out;
  std::vector<double> x, y;
  for (const auto& [n, records] : groups) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& r : records) {
      if (r.certified && r.error.empty()) {
        sum += r.sum_diameters;
        ++count;
      }
    }
    if (count == 0) throw InsufficientTrials("n = " + std::to_string(n) + " has no certified trials");
    const double mean = sum / static_cast<double>(count);
    if (!(mean > 0.0)) throw InsufficientTrials("n = " + std::to_string(n) + " has no nodal components");
    out.mean_sum_diameters[n] = mean;
    x.push_back(std::log(std::sqrt(static_cast<double>(n))));
    y.push_back(std::log(mean));
  }
  if (x.size() < 3) throw InsufficientTrials("diameter scaling needs at least three distinct n");
  out.exponent = slope(x, y);
  return out;
}

bool ProofExponents::all_hold() const {
  return std::all_of(std::begin(inequalities), std::end(inequalities), [](bool b) { return b; });
}

ProofExponents proof_exponents(int d) {
  if (d < 2) throw Error("proof exponents need d >= 2");
  ProofExponents e;
  e.d = d;
  const Rational D(d);
  e.r = 1;
  e.a = (D + 1) * (D + 2) / 2;
  e.b = e.a + 1;
  e.k = (D + 1) / 2;
  e.g = (D + 1) * (D + 3) / 4;
  e.h = ((D + 2) * (D + 2) - 1) / 2;
  e.t = e.h;
  e.c_exponent = (D + 2) * (D + 2) - 1;
  const auto min = [](std::initializer_list<Rational> xs) { return std::min(xs); };
  e.inequalities[0] = 2 * e.k + D * e.g <= min({e.a, e.b + e.g, 2 * e.g - e.k, e.t - e.k}) +
                                               D * min({e.b, e.g - e.k, e.t - e.k});
  e.inequalities[1] = e.b <= e.a + e.r;
  e.inequalities[2] = e.r >= 1;
  e.inequalities[3] = 2 * e.k >= 1 + e.r * D;
  e.inequalities[4] = 2 * e.h >= 1 + 2 * e.a + e.r * D;
  return e;
}

std::vector<std::int64_t> builtin_sequence(int d) {
  if (d != 2) throw Error("the built-in sequence is defined for d = 2 only");
  return {5, 65, 325, 1105};
}

}  // namespace arw::experiments
