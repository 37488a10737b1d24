#pragma once

// Monte-Carlo trials of the nodal count and the statistics built on them.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace arw::experiments {

struct MPolicy {
  enum class Kind { fixed, per_L, auto_refine };
  Kind kind = Kind::per_L;
  int M = 0;   // fixed
  int K = 16;  // per_L, and the starting grid of auto_refine

  static MPolicy fixed(int M) { return {Kind::fixed, M, 0}; }
  static MPolicy per_L(int K) { return {Kind::per_L, 0, K}; }
  static MPolicy auto_refine(int K) { return {Kind::auto_refine, 0, K}; }
};

std::string to_string(MPolicy::Kind kind);
MPolicy::Kind parse_m_policy(const std::string& name);

// Grid size for a shell: fixed M, or K * ceil(sqrt(n)) raised to the alias-free minimum.
int grid_size(const MPolicy& policy, std::int64_t n);

struct TrialRecord {
  std::uint64_t trial_index = 0;
  std::uint64_t seed = 0;
  int d = 0;
  std::int64_t n = 0;
  std::int64_t dim_HL = 0;
  int M = 0;
  std::size_t k = 0;
  std::size_t r = 0;
  double min_domain_vol = 0.0;
  double sum_diameters = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  bool certified = false;
  double wall_time_ms = 0.0;
  std::string error;  // set when the trial was skipped, e.g. "MemoryBudgetExceeded"

  double normalized_count() const;  // k / n^{d/2}
};

struct RunOptions {
  unsigned parallelism = 1;
  std::size_t memory_budget_bytes = 0;  // 0: field::memory_budget_bytes()
  std::uint64_t first_trial = 0;
};

// Trial t draws from the stream (master_seed, first_trial + t). The records
// do not depend on the parallelism apart from wall_time_ms.
std::vector<TrialRecord> run_trials(int d, std::int64_t n, std::size_t trials, const MPolicy& policy,
                                    std::uint64_t master_seed, const RunOptions& options = {});

extern const char* const kCsvHeader;

// `timing = false` leaves wall_time_ms empty so that reruns are byte-identical.
void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const TrialRecord& record, bool timing);

using Groups = std::map<std::int64_t, std::vector<TrialRecord>>;

Groups group_by_n(const std::vector<TrialRecord>& records);

struct TailFrequency {
  double epsilon = 0.0;
  double frequency = 0.0;
};

struct NStatistics {
  std::int64_t n = 0;
  std::int64_t dim_HL = 0;
  std::size_t trials = 0;
  std::size_t certified = 0;
  double uncertified_fraction = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double variance = 0.0;      // unbiased
  double variance_se = 0.0;   // standard error of the sample variance
  double min = 0.0;
  double max = 0.0;
  std::vector<TailFrequency> tails;
};

struct TailSlope {
  double epsilon = 0.0;
  std::optional<double> slope;  // of log frequency against dim_HL
};

struct ConcentrationReport {
  int d = 0;
  std::vector<NStatistics> per_n;  // ascending n
  std::vector<TailSlope> slopes;
};

constexpr std::size_t kMinCertifiedTrials = 30;

// Statistics of k / n^{d/2} over certified trials. Epsilons are absolute.
ConcentrationReport concentration_report(const Groups& groups, int d, const std::vector<double>& epsilons,
                                         std::size_t min_certified = kMinCertifiedTrials);

// Epsilons relative to the median at the largest n.
std::vector<double> absolute_epsilons(const Groups& groups, int d, const std::vector<double>& relative);

double median(std::vector<double> values);

struct NuEstimate {
  std::map<std::int64_t, double> means;  // per n
  double nu_hat = 0.0;
  double standard_error = 0.0;
  double significance = 0.0;  // nu_hat / standard_error
  double stabilization_gap = 0.0;
};

NuEstimate nu_estimate(const Groups& groups, int d);

struct DiameterScaling {
  double exponent = 0.0;
  std::map<std::int64_t, double> mean_sum_diameters;
};

// Least-squares slope of log mean(sum_diameters) against log sqrt(n).
DiameterScaling diameter_scaling(const Groups& groups, int d);

using Rational = boost::multiprecision::cpp_rational;

struct ProofExponents {
  int d = 0;
  Rational a, b, k, g, t, h, r;
  Rational c_exponent;
  bool inequalities[5] = {false, false, false, false, false};

  bool all_hold() const;
};

ProofExponents proof_exponents(int d);

// The built-in d = 2 sequence with dim_HL = 8, 16, 24, 32.
std::vector<std::int64_t> builtin_sequence(int d);

}  // namespace arw::experiments
