#pragma once

// Lattice points on spheres: the frequency sets of arithmetic random waves.
//
// A shell for (d, n) is the set of integer vectors with squared norm n. Its
// size is the eigenspace dimension of the Laplacian at eigenvalue 4*pi^2*n.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace arw::lattice {

using IntVec = std::vector<std::int64_t>;

struct LatticeShell {
  int d = 0;
  std::int64_t n = 0;
  std::vector<IntVec> points;       // lexicographic order
  std::vector<IntVec> half_points;  // first nonzero coordinate positive, lexicographic
  std::int64_t dim_HL = 0;

  bool empty() const { return points.empty(); }
};

// True iff the first nonzero coordinate is positive.
bool in_half_space(const IntVec& v);

LatticeShell enumerate_shell(int d, std::int64_t n);

// Number of ordered representations of n as a sum of d squares, without
// materializing the points.
std::int64_t representation_count(int d, std::int64_t n);

// Even multi-index of total order 2 or 4: exponent per coordinate.
using MultiIndex = std::vector<int>;

struct EquidistributionReport {
  int d = 0;
  std::int64_t n = 0;
  std::map<MultiIndex, double> moment_deviations;
  std::map<MultiIndex, double> empirical_moments;
  double max_dev4 = 0.0;
  std::optional<double> angular_star_discrepancy;  // d == 2 only
};

// Moment of the uniform measure on the unit sphere S^{d-1} for even alpha
// with |alpha| in {2, 4}.
double sphere_moment(int d, const MultiIndex& alpha);

EquidistributionReport equidistribution_report(const LatticeShell& shell);

enum class SequencePolicy { all, congruence_d3, bounded_two_adic, top_by_dim, diagnostic_threshold };

SequencePolicy parse_policy(const std::string& name);
std::string to_string(SequencePolicy policy);

struct SequenceOptions {
  int max_two_adic_valuation = 1;  // bounded_two_adic
  double max_dev4_threshold = 0.05;  // diagnostic_threshold
};

// Ascending n in [n_min, n_max] selected by the policy. Empty shells are
// never returned.
std::vector<std::int64_t> admissible_sequence(int d, std::int64_t n_min, std::int64_t n_max,
                                              SequencePolicy policy, const SequenceOptions& options = {});

// S_ij = sum over the shell of lambda_i * lambda_j, exact. Row-major d x d.
std::vector<std::int64_t> orthogonality_sums(const LatticeShell& shell);

int two_adic_valuation(std::int64_t n);

}  // namespace arw::lattice
