#include "arw/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "arw/errors.hpp"

namespace arw::lattice {
namespace {

constexpr std::int64_t kMaxSquaredRadius = std::int64_t{1} << 62;
// Above this size the tabulated convolution would need too much memory and
// representation_count falls back to recursion over the first coordinate.
constexpr std::int64_t kMaxTableSize = 50'000'000;

void check_arguments(int d, std::int64_t n) {
  if (d < 1) throw Error("dimension must be >= 1");
  if (n < 0) throw Error("squared radius must be >= 0");
  if (n > kMaxSquaredRadius) throw OverflowError("squared radius exceeds 2^62");
}

std::int64_t isqrt(std::int64_t n) {
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<long double>(n)));
  while (r > 0 && r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) throw OverflowError("representation count overflows int64");
  return out;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, b, &out)) throw OverflowError("integer product overflows int64");
  return out;
}

void enumerate_into(int remaining_dims, std::int64_t remaining, IntVec& prefix, std::vector<IntVec>& out) {
  if (remaining_dims == 0) {
    if (remaining == 0) out.push_back(prefix);
    return;
  }
  if (remaining_dims == 1) {
    const std::int64_t r = isqrt(remaining);
    if (r * r != remaining) return;
    if (r == 0) {
      prefix.push_back(0);
      out.push_back(prefix);
      prefix.pop_back();
      return;
    }
    for (std::int64_t x : {-r, r}) {
      prefix.push_back(x);
      out.push_back(prefix);
      prefix.pop_back();
    }
    return;
  }
  const std::int64_t bound = isqrt(remaining);
  for (std::int64_t x = -bound; x <= bound; ++x) {
    prefix.push_back(x);
    enumerate_into(remaining_dims - 1, remaining - x * x, prefix, out);
    prefix.pop_back();
  }
}

// r_k(m) for all 0 <= m <= n, by repeated convolution with the square indicator.
std::vector<std::int64_t> square_sum_table(int k, std::int64_t n) {
  std::vector<std::int64_t> table(static_cast<std::size_t>(n + 1), 0);
  table[0] = 1;
  for (int level = 0; level < k; ++level) {
    std::vector<std::int64_t> next(table.size(), 0);
    for (std::int64_t m = 0; m <= n; ++m) {
      if (table[m] == 0) continue;
      next[m] = checked_add(next[m], table[m]);
      for (std::int64_t x = 1; m + x * x <= n; ++x) {
        const std::int64_t idx = m + x * x;
        next[idx] = checked_add(next[idx], checked_mul(2, table[m]));
      }
    }
    table = std::move(next);
  }
  return table;
}

std::int64_t count_recursive(int d, std::int64_t n) {
  if (d == 0) return n == 0 ? 1 : 0;
  if (d == 1) {
    const std::int64_t r = isqrt(n);
    if (r * r != n) return 0;
    return r == 0 ? 1 : 2;
  }
  std::int64_t total = 0;
  const std::int64_t bound = isqrt(n);
  for (std::int64_t x = -bound; x <= bound; ++x) total = checked_add(total, count_recursive(d - 1, n - x * x));
  return total;
}

}  // namespace

bool in_half_space(const IntVec& v) {
  for (std::int64_t c : v) {
    if (c != 0) return c > 0;
  }
  return false;
}

int two_adic_valuation(std::int64_t n) {
  if (n == 0) return 64;
  int v = 0;
  while ((n & 1) == 0) {
    n >>= 1;
    ++v;
  }
  return v;
}

LatticeShell enumerate_shell(int d, std::int64_t n) {
  check_arguments(d, n);
  LatticeShell shell;
  shell.d = d;
  shell.n = n;
  IntVec prefix;
  prefix.reserve(static_cast<std::size_t>(d));
  enumerate_into(d, n, prefix, shell.points);
  for (const auto& p : shell.points) {
    if (in_half_space(p)) shell.half_points.push_back(p);
  }
  shell.dim_HL = static_cast<std::int64_t>(shell.points.size());
  return shell;
}

std::int64_t representation_count(int d, std::int64_t n) {
  check_arguments(d, n);
  if (d <= 2 || n > kMaxTableSize) return count_recursive(d, n);
  const int left = d / 2;
  const int right = d - left;
  const auto a = square_sum_table(left, n);
  const auto b = left == right ? a : square_sum_table(right, n);
  std::int64_t total = 0;
  for (std::int64_t m = 0; m <= n; ++m) {
    if (a[m] == 0 || b[n - m] == 0) continue;
    total = checked_add(total, checked_mul(a[m], b[n - m]));
  }
  return total;
}

double sphere_moment(int d, const MultiIndex& alpha) {
  int order = 0;
  int nonzero = 0;
  int max_exp = 0;
  for (int e : alpha) {
    if (e % 2 != 0) return 0.0;
    order += e;
    if (e > 0) ++nonzero;
    max_exp = std::max(max_exp, e);
  }
  const double dd = d;
  if (order == 2) return 1.0 / dd;
  if (order == 4 && max_exp == 4) return 3.0 / (dd * (dd + 2.0));
  if (order == 4 && nonzero == 2) return 1.0 / (dd * (dd + 2.0));
  throw Error("sphere_moment supports even multi-indices of order 2 or 4 only");
}

EquidistributionReport equidistribution_report(const LatticeShell& shell) {
  if (shell.empty()) throw EmptyShell();
  const int d = shell.d;
  EquidistributionReport report;
  report.d = d;
  report.n = shell.n;

  std::vector<MultiIndex> indices;
  for (int i = 0; i < d; ++i) {
    MultiIndex a(d, 0);
    a[i] = 2;
    indices.push_back(a);
  }
  for (int i = 0; i < d; ++i) {
    MultiIndex a(d, 0);
    a[i] = 4;
    indices.push_back(a);
    for (int j = i + 1; j < d; ++j) {
      MultiIndex b(d, 0);
      b[i] = 2;
      b[j] = 2;
      indices.push_back(b);
    }
  }

  const auto count = static_cast<__int128>(shell.points.size());
  for (const auto& alpha : indices) {
    __int128 sum = 0;
    int order = 0;
    for (int e : alpha) order += e;
    for (const auto& p : shell.points) {
      __int128 term = 1;
      for (int i = 0; i < d; ++i) {
        for (int k = 0; k < alpha[i]; ++k) term *= p[i];
      }
      sum += term;
    }
    // Exact integer ratio sum / (count * n^{order/2}), rounded once.
    __int128 denom = count;
    for (int k = 0; k < order / 2; ++k) denom *= shell.n;
    const double empirical = static_cast<double>(static_cast<long double>(sum) / static_cast<long double>(denom));
    const double deviation = std::abs(empirical - sphere_moment(d, alpha));
    report.empirical_moments[alpha] = empirical;
    report.moment_deviations[alpha] = deviation;
    if (order == 4) report.max_dev4 = std::max(report.max_dev4, deviation);
  }

  if (d == 2) {
    std::vector<double> u;
    u.reserve(shell.points.size());
    constexpr double two_pi = 2.0 * M_PI;
    for (const auto& p : shell.points) {
      double theta = std::atan2(static_cast<double>(p[1]), static_cast<double>(p[0]));
      if (theta < 0) theta += two_pi;
      u.push_back(theta / two_pi);
    }
    std::sort(u.begin(), u.end());
    const double N = static_cast<double>(u.size());
    double disc = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      disc = std::max(disc, std::max((k + 1) / N - u[k], u[k] - k / N));
    }
    report.angular_star_discrepancy = disc;
  }
  return report;
}

SequencePolicy parse_policy(const std::string& name) {
  if (name == "all") return SequencePolicy::all;
  if (name == "congruence_d3") return SequencePolicy::congruence_d3;
  if (name == "bounded_two_adic") return SequencePolicy::bounded_two_adic;
  if (name == "top_by_dim") return SequencePolicy::top_by_dim;
  if (name == "diagnostic_threshold") return SequencePolicy::diagnostic_threshold;
  throw UnknownPolicy(name);
}

std::string to_string(SequencePolicy policy) {
  switch (policy) {
    case SequencePolicy::all: return "all";
    case SequencePolicy::congruence_d3: return "congruence_d3";
    case SequencePolicy::bounded_two_adic: return "bounded_two_adic";
    case SequencePolicy::top_by_dim: return "top_by_dim";
    case SequencePolicy::diagnostic_threshold: return "diagnostic_threshold";
  }
  return "unknown";
}

std::vector<std::int64_t> admissible_sequence(int d, std::int64_t n_min, std::int64_t n_max, SequencePolicy policy,
                                              const SequenceOptions& options) {
  if (n_min > n_max) throw Error("admissible_sequence: n_min > n_max");
  n_min = std::max<std::int64_t>(n_min, 1);
  std::vector<std::int64_t> out;

  if (policy == SequencePolicy::top_by_dim) {
    // Dyadic windows [2^k, 2^{k+1}); smallest n wins ties.
    std::int64_t lo = 1;
    while (lo <= n_max) {
      const std::int64_t hi = (lo > n_max / 2) ? n_max : std::min(n_max, 2 * lo - 1);
      std::int64_t best_n = 0;
      std::int64_t best_dim = 0;
      for (std::int64_t n = std::max(lo, n_min); n <= hi; ++n) {
        const std::int64_t dim = representation_count(d, n);
        if (dim > best_dim) {
          best_dim = dim;
          best_n = n;
        }
      }
      if (best_dim > 0) out.push_back(best_n);
      if (hi == n_max) break;
      lo = hi + 1;
    }
    return out;
  }

  for (std::int64_t n = n_min; n <= n_max; ++n) {
    bool keep = true;
    switch (policy) {
      case SequencePolicy::all: break;
      case SequencePolicy::congruence_d3: {
        const std::int64_t r = n % 8;
        keep = r != 0 && r != 4 && r != 7;
        break;
      }
      case SequencePolicy::bounded_two_adic:
        keep = two_adic_valuation(n) <= options.max_two_adic_valuation;
        break;
      case SequencePolicy::diagnostic_threshold: break;
      case SequencePolicy::top_by_dim: break;
    }
    if (!keep || representation_count(d, n) == 0) continue;
    if (policy == SequencePolicy::diagnostic_threshold) {
      const auto report = equidistribution_report(enumerate_shell(d, n));
      if (report.max_dev4 > options.max_dev4_threshold) continue;
    }
    out.push_back(n);
  }
  return out;
}

std::vector<std::int64_t> orthogonality_sums(const LatticeShell& shell) {
  if (shell.empty()) throw EmptyShell();
  const int d = shell.d;
  std::vector<std::int64_t> s(static_cast<std::size_t>(d * d), 0);
  for (const auto& p : shell.points) {
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        auto& cell = s[static_cast<std::size_t>(i * d + j)];
        cell = checked_add(cell, checked_mul(p[i], p[j]));
      }
    }
  }
  return s;
}

}  // namespace arw::lattice
