#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <sstream>

#include "arw/cli.hpp"
#include "arw/errors.hpp"
#include "arw/field.hpp"
#include "arw/rng.hpp"

namespace arw::cli {
namespace {

std::int64_t box_count(int d, std::int64_t n) {
  const auto R = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
  std::vector<std::int64_t> x(static_cast<std::size_t>(d), -R);
  std::int64_t count = 0;
  while (true) {
    std::int64_t s = 0;
    for (auto v : x) s += v * v;
    if (s == n) ++count;
    int i = 0;
    while (i < d && ++x[i] > R) x[i++] = -R;
    if (i == d) return count;
  }
}

CheckResult check_representation_counts() {
  CheckResult c{"lattice: counts vs box enumeration (d <= 4, n <= 100)", true, ""};
  for (int d = 2; d <= 4; ++d) {
    for (std::int64_t n = 1; n <= 100; ++n) {
      const auto expected = box_count(d, n);
      if (lattice::representation_count(d, n) != expected || lattice::enumerate_shell(d, n).dim_HL != expected) {
        c.pass = false;
        c.detail = "mismatch at d=" + std::to_string(d) + " n=" + std::to_string(n);
        return c;
      }
    }
  }
  c.detail = "297 shells";
  return c;
}

CheckResult check_jacobi() {
  CheckResult c{"lattice: four squares vs 8 * sigma(n), odd n < 200", true, ""};
  for (std::int64_t n = 1; n < 200; n += 2) {
    std::int64_t sigma = 0;
    for (std::int64_t m = 1; m <= n; ++m) sigma += n % m == 0 ? m : 0;
    if (lattice::representation_count(4, n) != 8 * sigma) {
      c.pass = false;
      c.detail = "mismatch at n=" + std::to_string(n);
      return c;
    }
  }
  c.detail = "100 values";
  return c;
}

CheckResult check_orthogonality() {
  CheckResult c{"lattice: orthogonality sums = (n #shell / d) I", true, ""};
  std::size_t shells = 0;
  for (int d = 2; d <= 4; ++d) {
    for (std::int64_t n = 1; n <= 300; ++n) {
      const auto shell = lattice::enumerate_shell(d, n);
      if (shell.empty()) continue;
      ++shells;
      const auto s = lattice::orthogonality_sums(shell);
      for (int i = 0; i < d; ++i) {
        for (int k = 0; k < d; ++k) {
          const std::int64_t expected = i == k ? n * shell.dim_HL / d : 0;
          if (s[static_cast<std::size_t>(i * d + k)] != expected || (i == k && n * shell.dim_HL % d != 0)) {
            c.pass = false;
            c.detail = "mismatch at d=" + std::to_string(d) + " n=" + std::to_string(n);
            return c;
          }
        }
      }
    }
  }
  c.detail = std::to_string(shells) + " shells";
  return c;
}

struct Case {
  int d;
  std::int64_t n;
};

constexpr Case kFieldCases[] = {{2, 25}, {2, 65}, {3, 9}};

CheckResult check_parseval() {
  CheckResult c{"field: Parseval, grid vs coefficient norm (1e-9 rel)", true, ""};
  double worst = 0.0;
  for (const auto& fc : kFieldCases) {
    const auto shell = field::make_shell(fc.d, fc.n);
    for (std::uint64_t t = 0; t < 4; ++t) {
      const auto sample = field::sample_coefficients(shell, 2024, t);
      const auto grid = field::eval_grid(sample, field::min_alias_free_M(fc.n) + 1);
      const auto norms = field::parseval_norm(sample, grid);
      worst = std::max(worst, std::abs(norms.grid_norm - norms.coef_norm) / norms.coef_norm);
    }
  }
  c.pass = worst <= 1e-9;
  std::ostringstream d;
  d << "max rel err " << worst;
  c.detail = d.str();
  return c;
}

CheckResult check_fft_direct() {
  CheckResult c{"field: transform vs direct summation (1e-9 abs)", true, ""};
  double worst = 0.0;
  for (const auto& fc : kFieldCases) {
    const auto shell = field::make_shell(fc.d, fc.n);
    const auto sample = field::sample_coefficients(shell, 7, 3);
    const int M = field::min_alias_free_M(fc.n) + 3;
    const auto grid = field::eval_grid(sample, M);
    NormalStream pick(99, static_cast<std::uint64_t>(fc.n));
    for (int p = 0; p < 50; ++p) {
      const auto idx = static_cast<std::size_t>(pick.uniform() * static_cast<double>(grid.size())) % grid.size();
      std::vector<double> x(static_cast<std::size_t>(fc.d));
      std::size_t rem = idx;
      for (int i = fc.d - 1; i >= 0; --i) {
        x[i] = static_cast<double>(rem % static_cast<std::size_t>(M)) / M;
        rem /= static_cast<std::size_t>(M);
      }
      worst = std::max(worst, std::abs(grid.values[idx] - field::value_at(sample, x)));
    }
  }
  c.pass = worst <= 1e-9;
  std::ostringstream d;
  d << "max abs err " << worst;
  c.detail = d.str();
  return c;
}

CheckResult check_eigenfunction() {
  CheckResult c{"field: trace of Hessian = -4 pi^2 n f", true, ""};
  double worst = 0.0;
  for (const auto& fc : kFieldCases) {
    const auto shell = field::make_shell(fc.d, fc.n);
    const auto sample = field::sample_coefficients(shell, 11, 0);
    NormalStream pick(5, static_cast<std::uint64_t>(fc.n));
    for (int p = 0; p < 20; ++p) {
      std::vector<double> x(static_cast<std::size_t>(fc.d));
      for (auto& v : x) v = pick.uniform();
      const auto H = field::hessian_at(sample, x);
      double trace = 0.0;
      for (int i = 0; i < fc.d; ++i) trace += H[static_cast<std::size_t>(i * fc.d + i)];
      const double f = field::value_at(sample, x);
      const double scale = (1.0 + std::abs(f)) * static_cast<double>(fc.n);
      worst = std::max(worst, std::abs(trace + 4.0 * std::numbers::pi * std::numbers::pi * fc.n * f) / scale);
    }
  }
  c.pass = worst <= 1e-8;
  std::ostringstream d;
  d << "max scaled residual " << worst;
  c.detail = d.str();
  return c;
}

CheckResult check_strips() {
  CheckResult c{"nodal: sin(2 pi D x1) has k = r = 2D, D = 1..4", true, ""};
  for (int D = 1; D <= 4; ++D) {
    const auto shell = field::make_shell(2, static_cast<std::int64_t>(D) * D);
    std::vector<double> a(shell->half_points.size(), 0.0), b(shell->half_points.size(), 0.0);
    for (std::size_t p = 0; p < shell->half_points.size(); ++p) {
      if (shell->half_points[p] == lattice::IntVec{D, 0}) b[p] = 1.0 / std::sqrt(2.0 / static_cast<double>(shell->dim_HL));
    }
    const auto sample = field::make_sample(shell, a, b);
    const auto s = nodal::analyze(sample, 16 * D, false);
    if (s.k != static_cast<std::size_t>(2 * D) || s.r != static_cast<std::size_t>(2 * D)) {
      c.pass = false;
      c.detail = "D=" + std::to_string(D) + " gave k=" + std::to_string(s.k) + " r=" + std::to_string(s.r);
      return c;
    }
  }
  return c;
}

CheckResult check_identities() {
  CheckResult c{"algebra: C_D/S_D identities, D <= 32", true, ""};
  try {
    const auto report = algebra::verify_csd_identities(32);
    c.pass = report.all_pass;
  } catch (const IdentityFailure& e) {
    c.pass = false;
    c.detail = e.what();
  }
  return c;
}

CheckResult check_example_jacobian() {
  CheckResult c{"algebra: example Jacobian = (4 pi D^2)^d prod S_D, d <= 2, D <= 4", true, ""};
  for (int d = 1; d <= 2; ++d) {
    for (int D = 1; D <= 4; ++D) {
      const auto t = algebra::regular_example(d, D, algebra::Rational(d + 1));
      if (!(algebra::gradient_system_jacobian(t) == algebra::regular_example_jacobian(d, D))) {
        c.pass = false;
        c.detail = "mismatch at d=" + std::to_string(d) + " D=" + std::to_string(D);
        return c;
      }
    }
  }
  return c;
}

CheckResult check_exponents() {
  CheckResult c{"experiments: proof exponents satisfy all five inequalities, d <= 10", true, ""};
  const auto e2 = experiments::proof_exponents(2);
  if (e2.a != 6 || e2.c_exponent != 15) {
    c.pass = false;
    c.detail = "d=2 gave a=" + e2.a.str() + " c=" + e2.c_exponent.str();
    return c;
  }
  for (int d = 2; d <= 10; ++d) {
    if (!experiments::proof_exponents(d).all_hold()) {
      c.pass = false;
      c.detail = "fails at d=" + std::to_string(d);
      return c;
    }
  }
  return c;
}

}  // namespace

bool VerifyReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

VerifyReport verify_suite() {
  VerifyReport report;
  using Check = CheckResult (*)();
  const Check checks[] = {check_representation_counts, check_jacobi,    check_orthogonality,
                          check_parseval,             check_fft_direct, check_eigenfunction,
                          check_strips,               check_identities, check_example_jacobian,
                          check_exponents};
  for (auto check : checks) {
    try {
      report.checks.push_back(check());
    } catch (const std::exception& e) {
      report.checks.push_back({"(check raised)", false, e.what()});
    }
  }
  return report;
}

void print_verify_table(std::ostream& out, const VerifyReport& report) {
  std::size_t width = 0;
  for (const auto& c : report.checks) width = std::max(width, c.name.size());
  for (const auto& c : report.checks) {
    out << (c.pass ? "PASS  " : "FAIL  ") << c.name << std::string(width - c.name.size() + 2, ' ') << c.detail << "\n";
  }
  out << (report.all_pass() ? "all checks passed" : "some checks FAILED") << "\n";
}

}  // namespace arw::cli
