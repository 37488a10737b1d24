#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "doctest.h"

#include "arw/errors.hpp"
#include "arw/field.hpp"
#include "arw/grid_io.hpp"
#include "arw/rng.hpp"
#include "support.hpp"

using namespace arw;
using std::numbers::pi;

namespace {

struct Case {
  int d;
  std::int64_t n;
};

constexpr Case kCases[] = {{2, 25}, {2, 65}, {3, 9}, {3, 17}};

}  // namespace

TEST_CASE("sample_coefficients: determinism and size") {
  const auto shell = field::make_shell(2, 25);
  const auto a = field::sample_coefficients(shell, 42, 0);
  const auto b = field::sample_coefficients(shell, 42, 0);
  CHECK(a.a == b.a);
  CHECK(a.b == b.b);
  CHECK(a.a.size() == 6);
  CHECK(a.b.size() == 6);
  const auto c = field::sample_coefficients(shell, 42, 1);
  CHECK(a.a != c.a);
  const auto e = field::sample_coefficients(shell, 43, 0);
  CHECK(a.a != e.a);
  CHECK_THROWS_AS(field::sample_coefficients(field::make_shell(3, 7), 1, 0), EmptyShell);
}

TEST_CASE("normal stream: first draw frozen") {
  // The stream is a pure function of (seed, trial), so its first values are frozen.
  NormalStream s1(42, 0), s2(42, 0);
  for (int i = 0; i < 5; ++i) CHECK(s1.normal() == s2.normal());
  NormalStream frozen(42, 0);
  CHECK(frozen.normal() == 1.1457945052244951);
  CHECK(frozen.normal() == -1.0906807669430978);
  CHECK(frozen.normal() == -1.4653318161925455);
  // Coefficients are drawn a then b per half-shell point, in lexicographic order.
  const auto s = field::sample_coefficients(field::make_shell(2, 25), 42, 0);
  CHECK(s.a[0] == 1.1457945052244951);
  CHECK(s.b[0] == -1.0906807669430978);
  NormalStream u(0, 0);
  const double x = u.uniform();
  CHECK(x > 0.0);
  CHECK(x < 1.0);
}

TEST_CASE("sample_coefficients: empirical mean and variance") {
  const auto shell = field::make_shell(2, 5);
  const int trials = 100000;
  double sum = 0.0, sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto s = field::sample_coefficients(shell, 9, static_cast<std::uint64_t>(t));
    sum += s.a[0];
    sq += s.a[0] * s.a[0];
  }
  CHECK(std::abs(sum / trials) < 0.01);
  CHECK(std::abs(sq / trials - 1.0) < 0.02);
}

TEST_CASE("eval_grid: single mode and zero field") {
  const auto f = testing::modes(2, 1, {{{1, 0}, 1.0, 0.0}});
  const auto g = field::eval_grid(f, 8);
  REQUIRE(g.size() == 64);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      CHECK(std::abs(g.values[static_cast<std::size_t>(i * 8 + j)] - std::cos(2 * pi * i / 8.0)) < 1e-12);
    }
  }
  const auto shell = field::make_shell(2, 25);
  const auto zero = field::make_sample(shell, std::vector<double>(6, 0.0), std::vector<double>(6, 0.0));
  for (double v : field::eval_grid(zero, 11).values) CHECK(v == 0.0);
  const auto norms = field::parseval_norm(zero, field::eval_grid(zero, 11));
  CHECK(norms.coef_norm == 0.0);
  CHECK(norms.grid_norm == 0.0);
}

TEST_CASE("eval_grid: preconditions") {
  const auto s = field::sample_coefficients(field::make_shell(2, 25), 1, 0);
  CHECK(field::min_alias_free_M(25) == 11);
  CHECK(field::min_alias_free_M(26) == 11);
  CHECK_THROWS_AS(field::eval_grid(s, 10), AliasError);
  CHECK_NOTHROW(field::eval_grid(s, 11));
  CHECK_THROWS_AS(field::eval_grid(s, 64, field::DerivativeTag::value(), 1024), MemoryBudgetExceeded);
  CHECK(field::grid_memory_bytes(2, 64) > 64 * 64 * sizeof(double));
  CHECK_THROWS_AS(field::make_sample(field::make_shell(2, 25), {1.0}, {1.0}), Error);
}

TEST_CASE("eval_grid agrees with direct summation for values and derivatives") {
  for (const auto& c : kCases) {
    const auto s = field::sample_coefficients(field::make_shell(c.d, c.n), 5, 2);
    const int M = field::min_alias_free_M(c.n) + 2;
    std::vector<field::DerivativeTag> tags{field::DerivativeTag::value(), field::DerivativeTag::gradient(0),
                                           field::DerivativeTag::gradient(c.d - 1), field::DerivativeTag::hessian(0, 1)};
    for (const auto& tag : tags) {
      const auto g = field::eval_grid(s, M, tag);
      testing::Gen gen(static_cast<std::uint64_t>(c.n));
      const double scale = std::pow(2 * pi * std::sqrt(static_cast<double>(c.n)),
                                    tag.kind == field::DerivativeTag::Kind::value      ? 0
                                    : tag.kind == field::DerivativeTag::Kind::gradient ? 1
                                                                                       : 2);
      for (int p = 0; p < 30; ++p) {
        const auto idx = static_cast<std::size_t>(gen.integer(0, static_cast<std::int64_t>(g.size()) - 1));
        std::vector<double> x(static_cast<std::size_t>(c.d));
        std::size_t rem = idx;
        for (int i = c.d - 1; i >= 0; --i) {
          x[i] = static_cast<double>(rem % static_cast<std::size_t>(M)) / M;
          rem /= static_cast<std::size_t>(M);
        }
        CHECK(std::abs(g.values[idx] - field::eval_point(s, x, tag)) <= 1e-9 * scale);
      }
    }
  }
}

TEST_CASE("eval_point: fixed values") {
  const auto s = field::sample_coefficients(field::make_shell(2, 25), 3, 0);
  double sum = 0.0;
  for (double a : s.a) sum += a;
  const std::vector<double> origin{0.0, 0.0};
  CHECK(field::value_at(s, origin) == doctest::Approx(std::sqrt(2.0 / 12.0) * sum).epsilon(1e-13));

  const auto c = testing::modes(2, 1, {{{1, 0}, 1.0, 0.0}});
  const std::vector<double> x{0.25, 0.37};
  const auto grad = field::gradient_at(c, x);
  CHECK(grad[0] == doctest::Approx(-2 * pi).epsilon(1e-13));
  CHECK(std::abs(grad[1]) < 1e-13);
  const auto H = field::hessian_at(s, std::vector<double>{0.1, 0.7});
  CHECK(H[1] == doctest::Approx(H[2]).epsilon(1e-13));
}

TEST_CASE("eigenfunction identity at random points") {
  testing::Gen gen(3);
  for (const auto& c : kCases) {
    const auto s = field::sample_coefficients(field::make_shell(c.d, c.n), 8, 1);
    for (int p = 0; p < 25; ++p) {
      const auto x = gen.point(c.d);
      const auto H = field::hessian_at(s, x);
      double trace = 0.0;
      for (int i = 0; i < c.d; ++i) trace += H[static_cast<std::size_t>(i * c.d + i)];
      const double f = field::value_at(s, x);
      CHECK(std::abs(trace + 4 * pi * pi * c.n * f) <= 1e-8 * (1 + std::abs(f)) * c.n);
    }
  }
}

TEST_CASE("Parseval on alias-free grids") {
  for (const auto& c : kCases) {
    for (std::uint64_t t = 0; t < 3; ++t) {
      const auto s = field::sample_coefficients(field::make_shell(c.d, c.n), 77, t);
      const auto norms = field::parseval_norm(s, field::eval_grid(s, field::min_alias_free_M(c.n)));
      CHECK(std::abs(norms.grid_norm - norms.coef_norm) <= 1e-9 * norms.coef_norm);
      CHECK(norms.coef_norm == doctest::Approx(field::coefficient_norm(s)).epsilon(1e-14));
    }
  }
  const auto single = testing::modes(2, 25, {{{3, 4}, 1.0, 0.0}});
  CHECK(field::coefficient_norm(single) * field::coefficient_norm(single) == doctest::Approx(0.5));
  auto raw = field::make_sample(field::make_shell(2, 25), {1, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 0});
  CHECK(field::coefficient_norm(raw) * field::coefficient_norm(raw) == doctest::Approx(1.0 / 12.0));
}

TEST_CASE("sample_from_grid recovers the coefficients") {
  const auto s = field::sample_coefficients(field::make_shell(2, 65), 1, 4);
  const auto back = field::sample_from_grid(field::eval_grid(s, 20));
  REQUIRE(back.a.size() == s.a.size());
  for (std::size_t i = 0; i < s.a.size(); ++i) {
    CHECK(std::abs(back.a[i] - s.a[i]) < 1e-10);
    CHECK(std::abs(back.b[i] - s.b[i]) < 1e-10);
  }
}

TEST_CASE("grid files round trip") {
  const auto s = field::sample_coefficients(field::make_shell(3, 9), 12, 3);
  auto g = field::eval_grid(s, 7);
  std::stringstream buf;
  field::write_grid(buf, g);
  const auto back = field::read_grid(buf);
  CHECK(back.d == 3);
  CHECK(back.n == 9);
  CHECK(back.M == 7);
  CHECK(back.seed == 12);
  CHECK(back.trial_index == 3);
  CHECK(back.values == g.values);
  std::stringstream bad("XXXX0000");
  CHECK_THROWS(field::read_grid(bad));
}

TEST_CASE("covariance kernels") {
  const auto s1 = lattice::enumerate_shell(2, 1);
  const std::vector<double> zero{0.0, 0.0};
  CHECK(field::covariance_kernel(s1, zero) == doctest::Approx(1.0));
  testing::Gen gen(5);
  for (int i = 0; i < 200; ++i) {
    const auto t = gen.point(2);
    CHECK(field::covariance_kernel(s1, t) ==
          doctest::Approx((std::cos(2 * pi * t[0]) + std::cos(2 * pi * t[1])) / 2).epsilon(1e-13));
  }
  const auto s65 = lattice::enumerate_shell(2, 65);
  for (int i = 0; i < 1000; ++i) CHECK(std::abs(field::covariance_kernel(s65, gen.point(2))) <= 1.0 + 1e-15);
  const std::vector<double> u{0.25, 0.0};
  CHECK(field::scaled_kernel(s1, u, zero) == doctest::Approx(0.5));
  CHECK(field::scaled_kernel(s65, u, u) == doctest::Approx(1.0));
  const auto C = field::scaled_covariance_matrix(lattice::enumerate_shell(2, 25));
  CHECK(C[0] == doctest::Approx(2 * pi * pi).epsilon(1e-15));
  CHECK(C[1] == 0.0);
  CHECK(C[3] == doctest::Approx(2 * pi * pi).epsilon(1e-15));
  CHECK_THROWS_AS(field::covariance_kernel(lattice::enumerate_shell(3, 7), std::vector<double>{0, 0, 0}), EmptyShell);
}

TEST_CASE("limiting kernel") {
  CHECK(field::limiting_kernel_radial(2, 0.0) == doctest::Approx(1.0));
  CHECK(field::limiting_kernel_radial(3, 0.0) == doctest::Approx(1.0));
  for (double r : {0.1, 0.37, 0.8, 1.5, 2.0}) {
    CHECK(std::abs(field::limiting_kernel_radial(3, r) - std::sin(2 * pi * r) / (2 * pi * r)) < 1e-8);
    CHECK(std::abs(field::limiting_kernel_radial(2, r) - std::cyl_bessel_j(0.0, 2 * pi * r)) < 1e-8);
  }
  const std::vector<double> x{0.3, 0.4};
  CHECK(field::limiting_kernel(2, x) == doctest::Approx(field::limiting_kernel_radial(2, 0.5)));

  // Monte-Carlo average over uniform angles.
  NormalStream mc(2, 0);
  const double r = 0.7;
  const int N = 1000000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < N; ++i) {
    const double v = std::cos(2 * pi * r * std::cos(2 * pi * mc.uniform()));
    sum += v;
    sq += v * v;
  }
  const double mean = sum / N;
  const double se = std::sqrt((sq / N - mean * mean) / N);
  CHECK(std::abs(field::limiting_kernel_radial(2, r) - mean) < 3 * se);
}

TEST_CASE("empirical covariance and stationarity") {
  const auto shell = field::make_shell(2, 25);
  const int trials = 20000;
  testing::Gen gen(13);
  std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs;
  for (int p = 0; p < 10; ++p) pairs.push_back({gen.point(2), gen.point(2)});
  std::vector<double> cov(pairs.size(), 0.0), mean(pairs.size(), 0.0);
  for (int t = 0; t < trials; ++t) {
    const auto s = field::sample_coefficients(shell, 101, static_cast<std::uint64_t>(t));
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const double fx = field::value_at(s, pairs[p].first);
      cov[p] += fx * field::value_at(s, pairs[p].second);
      mean[p] += fx;
    }
  }
  const double tol = 4.0 / std::sqrt(static_cast<double>(trials));
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    std::vector<double> diff{pairs[p].first[0] - pairs[p].second[0], pairs[p].first[1] - pairs[p].second[1]};
    CHECK(std::abs(cov[p] / trials - field::covariance_kernel(*shell, diff)) < tol);
    CHECK(std::abs(mean[p] / trials) < tol);
  }
}

TEST_CASE("scaled kernel approaches the limiting kernel along d = 3") {
  testing::Gen gen(21);
  std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs;
  while (pairs.size() < 50) {
    auto u = gen.point(3), v = gen.point(3);
    for (auto& c : u) c *= 1.2;
    for (auto& c : v) c *= 1.2;
    double r2 = 0.0;
    for (int i = 0; i < 3; ++i) r2 += (u[i] - v[i]) * (u[i] - v[i]);
    if (r2 <= 4.0) pairs.push_back({u, v});
  }
  // The gap is not monotone shell by shell (it rises from n = 101 to n = 194),
  // so the trend is checked: a negative log-log slope and a small tail.
  std::vector<double> log_dim, log_gap, gaps;
  for (auto n : lattice::admissible_sequence(3, 1, 3000, lattice::SequencePolicy::top_by_dim)) {
    const auto shell = lattice::enumerate_shell(3, n);
    double worst = 0.0;
    for (const auto& [u, v] : pairs) {
      std::vector<double> diff{u[0] - v[0], u[1] - v[1], u[2] - v[2]};
      worst = std::max(worst, std::abs(field::scaled_kernel(shell, u, v) - field::limiting_kernel(3, diff)));
    }
    log_dim.push_back(std::log(static_cast<double>(shell.dim_HL)));
    log_gap.push_back(std::log(worst));
    gaps.push_back(worst);
  }
  REQUIRE(gaps.size() >= 8);
  const double mx = std::accumulate(log_dim.begin(), log_dim.end(), 0.0) / log_dim.size();
  const double my = std::accumulate(log_gap.begin(), log_gap.end(), 0.0) / log_gap.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < log_dim.size(); ++i) {
    sxy += (log_dim[i] - mx) * (log_gap[i] - my);
    sxx += (log_dim[i] - mx) * (log_dim[i] - mx);
  }
  CHECK(sxy / sxx < -0.5);
  for (std::size_t i = gaps.size() - 3; i < gaps.size(); ++i) CHECK(gaps[i] < 0.05);
  CHECK(gaps.back() < gaps.front() / 10);
}

TEST_CASE("local bound ratios") {
  const auto c = testing::modes(2, 1, {{{1, 0}, 1.0, 0.0}});
  const std::vector<double> origin{0.0, 0.0};
  const auto r = field::local_bound_ratio(c, origin, 1.0);
  CHECK(std::isfinite(r.ratio_f));
  CHECK(r.ratio_f > 0.0);
  CHECK(r.local_integral > 0.0);
  const auto zero = field::make_sample(field::make_shell(2, 1), {0, 0}, {0, 0});
  CHECK_THROWS_AS(field::local_bound_ratio(zero, origin, 1.0), DegenerateIntegral);
}

TEST_CASE("sup bound dominates the field and its derivatives") {
  testing::Gen gen(31);
  for (const auto& c : kCases) {
    const auto s = field::sample_coefficients(field::make_shell(c.d, c.n), 4, 0);
    const double bound = field::coefficient_sup_bound(s);
    const double k = 2 * pi * std::sqrt(static_cast<double>(c.n));
    for (int p = 0; p < 50; ++p) {
      const auto x = gen.point(c.d);
      CHECK(std::abs(field::value_at(s, x)) <= bound);
      double g2 = 0.0;
      for (double g : field::gradient_at(s, x)) g2 += g * g;
      CHECK(std::sqrt(g2) / k <= bound * (1 + 1e-12));
    }
  }
}

TEST_CASE("sums and negation are linear in the coefficients") {
  const auto shell = field::make_shell(2, 65);
  const auto f = field::sample_coefficients(shell, 1, 0);
  const auto g = field::sample_coefficients(shell, 1, 1);
  const std::vector<double> x{0.13, 0.71};
  CHECK(field::value_at(f + g, x) == doctest::Approx(field::value_at(f, x) + field::value_at(g, x)).epsilon(1e-12));
  CHECK(field::value_at(-f, x) == doctest::Approx(-field::value_at(f, x)).epsilon(1e-14));
  const auto h = field::scaled_sample(shell, 9, 0, 0.25);
  CHECK(field::coefficient_norm(h) == doctest::Approx(0.25).epsilon(1e-12));
}
