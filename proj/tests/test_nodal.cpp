#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "doctest.h"

#include "arw/errors.hpp"
#include "arw/field.hpp"
#include "arw/nodal.hpp"
#include "support.hpp"

using namespace arw;
using std::numbers::pi;

namespace {

field::FieldGrid value_grid(int d, int M, const std::vector<double>& values) {
  field::FieldGrid g;
  g.d = d;
  g.M = M;
  g.n = 1;
  g.values = values;
  return g;
}

nodal::SignGrid constant_signs(int d, int M, bool positive) {
  nodal::SignGrid sg;
  sg.d = d;
  sg.M = M;
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(M);
  sg.positive.assign(total, positive ? 1 : 0);
  return sg;
}

// Sets the square [i0, i1) x [j0, j1) of a planar sign grid.
void paint(nodal::SignGrid& sg, int i0, int i1, int j0, int j1, bool positive) {
  for (int i = i0; i < i1; ++i) {
    for (int j = j0; j < j1; ++j) sg.positive[static_cast<std::size_t>(i * sg.M + j)] = positive ? 1 : 0;
  }
}

// f(x + m / M) expressed through rotated coefficients.
field::WaveSample translated(const field::WaveSample& s, const std::vector<int>& m, int M) {
  std::vector<double> a(s.a.size()), b(s.b.size());
  for (std::size_t p = 0; p < s.a.size(); ++p) {
    double phase = 0.0;
    for (int i = 0; i < s.d(); ++i) phase += static_cast<double>(s.shell->half_points[p][i] * m[i]) / M;
    const double c = std::cos(2 * pi * phase), sn = std::sin(2 * pi * phase);
    a[p] = s.a[p] * c + s.b[p] * sn;
    b[p] = s.b[p] * c - s.a[p] * sn;
  }
  return field::make_sample(s.shell, a, b);
}

// cos(2 pi D (x1 + phase)), which avoids exact zeros at the vertices.
field::WaveSample shifted_cos(int D, double phase) {
  const double t = 2 * pi * D * phase;
  return testing::modes(2, static_cast<std::int64_t>(D) * D, {{{D, 0}, std::cos(t), -std::sin(t)}});
}

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("sign_grid: constants and exact zeros") {
  const auto plus = nodal::sign_grid(value_grid(2, 4, std::vector<double>(16, 1.0)));
  CHECK(std::all_of(plus.positive.begin(), plus.positive.end(), [](auto v) { return v == 1; }));
  CHECK(plus.zero_hits == 0);
  const auto minus = nodal::sign_grid(value_grid(2, 4, std::vector<double>(16, -1.0)));
  CHECK(std::all_of(minus.positive.begin(), minus.positive.end(), [](auto v) { return v == 0; }));

  // cos(2 pi j / 8) with the boundary columns set to exact zeros.
  std::vector<double> v(64);
  const double col[8] = {1, std::sqrt(0.5), 0, -std::sqrt(0.5), -1, -std::sqrt(0.5), 0, std::sqrt(0.5)};
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) v[static_cast<std::size_t>(i * 8 + j)] = col[i];
  }
  const auto sg = nodal::sign_grid(value_grid(2, 8, v));
  CHECK(sg.zero_hits == 16);
  for (int i = 0; i < 8; ++i) CHECK(sg.positive[static_cast<std::size_t>(i * 8)] == ((i <= 2 || i >= 6) ? 1 : 0));
  auto deriv = value_grid(2, 8, v);
  deriv.tag = field::DerivativeTag::gradient(0);
  CHECK_THROWS_AS(nodal::sign_grid(deriv), Error);
}

TEST_CASE("constant signs: one domain, no components") {
  for (int d = 2; d <= 3; ++d) {
    const auto sg = constant_signs(d, 6, true);
    const auto dom = nodal::count_domains(sg);
    CHECK(dom.r == 1);
    REQUIRE(dom.volumes.size() == 1);
    CHECK(dom.volumes[0] == doctest::Approx(1.0));
    CHECK(nodal::count_components(sg).k == 0);
  }
}

TEST_CASE("strips: cos and sin modes") {
  const auto c = testing::modes(2, 1, {{{1, 0}, 1.0, 0.0}});
  const auto s = nodal::analyze(c, 16, false);
  CHECK(s.k == 2);
  CHECK(s.r == 2);
  REQUIRE(s.domain_volumes.size() == 2);
  for (double v : s.domain_volumes) CHECK(std::abs(v - 0.5) <= 1.0 / 16 + 1e-12);
  REQUIRE(s.component_wrapping.size() == 2);
  CHECK(s.component_wrapping[0] == 1);
  CHECK(s.component_wrapping[1] == 1);
  for (double dmt : s.component_diameters) CHECK(dmt == doctest::Approx(0.5));
  for (int D = 1; D <= 8; ++D) {
    const auto f = testing::modes(2, static_cast<std::int64_t>(D) * D, {{{D, 0}, 0.0, 1.0}});
    const auto out = nodal::analyze(f, 16 * D, false);
    CHECK(out.k == static_cast<std::size_t>(2 * D));
    CHECK(out.r == static_cast<std::size_t>(2 * D));
    // sin vanishes exactly at the vertex column x1 = 0, which blocks certification.
    CHECK(out.zero_hits > 0);
    CHECK_FALSE(out.certified);
    const auto moved = nodal::analyze(shifted_cos(D, 0.013), 16 * D, false);
    CHECK(moved.k == static_cast<std::size_t>(2 * D));
    CHECK(moved.r == static_cast<std::size_t>(2 * D));
    CHECK(moved.zero_hits == 0);
    CHECK(moved.certified);
  }
  const auto refined = nodal::analyze(testing::modes(2, 16, {{{4, 0}, 0.0, 1.0}}), 64, true);
  CHECK(refined.k == 8);
  CHECK(refined.r == 8);
  CHECK(refined.refinement_levels >= 2);
}

TEST_CASE("volumes partition the torus") {
  for (std::uint64_t t = 0; t < 5; ++t) {
    const auto s = field::sample_coefficients(field::make_shell(2, 65), 7, t);
    const auto out = nodal::analyze(s, 128, false);
    CHECK(std::accumulate(out.domain_volumes.begin(), out.domain_volumes.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("stability margins") {
  // cos(2 pi x1): the margin formula gives mu = 1/sqrt(2) on the grid.
  const auto c = testing::modes(2, 1, {{{1, 0}, 1.0, 0.0}});
  const auto g16 = field::eval_grid(c, 16);
  const auto n16 = field::eval_gradient_norm_grid(c, 16);
  const auto m16 = nodal::stability_margins(c, g16, n16);
  CHECK(m16.mu == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(m16.alpha == doctest::Approx(m16.mu / 2));
  CHECK(m16.beta == doctest::Approx(pi * m16.mu));
  CHECK(m16.sup_bound == doctest::Approx(1.0));
  // At M = 16 the analytic between-vertex loss is 0.7096 > 0.7071, so the
  // stated "certified for M >= 16" fails by its own formula; it holds at 32.
  CHECK(m16.discretization == doctest::Approx(0.70964).epsilon(1e-4));
  CHECK_FALSE(m16.certified);
  const auto m32 = nodal::stability_margins(c, field::eval_grid(c, 32), field::eval_gradient_norm_grid(c, 32));
  CHECK(m32.certified);
  // Off the vertex zeros the topological certificate holds at M = 16.
  CHECK(nodal::analyze(shifted_cos(1, 0.013), 16, false).certified);
  CHECK(nodal::analyze(shifted_cos(1, 0.013), 32, false).analytic_certified);

  // Vertex dichotomy: |f| > alpha or |grad f| > beta L everywhere.
  const auto s = field::sample_coefficients(field::make_shell(2, 65), 3, 0);
  const auto out = nodal::analyze(s, 144, false);
  const auto vg = field::eval_grid(s, 144);
  const auto ng = field::eval_gradient_norm_grid(s, 144);
  const double L = std::sqrt(65.0);
  for (std::size_t i = 0; i < vg.size(); ++i) {
    CHECK((std::abs(vg.values[i]) > out.alpha || ng.values[i] > out.beta * L));
  }

  const auto zero = field::make_sample(field::make_shell(2, 25), std::vector<double>(6, 0.0), std::vector<double>(6, 0.0));
  const auto mz = nodal::stability_margins(zero, field::eval_grid(zero, 16), field::eval_gradient_norm_grid(zero, 16));
  CHECK(mz.mu == 0.0);
  CHECK_FALSE(mz.certified);
}

TEST_CASE("degenerate sum of modes is never certified") {
  const auto f = testing::modes(2, 1, {{{1, 0}, 1.0, 0.0}, {{0, 1}, 1.0, 0.0}});
  for (int M : {8, 16, 32}) CHECK_FALSE(nodal::analyze(f, M, false).certified);
  const auto refined = nodal::analyze(f, 8, true);
  CHECK_FALSE(refined.certified);
  CHECK(refined.budget_exhausted);
}

TEST_CASE("flood fill agrees with union-find on random planar samples") {
  testing::Gen gen(2718);
  const std::int64_t ns[] = {1, 2, 4, 5, 8, 10, 13, 25};
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = ns[gen.integer(0, 7)];
    const int lo = field::min_alias_free_M(n);
    const int M = static_cast<int>(gen.integer(std::max(lo, 3), 32));
    const auto s = field::sample_coefficients(field::make_shell(2, n), 555, static_cast<std::uint64_t>(trial));
    auto sg = nodal::sign_grid(field::eval_grid(s, M));
    // Random anti-diagonal flips exercise both triangulations.
    if (trial % 2 == 1) {
      sg.flipped.resize(sg.positive.size());
      for (auto& f : sg.flipped) f = gen.integer(0, 1) ? 1 : 0;
    }
    const auto oracle = testing::flood_fill_2d(sg);
    REQUIRE(nodal::count_domains(sg).r == oracle.domains);
    REQUIRE(nodal::count_components(sg).k == oracle.components);
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("translation equivariance") {
  testing::Gen gen(99);
  for (int trial = 0; trial < 6; ++trial) {
    const auto s = field::sample_coefficients(field::make_shell(2, 25), 12, static_cast<std::uint64_t>(trial));
    const int M = 80;
    const std::vector<int> m{static_cast<int>(gen.integer(0, M - 1)), static_cast<int>(gen.integer(0, M - 1))};

    // Exact roll of the sign grid.
    const auto sg = nodal::sign_grid(field::eval_grid(s, M));
    auto rolled = sg;
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < M; ++j) {
        rolled.positive[static_cast<std::size_t>(i * M + j)] =
            sg.positive[static_cast<std::size_t>(((i + m[0]) % M) * M + (j + m[1]) % M)];
      }
    }
    const auto a = nodal::analyze_signs(sg);
    const auto b = nodal::analyze_signs(rolled);
    CHECK(a.k == b.k);
    CHECK(a.r == b.r);
    CHECK(sorted(a.domain_volumes) == sorted(b.domain_volumes));
    CHECK(sorted(a.component_diameters) == sorted(b.component_diameters));

    // The same through the coefficients.
    const auto full = nodal::analyze(s, M, false);
    const auto shifted = nodal::analyze(translated(s, m, M), M, false);
    CHECK(full.k == shifted.k);
    CHECK(full.r == shifted.r);
  }
}

TEST_CASE("sign flip preserves the counts") {
  for (std::uint64_t t = 0; t < 8; ++t) {
    const auto s = field::sample_coefficients(field::make_shell(2, 65), 31, t);
    const auto a = nodal::analyze(s, 144, false);
    const auto b = nodal::analyze(-s, 144, false);
    CHECK(a.k == b.k);
    CHECK(a.r == b.r);
    CHECK(sorted(a.domain_volumes) == sorted(b.domain_volumes));
    const auto da = nodal::count_domains(nodal::sign_grid(field::eval_grid(s, 144)));
    const auto db = nodal::count_domains(nodal::sign_grid(field::eval_grid(-s, 144)));
    CHECK(da.labels == db.labels);
    for (std::size_t i = 0; i < da.positive.size(); ++i) CHECK(da.positive[i] != db.positive[i]);
  }
}

TEST_CASE("frozen pipeline result") {
  // d = 2, n = 65, seed 7, trial 0 at M = 144.
  const auto out = nodal::analyze(field::sample_coefficients(field::make_shell(2, 65), 7, 0), 144, false);
  CHECK(out.k == 10);
  CHECK(out.r == 10);
  CHECK(out.certified);
  CHECK(out.mu == doctest::Approx(0.0063142).epsilon(1e-4));
}

TEST_CASE("component and domain bounds on certified trials") {
  for (std::uint64_t t = 0; t < 12; ++t) {
    const auto s = field::sample_coefficients(field::make_shell(2, 65), 7, t);
    const auto out = nodal::analyze(s, 16 * 9, false);
    if (!out.certified) continue;
    CHECK(out.components_domains_consistent(2));
    CHECK(out.r <= out.k + 1);
    CHECK(out.k <= out.r + 1);
  }
  for (std::uint64_t t = 0; t < 3; ++t) {
    const auto s = field::sample_coefficients(field::make_shell(3, 17), 7, t);
    const auto out = nodal::analyze(s, 64, false);
    if (out.certified) CHECK(out.components_domains_consistent(3));
  }
}

TEST_CASE("domain labels are canonical") {
  const auto s = field::sample_coefficients(field::make_shell(2, 25), 8, 0);
  const auto dom = nodal::count_domains(nodal::sign_grid(field::eval_grid(s, 64)));
  // Labels appear in order of their first vertex.
  std::int32_t next = 0;
  for (auto l : dom.labels) {
    CHECK(l <= next);
    if (l == next) ++next;
  }
  CHECK(static_cast<std::size_t>(next) == dom.r);
}

TEST_CASE("count_in_ball on fixtures") {
  const std::vector<double> center{0.5, 0.5};
  auto sg = constant_signs(2, 32, true);
  paint(sg, 14, 18, 14, 18, false);
  auto c1 = nodal::count_in_ball(sg, center, 0.3);
  CHECK(c1.components_inside == 1);
  CHECK(c1.domains_inside == 1);
  CHECK(c1.components_inside <= c1.domains_inside);

  // Annulus with a positive core: two nested components, two domains.
  auto ring = constant_signs(2, 32, true);
  paint(ring, 10, 22, 10, 22, false);
  paint(ring, 14, 18, 14, 18, true);
  auto c2 = nodal::count_in_ball(ring, center, 0.45);
  CHECK(c2.components_inside == 2);
  CHECK(c2.domains_inside == 2);
  auto small = nodal::count_in_ball(ring, center, 0.15);
  CHECK(small.components_inside == 1);
  CHECK(small.domains_inside == 1);

  // Two separate blobs.
  auto two = constant_signs(2, 32, true);
  paint(two, 10, 13, 10, 13, false);
  paint(two, 19, 22, 19, 22, false);
  auto c3 = nodal::count_in_ball(two, center, 0.4);
  CHECK(c3.components_inside == 2);
  CHECK(c3.domains_inside == 2);

  // Strips wrap, so nothing lies inside any ball.
  auto strips = constant_signs(2, 32, true);
  paint(strips, 0, 32, 8, 24, false);
  auto c4 = nodal::count_in_ball(strips, center, 0.49);
  CHECK(c4.components_inside == 0);
  CHECK(c4.domains_inside == 0);

  // Random fixtures: k' <= r'.
  testing::Gen gen(4);
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = field::sample_coefficients(field::make_shell(2, 65), 1234, static_cast<std::uint64_t>(trial));
    const auto g = nodal::sign_grid(field::eval_grid(s, 96));
    const auto p = gen.point(2);
    const auto b = nodal::count_in_ball(g, p, gen.real(0.05, 0.45));
    CHECK(b.components_inside <= b.domains_inside);
  }
}

TEST_CASE("Faber-Krahn constants") {
  // Bisection on J0 as an independent root finder.
  double lo = 2.0, hi = 3.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::cyl_bessel_j(0.0, lo) * std::cyl_bessel_j(0.0, mid) <= 0 ? hi : lo) = mid;
  }
  CHECK(nodal::bessel_first_zero(2) == doctest::Approx(lo).epsilon(1e-12));
  CHECK(nodal::bessel_first_zero(2) == doctest::Approx(2.404825557695773).epsilon(1e-12));
  CHECK(nodal::bessel_first_zero(3) == doctest::Approx(pi).epsilon(1e-12));
  CHECK(nodal::faber_krahn_constant(2) == doctest::Approx(lo * lo / (4 * pi)).epsilon(1e-12));
  CHECK(nodal::faber_krahn_constant(2) == doctest::Approx(0.4602).epsilon(1e-4));
  CHECK(nodal::faber_krahn_constant(3) == doctest::Approx(pi / 6).epsilon(1e-12));

  const auto c = shifted_cos(1, 0.013);
  const auto s = nodal::analyze(c, 32, false);
  const auto fk = nodal::faber_krahn_check(s, 2, 1);
  CHECK(fk.pass);
  CHECK(fk.min_vol == doctest::Approx(0.5).epsilon(0.07));
  auto uncert = s;
  uncert.certified = false;
  CHECK_THROWS_AS(nodal::faber_krahn_check(uncert, 2, 1), Uncertified);
}

TEST_CASE("perturbation") {
  const auto c = shifted_cos(1, 0.013);
  const auto base = nodal::analyze(c, 32, false);
  REQUIRE(base.certified);
  const auto tiny = nodal::perturb_and_compare(c, base, 1e-4, 5);
  CHECK(tiny.n_before == 2);
  CHECK(tiny.n_after == 2);
  CHECK(tiny.diameters_ok);
  const auto none = nodal::perturb_and_compare(c, base, 0.0, 5);
  CHECK(none.n_before == none.n_after);
  for (double shift : none.diam_shifts) CHECK(shift == 0.0);
  CHECK_THROWS_AS(nodal::perturb_and_compare(c, base, 10.0, 5), PerturbationTooLarge);
  auto uncert = base;
  uncert.certified = false;
  CHECK_THROWS_AS(nodal::perturb_and_compare(c, uncert, 1e-4, 5), Uncertified);
}

TEST_CASE("three-dimensional single mode") {
  const auto f = testing::modes(3, 4, {{{0, 2, 0}, 0.0, 1.0}});
  const auto s = nodal::analyze(f, 32, false);
  CHECK(s.k == 4);
  CHECK(s.r == 4);
}
