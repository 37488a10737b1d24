#include "arw/field.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>

#include "arw/errors.hpp"
#include "arw/faults.hpp"
#include "arw/rng.hpp"
#include "fft.hpp"

namespace arw::faults {
namespace {
std::atomic<Fault> g_fault{Fault::none};
}

void inject(Fault fault) { g_fault.store(fault); }
Fault active() { return g_fault.load(std::memory_order_relaxed); }

}  // namespace arw::faults

namespace arw::field {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_nonempty(const lattice::LatticeShell& shell) {
  if (shell.empty()) throw EmptyShell();
}

std::int64_t floor_sqrt(std::int64_t n) {
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

std::int64_t wrap_index(std::int64_t k, int M) {
  const std::int64_t r = k % M;
  return r < 0 ? r + M : r;
}

double phase(const lattice::IntVec& lambda, std::span<const double> x) {
  double dot = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) dot += static_cast<double>(lambda[i]) * x[i];
  return kTwoPi * dot;
}

// Multiplier applied to the amplitude at +lambda by the derivative tag; the
// entry at -lambda receives its conjugate.
std::complex<double> derivative_factor(const lattice::IntVec& lambda, const DerivativeTag& tag) {
  switch (tag.kind) {
    case DerivativeTag::Kind::value: return {1.0, 0.0};
    case DerivativeTag::Kind::gradient: return {0.0, kTwoPi * static_cast<double>(lambda[tag.i])};
    case DerivativeTag::Kind::hessian:
      return {-kTwoPi * kTwoPi * static_cast<double>(lambda[tag.i]) * static_cast<double>(lambda[tag.j]), 0.0};
  }
  return {1.0, 0.0};
}

void check_tag(const DerivativeTag& tag, int d) {
  if (tag.kind == DerivativeTag::Kind::value) return;
  const bool bad_i = tag.i < 0 || tag.i >= d;
  const bool bad_j = tag.kind == DerivativeTag::Kind::hessian && (tag.j < 0 || tag.j >= d);
  if (bad_i || bad_j) throw Error("derivative component out of range");
}

}  // namespace

ShellPtr make_shell(int d, std::int64_t n) {
  return std::make_shared<const lattice::LatticeShell>(lattice::enumerate_shell(d, n));
}

double WaveSample::normalization() const { return std::sqrt(2.0 / static_cast<double>(shell->dim_HL)); }

double WaveSample::wavenumber() const { return std::sqrt(static_cast<double>(shell->n)); }

WaveSample sample_coefficients(ShellPtr shell, std::uint64_t seed, std::uint64_t trial_index) {
  require_nonempty(*shell);
  WaveSample s;
  const std::size_t count = shell->half_points.size();
  s.a.resize(count);
  s.b.resize(count);
  NormalStream stream(seed, trial_index);
  for (std::size_t k = 0; k < count; ++k) {
    s.a[k] = stream.normal();
    s.b[k] = stream.normal();
  }
  s.shell = std::move(shell);
  s.seed = seed;
  s.trial_index = trial_index;
  return s;
}

WaveSample make_sample(ShellPtr shell, std::vector<double> a, std::vector<double> b) {
  require_nonempty(*shell);
  if (a.size() != shell->half_points.size() || b.size() != shell->half_points.size()) {
    throw Error("coefficient count must equal the half-shell size");
  }
  WaveSample s;
  s.shell = std::move(shell);
  s.a = std::move(a);
  s.b = std::move(b);
  return s;
}

WaveSample scaled_sample(ShellPtr shell, std::uint64_t seed, std::uint64_t trial_index, double rho) {
  // Salted stream so the perturbation never coincides with a base trial.
  require_nonempty(*shell);
  const std::size_t count = shell->half_points.size();
  std::vector<double> a(count), b(count);
  NormalStream stream(seed, trial_index, 0x9e3779b9u);
  for (std::size_t k = 0; k < count; ++k) {
    a[k] = stream.normal();
    b[k] = stream.normal();
  }
  auto s = make_sample(std::move(shell), std::move(a), std::move(b));
  s.seed = seed;
  s.trial_index = trial_index;
  const double norm = coefficient_norm(s);
  const double scale = norm > 0.0 ? rho / norm : 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    s.a[k] *= scale;
    s.b[k] *= scale;
  }
  return s;
}

WaveSample operator+(const WaveSample& lhs, const WaveSample& rhs) {
  if (lhs.shell->d != rhs.shell->d || lhs.shell->n != rhs.shell->n) throw Error("samples live on different shells");
  WaveSample out = lhs;
  for (std::size_t k = 0; k < out.a.size(); ++k) {
    out.a[k] += rhs.a[k];
    out.b[k] += rhs.b[k];
  }
  return out;
}

WaveSample operator-(const WaveSample& s) {
  WaveSample out = s;
  for (auto& v : out.a) v = -v;
  for (auto& v : out.b) v = -v;
  return out;
}

std::string DerivativeTag::to_string() const {
  switch (kind) {
    case Kind::value: return "value";
    case Kind::gradient: return "gradient[" + std::to_string(i) + "]";
    case Kind::hessian: return "hessian[" + std::to_string(i) + "," + std::to_string(j) + "]";
  }
  return "value";
}

int min_alias_free_M(std::int64_t n) { return static_cast<int>(2 * floor_sqrt(n) + 1); }

std::size_t memory_budget_bytes() {
  if (const char* env = std::getenv("ARW_MEMORY_BUDGET_MB")) {
    char* end = nullptr;
    const double mb = std::strtod(env, &end);
    if (end != env && mb > 0) return static_cast<std::size_t>(mb * 1024.0 * 1024.0);
  }
  return std::size_t{2048} * 1024 * 1024;
}

std::size_t grid_memory_bytes(int d, int M) {
  long double real = 1.0L;
  for (int i = 0; i < d; ++i) real *= M;
  const long double half = real / M * (M / 2 + 1);
  // output grid + transform output + complex half spectrum (held twice during the copy)
  const long double bytes = real * 8.0L * 2.0L + half * 16.0L * 2.0L;
  if (bytes > static_cast<long double>(SIZE_MAX / 2)) return SIZE_MAX / 2;
  return static_cast<std::size_t>(bytes);
}

FieldGrid eval_grid(const WaveSample& sample, int M, DerivativeTag tag) {
  return eval_grid(sample, M, tag, memory_budget_bytes());
}

FieldGrid eval_grid(const WaveSample& sample, int M, DerivativeTag tag, std::size_t budget_bytes) {
  const auto& shell = *sample.shell;
  const int d = shell.d;
  check_tag(tag, d);
  if (M < min_alias_free_M(shell.n)) {
    throw AliasError("grid size " + std::to_string(M) + " aliases frequencies of norm^2 " + std::to_string(shell.n) +
                     "; need M >= " + std::to_string(min_alias_free_M(shell.n)));
  }
  if (grid_memory_bytes(d, M) > budget_bytes) {
    throw MemoryBudgetExceeded("grid " + std::to_string(M) + "^" + std::to_string(d) + " exceeds the memory budget");
  }

  const int last = M / 2 + 1;
  std::vector<std::complex<double>> spectrum(detail::half_spectrum_size(d, M), {0.0, 0.0});
  const double norm = sample.normalization();

  auto place = [&](const lattice::IntVec& k, std::complex<double> value) {
    const std::int64_t kl = wrap_index(k[d - 1], M);
    if (kl >= last) return;  // stored implicitly as the conjugate partner
    std::size_t idx = 0;
    for (int i = 0; i + 1 < d; ++i) idx = idx * static_cast<std::size_t>(M) + static_cast<std::size_t>(wrap_index(k[i], M));
    idx = idx * static_cast<std::size_t>(last) + static_cast<std::size_t>(kl);
    spectrum[idx] += value;
  };

  lattice::IntVec neg(static_cast<std::size_t>(d));
  for (std::size_t p = 0; p < shell.half_points.size(); ++p) {
    const auto& lambda = shell.half_points[p];
    // (a - i b)/2 at +lambda and its conjugate at -lambda reproduce a cos + b sin.
    const std::complex<double> amp = std::complex<double>(sample.a[p], -sample.b[p]) * (0.5 * norm);
    const std::complex<double> value = amp * derivative_factor(lambda, tag);
    for (int i = 0; i < d; ++i) neg[i] = -lambda[i];
    if (faults::active() == faults::Fault::frequency_placement) {
      place(lambda, 2.0 * value);
      continue;
    }
    place(lambda, value);
    place(neg, std::conj(value));
  }

  FieldGrid grid;
  grid.d = d;
  grid.n = shell.n;
  grid.M = M;
  grid.tag = tag;
  grid.seed = sample.seed;
  grid.trial_index = sample.trial_index;
  grid.values = detail::inverse_real_transform(d, M, std::move(spectrum));
  return grid;
}

FieldGrid eval_gradient_norm_grid(const WaveSample& sample, int M) {
  const int d = sample.d();
  FieldGrid out;
  for (int i = 0; i < d; ++i) {
    FieldGrid g = eval_grid(sample, M, DerivativeTag::gradient(i));
    if (i == 0) {
      out = std::move(g);
      for (double& v : out.values) v = v * v;
    } else {
      for (std::size_t k = 0; k < g.values.size(); ++k) out.values[k] += g.values[k] * g.values[k];
    }
  }
  for (double& v : out.values) v = std::sqrt(v);
  out.tag = DerivativeTag::gradient(0);
  return out;
}

double value_at(const WaveSample& sample, std::span<const double> x) {
  const auto& pts = sample.shell->half_points;
  double sum = 0.0;
  for (std::size_t p = 0; p < pts.size(); ++p) {
    const double th = phase(pts[p], x);
    sum += sample.a[p] * std::cos(th) + sample.b[p] * std::sin(th);
  }
  return sample.normalization() * sum;
}

std::vector<double> gradient_at(const WaveSample& sample, std::span<const double> x) {
  const int d = sample.d();
  const auto& pts = sample.shell->half_points;
  std::vector<double> g(static_cast<std::size_t>(d), 0.0);
  for (std::size_t p = 0; p < pts.size(); ++p) {
    const double th = phase(pts[p], x);
    const double w = -sample.a[p] * std::sin(th) + sample.b[p] * std::cos(th);
    for (int i = 0; i < d; ++i) g[i] += kTwoPi * static_cast<double>(pts[p][i]) * w;
  }
  const double norm = sample.normalization();
  for (double& v : g) v *= norm;
  return g;
}

std::vector<double> hessian_at(const WaveSample& sample, std::span<const double> x) {
  const int d = sample.d();
  const auto& pts = sample.shell->half_points;
  std::vector<double> h(static_cast<std::size_t>(d * d), 0.0);
  for (std::size_t p = 0; p < pts.size(); ++p) {
    const double th = phase(pts[p], x);
    const double w = sample.a[p] * std::cos(th) + sample.b[p] * std::sin(th);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        h[i * d + j] -= kTwoPi * kTwoPi * static_cast<double>(pts[p][i]) * static_cast<double>(pts[p][j]) * w;
      }
    }
  }
  const double norm = sample.normalization();
  for (double& v : h) v *= norm;
  return h;
}

double eval_point(const WaveSample& sample, std::span<const double> x, DerivativeTag tag) {
  check_tag(tag, sample.d());
  switch (tag.kind) {
    case DerivativeTag::Kind::value: return value_at(sample, x);
    case DerivativeTag::Kind::gradient: return gradient_at(sample, x)[tag.i];
    case DerivativeTag::Kind::hessian: return hessian_at(sample, x)[tag.i * sample.d() + tag.j];
  }
  return 0.0;
}

WaveSample sample_from_grid(const FieldGrid& grid) {
  if (grid.tag.kind != DerivativeTag::Kind::value) throw Error("coefficient recovery needs a value grid");
  if (grid.M < min_alias_free_M(grid.n)) throw AliasError("grid is too coarse to recover the coefficients");
  auto shell = make_shell(grid.d, grid.n);
  require_nonempty(*shell);
  const int d = grid.d;
  const int M = grid.M;
  const auto spectrum = detail::forward_real_transform(d, M, grid.values);
  double total = 1.0;
  for (int i = 0; i < d; ++i) total *= M;
  const int last = M / 2 + 1;
  const double norm = std::sqrt(2.0 / static_cast<double>(shell->dim_HL));

  std::vector<double> a(shell->half_points.size()), b(shell->half_points.size());
  for (std::size_t p = 0; p < shell->half_points.size(); ++p) {
    lattice::IntVec k = shell->half_points[p];
    bool conj = false;
    if (wrap_index(k[d - 1], M) >= last) {
      for (auto& c : k) c = -c;
      conj = true;
    }
    std::size_t idx = 0;
    for (int i = 0; i + 1 < d; ++i) idx = idx * static_cast<std::size_t>(M) + static_cast<std::size_t>(wrap_index(k[i], M));
    idx = idx * static_cast<std::size_t>(last) + static_cast<std::size_t>(wrap_index(k[d - 1], M));
    std::complex<double> c = spectrum[idx] / total;
    if (conj) c = std::conj(c);
    a[p] = 2.0 * c.real() / norm;
    b[p] = -2.0 * c.imag() / norm;
  }
  auto s = make_sample(shell, std::move(a), std::move(b));
  s.seed = grid.seed;
  s.trial_index = grid.trial_index;
  return s;
}

double covariance_kernel(const lattice::LatticeShell& shell, std::span<const double> t) {
  require_nonempty(shell);
  double sum = 0.0;
  for (const auto& lambda : shell.points) sum += std::cos(phase(lambda, t));
  return sum / static_cast<double>(shell.dim_HL);
}

double scaled_kernel(const lattice::LatticeShell& shell, std::span<const double> u, std::span<const double> v) {
  require_nonempty(shell);
  const double L = std::sqrt(static_cast<double>(shell.n));
  std::vector<double> t(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) t[i] = (u[i] - v[i]) / L;
  return covariance_kernel(shell, t);
}

std::vector<double> scaled_covariance_matrix(const lattice::LatticeShell& shell) {
  const auto sums = lattice::orthogonality_sums(shell);
  const double denom = static_cast<double>(shell.dim_HL) * static_cast<double>(shell.n);
  std::vector<double> c(sums.size());
  for (std::size_t k = 0; k < sums.size(); ++k) c[k] = kTwoPi * kTwoPi * (static_cast<double>(sums[k]) / denom);
  return c;
}

double limiting_kernel_radial(int d, double r) {
  if (d < 2) throw Error("limiting kernel needs d >= 2");
  if (r == 0.0) return 1.0;
  // k(r) = int_0^pi cos(2 pi r cos phi) sin^{d-2}(phi) dphi / int_0^pi sin^{d-2}(phi) dphi
  const double weight_total = std::sqrt(std::numbers::pi) * std::tgamma((d - 1) / 2.0) / std::tgamma(d / 2.0);
  auto integrand = [&](double phi) { return std::cos(kTwoPi * r * std::cos(phi)) * std::pow(std::sin(phi), d - 2); };
  // Composite midpoint rule; tripling keeps every previous node.
  long intervals = 16;
  auto midpoint = [&](long m) {
    const double h = std::numbers::pi / static_cast<double>(m);
    double s = 0.0;
    for (long k = 0; k < m; ++k) s += integrand((static_cast<double>(k) + 0.5) * h);
    return s * h;
  };
  double previous = midpoint(intervals);
  for (int level = 0; level < 12; ++level) {
    intervals *= 3;
    const double current = midpoint(intervals);
    if (std::abs(current - previous) < 1e-10) return current / weight_total;
    previous = current;
  }
  throw QuadratureNonConvergence("limiting kernel quadrature did not reach 1e-8");
}

double limiting_kernel(int d, std::span<const double> x) {
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return limiting_kernel_radial(d, std::sqrt(r2));
}

double coefficient_norm(const WaveSample& sample) {
  double s = 0.0;
  for (std::size_t k = 0; k < sample.a.size(); ++k) s += sample.a[k] * sample.a[k] + sample.b[k] * sample.b[k];
  return std::sqrt(s / static_cast<double>(sample.shell->dim_HL));
}

double coefficient_sup_bound(const WaveSample& sample) {
  double s = 0.0;
  for (std::size_t k = 0; k < sample.a.size(); ++k) s += std::hypot(sample.a[k], sample.b[k]);
  return sample.normalization() * s;
}

ParsevalNorms parseval_norm(const WaveSample& sample, const FieldGrid& grid) {
  if (grid.M < min_alias_free_M(sample.n())) throw AliasError("Parseval identity needs an alias-free grid");
  if (grid.tag.kind != DerivativeTag::Kind::value) throw Error("Parseval identity needs a value grid");
  ParsevalNorms out;
  out.coef_norm = coefficient_norm(sample);
  double s = 0.0;
  for (double v : grid.values) s += v * v;
  out.grid_norm = std::sqrt(s / static_cast<double>(grid.values.size()));
  return out;
}

LocalBoundRatios local_bound_ratio(const WaveSample& sample, std::span<const double> x0, double r,
                                   int points_per_axis) {
  if (!(r > 0.0)) throw Error("local_bound_ratio: r must be positive");
  points_per_axis = std::max(points_per_axis, 32);
  const int d = sample.d();
  const double L = sample.wavenumber();
  const double radius = r / L;
  const double step = 2.0 * radius / points_per_axis;

  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  std::vector<double> x(static_cast<std::size_t>(d));
  double integral = 0.0;
  const double cell = std::pow(step, d);
  while (true) {
    double dist2 = 0.0;
    for (int i = 0; i < d; ++i) {
      const double off = -radius + (idx[i] + 0.5) * step;
      x[i] = x0[i] + off;
      dist2 += off * off;
    }
    if (dist2 <= radius * radius) {
      const double f = value_at(sample, x);
      integral += f * f * cell;
    }
    int axis = d - 1;
    while (axis >= 0 && ++idx[axis] == points_per_axis) idx[axis--] = 0;
    if (axis < 0) break;
  }
  if (integral < 1e-30) throw DegenerateIntegral("local L2 integral vanishes");

  LocalBoundRatios out;
  out.local_integral = integral;
  const double f0 = value_at(sample, x0);
  const auto g0 = gradient_at(sample, x0);
  const auto h0 = hessian_at(sample, x0);
  double g2 = 0.0, h2 = 0.0;
  for (double v : g0) g2 += v * v;
  for (double v : h0) h2 += v * v;
  out.ratio_f = f0 * f0 / (std::pow(L, d) * integral);
  out.ratio_grad = g2 / (std::pow(L, d + 2) * integral);
  out.ratio_hess = h2 / (std::pow(L, d + 4) * integral);
  return out;
}

}  // namespace arw::field
