#pragma once

// The Gaussian ensemble of arithmetic random waves
//
//   f(x) = sqrt(2 / dim_HL) * sum_{lambda in half shell} (a cos(2 pi lambda.x) + b sin(2 pi lambda.x)),
//
// with a, b i.i.d. standard normal, its evaluation on periodic grids and at
// points, and the covariance kernels that describe it.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "arw/lattice.hpp"

namespace arw::field {

using ShellPtr = std::shared_ptr<const lattice::LatticeShell>;

ShellPtr make_shell(int d, std::int64_t n);

struct WaveSample {
  ShellPtr shell;
  // Indexed like shell->half_points.
  std::vector<double> a;
  std::vector<double> b;
  std::uint64_t seed = 0;
  std::uint64_t trial_index = 0;

  int d() const { return shell->d; }
  std::int64_t n() const { return shell->n; }
  double normalization() const;  // sqrt(2 / dim_HL)
  double wavenumber() const;      // L = sqrt(n)
};

WaveSample sample_coefficients(ShellPtr shell, std::uint64_t seed, std::uint64_t trial_index);

// Explicit coefficients (raw a, b; the sqrt(2/dim) factor is still applied).
WaveSample make_sample(ShellPtr shell, std::vector<double> a, std::vector<double> b);

// Coefficients of a second draw scaled so that its L2 norm equals rho.
WaveSample scaled_sample(ShellPtr shell, std::uint64_t seed, std::uint64_t trial_index, double rho);

WaveSample operator+(const WaveSample& lhs, const WaveSample& rhs);
WaveSample operator-(const WaveSample& s);

struct DerivativeTag {
  enum class Kind { value, gradient, hessian };
  Kind kind = Kind::value;
  int i = 0;
  int j = 0;

  static DerivativeTag value() { return {}; }
  static DerivativeTag gradient(int i) { return {Kind::gradient, i, 0}; }
  static DerivativeTag hessian(int i, int j) { return {Kind::hessian, i, j}; }
  bool operator==(const DerivativeTag&) const = default;
  std::string to_string() const;
};

struct FieldGrid {
  int d = 0;
  std::int64_t n = 0;
  int M = 0;
  std::vector<double> values;  // index j -> f(j / M), last axis fastest
  DerivativeTag tag;
  std::uint64_t seed = 0;
  std::uint64_t trial_index = 0;

  double spacing() const { return 1.0 / M; }
  std::size_t size() const { return values.size(); }
};

// Smallest grid size that resolves every frequency of the shell without aliasing.
int min_alias_free_M(std::int64_t n);

// Bytes, from ARW_MEMORY_BUDGET_MB (default 2048 MB).
std::size_t memory_budget_bytes();

// Bytes needed to evaluate one grid of size M^d.
std::size_t grid_memory_bytes(int d, int M);

FieldGrid eval_grid(const WaveSample& sample, int M, DerivativeTag tag = DerivativeTag::value());
FieldGrid eval_grid(const WaveSample& sample, int M, DerivativeTag tag, std::size_t budget_bytes);

// |grad f| on the grid, from d spectral gradient grids.
FieldGrid eval_gradient_norm_grid(const WaveSample& sample, int M);

// Direct summation, fixed order over the half shell.
double value_at(const WaveSample& sample, std::span<const double> x);
std::vector<double> gradient_at(const WaveSample& sample, std::span<const double> x);
std::vector<double> hessian_at(const WaveSample& sample, std::span<const double> x);  // row-major d x d
double eval_point(const WaveSample& sample, std::span<const double> x, DerivativeTag tag);

// Recover the coefficients of a value grid by a forward transform.
WaveSample sample_from_grid(const FieldGrid& grid);

// K_L(t) = (1/dim_HL) sum_{lambda in shell} cos(2 pi lambda.t)
double covariance_kernel(const lattice::LatticeShell& shell, std::span<const double> t);

// K_{x,L}(u, v) = K_L((u - v) / L)
double scaled_kernel(const lattice::LatticeShell& shell, std::span<const double> u, std::span<const double> v);

// d x d row-major; equal to (4 pi^2 / d) I, computed from the exact lattice sums.
std::vector<double> scaled_covariance_matrix(const lattice::LatticeShell& shell);

// k(x) = integral over S^{d-1} of cos(2 pi x.zeta) d sigma(zeta); radial in |x|.
double limiting_kernel(int d, std::span<const double> x);
double limiting_kernel_radial(int d, double r);

struct ParsevalNorms {
  double coef_norm = 0.0;
  double grid_norm = 0.0;
};

ParsevalNorms parseval_norm(const WaveSample& sample, const FieldGrid& grid);

// L2 norm on the torus, from the coefficients.
double coefficient_norm(const WaveSample& sample);

// sqrt(2/dim_HL) * sum over the half shell of sqrt(a^2 + b^2): bounds
// sup|f|, sup|grad f|/(2 pi L) and sup|hess f|/(2 pi L)^2 simultaneously.
double coefficient_sup_bound(const WaveSample& sample);

struct LocalBoundRatios {
  double ratio_f = 0.0;
  double ratio_grad = 0.0;
  double ratio_hess = 0.0;
  double local_integral = 0.0;
};

LocalBoundRatios local_bound_ratio(const WaveSample& sample, std::span<const double> x0, double r,
                                   int points_per_axis = 32);

}  // namespace arw::field
