#pragma once

// Exact algebraization of trigonometric polynomials.
//
// A trigonometric polynomial on T^d becomes a polynomial in the 2d variables
// c_j = cos(2 pi x_j), s_j = sin(2 pi x_j). Variable 2j is c_{j+1}, variable
// 2j + 1 is s_{j+1}, and a homogenized polynomial carries z0 as its last
// variable. All coefficients are exact rationals.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "arw/field.hpp"
#include "arw/lattice.hpp"

namespace arw::algebra {

using Rational = boost::multiprecision::cpp_rational;
using Exponents = std::vector<std::uint16_t>;

class AlgPoly {
 public:
  AlgPoly() = default;
  explicit AlgPoly(int nvars) : nvars_(nvars) {}

  static AlgPoly constant(int nvars, const Rational& value);
  static AlgPoly variable(int nvars, int index);

  int nvars() const { return nvars_; }
  const std::map<Exponents, Rational>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;  // -1 for the zero polynomial
  bool is_homogeneous() const;
  Rational coefficient(const Exponents& e) const;

  // Zero coefficients are never stored.
  void add_term(const Exponents& e, const Rational& coefficient);

  AlgPoly derivative(int var) const;
  // Same polynomial in more variables (the new ones appended with exponent 0).
  AlgPoly widened(int nvars) const;
  // Substitutes z0 = 1 and drops the last variable.
  AlgPoly dehomogenized() const;

  double evaluate(std::span<const double> point) const;
  Rational evaluate(std::span<const Rational> point) const;

  std::string to_string() const;
  std::string variable_name(int index) const;

  AlgPoly& operator+=(const AlgPoly& rhs);
  AlgPoly& operator-=(const AlgPoly& rhs);
  AlgPoly& operator*=(const Rational& scalar);
  friend AlgPoly operator+(AlgPoly lhs, const AlgPoly& rhs) { return lhs += rhs; }
  friend AlgPoly operator-(AlgPoly lhs, const AlgPoly& rhs) { return lhs -= rhs; }
  friend AlgPoly operator*(AlgPoly lhs, const Rational& s) { return lhs *= s; }
  friend AlgPoly operator*(const Rational& s, AlgPoly rhs) { return rhs *= s; }
  friend AlgPoly operator*(const AlgPoly& lhs, const AlgPoly& rhs);
  AlgPoly operator-() const { return *this * Rational(-1); }
  AlgPoly pow(int exponent) const;
  bool operator==(const AlgPoly& rhs) const = default;

 private:
  int nvars_ = 0;
  std::map<Exponents, Rational> terms_;
};

// sum over canonical frequencies of cos_coef cos(2 pi lambda.x) + sin_coef sin(2 pi lambda.x).
// Keys are the zero vector or have a positive first nonzero coordinate; the
// zero frequency carries no sine part.
class TrigPoly {
 public:
  TrigPoly() = default;
  explicit TrigPoly(int d) : d_(d) {}

  // Any frequency; it is folded onto its canonical representative.
  void add(lattice::IntVec lambda, const Rational& cos_coef, const Rational& sin_coef);

  int d() const { return d_; }
  const std::map<lattice::IntVec, std::pair<Rational, Rational>>& coefficients() const { return coeffs_; }
  int degree() const;  // max l1 norm over nonzero entries, -1 if zero
  bool is_zero() const { return coeffs_.empty(); }
  double evaluate(std::span<const double> x) const;

  // d/dx_j divided by 2 pi, which keeps the coefficients rational.
  TrigPoly reduced_derivative(int j) const;

  // Exact image of a sample; doubles are dyadic rationals, so nothing is rounded
  // beyond the normalization factor applied in floating point.
  static TrigPoly from_sample(const field::WaveSample& sample);

  TrigPoly& operator+=(const TrigPoly& rhs);
  TrigPoly& operator*=(const Rational& scalar);
  friend TrigPoly operator+(TrigPoly lhs, const TrigPoly& rhs) { return lhs += rhs; }
  friend TrigPoly operator*(const Rational& s, TrigPoly rhs) { return rhs *= s; }

 private:
  int d_ = 0;
  std::map<lattice::IntVec, std::pair<Rational, Rational>> coeffs_;
};

// (C_D, S_D) in the two variables (c, s).
std::pair<AlgPoly, AlgPoly> chebyshev_pair(int D);

AlgPoly algebraize(const TrigPoly& t);

// Algebraizations of the inputs followed by c_j^2 + s_j^2 - 1 for each j.
std::vector<AlgPoly> algebraize_system(std::span<const TrigPoly> system);

// z0^formal_degree * P(v / z0), with z0 appended as the last variable.
AlgPoly homogenize(const AlgPoly& p, int formal_degree);

// pi^pi_power * poly.
struct PiScaledPoly {
  AlgPoly poly;
  int pi_power = 0;
  bool operator==(const PiScaledPoly&) const = default;
};

constexpr std::size_t kDefaultExpansionBudget = 1'000'000;

// Determinant by cofactor expansion over column subsets. The budget caps the
// number of monomials produced along the way.
AlgPoly determinant(const std::vector<std::vector<AlgPoly>>& matrix,
                    std::size_t budget = kDefaultExpansionBudget);

// Jacobian determinant of the system (dT/dx_1, c_1^2 + s_1^2 - 1, ..., dT/dx_d,
// c_d^2 + s_d^2 - 1) with respect to (c_1, s_1, ..., c_d, s_d).
PiScaledPoly gradient_system_jacobian(const TrigPoly& t, std::size_t budget = kDefaultExpansionBudget);

// sum_j sin(2 pi D x_j) + A
TrigPoly regular_example(int d, int D, const Rational& A);

// (4 pi D^2)^d prod_j S_D(c_j, s_j)
PiScaledPoly regular_example_jacobian(int d, int D);

struct IdentityRow {
  int D = 0;
  bool sum_of_squares = false;   // C^2 + S^2 = (c^2 + s^2)^D
  bool factorization = false;    // C +- i S = (c +- i s)^D
  bool determinant = false;      // s dC/dc - c dC/ds = D S
};

struct IdentityReport {
  int d_max = 0;
  std::vector<IdentityRow> rows;
  bool all_pass = false;
};

// Throws IdentityFailure if any identity fails.
IdentityReport verify_csd_identities(int D_max);

}  // namespace arw::algebra
