#include "arw/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "arw/errors.hpp"

namespace arw::algebra {
namespace {

double to_double(const Rational& r) { return r.convert_to<double>(); }

int total_degree(const Exponents& e) {
  int sum = 0;
  for (auto v : e) sum += v;
  return sum;
}

// Embeds a polynomial in (c, s) as a polynomial in (c_j, s_j) of 2d variables.
AlgPoly embed_pair(const AlgPoly& p, int d, int j) {
  AlgPoly out(2 * d);
  Exponents e(static_cast<std::size_t>(2 * d), 0);
  for (const auto& [pe, coef] : p.terms()) {
    e[2 * j] = pe[0];
    e[2 * j + 1] = pe[1];
    out.add_term(e, coef);
  }
  return out;
}

struct Complex {
  AlgPoly re;
  AlgPoly im;
};

Complex multiply(const Complex& x, const Complex& y) {
  return {x.re * y.re - x.im * y.im, x.re * y.im + x.im * y.re};
}

// (c + i s)^D by the binomial theorem, independent of the recurrence.
Complex binomial_power(int D, int sign) {
  Complex out{AlgPoly(2), AlgPoly(2)};
  boost::multiprecision::cpp_int binom = 1;
  for (int k = 0; k <= D; ++k) {
    // i^k sign^k
    const int quarter = k % 4;
    Rational coef(binom);
    if (sign < 0 && k % 2 == 1) coef = -coef;
    if (quarter >= 2) coef = -coef;
    const Exponents e{static_cast<std::uint16_t>(D - k), static_cast<std::uint16_t>(k)};
    if (k % 2 == 0) {
      out.re.add_term(e, coef);
    } else {
      out.im.add_term(e, coef);
    }
    binom = binom * (D - k) / (k + 1);
  }
  return out;
}

AlgPoly circle_relation(int d, int j) {
  AlgPoly c = AlgPoly::variable(2 * d, 2 * j);
  AlgPoly s = AlgPoly::variable(2 * d, 2 * j + 1);
  return c * c + s * s - AlgPoly::constant(2 * d, Rational(1));
}

}  // namespace

AlgPoly AlgPoly::constant(int nvars, const Rational& value) {
  AlgPoly p(nvars);
  p.add_term(Exponents(static_cast<std::size_t>(nvars), 0), value);
  return p;
}

AlgPoly AlgPoly::variable(int nvars, int index) {
  AlgPoly p(nvars);
  Exponents e(static_cast<std::size_t>(nvars), 0);
  e[static_cast<std::size_t>(index)] = 1;
  p.add_term(e, Rational(1));
  return p;
}

int AlgPoly::degree() const {
  int deg = -1;
  for (const auto& [e, c] : terms_) deg = std::max(deg, total_degree(e));
  return deg;
}

bool AlgPoly::is_homogeneous() const {
  const int deg = degree();
  return std::all_of(terms_.begin(), terms_.end(), [&](const auto& t) { return total_degree(t.first) == deg; });
}

Rational AlgPoly::coefficient(const Exponents& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? Rational(0) : it->second;
}

void AlgPoly::add_term(const Exponents& e, const Rational& coefficient) {
  if (static_cast<int>(e.size()) != nvars_) throw Error("monomial arity does not match the polynomial");
  if (coefficient == 0) return;
  auto [it, inserted] = terms_.try_emplace(e, coefficient);
  if (!inserted) {
    it->second += coefficient;
    if (it->second == 0) terms_.erase(it);
  }
}

AlgPoly AlgPoly::derivative(int var) const {
  AlgPoly out(nvars_);
  for (const auto& [e, c] : terms_) {
    const auto k = e[static_cast<std::size_t>(var)];
    if (k == 0) continue;
    Exponents de = e;
    --de[static_cast<std::size_t>(var)];
    out.add_term(de, c * k);
  }
  return out;
}

AlgPoly AlgPoly::widened(int nvars) const {
  if (nvars < nvars_) throw Error("cannot drop variables by widening");
  AlgPoly out(nvars);
  for (const auto& [e, c] : terms_) {
    Exponents w = e;
    w.resize(static_cast<std::size_t>(nvars), 0);
    out.add_term(w, c);
  }
  return out;
}

AlgPoly AlgPoly::dehomogenized() const {
  AlgPoly out(nvars_ - 1);
  for (const auto& [e, c] : terms_) out.add_term(Exponents(e.begin(), e.end() - 1), c);
  return out;
}

double AlgPoly::evaluate(std::span<const double> point) const {
  double sum = 0.0;
  for (const auto& [e, c] : terms_) {
    double term = to_double(c);
    for (int i = 0; i < nvars_; ++i) {
      if (e[i]) term *= std::pow(point[i], e[i]);
    }
    sum += term;
  }
  return sum;
}

Rational AlgPoly::evaluate(std::span<const Rational> point) const {
  Rational sum = 0;
  for (const auto& [e, c] : terms_) {
    Rational term = c;
    for (int i = 0; i < nvars_; ++i) {
      for (int k = 0; k < e[i]; ++k) term *= point[i];
    }
    sum += term;
  }
  return sum;
}

std::string AlgPoly::variable_name(int index) const {
  const int d = nvars_ / 2;
  if (nvars_ % 2 == 1 && index == nvars_ - 1) return "z0";
  const std::string base = index % 2 == 0 ? "c" : "s";
  return d == 1 ? base : base + std::to_string(index / 2 + 1);
}

std::string AlgPoly::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  // Highest degree first, then reverse lexicographic so c precedes s.
  std::vector<std::pair<Exponents, Rational>> ordered(terms_.begin(), terms_.end());
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& x, const auto& y) {
    const int dx = total_degree(x.first), dy = total_degree(y.first);
    if (dx != dy) return dx > dy;
    return x.first > y.first;
  });
  for (const auto& [e, c] : ordered) {
    const bool negative = c < 0;
    const Rational mag = negative ? Rational(-c) : c;
    if (first) {
      if (negative) out << "-";
    } else {
      out << (negative ? " - " : " + ");
    }
    first = false;
    const bool constant = total_degree(e) == 0;
    if (mag != 1 || constant) {
      out << mag.str();
      if (!constant) out << "*";
    }
    bool first_var = true;
    for (int i = 0; i < nvars_; ++i) {
      if (!e[i]) continue;
      if (!first_var) out << "*";
      first_var = false;
      out << variable_name(i);
      if (e[i] > 1) out << "^" << e[i];
    }
  }
  return out.str();
}

AlgPoly& AlgPoly::operator+=(const AlgPoly& rhs) {
  if (nvars_ != rhs.nvars_) throw Error("adding polynomials in different variables");
  for (const auto& [e, c] : rhs.terms_) add_term(e, c);
  return *this;
}

AlgPoly& AlgPoly::operator-=(const AlgPoly& rhs) {
  if (nvars_ != rhs.nvars_) throw Error("subtracting polynomials in different variables");
  for (const auto& [e, c] : rhs.terms_) add_term(e, -c);
  return *this;
}

AlgPoly& AlgPoly::operator*=(const Rational& scalar) {
  if (scalar == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= scalar;
  return *this;
}

AlgPoly operator*(const AlgPoly& lhs, const AlgPoly& rhs) {
  if (lhs.nvars_ != rhs.nvars_) throw Error("multiplying polynomials in different variables");
  AlgPoly out(lhs.nvars_);
  Exponents e(static_cast<std::size_t>(lhs.nvars_));
  for (const auto& [ea, ca] : lhs.terms_) {
    for (const auto& [eb, cb] : rhs.terms_) {
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = static_cast<std::uint16_t>(ea[i] + eb[i]);
      out.add_term(e, ca * cb);
    }
  }
  return out;
}

AlgPoly AlgPoly::pow(int exponent) const {
  AlgPoly out = constant(nvars_, Rational(1));
  for (int k = 0; k < exponent; ++k) out = out * *this;
  return out;
}

void TrigPoly::add(lattice::IntVec lambda, const Rational& cos_coef, const Rational& sin_coef) {
  if (static_cast<int>(lambda.size()) != d_) throw Error("frequency dimension does not match the polynomial");
  Rational sin_part = sin_coef;
  const bool zero = std::all_of(lambda.begin(), lambda.end(), [](auto v) { return v == 0; });
  if (zero) {
    sin_part = 0;  // sin(0) vanishes
  } else if (!lattice::in_half_space(lambda)) {
    for (auto& v : lambda) v = -v;
    sin_part = -sin_part;
  }
  auto& entry = coeffs_[lambda];
  entry.first += cos_coef;
  entry.second += sin_part;
  if (entry.first == 0 && entry.second == 0) coeffs_.erase(lambda);
}

int TrigPoly::degree() const {
  int deg = -1;
  for (const auto& [lambda, c] : coeffs_) {
    std::int64_t l1 = 0;
    for (auto v : lambda) l1 += v < 0 ? -v : v;
    deg = std::max(deg, static_cast<int>(l1));
  }
  return deg;
}

double TrigPoly::evaluate(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& [lambda, c] : coeffs_) {
    double phase = 0.0;
    for (int i = 0; i < d_; ++i) phase += static_cast<double>(lambda[i]) * x[i];
    phase *= 2.0 * std::numbers::pi;
    sum += to_double(c.first) * std::cos(phase) + to_double(c.second) * std::sin(phase);
  }
  return sum;
}

TrigPoly TrigPoly::reduced_derivative(int j) const {
  TrigPoly out(d_);
  for (const auto& [lambda, c] : coeffs_) {
    const Rational k(lambda[j]);
    if (k == 0) continue;
    out.add(lambda, k * c.second, -k * c.first);
  }
  return out;
}

TrigPoly TrigPoly::from_sample(const field::WaveSample& sample) {
  TrigPoly out(sample.d());
  const double norm = sample.normalization();
  for (std::size_t i = 0; i < sample.shell->half_points.size(); ++i) {
    out.add(sample.shell->half_points[i], Rational(norm * sample.a[i]), Rational(norm * sample.b[i]));
  }
  return out;
}

TrigPoly& TrigPoly::operator+=(const TrigPoly& rhs) {
  if (d_ != rhs.d_) throw Error("adding trigonometric polynomials of different dimension");
  for (const auto& [lambda, c] : rhs.coeffs_) add(lambda, c.first, c.second);
  return *this;
}

TrigPoly& TrigPoly::operator*=(const Rational& scalar) {
  if (scalar == 0) {
    coeffs_.clear();
    return *this;
  }
  for (auto& [lambda, c] : coeffs_) {
    c.first *= scalar;
    c.second *= scalar;
  }
  return *this;
}

std::pair<AlgPoly, AlgPoly> chebyshev_pair(int D) {
  if (D < 0) throw Error("Chebyshev degree must be nonnegative");
  const AlgPoly c = AlgPoly::variable(2, 0);
  const AlgPoly s = AlgPoly::variable(2, 1);
  AlgPoly C = AlgPoly::constant(2, Rational(1));
  AlgPoly S(2);
  for (int k = 0; k < D; ++k) {
    AlgPoly next_C = c * C - s * S;
    AlgPoly next_S = s * C + c * S;
    C = std::move(next_C);
    S = std::move(next_S);
  }
  return {C, S};
}

AlgPoly algebraize(const TrigPoly& t) {
  const int d = t.d();
  // powers[j][m] = (C_m + i S_m)(c_j, s_j), built incrementally.
  std::vector<std::vector<Complex>> powers(static_cast<std::size_t>(d));
  auto power = [&](int j, int m) -> const Complex& {
    auto& list = powers[static_cast<std::size_t>(j)];
    while (static_cast<int>(list.size()) <= m) {
      const auto [C, S] = chebyshev_pair(static_cast<int>(list.size()));
      list.push_back({embed_pair(C, d, j), embed_pair(S, d, j)});
    }
    return list[static_cast<std::size_t>(m)];
  };

  AlgPoly out(2 * d);
  for (const auto& [lambda, coef] : t.coefficients()) {
    // e^{2 pi i lambda.x} = prod_j (c_j + i sgn(lambda_j) s_j)^{|lambda_j|}
    Complex prod{AlgPoly::constant(2 * d, Rational(1)), AlgPoly(2 * d)};
    for (int j = 0; j < d; ++j) {
      const auto m = lambda[j];
      if (m == 0) continue;
      Complex factor = power(j, static_cast<int>(m < 0 ? -m : m));
      if (m < 0) factor.im = -factor.im;
      prod = multiply(prod, factor);
    }
    out += prod.re * coef.first;
    out += prod.im * coef.second;
  }
  return out;
}

std::vector<AlgPoly> algebraize_system(std::span<const TrigPoly> system) {
  if (system.empty()) throw Error("empty system");
  const int d = system.front().d();
  std::vector<AlgPoly> out;
  for (const auto& t : system) {
    if (t.d() != d) throw Error("system mixes dimensions");
    out.push_back(algebraize(t));
  }
  for (int j = 0; j < d; ++j) out.push_back(circle_relation(d, j));
  return out;
}

AlgPoly homogenize(const AlgPoly& p, int formal_degree) {
  if (formal_degree < p.degree()) {
    throw DegreeTooSmall("formal degree " + std::to_string(formal_degree) + " is below the degree " +
                         std::to_string(p.degree()));
  }
  AlgPoly out(p.nvars() + 1);
  for (const auto& [e, c] : p.terms()) {
    Exponents h = e;
    h.push_back(static_cast<std::uint16_t>(formal_degree - total_degree(e)));
    out.add_term(h, c);
  }
  return out;
}

AlgPoly determinant(const std::vector<std::vector<AlgPoly>>& matrix, std::size_t budget) {
  const std::size_t n = matrix.size();
  if (n == 0) throw Error("empty matrix");
  if (n > 30) throw ExpansionBudgetExceeded("matrix too large for cofactor expansion");
  const int nvars = matrix[0][0].nvars();
  std::size_t spent = 0;
  // Minors over the trailing rows, keyed by the set of columns still free.
  std::unordered_map<std::uint32_t, AlgPoly> memo;
  auto minor = [&](auto&& self, std::size_t row, std::uint32_t cols) -> AlgPoly {
    if (row == n) return AlgPoly::constant(nvars, Rational(1));
    if (auto it = memo.find(cols); it != memo.end()) return it->second;
    AlgPoly sum(nvars);
    int position = 0;
    for (std::size_t col = 0; col < n; ++col) {
      if (!(cols & (1u << col))) continue;
      const AlgPoly& entry = matrix[row][col];
      if (!entry.is_zero()) {
        AlgPoly sub = self(self, row + 1, cols & ~(1u << col));
        if (!sub.is_zero()) {
          spent += entry.size() * sub.size();
          if (spent > budget) throw ExpansionBudgetExceeded("determinant expansion exceeded the monomial budget");
          AlgPoly term = entry * sub;
          if (position % 2 == 1) term = -term;
          sum += term;
        }
      }
      ++position;
    }
    memo.emplace(cols, sum);
    return sum;
  };
  return minor(minor, 0, (n == 32 ? ~0u : (1u << n) - 1u));
}

PiScaledPoly gradient_system_jacobian(const TrigPoly& t, std::size_t budget) {
  const int d = t.d();
  if (d < 1) throw Error("dimension must be at least 1");
  // dT/dx_j = 2 pi * (reduced derivative), so the determinant carries (2 pi)^d.
  std::vector<AlgPoly> system;
  for (int j = 0; j < d; ++j) {
    system.push_back(algebraize(t.reduced_derivative(j)) * Rational(2));
    system.push_back(circle_relation(d, j));
  }
  std::vector<std::vector<AlgPoly>> jac(system.size());
  for (std::size_t r = 0; r < system.size(); ++r) {
    for (int v = 0; v < 2 * d; ++v) jac[r].push_back(system[r].derivative(v));
  }
  PiScaledPoly out;
  out.poly = determinant(jac, budget);
  out.pi_power = out.poly.is_zero() ? 0 : d;
  return out;
}

TrigPoly regular_example(int d, int D, const Rational& A) {
  TrigPoly t(d);
  for (int j = 0; j < d; ++j) {
    lattice::IntVec lambda(static_cast<std::size_t>(d), 0);
    lambda[j] = D;
    t.add(lambda, Rational(0), Rational(1));
  }
  t.add(lattice::IntVec(static_cast<std::size_t>(d), 0), A, Rational(0));
  return t;
}

PiScaledPoly regular_example_jacobian(int d, int D) {
  const auto S = chebyshev_pair(D).second;
  AlgPoly prod = AlgPoly::constant(2 * d, Rational(1));
  for (int j = 0; j < d; ++j) prod = prod * embed_pair(S, d, j);
  Rational scale = 1;
  for (int j = 0; j < d; ++j) scale *= 4 * D * D;
  return {prod * scale, d};
}

IdentityReport verify_csd_identities(int D_max) {
  if (D_max < 1) throw Error("D_max must be at least 1");
  IdentityReport report;
  report.d_max = D_max;
  const AlgPoly c = AlgPoly::variable(2, 0);
  const AlgPoly s = AlgPoly::variable(2, 1);
  const AlgPoly radius2 = c * c + s * s;
  std::string failures;
  for (int D = 1; D <= D_max; ++D) {
    const auto [C, S] = chebyshev_pair(D);
    IdentityRow row;
    row.D = D;
    row.sum_of_squares = C * C + S * S == radius2.pow(D);
    const Complex plus = binomial_power(D, +1);
    const Complex minus = binomial_power(D, -1);
    row.factorization = plus.re == C && plus.im == S && minus.re == C && minus.im == -S;
    row.determinant = s * C.derivative(0) - c * C.derivative(1) == S * Rational(D);
    if (!(row.sum_of_squares && row.factorization && row.determinant)) failures += " D=" + std::to_string(D);
    report.rows.push_back(row);
  }
  report.all_pass = failures.empty();
  if (!report.all_pass) throw IdentityFailure("Chebyshev identities failed at" + failures);
  return report;
}

}  // namespace arw::algebra
