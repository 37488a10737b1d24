#include "arw/nodal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/bessel.hpp>

#include "arw/errors.hpp"
#include "periodic_union_find.hpp"
#include "triangulation.hpp"

namespace arw::nodal {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using detail::Coord;
using detail::edge_directions;
using detail::Indexer;
using detail::kMaxDim;
using detail::Winding;

void check_flips(const SignGrid& sg, const Indexer& ix) {
  if (sg.flipped.empty()) return;
  if (sg.d != 2 || sg.flipped.size() != ix.total) throw Error("cell flips need d = 2 and one flag per cell");
}

// Endpoints of edge node (vertex, dir), with their windings relative to vertex.
struct Endpoints {
  std::size_t a, b;
  Winding wa, wb;
};

Endpoints endpoints(const SignGrid& sg, const Indexer& ix, std::size_t vertex, const Coord& c, unsigned dir) {
  const auto [ca, cb] = detail::edge_corners(sg, vertex, dir);
  Endpoints e;
  e.a = ix.step(vertex, c, ca, e.wa);
  e.b = ix.step(vertex, c, cb, e.wb);
  return e;
}

detail::PeriodicUnionFind build_domains(const SignGrid& sg, const Indexer& ix) {
  check_flips(sg, ix);
  detail::PeriodicUnionFind uf(ix.total, sg.d);
  const unsigned masks = edge_directions(sg.d);
  Winding delta{};
  Coord c{};
  for (std::size_t v = 0; v < ix.total; ++v, ix.advance(c)) {
    for (unsigned s = 1; s <= masks; ++s) {
      const auto e = endpoints(sg, ix, v, c, s);
      if (sg.positive[e.a] != sg.positive[e.b]) continue;
      for (int i = 0; i < sg.d; ++i) delta[i] = static_cast<std::int16_t>(e.wb[i] - e.wa[i]);
      uf.unite(static_cast<std::uint32_t>(e.a), static_cast<std::uint32_t>(e.b), delta.data());
    }
  }
  return uf;
}

// Nodes are triangulation edges (vertex, direction mask); only sign-changing
// edges are ever united.
detail::PeriodicUnionFind build_components(const SignGrid& sg, const Indexer& ix) {
  check_flips(sg, ix);
  const int d = sg.d;
  const unsigned masks = edge_directions(d);
  detail::PeriodicUnionFind uf(ix.total * masks, d);

  const unsigned corners = 1u << d;
  std::vector<std::size_t> corner_index(corners);
  std::vector<Winding> corner_winding(corners);
  std::vector<std::uint8_t> corner_sign(corners);

  Coord c{};
  for (std::size_t base = 0; base < ix.total; ++base, ix.advance(c)) {
    bool any_pos = false, any_neg = false;
    for (unsigned m = 0; m < corners; ++m) {
      corner_index[m] = ix.step(base, c, m, corner_winding[m]);
      corner_sign[m] = sg.positive[corner_index[m]];
      (corner_sign[m] ? any_pos : any_neg) = true;
    }
    if (!(any_pos && any_neg)) continue;

    for (const auto& simplex : detail::cell_simplices(d, detail::is_flipped(sg, base))) {
      bool first = true;
      std::uint32_t anchor = 0;
      Winding anchor_w{};
      for (std::size_t i = 0; i < simplex.size(); ++i) {
        for (std::size_t j = i + 1; j < simplex.size(); ++j) {
          if (corner_sign[simplex[i]] == corner_sign[simplex[j]]) continue;
          const auto ref = detail::edge_ref(simplex[i], simplex[j], d);
          const auto node = static_cast<std::uint32_t>(corner_index[ref.owner_corner] * masks + (ref.dir - 1));
          const Winding& w = corner_winding[ref.owner_corner];
          if (first) {
            anchor = node;
            anchor_w = w;
            first = false;
          } else {
            Winding delta{};
            for (int a = 0; a < d; ++a) delta[a] = static_cast<std::int16_t>(w[a] - anchor_w[a]);
            uf.unite(anchor, node, delta.data());
          }
        }
      }
    }
  }
  return uf;
}

bool edge_crosses(const SignGrid& sg, const Indexer& ix, std::size_t node, unsigned masks, Coord& base, unsigned& dir) {
  const std::size_t v = node / masks;
  dir = static_cast<unsigned>(node % masks) + 1;
  base = ix.coords(v);
  const auto e = endpoints(sg, ix, v, base, dir);
  return sg.positive[e.a] != sg.positive[e.b];
}

}  // namespace

SignGrid sign_grid(const field::FieldGrid& grid) {
  if (grid.tag.kind != field::DerivativeTag::Kind::value) throw Error("sign_grid needs a value grid");
  SignGrid sg;
  sg.d = grid.d;
  sg.M = grid.M;
  sg.positive.resize(grid.values.size());
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    const double v = grid.values[i];
    sg.positive[i] = v >= 0.0 ? 1 : 0;
    if (v == 0.0) ++sg.zero_hits;
  }
  return sg;
}

DomainResult count_domains(const SignGrid& sg) {
  const Indexer ix(sg.d, sg.M);
  auto uf = build_domains(sg, ix);
  DomainResult out;
  out.labels.assign(ix.total, -1);
  std::vector<std::size_t> counts;
  for (std::size_t v = 0; v < ix.total; ++v) {
    const std::uint32_t root = uf.find(static_cast<std::uint32_t>(v));
    if (root == v) {
      out.labels[v] = static_cast<std::int32_t>(counts.size());
      counts.push_back(0);
      out.positive.push_back(sg.positive[v]);
      out.wrapping.push_back(uf.wraps(root) ? 1 : 0);
    } else {
      out.labels[v] = out.labels[root];
    }
    ++counts[static_cast<std::size_t>(out.labels[v])];
  }
  out.r = counts.size();
  const double cell = std::pow(1.0 / sg.M, sg.d);
  for (std::size_t c : counts) out.volumes.push_back(static_cast<double>(c) * cell);
  return out;
}

ComponentResult count_components(const SignGrid& sg, bool keep_edge_labels) {
  const Indexer ix(sg.d, sg.M);
  const unsigned masks = edge_directions(sg.d);
  auto uf = build_components(sg, ix);
  const int d = sg.d;

  ComponentResult out;
  std::vector<std::int64_t> label(uf.size(), -1);
  std::vector<std::array<double, kMaxDim>> lo, hi;
  Coord base{};
  std::int16_t pot[8];
  for (std::size_t v = 0; v < ix.total; ++v, ix.advance(base)) {
    for (unsigned dir = 1; dir <= masks; ++dir) {
      const auto e = endpoints(sg, ix, v, base, dir);
      if (sg.positive[e.a] == sg.positive[e.b]) continue;
      const std::size_t node = v * masks + (dir - 1);
      const std::uint32_t root = uf.find(static_cast<std::uint32_t>(node), pot);
      if (label[root] < 0) {
        label[root] = static_cast<std::int64_t>(out.component_cells.size());
        out.component_cells.push_back(0);
        out.wrapping.push_back(uf.wraps(root) ? 1 : 0);
        std::array<double, kMaxDim> l{}, h{};
        l.fill(1e300);
        h.fill(-1e300);
        lo.push_back(l);
        hi.push_back(h);
      }
      const auto c = static_cast<std::size_t>(label[root]);
      ++out.component_cells[c];
      if (keep_edge_labels) {
        if (out.edge_labels.empty()) out.edge_labels.assign(uf.size(), -1);
        out.edge_labels[node] = static_cast<std::int32_t>(c);
      }
      for (int i = 0; i < d; ++i) {
        // Crossing point taken at the edge midpoint.
        const double x = static_cast<double>(base[i]) + ((dir >> i) & 1u ? 0.5 : 0.0) +
                         static_cast<double>(sg.M) * pot[i];
        lo[c][i] = std::min(lo[c][i], x);
        hi[c][i] = std::max(hi[c][i], x);
      }
    }
  }
  out.k = out.component_cells.size();
  for (std::size_t c = 0; c < out.k; ++c) {
    if (out.wrapping[c]) {
      out.diameters.push_back(0.5);
      continue;
    }
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      const double w = (hi[c][i] - lo[c][i]) / sg.M;
      s += w * w;
    }
    out.diameters.push_back(std::sqrt(s));
  }
  return out;
}

StabilityMargins stability_margins(const field::WaveSample& sample, const field::FieldGrid& value_grid,
                                   const field::FieldGrid& gradient_norm_grid, double guard) {
  if (value_grid.M != gradient_norm_grid.M || value_grid.values.size() != gradient_norm_grid.values.size()) {
    throw Error("value and gradient grids must share M");
  }
  const double L = sample.wavenumber();
  const double scale = kTwoPi * L;
  StabilityMargins out;
  double mu = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < value_grid.values.size(); ++i) {
    const double m = std::max(std::abs(value_grid.values[i]), gradient_norm_grid.values[i] / scale);
    mu = std::min(mu, m);
  }
  if (value_grid.values.empty()) mu = 0.0;
  out.mu = mu;
  out.alpha = mu / 2.0;
  out.beta = kTwoPi * mu / 2.0;
  out.sup_bound = field::coefficient_sup_bound(sample);
  const double h_diag = std::sqrt(static_cast<double>(value_grid.d)) / value_grid.M;
  const double b1 = scale * out.sup_bound;
  const double b2 = scale * scale * out.sup_bound;
  out.discretization = b2 * h_diag * h_diag / 2.0 + b1 * h_diag * guard;
  out.certified = mu - out.discretization > 0.0;
  return out;
}

double NodalSummary::min_domain_volume() const {
  if (domain_volumes.empty()) return 0.0;
  return *std::min_element(domain_volumes.begin(), domain_volumes.end());
}

double NodalSummary::sum_diameters() const { return std::accumulate(component_diameters.begin(), component_diameters.end(), 0.0); }

bool NodalSummary::components_domains_consistent(int d) const {
  const auto kk = static_cast<long long>(k);
  const auto rr = static_cast<long long>(r);
  return rr - 1 <= kk && kk <= rr + d - 1;
}

NodalSummary analyze_signs(const SignGrid& sg) {
  NodalSummary s;
  const auto domains = count_domains(sg);
  const auto comps = count_components(sg);
  s.k = comps.k;
  s.r = domains.r;
  s.domain_volumes = domains.volumes;
  s.component_diameters = comps.diameters;
  s.component_wrapping = comps.wrapping;
  s.M = sg.M;
  s.zero_hits = sg.zero_hits;
  return s;
}

namespace {

// Value grid signs after saddle resolution, with the margins of the level.
struct ResolvedLevel {
  SignGrid sg;
  std::size_t zero_hits = 0;
  CriticalSearch search;
  SaddleResolution resolution;
  StabilityMargins margins;
  double mu = 0.0;
  double min_critical_value = 0.0;
};

ResolvedLevel resolve_level(const field::WaveSample& sample, int M, double guard, std::size_t budget) {
  const auto values = field::eval_grid(sample, M, field::DerivativeTag::value(), budget);
  field::FieldGrid grad;
  for (int i = 0; i < sample.d(); ++i) {
    auto g = field::eval_grid(sample, M, field::DerivativeTag::gradient(i), budget);
    if (i == 0) {
      grad = std::move(g);
      for (double& v : grad.values) v *= v;
    } else {
      for (std::size_t k = 0; k < g.values.size(); ++k) grad.values[k] += g.values[k] * g.values[k];
    }
  }
  for (double& v : grad.values) v = std::sqrt(v);

  ResolvedLevel out;
  out.sg = sign_grid(values);
  out.zero_hits = out.sg.zero_hits;
  out.search = find_critical_points(sample, values, grad);
  out.resolution = resolve_saddles(out.sg, out.search.points, sample.wavenumber());
  out.margins = stability_margins(sample, values, grad, guard);
  double crit = std::numeric_limits<double>::infinity();
  for (const auto& cp : out.search.points) crit = std::min(crit, std::abs(cp.value));
  out.min_critical_value = out.search.points.empty() ? 0.0 : crit;
  // A critical point has zero gradient, so its |f| caps the continuum margin.
  out.mu = std::min(out.margins.mu, crit);
  return out;
}

NodalSummary analyze_level(const field::WaveSample& sample, int M, double guard, std::size_t budget) {
  const auto level = resolve_level(sample, M, guard, budget);
  NodalSummary s = analyze_signs(level.sg);
  s.zero_hits = level.zero_hits;
  s.mu = level.mu;
  s.alpha = s.mu / 2.0;
  s.beta = kTwoPi * s.mu / 2.0;
  s.analytic_certified = level.margins.certified;
  s.min_critical_value = level.min_critical_value;
  s.critical_points = level.search.points.size();
  s.snapped_saddles = level.resolution.snapped;
  s.unresolved_saddles = level.resolution.unresolved + level.search.failed_low_seeds;
  s.certified = s.zero_hits == 0 && s.mu > 0.0 && s.unresolved_saddles == 0;
  return s;
}

}  // namespace

NodalSummary analyze(const field::WaveSample& sample, int M, const AnalyzeOptions& options) {
  const std::size_t budget = options.memory_budget_bytes ? options.memory_budget_bytes : field::memory_budget_bytes();
  NodalSummary current = analyze_level(sample, M, options.guard, budget);
  if (!options.auto_refine) return current;

  int unchanged = 0;
  for (int level = 1; level <= options.max_refinements; ++level) {
    const int next_M = current.M * 2;
    if (field::grid_memory_bytes(sample.d(), next_M) > budget) {
      current.budget_exhausted = true;
      return current;
    }
    NodalSummary next = analyze_level(sample, next_M, options.guard, budget);
    next.refinement_levels = level;
    unchanged = (next.k == current.k && next.r == current.r) ? unchanged + 1 : 0;
    current = std::move(next);
    if (unchanged >= 2 && current.certified) return current;
  }
  current.budget_exhausted = true;
  return current;
}

NodalSummary analyze(const field::WaveSample& sample, int M, bool auto_refine) {
  AnalyzeOptions options;
  options.auto_refine = auto_refine;
  return analyze(sample, M, options);
}

double bessel_first_zero(int d) {
  const double order = d / 2.0 - 1.0;
  return boost::math::cyl_bessel_j_zero(order, 1);
}

double faber_krahn_constant(int d) {
  const double unit_ball = std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
  return unit_ball * std::pow(bessel_first_zero(d) / kTwoPi, d);
}

FaberKrahnCheck faber_krahn_check(const NodalSummary& summary, int d, std::int64_t n) {
  if (!summary.certified) throw Uncertified();
  FaberKrahnCheck out;
  out.min_vol = summary.min_domain_volume();
  out.bound = faber_krahn_constant(d) * std::pow(static_cast<double>(n), -d / 2.0);
  out.pass = out.min_vol >= 0.8 * out.bound;
  return out;
}

PerturbationResult perturb_and_compare(const field::WaveSample& sample, const NodalSummary& base, double rho,
                                       std::uint64_t seed) {
  if (!base.certified) throw Uncertified();
  const int d = sample.d();
  const double L = sample.wavenumber();
  const auto g = field::scaled_sample(sample.shell, seed, sample.trial_index, rho);
  PerturbationResult out;
  out.rho = rho;
  // Analytic sup bounds for g and grad g.
  const double sup_bound = field::coefficient_sup_bound(g);
  out.sup_g = sup_bound;
  out.sup_grad_g = kTwoPi * L * sup_bound;
  if (!(out.sup_g < base.alpha / 2.0) || !(out.sup_grad_g < base.beta * L / 2.0)) {
    throw PerturbationTooLarge("perturbation violates sup|g| < alpha/2 or sup|grad g| < beta L / 2");
  }

  const int M = base.M;
  const std::size_t budget = field::memory_budget_bytes();
  const auto before = resolve_level(sample, M, 1.0, budget);
  const auto after = resolve_level(sample + g, M, 1.0, budget);
  const auto comps_before = count_components(before.sg, true);
  const auto comps_after = count_components(after.sg, true);
  out.n_before = comps_before.k;
  out.n_after = comps_after.k;
  out.slack = 2.0 * base.alpha / (base.beta * L) + 2.0 * std::sqrt(static_cast<double>(d)) / M;

  // Match each component to the perturbed component sharing most of its
  // sign-changing edges.
  out.diameters_ok = out.n_before == out.n_after;
  if (out.diameters_ok && out.n_before > 0) {
    std::vector<std::vector<std::size_t>> overlap(out.n_before, std::vector<std::size_t>(out.n_after, 0));
    for (std::size_t e = 0; e < comps_before.edge_labels.size(); ++e) {
      const auto a = comps_before.edge_labels[e];
      const auto b = comps_after.edge_labels[e];
      if (a >= 0 && b >= 0) ++overlap[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    }
    std::vector<std::uint8_t> used(out.n_after, 0);
    for (std::size_t c = 0; c < out.n_before; ++c) {
      const auto& row = overlap[c];
      const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
      if (row[best] == 0 || used[best]) {
        out.diameters_ok = false;
        continue;
      }
      used[best] = 1;
      const double shift = comps_before.diameters[c] - comps_after.diameters[best];
      out.diam_shifts.push_back(shift);
      if (shift > out.slack) out.diameters_ok = false;
    }
  }
  return out;
}

BallCount count_in_ball(const SignGrid& sg, std::span<const double> center, double radius) {
  const Indexer ix(sg.d, sg.M);
  const int d = sg.d;
  const double h = 1.0 / sg.M;
  std::int16_t pot[8];

  // Generic pass: lifted points per set, shifted by the integer translate that
  // brings the set's bounding-box center nearest to `center`.
  auto inside_count = [&](detail::PeriodicUnionFind& uf, auto&& point_of, std::size_t nodes, auto&& active) {
    std::vector<std::array<double, kMaxDim>> lo(nodes), hi(nodes);
    std::vector<std::uint8_t> seen(nodes, 0);
    std::array<double, kMaxDim> p{};
    for (std::size_t node = 0; node < nodes; ++node) {
      if (!active(node)) continue;
      const std::uint32_t root = uf.find(static_cast<std::uint32_t>(node), pot);
      point_of(node, pot, p);
      if (!seen[root]) {
        seen[root] = 1;
        lo[root] = p;
        hi[root] = p;
      }
      for (int i = 0; i < d; ++i) {
        lo[root][i] = std::min(lo[root][i], p[i]);
        hi[root][i] = std::max(hi[root][i], p[i]);
      }
    }
    std::vector<double> far(nodes, 0.0);
    std::vector<std::array<double, kMaxDim>> shift(nodes);
    for (std::size_t node = 0; node < nodes; ++node) {
      if (!seen[node]) continue;
      for (int i = 0; i < d; ++i) shift[node][i] = std::round(center[i] - 0.5 * (lo[node][i] + hi[node][i]));
    }
    for (std::size_t node = 0; node < nodes; ++node) {
      if (!active(node)) continue;
      const std::uint32_t root = uf.find(static_cast<std::uint32_t>(node), pot);
      point_of(node, pot, p);
      double dist2 = 0.0;
      for (int i = 0; i < d; ++i) {
        const double q = p[i] + shift[root][i] - center[i];
        dist2 += q * q;
      }
      far[root] = std::max(far[root], std::sqrt(dist2));
    }
    std::size_t count = 0;
    for (std::size_t node = 0; node < nodes; ++node) {
      if (seen[node] && !uf.wraps(static_cast<std::uint32_t>(node)) && far[node] < radius) ++count;
    }
    return count;
  };

  BallCount out;
  {
    auto uf = build_domains(sg, ix);
    auto point = [&](std::size_t v, const std::int16_t* w, std::array<double, kMaxDim>& p) {
      const Coord c = ix.coords(v);
      for (int i = 0; i < d; ++i) p[i] = (static_cast<double>(c[i]) + static_cast<double>(sg.M) * w[i]) * h;
    };
    out.domains_inside = inside_count(uf, point, ix.total, [](std::size_t) { return true; });
  }
  {
    const unsigned masks = edge_directions(d);
    auto uf = build_components(sg, ix);
    auto point = [&](std::size_t node, const std::int16_t* w, std::array<double, kMaxDim>& p) {
      const Coord c = ix.coords(node / masks);
      const unsigned dir = static_cast<unsigned>(node % masks) + 1;
      for (int i = 0; i < d; ++i) {
        p[i] = (static_cast<double>(c[i]) + ((dir >> i) & 1u ? 0.5 : 0.0) + static_cast<double>(sg.M) * w[i]) * h;
      }
    };
    auto active = [&](std::size_t node) {
      Coord b{};
      unsigned dir = 0;
      return edge_crosses(sg, ix, node, masks, b, dir);
    };
    out.components_inside = inside_count(uf, point, ix.total * masks, active);
  }
  return out;
}

}  // namespace arw::nodal
