#pragma once

// Nodal topology of a sampled field on the periodic grid.
//
// The grid is triangulated by the Kuhn (Freudenthal) subdivision of every
// cube: vertex v is joined to v + e_S for each nonempty coordinate subset S.
// In the plane a square may instead be split along its other diagonal.
// Nodal domains are the same-sign vertex clusters of this triangulation and
// nodal components are the connected pieces of the zero set of the piecewise
// linear interpolant, tracked through the sign-changing edges. Both sets are
// the honest topology of one piecewise linear function, so the two counts are
// always mutually consistent.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "arw/field.hpp"

namespace arw::nodal {

struct SignGrid {
  int d = 0;
  int M = 0;
  std::vector<std::uint8_t> positive;  // 1 iff value >= 0
  std::size_t zero_hits = 0;
  // d == 2 only, per cell (indexed by its lowest corner): 1 if the square is
  // split along the anti-diagonal. Empty means no cell is flipped.
  std::vector<std::uint8_t> flipped;
};

SignGrid sign_grid(const field::FieldGrid& grid);

struct DomainResult {
  std::size_t r = 0;
  std::vector<double> volumes;          // per domain, vertex count * M^-d
  std::vector<std::uint8_t> positive;   // sign of each domain
  std::vector<std::uint8_t> wrapping;   // domain winds around the torus
  std::vector<std::int32_t> labels;     // per vertex, 0..r-1 in order of first vertex
};

DomainResult count_domains(const SignGrid& sg);

struct ComponentResult {
  std::size_t k = 0;
  std::vector<std::size_t> component_cells;  // sign-changing edges per component
  std::vector<double> diameters;             // lifted bounding-box diagonal, 1/2 if wrapping
  std::vector<std::uint8_t> wrapping;
  // Per triangulation edge (vertex * (2^d - 1) + direction - 1): component
  // label, or -1. Filled only on request.
  std::vector<std::int32_t> edge_labels;
};

ComponentResult count_components(const SignGrid& sg, bool keep_edge_labels = false);

struct CriticalPoint {
  std::vector<double> x;            // in [0, 1)^d
  double value = 0.0;
  int index = 0;                    // number of negative Hessian eigenvalues
  std::vector<double> eigenvalues;  // ascending, divided by (2 pi L)^2
  std::vector<double> eigenvectors; // column j belongs to eigenvalue j, row-major d x d
  std::size_t nearest_vertex = 0;

  bool is_saddle() const { return index > 0 && index < static_cast<int>(x.size()); }
};

struct CriticalSearch {
  std::vector<CriticalPoint> points;
  std::size_t seeds = 0;
  std::size_t failed_low_seeds = 0;  // seeds near the zero level where Newton did not settle
};

// Newton's method on grad f = 0 from every vertex where |grad f| is a local
// minimum over the 3^d block around it.
CriticalSearch find_critical_points(const field::WaveSample& sample, const field::FieldGrid& value_grid,
                                    const field::FieldGrid& gradient_norm_grid);

struct SaddleResolution {
  std::size_t snapped = 0;
  std::size_t unresolved = 0;
};

// Saddles whose value is small against the curvature across a cell are
// snapped: the vertex nearest the saddle takes the sign of the saddle value.
// Each snap is then checked against the local picture of a nondegenerate
// saddle: when exactly one eigendirection leads to the opposite sign, the two
// opposite-sign sheets must stay apart in the star of the vertex, otherwise
// the opposite-sign star vertices must be connected in its link.
SaddleResolution resolve_saddles(SignGrid& sg, const std::vector<CriticalPoint>& points, double wavenumber);

struct StabilityMargins {
  double mu = 0.0;     // min over vertices of max(|f|, |grad f| / (2 pi L))
  double alpha = 0.0;  // mu / 2
  double beta = 0.0;   // 2 pi * mu / 2, in units of L
  double sup_bound = 0.0;        // analytic bound on sup|f|, sup|grad f|/(2 pi L), sup|hess f|/(2 pi L)^2
  double discretization = 0.0;   // worst between-vertex loss of the margin
  bool certified = false;
};

// `guard` scales the first-order between-vertex term of the certificate.
StabilityMargins stability_margins(const field::WaveSample& sample, const field::FieldGrid& value_grid,
                                   const field::FieldGrid& gradient_norm_grid, double guard = 1.0);

struct NodalSummary {
  std::size_t k = 0;
  std::size_t r = 0;
  std::vector<double> domain_volumes;
  std::vector<double> component_diameters;
  std::vector<std::uint8_t> component_wrapping;
  double alpha = 0.0;
  double beta = 0.0;
  double mu = 0.0;
  bool certified = false;
  bool analytic_certified = false;   // margin beats the analytic between-vertex loss
  std::size_t critical_points = 0;
  std::size_t snapped_saddles = 0;
  std::size_t unresolved_saddles = 0;
  double min_critical_value = 0.0;   // min |f| over located critical points
  int refinement_levels = 0;
  int M = 0;
  std::size_t zero_hits = 0;
  bool budget_exhausted = false;

  double min_domain_volume() const;
  double sum_diameters() const;
  // r - 1 <= k <= r + d - 1
  bool components_domains_consistent(int d) const;
};

struct AnalyzeOptions {
  bool auto_refine = false;
  int max_refinements = 6;
  double guard = 1.0;
  std::size_t memory_budget_bytes = 0;  // 0: field::memory_budget_bytes()
};

NodalSummary analyze(const field::WaveSample& sample, int M, const AnalyzeOptions& options = {});
NodalSummary analyze(const field::WaveSample& sample, int M, bool auto_refine);

// Summary of a value grid alone (no margins or certification).
NodalSummary analyze_signs(const SignGrid& sg);

// Smallest positive zero of J_{d/2-1}, from the Bessel library.
double bessel_first_zero(int d);

// Volume of the ball whose first Dirichlet eigenvalue is 4 pi^2 at unit wavenumber.
double faber_krahn_constant(int d);

struct FaberKrahnCheck {
  double min_vol = 0.0;
  double bound = 0.0;
  bool pass = false;
};

FaberKrahnCheck faber_krahn_check(const NodalSummary& summary, int d, std::int64_t n);

struct PerturbationResult {
  std::size_t n_before = 0;
  std::size_t n_after = 0;
  double rho = 0.0;
  double sup_g = 0.0;
  double sup_grad_g = 0.0;
  double slack = 0.0;  // 2 alpha / (beta L) + 2 h sqrt(d)
  std::vector<double> diam_shifts;  // diam_before - diam_after per matched component
  bool diameters_ok = false;
};

// Adds an independent draw g with coefficient norm rho, after verifying the
// perturbation bounds sup|g| < alpha/2 and sup|grad g| < beta L / 2.
PerturbationResult perturb_and_compare(const field::WaveSample& sample, const NodalSummary& base, double rho,
                                       std::uint64_t seed);

struct BallCount {
  std::size_t components_inside = 0;
  std::size_t domains_inside = 0;
};

// Components and domains lying entirely in the open ball B(center, radius).
BallCount count_in_ball(const SignGrid& sg, std::span<const double> center, double radius);

}  // namespace arw::nodal
