#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include <Eigen/Dense>

#include "arw/errors.hpp"
#include "arw/nodal.hpp"
#include "triangulation.hpp"

namespace arw::nodal {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kMaxNewton = 100;

// Heap-free small vectors and matrices.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, detail::kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, detail::kMaxDim, detail::kMaxDim>;

// Gradient and Hessian by direct summation, one sincos per frequency.
class Jet {
 public:
  explicit Jet(const field::WaveSample& sample) : d_(sample.d()) {
    const double norm = sample.normalization();
    for (std::size_t p = 0; p < sample.shell->half_points.size(); ++p) {
      std::array<double, detail::kMaxDim> k{};
      for (int i = 0; i < d_; ++i) k[i] = kTwoPi * static_cast<double>(sample.shell->half_points[p][i]);
      freq_.push_back(k);
      a_.push_back(norm * sample.a[p]);
      b_.push_back(norm * sample.b[p]);
    }
  }

  void gradient(const Vec& x, Vec& g) const {
    g.setZero();
    for (std::size_t p = 0; p < freq_.size(); ++p) {
      double th = 0.0;
      for (int i = 0; i < d_; ++i) th += freq_[p][i] * x(i);
      const double w = -a_[p] * std::sin(th) + b_[p] * std::cos(th);
      for (int i = 0; i < d_; ++i) g(i) += freq_[p][i] * w;
    }
  }

  void gradient_hessian(const Vec& x, Vec& g, Mat& H) const {
    g.setZero();
    H.setZero();
    for (std::size_t p = 0; p < freq_.size(); ++p) {
      double th = 0.0;
      for (int i = 0; i < d_; ++i) th += freq_[p][i] * x(i);
      const double sn = std::sin(th), cs = std::cos(th);
      const double w1 = -a_[p] * sn + b_[p] * cs;
      const double w2 = -(a_[p] * cs + b_[p] * sn);
      for (int i = 0; i < d_; ++i) {
        g(i) += freq_[p][i] * w1;
        for (int j = 0; j <= i; ++j) H(i, j) += freq_[p][i] * freq_[p][j] * w2;
      }
    }
    for (int i = 0; i < d_; ++i) {
      for (int j = i + 1; j < d_; ++j) H(i, j) = H(j, i);
    }
  }

 private:
  int d_;
  std::vector<std::array<double, detail::kMaxDim>> freq_;
  std::vector<double> a_, b_;
};

double wrap_unit(double x) {
  x -= std::floor(x);
  return x >= 1.0 ? 0.0 : x;
}

// Signed distance to the nearest integer translate.
double periodic_delta(double a, double b) {
  double t = a - b;
  return t - std::round(t);
}

struct Neighborhood {
  std::vector<std::vector<std::int64_t>> offsets;
};

// All offsets in {-1, 0, 1}^d except zero, axis neighbors first.
Neighborhood full_block(int d) {
  Neighborhood nb;
  std::vector<std::int64_t> o(static_cast<std::size_t>(d), -1);
  while (true) {
    if (std::any_of(o.begin(), o.end(), [](auto v) { return v != 0; })) nb.offsets.push_back(o);
    int i = 0;
    while (i < d && o[i] == 1) o[i++] = -1;
    if (i == d) break;
    ++o[i];
  }
  std::stable_sort(nb.offsets.begin(), nb.offsets.end(), [](const auto& a, const auto& b) {
    auto weight = [](const auto& v) { return std::count_if(v.begin(), v.end(), [](auto x) { return x != 0; }); };
    return weight(a) < weight(b);
  });
  return nb;
}

}  // namespace

CriticalSearch find_critical_points(const field::WaveSample& sample, const field::FieldGrid& value_grid,
                                    const field::FieldGrid& gradient_norm_grid) {
  const int d = value_grid.d;
  const detail::Indexer ix(d, value_grid.M);
  if (gradient_norm_grid.M != value_grid.M || gradient_norm_grid.values.size() != value_grid.values.size()) {
    throw Error("value and gradient grids must share M");
  }
  const double h = 1.0 / static_cast<double>(value_grid.M);
  const double scale = kTwoPi * sample.wavenumber();
  const double reach = 2.0 * h * std::sqrt(static_cast<double>(d));
  // Seeds this close to the zero level matter for the topology.
  const double low_level = 0.5 * std::pow(scale * reach, 2);
  const auto block = full_block(d);
  const auto& g = gradient_norm_grid.values;
  const Jet jet(sample);

  CriticalSearch out;
  std::unordered_map<std::size_t, std::vector<std::size_t>> by_vertex;
  Vec x(d), trial(d), grad(d), grad_t(d);
  Mat H(d, d);
  const Mat eye = Mat::Identity(d, d);

  detail::Coord c{};
  for (std::size_t v = 0; v < g.size(); ++v, ix.advance(c)) {
    bool minimum = true;
    for (const auto& o : block.offsets) {
      std::size_t u = v;
      for (int i = 0; i < d; ++i) {
        if (o[i] == 1) {
          u = c[i] + 1 == ix.M ? u - static_cast<std::size_t>(ix.M - 1) * ix.stride[i] : u + ix.stride[i];
        } else if (o[i] == -1) {
          u = c[i] == 0 ? u + static_cast<std::size_t>(ix.M - 1) * ix.stride[i] : u - ix.stride[i];
        }
      }
      // Ties broken by index so a flat pair yields one seed.
      if (g[u] < g[v] || (g[u] == g[v] && u < v)) {
        minimum = false;
        break;
      }
    }
    if (!minimum) continue;
    ++out.seeds;

    for (int i = 0; i < d; ++i) x(i) = static_cast<double>(c[i]) * h;
    // Levenberg-Marquardt on |grad f|^2. It either converges to a critical
    // point or stalls at a positive minimum, which rules one out nearby.
    bool converged = false;
    bool stalled = false;
    jet.gradient_hessian(x, grad, H);
    double lambda = 1e-3 * H.squaredNorm();
    double checkpoint = 0.0;
    for (int it = 0; it < kMaxNewton && !stalled; ++it) {
      if (grad.norm() < 1e-10 * scale) {
        converged = true;
        break;
      }
      const double phi = grad.squaredNorm();
      if (it % 10 == 0) {
        // Convergence to a critical point is fast; a crawl means a positive minimum.
        if (it > 0 && phi > 0.99 * checkpoint) {
          stalled = true;
          break;
        }
        checkpoint = phi;
      }
      while (true) {
        const Mat A = H.transpose() * H + lambda * eye;
        Vec step = A.ldlt().solve(H.transpose() * grad);
        const double len = step.norm();
        if (len > h) step *= h / len;
        if (!(len >= 1e-14 * h)) {
          stalled = true;
          break;
        }
        trial = x - step;
        jet.gradient(trial, grad_t);
        if (grad_t.squaredNorm() < phi) {
          x = trial;
          jet.gradient_hessian(x, grad, H);
          lambda = std::max(lambda / 10.0, 1e-12 * H.squaredNorm());
          break;
        }
        lambda *= 10.0;
      }
    }
    if (!converged) {
      if (!stalled && std::abs(value_grid.values[v]) < low_level) ++out.failed_low_seeds;
      continue;
    }

    CriticalPoint cp;
    cp.x.resize(static_cast<std::size_t>(d));
    detail::Coord nc{};
    for (int i = 0; i < d; ++i) {
      cp.x[i] = wrap_unit(x(i));
      nc[i] = static_cast<std::int64_t>(std::llround(cp.x[i] * static_cast<double>(value_grid.M)));
    }
    cp.nearest_vertex = ix.index(nc);

    bool duplicate = false;
    auto& bucket = by_vertex[cp.nearest_vertex];
    for (std::size_t id : bucket) {
      double s2 = 0.0;
      for (int i = 0; i < d; ++i) s2 += std::pow(periodic_delta(out.points[id].x[i], cp.x[i]), 2);
      if (std::sqrt(s2) < 1e-3 * h) duplicate = true;
    }
    if (duplicate) continue;

    cp.value = field::value_at(sample, cp.x);
    Eigen::SelfAdjointEigenSolver<Mat> eig(H);
    cp.eigenvalues.resize(static_cast<std::size_t>(d));
    cp.eigenvectors.resize(static_cast<std::size_t>(d * d));
    for (int j = 0; j < d; ++j) {
      cp.eigenvalues[j] = eig.eigenvalues()(j) / (scale * scale);
      if (cp.eigenvalues[j] < 0.0) ++cp.index;
      for (int i = 0; i < d; ++i) cp.eigenvectors[i * d + j] = eig.eigenvectors()(i, j);
    }
    bucket.push_back(out.points.size());
    out.points.push_back(std::move(cp));
  }
  return out;
}

namespace {

// Star of a vertex in the current triangulation: neighbor offsets and their
// adjacency in the link.
struct Star {
  std::vector<std::vector<std::int64_t>> offsets;
  std::vector<std::vector<std::uint8_t>> adjacent;
};

Star star_of(const SignGrid& sg, const detail::Indexer& ix, std::size_t vertex) {
  const int d = sg.d;
  const auto c = ix.coords(vertex);
  Star star;
  std::vector<std::pair<std::size_t, std::size_t>> links;
  auto slot = [&](const std::vector<std::int64_t>& o) {
    for (std::size_t k = 0; k < star.offsets.size(); ++k) {
      if (star.offsets[k] == o) return k;
    }
    star.offsets.push_back(o);
    return star.offsets.size() - 1;
  };
  for (unsigned m = 0; m < (1u << d); ++m) {
    detail::Coord base = c;
    for (int i = 0; i < d; ++i) base[i] -= (m >> i) & 1u;
    const bool flipped = detail::is_flipped(sg, ix.index(base));
    for (const auto& simplex : detail::cell_simplices(d, flipped)) {
      if (std::find(simplex.begin(), simplex.end(), m) == simplex.end()) continue;
      std::vector<std::size_t> ids;
      for (unsigned k : simplex) {
        if (k == m) continue;
        std::vector<std::int64_t> o(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) o[i] = static_cast<std::int64_t>((k >> i) & 1u) - static_cast<std::int64_t>((m >> i) & 1u);
        ids.push_back(slot(o));
      }
      for (std::size_t a = 0; a < ids.size(); ++a) {
        for (std::size_t b = a + 1; b < ids.size(); ++b) links.emplace_back(ids[a], ids[b]);
      }
    }
  }
  const std::size_t n = star.offsets.size();
  star.adjacent.assign(n, std::vector<std::uint8_t>(n, 0));
  for (auto [a, b] : links) star.adjacent[a][b] = star.adjacent[b][a] = 1;
  return star;
}

// Does the star of `vertex`, with the signs and cell splits currently in
// `sg`, carry the local topology of the saddle `cp`?
bool star_realises(const SignGrid& sg, const detail::Indexer& ix, const CriticalPoint& cp, std::size_t vertex) {
  const int d = sg.d;
  const double h = 1.0 / static_cast<double>(sg.M);
  const std::uint8_t sigma = cp.value >= 0.0 ? 1 : 0;
  if (sg.positive[vertex] != sigma) return false;

  // Eigendirections along which the field heads to the opposite sign, and
  // those along which it keeps the saddle sign.
  std::vector<int> away, toward;
  for (int j = 0; j < d; ++j) ((sigma == 1) == (cp.eigenvalues[j] < 0.0) ? away : toward).push_back(j);

  const auto star = star_of(sg, ix, vertex);
  const auto c = ix.coords(vertex);
  const std::size_t ns = star.offsets.size();
  std::vector<std::uint8_t> sign(ns);
  std::vector<double> along_away(ns, 0.0), along_toward(ns, 0.0);
  for (std::size_t a = 0; a < ns; ++a) {
    detail::Coord nc = c;
    for (int i = 0; i < d; ++i) {
      nc[i] += star.offsets[a][i];
      const double p = periodic_delta(static_cast<double>(nc[i]) * h, cp.x[i]);
      if (away.size() == 1) along_away[a] += p * cp.eigenvectors[i * d + away[0]];
      if (toward.size() == 1) along_toward[a] += p * cp.eigenvectors[i * d + toward[0]];
    }
    sign[a] = sg.positive[ix.index(nc)];
  }

  if (away.size() == 1) {
    // The two opposite-sign sheets must not touch inside the star.
    for (std::size_t a = 0; a < ns; ++a) {
      for (std::size_t b = a + 1; b < ns; ++b) {
        if (sign[a] != sigma && sign[b] != sigma && star.adjacent[a][b] &&
            (along_away[a] >= 0.0) != (along_away[b] >= 0.0)) {
          return false;
        }
      }
    }
  } else {
    std::vector<int> group(ns, -1);
    int groups = 0;
    for (std::size_t a = 0; a < ns; ++a) {
      if (sign[a] == sigma || group[a] >= 0) continue;
      std::vector<std::size_t> stack{a};
      group[a] = groups;
      while (!stack.empty()) {
        const auto u = stack.back();
        stack.pop_back();
        for (std::size_t b = 0; b < ns; ++b) {
          if (sign[b] != sigma && group[b] < 0 && star.adjacent[u][b]) {
            group[b] = groups;
            stack.push_back(b);
          }
        }
      }
      ++groups;
    }
    if (groups > 1) return false;
  }

  if (toward.size() == 1) {
    // Both lobes of the saddle sign meet at the vertex.
    bool ahead = false, behind = false;
    for (std::size_t a = 0; a < ns; ++a) {
      if (sign[a] != sigma) continue;
      (along_toward[a] >= 0.0 ? ahead : behind) = true;
    }
    if (!(ahead && behind)) return false;
  }
  return true;
}

}  // namespace

SaddleResolution resolve_saddles(SignGrid& sg, const std::vector<CriticalPoint>& points, double wavenumber) {
  const int d = sg.d;
  const detail::Indexer ix(d, sg.M);
  const double h = 1.0 / static_cast<double>(sg.M);
  const double scale = kTwoPi * wavenumber;
  const double reach = 2.0 * h * std::sqrt(static_cast<double>(d));
  const auto block = full_block(d);

  std::vector<const CriticalPoint*> low;
  for (const auto& cp : points) {
    if (!cp.is_saddle()) continue;
    double curvature = 0.0;
    for (double e : cp.eigenvalues) curvature = std::max(curvature, std::abs(e));
    // Beyond this value the saddle sign holds on every vertex within reach.
    if (std::abs(cp.value) < 0.5 * curvature * std::pow(scale * reach, 2)) low.push_back(&cp);
  }
  std::sort(low.begin(), low.end(), [](const auto* a, const auto* b) {
    return std::abs(a->value) != std::abs(b->value) ? std::abs(a->value) < std::abs(b->value) : a->x < b->x;
  });
  if (d == 2 && sg.flipped.empty() && !low.empty()) sg.flipped.assign(ix.total, 0);

  SaddleResolution out;
  std::unordered_map<std::size_t, const CriticalPoint*> owner;
  std::vector<std::pair<const CriticalPoint*, std::size_t>> snaps;
  for (const auto* cp : low) {
    // Candidate vertices around the saddle, nearest first.
    const auto c0 = ix.coords(cp->nearest_vertex);
    std::vector<std::pair<double, std::size_t>> candidates;
    auto consider = [&](const std::vector<std::int64_t>& offset) {
      detail::Coord nc = c0;
      double dist2 = 0.0;
      for (int i = 0; i < d; ++i) {
        nc[i] += offset[i];
        dist2 += std::pow(periodic_delta(static_cast<double>(nc[i]) * h, cp->x[i]), 2);
      }
      if (std::sqrt(dist2) <= h * std::sqrt(static_cast<double>(d))) candidates.emplace_back(dist2, ix.index(nc));
    };
    consider(std::vector<std::int64_t>(static_cast<std::size_t>(d), 0));
    for (const auto& o : block.offsets) consider(o);
    std::sort(candidates.begin(), candidates.end());

    const std::uint8_t sigma = cp->value >= 0.0 ? 1 : 0;
    bool placed = false;
    for (const auto& [dist2, v] : candidates) {
      if (owner.count(v)) continue;
      const std::uint8_t old = sg.positive[v];
      sg.positive[v] = sigma;
      // In the plane the four squares around the vertex may also be re-split.
      std::array<std::size_t, 4> cells{};
      std::array<std::uint8_t, 4> kept{};
      const unsigned patterns = d == 2 ? 16u : 1u;
      if (d == 2) {
        const auto c = ix.coords(v);
        for (unsigned m = 0; m < 4; ++m) {
          detail::Coord base = c;
          for (int i = 0; i < 2; ++i) base[i] -= (m >> i) & 1u;
          cells[m] = ix.index(base);
          kept[m] = sg.flipped[cells[m]];
        }
      }
      for (unsigned pattern = 0; pattern < patterns && !placed; ++pattern) {
        if (d == 2) {
          for (unsigned m = 0; m < 4; ++m) sg.flipped[cells[m]] = kept[m] ^ ((pattern >> m) & 1u);
        }
        placed = star_realises(sg, ix, *cp, v);
      }
      if (placed) {
        owner.emplace(v, cp);
        snaps.emplace_back(cp, v);
        break;
      }
      sg.positive[v] = old;
      if (d == 2) {
        for (unsigned m = 0; m < 4; ++m) sg.flipped[cells[m]] = kept[m];
      }
    }
    if (!placed) ++out.unresolved;
  }
  out.snapped = snaps.size();
  // Later snaps may have disturbed earlier stars.
  for (const auto& [cp, v] : snaps) {
    if (!star_realises(sg, ix, *cp, v)) ++out.unresolved;
  }
  return out;
}

}  // namespace arw::nodal
