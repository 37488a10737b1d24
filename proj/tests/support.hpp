#pragma once

// Generators and independent oracles shared by the unit and acceptance tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "arw/field.hpp"
#include "arw/lattice.hpp"
#include "arw/nodal.hpp"

namespace arw::testing {

// Small hand-rolled generator for property tests; fixed seeds keep runs reproducible.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  std::uint64_t bits() { return engine_(); }

  std::vector<double> point(int d) {
    std::vector<double> x(static_cast<std::size_t>(d));
    for (auto& v : x) v = real(0.0, 1.0);
    return x;
  }

  // A random signed permutation of the coordinates.
  std::vector<std::int64_t> signed_permutation(int d, lattice::IntVec v) {
    std::vector<int> perm(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), engine_);
    lattice::IntVec out(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) out[i] = v[perm[i]] * (integer(0, 1) ? 1 : -1);
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

// Count of integer points in [-R, R]^d with squared norm n.
inline std::int64_t box_count(int d, std::int64_t n) {
  const auto R = static_cast<std::int64_t>(std::floor(std::sqrt(static_cast<double>(n)) + 1e-9));
  std::vector<std::int64_t> x(static_cast<std::size_t>(d), -R);
  std::int64_t count = 0;
  while (true) {
    std::int64_t s = 0;
    for (auto v : x) s += v * v;
    count += s == n ? 1 : 0;
    int i = 0;
    while (i < d && ++x[i] > R) x[i++] = -R;
    if (i == d) return count;
  }
}

// Sample equal to sum of amp_cos cos(2 pi lambda.x) + amp_sin sin(2 pi lambda.x)
// over the listed half-shell frequencies, with the normalization undone.
struct Mode {
  lattice::IntVec lambda;
  double amp_cos = 0.0;
  double amp_sin = 0.0;
};

inline field::WaveSample modes(int d, std::int64_t n, const std::vector<Mode>& list) {
  const auto shell = field::make_shell(d, n);
  std::vector<double> a(shell->half_points.size(), 0.0), b(shell->half_points.size(), 0.0);
  const double scale = 1.0 / std::sqrt(2.0 / static_cast<double>(shell->dim_HL));
  for (const auto& m : list) {
    bool found = false;
    for (std::size_t p = 0; p < shell->half_points.size(); ++p) {
      if (shell->half_points[p] == m.lambda) {
        a[p] += m.amp_cos * scale;
        b[p] += m.amp_sin * scale;
        found = true;
      }
    }
    if (!found) throw std::runtime_error("frequency is not in the half shell");
  }
  return field::make_sample(shell, a, b);
}

struct FloodCounts {
  std::size_t domains = 0;
  std::size_t components = 0;
};

// Breadth-first flood fill over the planar triangulation: each square is cut
// along (0,0)-(1,1), or along (1,0)-(0,1) when flipped. Domains are same-sign
// vertex clusters; components are clusters of triangles with both signs,
// joined across shared edges whose endpoints differ in sign.
inline FloodCounts flood_fill_2d(const nodal::SignGrid& sg) {
  const int M = sg.M;
  auto vid = [M](int i, int j) { return static_cast<std::size_t>(((i % M + M) % M) * M + (j % M + M) % M); };
  auto flipped = [&](int i, int j) { return !sg.flipped.empty() && sg.flipped[vid(i, j)] != 0; };
  auto sign = [&](int i, int j) { return sg.positive[vid(i, j)]; };

  FloodCounts out;
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(M) * M, 0);
  for (int i0 = 0; i0 < M; ++i0) {
    for (int j0 = 0; j0 < M; ++j0) {
      if (seen[vid(i0, j0)]) continue;
      ++out.domains;
      std::deque<std::pair<int, int>> queue{{i0, j0}};
      seen[vid(i0, j0)] = 1;
      while (!queue.empty()) {
        const auto [i, j] = queue.front();
        queue.pop_front();
        std::vector<std::pair<int, int>> nbrs{{i + 1, j}, {i - 1, j}, {i, j + 1}, {i, j - 1}};
        // Diagonals of the four squares touching (i, j).
        if (!flipped(i, j)) nbrs.push_back({i + 1, j + 1});
        if (!flipped(i - 1, j - 1)) nbrs.push_back({i - 1, j - 1});
        if (flipped(i - 1, j)) nbrs.push_back({i - 1, j + 1});
        if (flipped(i, j - 1)) nbrs.push_back({i + 1, j - 1});
        for (const auto& [a, b] : nbrs) {
          if (sign(a, b) != sign(i, j) || seen[vid(a, b)]) continue;
          seen[vid(a, b)] = 1;
          queue.push_back({a, b});
        }
      }
    }
  }

  // Triangles: cell (i, j) holds triangles 0 and 1; corners as (di, dj).
  struct Tri {
    int c[3][2];
  };
  auto triangles = [&](int i, int j) {
    if (flipped(i, j)) {
      return std::array<Tri, 2>{Tri{{{0, 0}, {1, 0}, {0, 1}}}, Tri{{{1, 0}, {0, 1}, {1, 1}}}};
    }
    return std::array<Tri, 2>{Tri{{{0, 0}, {1, 0}, {1, 1}}}, Tri{{{0, 0}, {0, 1}, {1, 1}}}};
  };
  auto tri_id = [&](int i, int j, int t) { return vid(i, j) * 2 + static_cast<std::size_t>(t); };
  auto mixed = [&](int i, int j, const Tri& tr) {
    int pos = 0;
    for (const auto& c : tr.c) pos += sign(i + c[0], j + c[1]);
    return pos == 1 || pos == 2;
  };
  // Edge key of two absolute lattice points, wrapped.
  auto edge_key = [&](int a0, int a1, int b0, int b1) {
    auto p = vid(a0, a1), q = vid(b0, b1);
    if (p > q) std::swap(p, q);
    // Distinguish the two diagonals of a square by their direction as well.
    const int di = ((b0 - a0) * (b1 - a1) > 0) ? 1 : 0;
    return (static_cast<std::uint64_t>(p) * (static_cast<std::uint64_t>(M) * M) + q) * 2 + static_cast<std::uint64_t>(di);
  };
  std::map<std::uint64_t, std::vector<std::size_t>> edge_tris;
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < M; ++j) {
      const auto tris = triangles(i, j);
      for (int t = 0; t < 2; ++t) {
        if (!mixed(i, j, tris[t])) continue;
        for (int e = 0; e < 3; ++e) {
          const auto& p = tris[t].c[e];
          const auto& q = tris[t].c[(e + 1) % 3];
          if (sign(i + p[0], j + p[1]) == sign(i + q[0], j + q[1])) continue;
          edge_tris[edge_key(i + p[0], j + p[1], i + q[0], j + q[1])].push_back(tri_id(i, j, t));
        }
      }
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> adj;
  for (const auto& [key, list] : edge_tris) {
    for (auto t : list) {
      adj[t];
      for (auto u : list) {
        if (u != t) adj[t].push_back(u);
      }
    }
  }
  std::map<std::size_t, bool> visited;
  for (const auto& [t, list] : adj) {
    if (visited[t]) continue;
    ++out.components;
    std::deque<std::size_t> queue{t};
    visited[t] = true;
    while (!queue.empty()) {
      const auto u = queue.front();
      queue.pop_front();
      for (auto v : adj[u]) {
        if (!visited[v]) {
          visited[v] = true;
          queue.push_back(v);
        }
      }
    }
  }
  return out;
}

}  // namespace arw::testing
