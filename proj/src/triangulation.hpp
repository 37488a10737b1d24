#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "arw/errors.hpp"
#include "arw/nodal.hpp"

namespace arw::detail {

constexpr int kMaxDim = 6;

using Coord = std::array<std::int64_t, kMaxDim>;
using Winding = std::array<std::int16_t, kMaxDim>;

struct Indexer {
  int d;
  std::int64_t M;
  std::size_t total;
  std::array<std::size_t, kMaxDim> stride{};

  Indexer(int d_, int M_) : d(d_), M(M_), total(1) {
    if (d < 1 || d > kMaxDim) throw Error("grid dimension must be in [1, 6]");
    for (int i = d - 1; i >= 0; --i) {
      stride[i] = total;
      total *= static_cast<std::size_t>(M);
    }
  }

  // Index of c + offset (components in {0, 1}) given idx = index(c).
  std::size_t step(std::size_t idx, const Coord& c, unsigned mask, Winding& w) const {
    for (int i = 0; i < d; ++i) {
      w[i] = 0;
      if (mask & (1u << i)) {
        if (c[i] + 1 == M) {
          idx -= static_cast<std::size_t>(M - 1) * stride[i];
          w[i] = 1;
        } else {
          idx += stride[i];
        }
      }
    }
    return idx;
  }

  // Advance c to the coordinates of the next index.
  void advance(Coord& c) const {
    for (int i = d - 1; i >= 0; --i) {
      if (++c[i] < M) return;
      c[i] = 0;
    }
  }

  Coord coords(std::size_t idx) const {
    Coord c{};
    for (int i = d - 1; i >= 0; --i) {
      c[i] = static_cast<std::int64_t>(idx % static_cast<std::size_t>(M));
      idx /= static_cast<std::size_t>(M);
    }
    return c;
  }

  // Any integer coordinates, reduced mod M.
  std::size_t index(const Coord& c) const {
    std::size_t idx = 0;
    for (int i = 0; i < d; ++i) {
      const std::int64_t r = ((c[i] % M) + M) % M;
      idx = idx * static_cast<std::size_t>(M) + static_cast<std::size_t>(r);
    }
    return idx;
  }

  // c + offset (components in {0, 1}), wrapped; `w` receives the wrap count per axis.
  Coord shift(const Coord& c, unsigned mask, Winding& w) const {
    Coord out = c;
    for (int i = 0; i < d; ++i) {
      w[i] = 0;
      if (mask & (1u << i)) {
        if (++out[i] == M) {
          out[i] = 0;
          w[i] = 1;
        }
      }
    }
    return out;
  }
};

inline unsigned edge_directions(int d) { return (1u << d) - 1u; }

inline bool is_flipped(const nodal::SignGrid& sg, std::size_t cell) {
  return !sg.flipped.empty() && sg.flipped[cell] != 0;
}

// Simplices of one cube as lists of corner masks. The Kuhn subdivision uses
// the chains 0 = m_0 < m_1 < ... < m_d; a flipped square is split along the
// anti-diagonal instead.
inline const std::vector<std::vector<unsigned>>& cell_simplices(int d, bool flipped) {
  static const std::vector<std::vector<unsigned>> anti{{0u, 1u, 2u}, {1u, 2u, 3u}};
  static std::array<std::vector<std::vector<unsigned>>, kMaxDim + 1> kuhn;
  static const bool ready = [] {
    for (int dim = 1; dim <= kMaxDim; ++dim) {
      std::vector<int> perm(static_cast<std::size_t>(dim));
      std::iota(perm.begin(), perm.end(), 0);
      do {
        std::vector<unsigned> chain{0u};
        for (int k = 0; k < dim; ++k) chain.push_back(chain.back() | (1u << perm[k]));
        kuhn[dim].push_back(chain);
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return true;
  }();
  (void)ready;
  return flipped ? anti : kuhn[d];
}

// Triangulation edge between two corners of the cell at `base`, as
// (node id, corner mask carrying the node). Edges along a chain are owned by
// their lower corner with direction mask (upper minus lower); a cell's
// diagonal slot, direction 2^d - 1, holds whichever diagonal the cell uses.
struct EdgeRef {
  unsigned owner_corner;
  unsigned dir;
};

inline EdgeRef edge_ref(unsigned a, unsigned b, int d) {
  if (a > b) std::swap(a, b);
  if ((a & b) == a) return {a, b & ~a};
  return {0u, edge_directions(d)};
}

// Endpoints of the edge node (vertex, dir) as corner masks of the cell at vertex.
inline std::pair<unsigned, unsigned> edge_corners(const nodal::SignGrid& sg, std::size_t vertex, unsigned dir) {
  if (sg.d == 2 && dir == 3u && is_flipped(sg, vertex)) return {1u, 2u};
  return {0u, dir};
}

}  // namespace arw::detail
