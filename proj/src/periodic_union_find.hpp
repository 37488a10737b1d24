#pragma once

#include <cstdint>
#include <vector>

namespace arw::detail {

// Union-find on a periodic grid that tracks, for every node, the integer
// winding vector taking its canonical cell into the frame of its root. A cycle
// with nonzero total winding marks the set as wrapping around the torus.
//
// Roots are always the smallest node index of their set, so labels do not
// depend on the order in which unions are issued.
class PeriodicUnionFind {
 public:
  PeriodicUnionFind(std::size_t nodes, int d)
      : d_(d), parent_(nodes), winding_(nodes * static_cast<std::size_t>(d), 0), wraps_(nodes, 0) {
    for (std::size_t i = 0; i < nodes; ++i) parent_[i] = static_cast<std::uint32_t>(i);
  }

  std::size_t size() const { return parent_.size(); }

  // Root of x; `pot` receives the winding of x in its root's frame.
  std::uint32_t find(std::uint32_t x, std::int16_t* pot) {
    // First pass: locate the root and accumulate the winding.
    for (int i = 0; i < d_; ++i) pot[i] = 0;
    std::uint32_t root = x;
    while (parent_[root] != root) {
      for (int i = 0; i < d_; ++i) pot[i] = static_cast<std::int16_t>(pot[i] + winding_[root * d_ + i]);
      root = parent_[root];
    }
    // Second pass: compress, rewriting each node's winding relative to root.
    std::int16_t remaining[8];
    for (int i = 0; i < d_; ++i) remaining[i] = pot[i];
    std::uint32_t node = x;
    while (parent_[node] != root && node != root) {
      const std::uint32_t next = parent_[node];
      std::int16_t own[8];
      for (int i = 0; i < d_; ++i) own[i] = winding_[node * d_ + i];
      for (int i = 0; i < d_; ++i) winding_[node * d_ + i] = remaining[i];
      parent_[node] = root;
      for (int i = 0; i < d_; ++i) remaining[i] = static_cast<std::int16_t>(remaining[i] - own[i]);
      node = next;
    }
    return root;
  }

  std::uint32_t find(std::uint32_t x) {
    std::int16_t pot[8];
    return find(x, pot);
  }

  // Join a and b, asserting that in a common frame winding(b) - winding(a) = delta.
  void unite(std::uint32_t a, std::uint32_t b, const std::int16_t* delta) {
    std::int16_t pa[8], pb[8];
    const std::uint32_t ra = find(a, pa);
    const std::uint32_t rb = find(b, pb);
    if (ra == rb) {
      for (int i = 0; i < d_; ++i) {
        if (pb[i] - pa[i] != delta[i]) {
          wraps_[ra] = 1;
          break;
        }
      }
      return;
    }
    if (ra < rb) {
      for (int i = 0; i < d_; ++i) winding_[rb * d_ + i] = static_cast<std::int16_t>(pa[i] + delta[i] - pb[i]);
      parent_[rb] = ra;
      wraps_[ra] = static_cast<std::uint8_t>(wraps_[ra] | wraps_[rb]);
    } else {
      for (int i = 0; i < d_; ++i) winding_[ra * d_ + i] = static_cast<std::int16_t>(pb[i] - delta[i] - pa[i]);
      parent_[ra] = rb;
      wraps_[rb] = static_cast<std::uint8_t>(wraps_[rb] | wraps_[ra]);
    }
  }

  bool wraps(std::uint32_t root) const { return wraps_[root] != 0; }

 private:
  int d_;
  std::vector<std::uint32_t> parent_;
  std::vector<std::int16_t> winding_;
  std::vector<std::uint8_t> wraps_;
};

}  // namespace arw::detail
