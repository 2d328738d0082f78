#pragma once
// Independent circuit detector used to cross-check the blocking-path
// implementation. Builds a BFS spanning forest of the open sites inside
// the annulus and accumulates, along every tree path, the angle swept
// around the origin. A non-tree edge whose fundamental cycle picks up a
// net angle of +-2 pi closes a loop around the hole. Any surrounding
// circuit decomposes over fundamental cycles with integer coefficients,
// so a circuit exists iff some fundamental cycle has nonzero winding.

#include <cmath>
#include <cstdint>
#include <vector>

#include "gff2d/geometry.hpp"

namespace gff2d_test {

inline double angle_step(gff2d::Coord u, gff2d::Coord v) {
  const double cross = double(u.x) * v.y - double(u.y) * v.x;
  const double dot = double(u.x) * v.x + double(u.y) * v.y;
  return std::atan2(cross, dot);
}

inline bool circuit_by_winding(const gff2d::BoxSpec& box, const double* f,
                               double h, int K, int L) {
  const gff2d::SiteIndex idx(box);
  const int side = box.side();
  const std::size_t n = std::size_t(box.total_sites());
  std::vector<char> open(n, 0);
  for (std::int32_t off = 0; off < std::int32_t(n); ++off) {
    const int r = idx.ring(off);
    if (r > K && r <= L && f[off] >= h) open[std::size_t(off)] = 1;
  }
  std::vector<std::int32_t> parent(n, -2);  // -2 unvisited, -1 root
  std::vector<double> theta(n, 0.0);
  std::vector<std::int32_t> fifo;
  auto neighbors = [&](std::int32_t u, auto&& fn) {
    const int col = u % side, row = u / side;
    if (col + 1 < side) fn(u + 1);
    if (col > 0) fn(u - 1);
    if (row + 1 < side) fn(u + side);
    if (row > 0) fn(u - side);
  };
  for (std::int32_t s = 0; s < std::int32_t(n); ++s) {
    if (!open[std::size_t(s)] || parent[std::size_t(s)] != -2) continue;
    parent[std::size_t(s)] = -1;
    theta[std::size_t(s)] = 0.0;
    fifo.clear();
    fifo.push_back(s);
    for (std::size_t head = 0; head < fifo.size(); ++head) {
      const std::int32_t u = fifo[head];
      neighbors(u, [&](std::int32_t v) {
        if (!open[std::size_t(v)] || parent[std::size_t(v)] != -2) return;
        parent[std::size_t(v)] = u;
        theta[std::size_t(v)] =
            theta[std::size_t(u)] + angle_step(idx.coord(u), idx.coord(v));
        fifo.push_back(v);
      });
    }
  }
  // Scan every open edge once; tree edges contribute zero by construction.
  for (std::int32_t u = 0; u < std::int32_t(n); ++u) {
    if (!open[std::size_t(u)]) continue;
    bool found = false;
    neighbors(u, [&](std::int32_t v) {
      if (found || v < u || !open[std::size_t(v)]) return;
      if (parent[std::size_t(u)] == v || parent[std::size_t(v)] == u) return;
      const double w = theta[std::size_t(u)] +
                       angle_step(idx.coord(u), idx.coord(v)) -
                       theta[std::size_t(v)];
      if (std::abs(w) > 3.141592653589793) found = true;
    });
    if (found) return true;
  }
  return false;
}

}  // namespace gff2d_test
