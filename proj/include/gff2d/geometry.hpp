#pragma once
// Lattice geometry for simulations on the square box
//
//   B_{N+1} = { x in Z^2 : |x|_inf <= N+1 }
//
// laid out as a dense row-major grid of side 2N+3. The outermost ring
// |x|_inf = N+1 carries the zero boundary condition; the remaining
// (2N+1)^2 sites are free. Sites beyond the zero ring are never
// materialized: every array in the project is indexed by the offsets
// defined here.
//
// Conventions used throughout:
//   - rings are indexed by the sup norm, ring(x) = max(|x_1|, |x_2|);
//   - the inner boundary of B_k is the ring at distance k;
//   - the outer boundary of B_k is the set of sites at distance k+1 that
//     have a nearest neighbor in B_k (the ring k+1 minus its 4 corners);
//   - nearest-neighbor edges are enumerated in a fixed canonical order
//     (all +x edges row-major, then all +y edges row-major) so that
//     per-edge random draws are reproducible.

#include <array>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace gff2d {

struct Coord {
  int x = 0;
  int y = 0;
  friend bool operator==(Coord a, Coord b) { return a.x == b.x && a.y == b.y; }
};

struct BoxSpec {
  int N = 0;

  explicit BoxSpec(int N_) : N(N_) {
    if (N_ < 0) throw std::invalid_argument("BoxSpec: N must be >= 0");
  }

  int half() const { return N + 1; }            // largest |coordinate|
  int side() const { return 2 * N + 3; }        // sites per row, zero ring included
  int interior_side() const { return 2 * N + 1; }
  std::int64_t total_sites() const { return std::int64_t(side()) * side(); }
  std::int64_t interior_sites() const {
    return std::int64_t(interior_side()) * interior_side();
  }
};

// Row-major bijection between coordinates and dense array offsets.
struct SiteIndex {
  int side;
  int half;

  explicit SiteIndex(const BoxSpec& box) : side(box.side()), half(box.half()) {}

  bool contains(Coord c) const {
    return std::abs(c.x) <= half && std::abs(c.y) <= half;
  }
  std::int32_t offset(Coord c) const {
    if (!contains(c)) throw std::out_of_range("SiteIndex: coordinate outside box");
    return offset_unchecked(c);
  }
  std::int32_t offset_unchecked(Coord c) const {
    return std::int32_t(c.y + half) * side + (c.x + half);
  }
  Coord coord(std::int32_t off) const {
    if (off < 0 || off >= std::int32_t(side) * side)
      throw std::out_of_range("SiteIndex: offset outside box");
    return Coord{int(off % side) - half, int(off / side) - half};
  }
  int ring(Coord c) const { return std::max(std::abs(c.x), std::abs(c.y)); }
  int ring(std::int32_t off) const { return ring(coord(off)); }
  bool on_zero_boundary(Coord c) const { return ring(c) == half; }
  bool is_interior(Coord c) const { return ring(c) <= half - 1; }
  std::int32_t origin() const { return offset_unchecked(Coord{0, 0}); }
};

// A_{k,l} = B_l \ B_k, the annulus of sites with k < |x|_inf <= l.
struct Annulus {
  int k = 0;
  int l = 0;

  Annulus(int k_, int l_) : k(k_), l(l_) {
    if (k_ < 0 || l_ <= k_) throw std::invalid_argument("Annulus: need 0 <= k < l");
  }
  bool contains_ring(int r) const { return r > k && r <= l; }
};

// Nearest-neighbor step order used by every walk and search in the project.
inline constexpr std::array<Coord, 4> kNeighborSteps{
    Coord{1, 0}, Coord{-1, 0}, Coord{0, 1}, Coord{0, -1}};

// The 8 sup-norm neighbors, row-major scan order.
inline constexpr std::array<Coord, 8> kStarSteps{
    Coord{-1, -1}, Coord{0, -1}, Coord{1, -1}, Coord{-1, 0},
    Coord{1, 0},   Coord{-1, 1}, Coord{0, 1},  Coord{1, 1}};

struct Edge {
  std::int32_t a = 0;  // smaller offset
  std::int32_t b = 0;
  friend bool operator==(Edge u, Edge v) { return u.a == v.a && u.b == v.b; }
};

inline std::int64_t edge_count(const BoxSpec& box) {
  return 2 * std::int64_t(box.side()) * (box.side() - 1);
}

// Canonical edge order: all +x edges (row-major in the left endpoint),
// then all +y edges (row-major in the lower-y endpoint). The position of
// an edge in this list is its id; overlays and per-edge random draws are
// keyed by it.
inline std::vector<Edge> enumerate_edges(const BoxSpec& box) {
  const SiteIndex idx(box);
  const int side = idx.side;
  std::vector<Edge> edges;
  edges.reserve(std::size_t(edge_count(box)));
  for (int row = 0; row < side; ++row)
    for (int col = 0; col + 1 < side; ++col) {
      std::int32_t a = std::int32_t(row) * side + col;
      edges.push_back(Edge{a, a + 1});
    }
  for (int row = 0; row + 1 < side; ++row)
    for (int col = 0; col < side; ++col) {
      std::int32_t a = std::int32_t(row) * side + col;
      edges.push_back(Edge{a, a + side});
    }
  return edges;
}

// O(1) inverse of the canonical order. u and v must be nearest neighbors.
inline std::int64_t edge_id(const BoxSpec& box, std::int32_t u, std::int32_t v) {
  const int side = box.side();
  if (u > v) std::swap(u, v);
  const std::int32_t row = u / side, col = u % side;
  if (v == u + 1) return std::int64_t(row) * (side - 1) + col;
  if (v == u + side)
    return std::int64_t(side) * (side - 1) + std::int64_t(row) * side + col;
  throw std::invalid_argument("edge_id: sites are not nearest neighbors");
}

struct BoundarySets {
  std::vector<std::int32_t> inner;  // ring at distance k
  std::vector<std::int32_t> outer;  // ring k+1 minus its corners
};

// Boundary sets of the sub-box B_k inside this box. For k = N+1 the outer
// set is empty: the box carries no sites beyond the zero ring.
inline BoundarySets boundary_sets(const BoxSpec& box, int k) {
  if (k < 0 || k > box.N + 1)
    throw std::out_of_range("boundary_sets: need 0 <= k <= N+1");
  const SiteIndex idx(box);
  BoundarySets out;
  if (k == 0) {
    out.inner.push_back(idx.origin());
  } else {
    out.inner.reserve(std::size_t(8) * k);
    for (int x = -k; x <= k; ++x) {
      out.inner.push_back(idx.offset(Coord{x, -k}));
      out.inner.push_back(idx.offset(Coord{x, k}));
    }
    for (int y = -k + 1; y <= k - 1; ++y) {
      out.inner.push_back(idx.offset(Coord{-k, y}));
      out.inner.push_back(idx.offset(Coord{k, y}));
    }
  }
  const int r = k + 1;
  if (r <= box.half()) {
    out.outer.reserve(std::size_t(8) * r - 4);
    for (int x = -r + 1; x <= r - 1; ++x) {
      out.outer.push_back(idx.offset(Coord{x, -r}));
      out.outer.push_back(idx.offset(Coord{x, r}));
    }
    for (int y = -r + 1; y <= r - 1; ++y) {
      out.outer.push_back(idx.offset(Coord{-r, y}));
      out.outer.push_back(idx.offset(Coord{r, y}));
    }
  }
  return out;
}

// Sup-norm neighbors of c that lie inside the box.
inline std::vector<Coord> star_neighbors(const BoxSpec& box, Coord c) {
  const SiteIndex idx(box);
  if (!idx.contains(c)) throw std::out_of_range("star_neighbors: site outside box");
  std::vector<Coord> out;
  out.reserve(8);
  for (const Coord& s : kStarSteps) {
    Coord n{c.x + s.x, c.y + s.y};
    if (idx.contains(n)) out.push_back(n);
  }
  return out;
}

// The dihedral symmetries of the box, for property tests: index 0..7 maps
// (x,y) through reflections and the diagonal swap.
inline Coord apply_box_symmetry(int which, Coord c) {
  const int x = c.x, y = c.y;
  switch (which & 7) {
    case 0: return Coord{x, y};
    case 1: return Coord{-x, y};
    case 2: return Coord{x, -y};
    case 3: return Coord{-x, -y};
    case 4: return Coord{y, x};
    case 5: return Coord{-y, x};
    case 6: return Coord{y, -x};
    default: return Coord{-y, -x};
  }
}

}  // namespace gff2d
