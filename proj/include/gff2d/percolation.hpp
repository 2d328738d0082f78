#pragma once
// Connectivity events in the excursion set {phi >= h}.
//
// Two notions of adjacency are supported on the nearest-neighbor lattice:
//   - discrete: two open sites are linked iff they are nearest neighbors;
//   - metric:   additionally the connecting edge must be open in the
//               bridge overlay (see overlay.hpp).
// A site is open when its value is >= h; zero-ring sites carry the value
// 0 and so are open exactly when h <= 0.
//
// Circuit detection works through the blocking dual: an open
// nearest-neighbor circuit surrounds the hole of an annulus iff no
// *-connected path of closed sites (value < h) crosses the annulus from
// its innermost ring to its outermost ring. The tests check this
// equivalence against an independent winding-number search.
//
// Percolator owns the scratch buffers (visited stamps, queue, distance
// array), so one instance per worker can run millions of events without
// allocating.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "gff2d/geometry.hpp"
#include "gff2d/overlay.hpp"

namespace gff2d {

enum class PercMode { discrete, metric };

// Cluster labels over the full grid: -1 for closed sites, otherwise a
// compact id in [0, clusters).
struct ClusterLabels {
  std::vector<std::int32_t> label;
  std::int32_t clusters = 0;
};

class Percolator {
 public:
  explicit Percolator(const BoxSpec& box)
      : box_(box), side_(box.side()), half_(box.half()) {
    const std::size_t n = std::size_t(box.total_sites());
    stamp_.assign(n, 0);
    dist_.assign(n, 0);
    fifo_.reserve(n);
  }

  const BoxSpec& box() const { return box_; }

  // {0 <-> outer boundary of B_{floor(r N)}}, r in (0, 1/2].
  bool one_arm_bulk(const double* f, double h, double r, PercMode mode,
                    const OverlayView* ov = nullptr) {
    if (!(r > 0.0 && r <= 0.5))
      throw std::invalid_argument("one_arm_bulk: need 0 < r <= 1/2");
    // nudge before flooring so dyadic fractions never land a hair under
    const int k = int(std::floor(r * double(box_.N) + 1e-9));
    if (k < 1) throw std::invalid_argument("one_arm_bulk: floor(r N) < 1");
    return connects_origin_to_shell(f, h, k, mode, ov);
  }

  // {0 <-> inner boundary of B_N}, the ring at distance N.
  bool one_arm_boundary(const double* f, double h, PercMode mode,
                        const OverlayView* ov = nullptr) {
    const int target = box_.N;
    if (target < 1)
      throw std::invalid_argument("one_arm_boundary: box too small");
    return reach_from_origin(f, h, mode, ov, [&](std::int32_t off) {
      return ring_of(off) == target;
    });
  }

  // {0 <-> outer boundary of B_N}, i.e. the zero ring minus its corners,
  // through the bridge overlay. Only defined in metric mode: reaching a
  // pinned vertex is a statement about the bridges next to it.
  bool one_arm_zero_boundary(const double* f, double h,
                             const OverlayView& ov) {
    const int target = half_;
    return reach_from_origin(f, h, PercMode::metric, &ov,
                             [&](std::int32_t off) {
                               return ring_of(off) == target &&
                                      !is_corner(off, target);
                             });
  }

  // {0 <-> outer boundary of B_k}, 1 <= k <= N.
  bool connects_origin_to_shell(const double* f, double h, int k, PercMode mode,
                                const OverlayView* ov = nullptr) {
    check_radii(0, k);
    return reach_from_origin(f, h, mode, ov, shell_target(k));
  }

  // {B_a <-> outer boundary of B_b}, a < b <= N.
  bool connects_box_to_shell(const double* f, double h, int a, int b,
                             PercMode mode, const OverlayView* ov = nullptr) {
    check_radii(a, b);
    seed_open_box(f, h, a);
    return run_reach(f, h, mode, ov, shell_target(b)) >= 0;
  }

  // Graph distance in the open subgraph from the open sites of B_a to the
  // outer boundary of B_b, or -1 when no open path exists.
  std::int64_t chemical_distance(const double* f, double h, int a, int b,
                                 PercMode mode,
                                 const OverlayView* ov = nullptr) {
    check_radii(a, b);
    seed_open_box(f, h, a);
    return run_reach(f, h, mode, ov, shell_target(b));
  }

  // Open nearest-neighbor circuit inside the annulus of rings K+1..L that
  // surrounds B_K. Site openness only; 1 <= K < L <= N.
  bool circuit_in_annulus(const double* f, double h, int K, int L) {
    if (K < 1 || L <= K || L > box_.N)
      throw std::invalid_argument("circuit_in_annulus: need 1 <= K < L <= N");
    ++gen_;
    fifo_.clear();
    for (std::int32_t off : ring_sites(K + 1))
      if (f[off] < h) {
        stamp_[std::size_t(off)] = gen_;
        fifo_.push_back(off);
      }
    for (std::size_t head = 0; head < fifo_.size(); ++head) {
      const std::int32_t u = fifo_[head];
      if (ring_of(u) == L) return false;  // blocking *-path crossed
      const int col = u % side_, row = u / side_;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nc = col + dx, nr = row + dy;
          if (nc < 0 || nc >= side_ || nr < 0 || nr >= side_) continue;
          const std::int32_t v = std::int32_t(nr) * side_ + nc;
          if (stamp_[std::size_t(v)] == gen_) continue;
          const int rv = ring_of(v);
          if (rv <= K || rv > L) continue;
          if (!(f[v] < h)) continue;
          stamp_[std::size_t(v)] = gen_;
          fifo_.push_back(v);
        }
    }
    return true;
  }

  ClusterLabels label_clusters(const double* f, double h, PercMode mode,
                               const OverlayView* ov = nullptr) {
    require_overlay(mode, ov);
    const std::size_t n = std::size_t(box_.total_sites());
    std::vector<std::int32_t> parent(n);
    for (std::size_t i = 0; i < n; ++i) parent[i] = std::int32_t(i);
    auto find = [&](std::int32_t x) {
      while (parent[std::size_t(x)] != x) {
        parent[std::size_t(x)] = parent[std::size_t(parent[std::size_t(x)])];
        x = parent[std::size_t(x)];
      }
      return x;
    };
    auto unite = [&](std::int32_t x, std::int32_t y) {
      x = find(x);
      y = find(y);
      if (x == y) return;
      if (y < x) std::swap(x, y);
      parent[std::size_t(y)] = x;
    };
    for (std::int32_t off = 0; off < std::int32_t(n); ++off) {
      if (!(f[off] >= h)) continue;
      const int col = off % side_, row = off / side_;
      if (col + 1 < side_ && f[off + 1] >= h &&
          (mode == PercMode::discrete || ov->edge_open(off, off + 1)))
        unite(off, off + 1);
      if (row + 1 < side_ && f[off + side_] >= h &&
          (mode == PercMode::discrete || ov->edge_open(off, off + side_)))
        unite(off, off + side_);
    }
    ClusterLabels out;
    out.label.assign(n, -1);
    std::vector<std::int32_t> compact(n, -1);
    for (std::int32_t off = 0; off < std::int32_t(n); ++off) {
      if (!(f[off] >= h)) continue;
      const std::int32_t root = find(off);
      if (compact[std::size_t(root)] < 0)
        compact[std::size_t(root)] = out.clusters++;
      out.label[std::size_t(off)] = compact[std::size_t(root)];
    }
    return out;
  }

 private:
  BoxSpec box_;
  int side_, half_;
  std::vector<std::uint32_t> stamp_;
  std::vector<std::int32_t> dist_;
  std::vector<std::int32_t> fifo_;
  std::uint32_t gen_ = 0;

  int ring_of(std::int32_t off) const {
    const int x = off % side_ - half_, y = off / side_ - half_;
    return std::max(std::abs(x), std::abs(y));
  }
  bool is_corner(std::int32_t off, int r) const {
    const int x = off % side_ - half_, y = off / side_ - half_;
    return std::abs(x) == r && std::abs(y) == r;
  }
  void check_radii(int a, int b) const {
    if (a < 0 || b <= a || b > box_.N)
      throw std::invalid_argument("Percolator: need 0 <= a < b <= N");
  }
  static void require_overlay(PercMode mode, const OverlayView* ov) {
    if (mode == PercMode::metric && ov == nullptr)
      throw std::invalid_argument("Percolator: metric mode needs an overlay");
  }

  std::vector<std::int32_t> ring_sites(int r) const {
    std::vector<std::int32_t> out;
    out.reserve(std::size_t(8) * r);
    const SiteIndex idx(box_);
    for (int x = -r; x <= r; ++x) {
      out.push_back(idx.offset(Coord{x, -r}));
      out.push_back(idx.offset(Coord{x, r}));
    }
    for (int y = -r + 1; y <= r - 1; ++y) {
      out.push_back(idx.offset(Coord{-r, y}));
      out.push_back(idx.offset(Coord{r, y}));
    }
    return out;
  }

  struct ShellTarget {
    int side, half, r;
    bool operator()(std::int32_t off) const {
      const int ax = std::abs(off % side - half), ay = std::abs(off / side - half);
      return std::max(ax, ay) == r && !(ax == r && ay == r);
    }
  };
  ShellTarget shell_target(int b) const { return ShellTarget{side_, half_, b + 1}; }

  // Seeds the queue with the open sites of B_a.
  void seed_open_box(const double* f, double h, int a) {
    ++gen_;
    fifo_.clear();
    const SiteIndex idx(box_);
    for (int y = -a; y <= a; ++y)
      for (int x = -a; x <= a; ++x) {
        const std::int32_t off = idx.offset_unchecked(Coord{x, y});
        if (f[off] >= h) {
          stamp_[std::size_t(off)] = gen_;
          dist_[std::size_t(off)] = 0;
          fifo_.push_back(off);
        }
      }
  }

  template <class Target>
  bool reach_from_origin(const double* f, double h, PercMode mode,
                         const OverlayView* ov, Target target) {
    require_overlay(mode, ov);
    ++gen_;
    fifo_.clear();
    const std::int32_t o = SiteIndex(box_).origin();
    if (f[o] >= h) {
      stamp_[std::size_t(o)] = gen_;
      dist_[std::size_t(o)] = 0;
      fifo_.push_back(o);
    }
    return run_reach(f, h, mode, ov, target) >= 0;
  }

  // BFS over the open subgraph from the already seeded queue. Returns the
  // distance to the first target found, or -1 if none is reachable. The
  // first target pushed has minimal distance because pushes happen in
  // nondecreasing distance order.
  template <class Target>
  std::int64_t run_reach(const double* f, double h, PercMode mode,
                         const OverlayView* ov, Target target) {
    require_overlay(mode, ov);
    for (const std::int32_t s : fifo_)
      if (target(s)) return 0;
    const bool metric = mode == PercMode::metric;
    for (std::size_t head = 0; head < fifo_.size(); ++head) {
      const std::int32_t u = fifo_[head];
      const std::int32_t du = dist_[std::size_t(u)];
      const int col = u % side_, row = u / side_;
      const std::int32_t steps[4] = {1, -1, side_, -side_};
      const bool ok[4] = {col + 1 < side_, col > 0, row + 1 < side_, row > 0};
      for (int d = 0; d < 4; ++d) {
        if (!ok[d]) continue;
        const std::int32_t v = u + steps[d];
        if (stamp_[std::size_t(v)] == gen_) continue;
        if (!(f[v] >= h)) continue;
        if (metric && !ov->edge_open(u, v)) continue;
        stamp_[std::size_t(v)] = gen_;
        dist_[std::size_t(v)] = du + 1;
        if (target(v)) return du + 1;
        fifo_.push_back(v);
      }
    }
    return -1;
  }
};

}  // namespace gff2d
