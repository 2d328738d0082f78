#pragma once
// Edge overlay for the bridge layer on top of a sampled field.
//
// Conditionally on the vertex values, each nearest-neighbor edge whose
// endpoints both sit at or above level h is open independently with
//
//   p = 1 - exp(-2 (a-h)(b-h) / kappa),   a, b = endpoint values,
//
// the probability that the connecting bridge stays above h. kappa
// defaults to 2, which is the constant matching the visit-count Green
// normalization of the field (a unit-rate bridge over a length-2
// segment); the closed-form connection check in the acceptance suite is
// the authority for that pairing. Edges with an endpoint below h, or
// exactly at h, are closed. Edges joining two zero-ring vertices carry
// no bridge at all (the segment is identically 0) and are open exactly
// when h <= 0.
//
// Per-edge uniforms are the order-independent draws of the replica's
// edge stream, keyed by the canonical edge id, so a materialized overlay
// and a lazy edge-by-edge evaluation see identical randomness.

#include <cmath>
#include <cstdint>
#include <vector>

#include "gff2d/geometry.hpp"
#include "gff2d/rng.hpp"

namespace gff2d {

// Bridge duration for the edge dip probability 1 - exp(-2(a-h)(b-h)/k).
// The sampled field carries the visit-count Green function 4 L^{-1}; it
// is the unit-Laplacian cable field (duration-1 bridges, k = 1) scaled
// by 2, and the dip exponent's normalizer grows with the square of that
// scale. The closed-form boundary-connection probability
// (exact_connection_oracle) confirms 4 and rejects 2 decisively.
inline constexpr double kDefaultKappa = 4.0;

// Zero-allocation view used inside hot loops.
struct OverlayView {
  const double* field = nullptr;  // full-grid values, zeros on the ring
  double h = 0.0;
  double kappa = kDefaultKappa;
  RngStream edge_rng;  // only uniform_at() is used
  int side = 0;
  int half = 0;

  OverlayView(const BoxSpec& box, const double* field_vals, double level,
              double kappa_, const RngStream& edge_stream)
      : field(field_vals),
        h(level),
        kappa(kappa_),
        edge_rng(edge_stream),
        side(box.side()),
        half(box.half()) {}

  bool on_ring(std::int32_t off) const {
    const int x = off % side - half, y = off / side - half;
    return std::max(std::abs(x), std::abs(y)) == half;
  }

  // a and b must be nearest neighbors inside the box.
  bool edge_open(std::int32_t a, std::int32_t b) const {
    const double va = field[a], vb = field[b];
    if (!(va >= h) || !(vb >= h)) return false;
    if (on_ring(a) && on_ring(b)) return h <= 0.0;  // pinned segment
    const std::int32_t lo = a < b ? a : b, hi = a < b ? b : a;
    const std::int64_t id =
        hi == lo + 1
            ? std::int64_t(lo / side) * (side - 1) + lo % side
            : std::int64_t(side) * (side - 1) + std::int64_t(lo);
    const double p = -std::expm1(-2.0 * (va - h) * (vb - h) / kappa);
    return edge_rng.uniform_at(std::uint64_t(id)) < p;
  }
};

// Materialized overlay over the canonical edge order.
struct EdgeOverlay {
  BoxSpec box;
  double h = 0.0;
  double kappa = kDefaultKappa;
  std::vector<std::uint8_t> open;  // indexed by canonical edge id

  explicit EdgeOverlay(const BoxSpec& b) : box(b) {}
};

inline EdgeOverlay build_overlay(const BoxSpec& box,
                                 const std::vector<double>& field, double h,
                                 double kappa, const RngStream& edge_stream) {
  if (!(kappa > 0.0)) throw std::invalid_argument("build_overlay: kappa <= 0");
  if (field.size() != std::size_t(box.total_sites()))
    throw std::invalid_argument("build_overlay: field size mismatch");
  EdgeOverlay ov(box);
  ov.h = h;
  ov.kappa = kappa;
  ov.open.assign(std::size_t(edge_count(box)), 0);
  const OverlayView view(box, field.data(), h, kappa, edge_stream);
  const auto edges = enumerate_edges(box);
  for (std::size_t i = 0; i < edges.size(); ++i)
    ov.open[i] = view.edge_open(edges[i].a, edges[i].b) ? 1 : 0;
  return ov;
}

}  // namespace gff2d
