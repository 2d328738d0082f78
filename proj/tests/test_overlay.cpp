#include "gff2d/overlay.hpp"

#include <cmath>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "gff2d/geometry.hpp"
#include "gff2d/rng.hpp"

using namespace gff2d;

namespace {

std::vector<double> gaussian_site_values(const BoxSpec& box, RngStream& rng) {
  const SiteIndex idx(box);
  std::vector<double> f(std::size_t(box.total_sites()), 0.0);
  for (std::int32_t off = 0; off < std::int32_t(f.size()); ++off)
    if (idx.ring(off) < box.half()) f[std::size_t(off)] = rng.normal();
  return f;
}

}  // namespace

TEST_CASE("materialized overlay matches the lazy edge view") {
  const BoxSpec box(6);
  auto rng = RngStream::make(77, 1);
  const auto f = gaussian_site_values(box, rng);
  const auto edge_stream = purpose_stream(rng, StreamPurpose::edges);
  for (const double h : {-0.8, 0.0, 0.4}) {
    const auto ov = build_overlay(box, f, h, kDefaultKappa, edge_stream);
    REQUIRE(ov.open.size() == std::size_t(edge_count(box)));
    const OverlayView view(box, f.data(), h, kDefaultKappa, edge_stream);
    const auto edges = enumerate_edges(box);
    for (std::size_t i = 0; i < edges.size(); ++i)
      REQUIRE(bool(ov.open[i]) == view.edge_open(edges[i].a, edges[i].b));
  }
}

TEST_CASE("overlay is a deterministic function of field, level and stream") {
  const BoxSpec box(5);
  auto rng = RngStream::make(3, 9);
  const auto f = gaussian_site_values(box, rng);
  const auto s1 = purpose_stream(rng, StreamPurpose::edges);
  const auto a = build_overlay(box, f, 0.0, kDefaultKappa, s1);
  const auto b = build_overlay(box, f, 0.0, kDefaultKappa, s1);
  REQUIRE(a.open == b.open);

  auto rng2 = RngStream::make(3, 17);
  const auto s2 = purpose_stream(rng2, StreamPurpose::edges);
  const auto c = build_overlay(box, f, 0.0, kDefaultKappa, s2);
  REQUIRE(a.open != c.open);
}

TEST_CASE("edges with an endpoint below or at the level are closed") {
  const BoxSpec box(2);
  const SiteIndex idx(box);
  std::vector<double> f(std::size_t(box.total_sites()), 0.0);
  const std::int32_t o = idx.origin();
  const std::int32_t e = idx.offset(Coord{1, 0});
  const auto stream = RngStream::make(11, 8);
  OverlayView view(box, f.data(), 0.5, kDefaultKappa, stream);

  f[std::size_t(o)] = 0.2;  // below the level
  f[std::size_t(e)] = 3.0;
  REQUIRE_FALSE(view.edge_open(o, e));

  f[std::size_t(o)] = 0.5;  // exactly at the level: bridge dips below a.s.
  REQUIRE_FALSE(view.edge_open(o, e));
  REQUIRE_FALSE(view.edge_open(e, o));
}

TEST_CASE("edges between two pinned vertices are open exactly when h <= 0") {
  const BoxSpec box(1);
  const SiteIndex idx(box);
  std::vector<double> f(std::size_t(box.total_sites()), 0.0);
  const std::int32_t a = idx.offset(Coord{2, 0});
  const std::int32_t b = idx.offset(Coord{2, 1});
  REQUIRE(idx.ring(a) == box.half());
  REQUIRE(idx.ring(b) == box.half());
  for (int trial = 0; trial < 32; ++trial) {
    const auto stream = RngStream::make(500 + trial, 8);
    const OverlayView below(box, f.data(), -0.3, kDefaultKappa, stream);
    const OverlayView at(box, f.data(), 0.0, kDefaultKappa, stream);
    const OverlayView above(box, f.data(), 0.1, kDefaultKappa, stream);
    REQUIRE(below.edge_open(a, b));
    REQUIRE(at.edge_open(a, b));
    REQUIRE_FALSE(above.edge_open(a, b));
  }
}

TEST_CASE("interior edges at negative levels still close with positive rate") {
  const BoxSpec box(4);
  auto rng = RngStream::make(21, 4);
  const auto f = gaussian_site_values(box, rng);
  const auto ov =
      build_overlay(box, f, -2.0, kDefaultKappa,
                    purpose_stream(rng, StreamPurpose::edges));
  const auto edges = enumerate_edges(box);
  const SiteIndex idx(box);
  int interior_open = 0, interior_closed = 0;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const bool pinned = idx.ring(edges[i].a) == box.half() &&
                        idx.ring(edges[i].b) == box.half();
    if (pinned) continue;
    (ov.open[i] ? interior_open : interior_closed)++;
  }
  REQUIRE(interior_open > 0);
  REQUIRE(interior_closed > 0);
}

TEST_CASE("open frequency matches the bridge crossing probability") {
  const BoxSpec box(2);
  const SiteIndex idx(box);
  std::vector<double> f(std::size_t(box.total_sites()), 0.0);
  const std::int32_t u = idx.origin();
  const std::int32_t v = idx.offset(Coord{1, 0});
  f[std::size_t(u)] = 1.3;
  f[std::size_t(v)] = 0.7;
  const double h = 0.2;

  const auto base = RngStream::make(2024, 16);
  const int reps = 200000;
  for (const double kappa : {2.0, 4.0}) {
    const double p = -std::expm1(-2.0 * (1.3 - h) * (0.7 - h) / kappa);
    int count = 0;
    for (int r = 0; r < reps; ++r) {
      const auto rs = spawn_replica_stream(base, std::uint64_t(r));
      const OverlayView view(box, f.data(), h, kappa,
                             purpose_stream(rs, StreamPurpose::edges));
      if (view.edge_open(u, v)) ++count;
    }
    const double se = std::sqrt(p * (1.0 - p) / reps);
    REQUIRE(std::abs(double(count) / reps - p) < 4.0 * se);
  }
}

TEST_CASE("shared randomness makes the overlay monotone in level and kappa") {
  const BoxSpec box(6);
  auto rng = RngStream::make(99, 24);
  const auto f = gaussian_site_values(box, rng);
  const auto stream = purpose_stream(rng, StreamPurpose::edges);
  const auto loose = build_overlay(box, f, -0.7, kDefaultKappa, stream);
  const auto tight = build_overlay(box, f, 0.3, kDefaultKappa, stream);
  const auto damped = build_overlay(box, f, -0.7, 5.0, stream);
  for (std::size_t i = 0; i < loose.open.size(); ++i) {
    if (tight.open[i]) REQUIRE(bool(loose.open[i]));
    if (damped.open[i]) REQUIRE(bool(loose.open[i]));
  }
}

TEST_CASE("overlay construction validates its inputs") {
  const BoxSpec box(3);
  const auto stream = RngStream::make(1, 0);
  std::vector<double> f(std::size_t(box.total_sites()), 0.0);
  REQUIRE_THROWS_AS(build_overlay(box, f, 0.0, 0.0, stream),
                    std::invalid_argument);
  std::vector<double> wrong(5, 0.0);
  REQUIRE_THROWS_AS(build_overlay(box, wrong, 0.0, kDefaultKappa, stream),
                    std::invalid_argument);
}
