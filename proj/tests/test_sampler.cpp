#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gff2d/dirichlet.hpp"
#include "gff2d/sampler.hpp"
#include "gff2d/stats.hpp"

using namespace gff2d;

namespace {
double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }
}  // namespace

TEST_CASE("FFTW route equals the direct-sum transform") {
  for (int N : {0, 3, 8}) {
    BoxSpec box(N);
    FieldSampler sampler(box);
    auto r1 = RngStream::make(11, 8);
    auto r2 = RngStream::make(11, 8);
    std::vector<double> fast, slow;
    sampler.sample(r1, fast);
    sampler.sample_direct(r2, slow);
    REQUIRE(fast.size() == slow.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < fast.size(); ++i)
      worst = std::max(worst, std::abs(fast[i] - slow[i]));
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("sampling is deterministic across sampler instances") {
  BoxSpec box(6);
  FieldSampler s1(box), s2(box);
  auto r1 = RngStream::make(77, 16);
  auto r2 = RngStream::make(77, 16);
  std::vector<double> f1, f2;
  s1.sample(r1, f1);
  s2.sample(r2, f2);
  CHECK(f1 == f2);
  // replica streams give different fields
  auto base = RngStream::make(77, 0);
  auto ra = purpose_stream(spawn_replica_stream(base, 0), StreamPurpose::field);
  auto rb = purpose_stream(spawn_replica_stream(base, 1), StreamPurpose::field);
  std::vector<double> fa, fb;
  s1.sample(ra, fa);
  s1.sample(rb, fb);
  CHECK(fa != fb);
}

TEST_CASE("fields vanish on the zero ring") {
  BoxSpec box(5);
  SiteIndex idx(box);
  FieldSampler sampler(box);
  auto rng = RngStream::make(3, 8);
  std::vector<double> f;
  sampler.sample(rng, f);
  for (std::int32_t off = 0; off < box.total_sites(); ++off)
    if (idx.ring(off) == box.half()) CHECK(f[std::size_t(off)] == 0.0);
}

TEST_CASE("whitening inverts the synthesis and the normals look normal") {
  BoxSpec box(16);
  FieldSampler sampler(box);
  const std::size_t modes = std::size_t(box.interior_sites());
  // elementwise round trip against the very normals that were drawn
  auto draw = RngStream::make(21, 8);
  auto replay = RngStream::make(21, 8);
  std::vector<double> field;
  sampler.sample(draw, field);
  std::vector<double> z0(modes);
  replay.normal_fill(z0.data(), modes);
  auto z = sampler.whiten(field);
  double worst = 0.0;
  for (std::size_t i = 0; i < modes; ++i)
    worst = std::max(worst, std::abs(z[i] - z0[i]));
  CHECK(worst < 1e-9);
  // KS on 1e5 pooled whitened coefficients at the 1e-3 level
  std::vector<double> pool;
  pool.reserve(100000);
  auto rng = RngStream::make(22, 8);
  while (pool.size() < 100000) {
    sampler.sample(rng, field);
    auto w = sampler.whiten(field);
    for (double v : w) {
      pool.push_back(v);
      if (pool.size() == 100000) break;
    }
  }
  CHECK(ks_statistic(pool, std_normal_cdf) < ks_critical(pool.size(), 1e-3));
}

TEST_CASE("sample moments match the Green table at N=8") {
  BoxSpec box(8);
  SiteIndex idx(box);
  auto table = green_table(box);
  FieldSampler sampler(box);
  const int reps = 20000;
  const std::int32_t o = idx.origin();
  const std::int32_t p = idx.offset(Coord{2, 1});
  double s_o = 0, s_oo = 0, s_op = 0, s_o3 = 0;
  auto base = RngStream::make(123, 0);
  std::vector<double> f;
  for (int r = 0; r < reps; ++r) {
    auto rng = purpose_stream(spawn_replica_stream(base, std::uint64_t(r)),
                              StreamPurpose::field);
    sampler.sample(rng, f);
    const double a = f[std::size_t(o)], b = f[std::size_t(p)];
    s_o += a;
    s_oo += a * a;
    s_op += a * b;
    s_o3 += a * a * a;
  }
  const double g00 = table.origin_variance();
  const double g0p = table.at_coord(Coord{0, 0}, Coord{2, 1});
  const double gpp = table.at_coord(Coord{2, 1}, Coord{2, 1});
  const double rn = std::sqrt(double(reps));
  // mean, within 4 SE of zero
  CHECK(std::abs(s_o / reps) < 4.0 * std::sqrt(g00) / rn);
  // variance at the origin
  CHECK(std::abs(s_oo / reps - g00) < 4.0 * g00 * std::sqrt(2.0) / rn);
  // covariance with the probe site; SE of a Gaussian product mean
  const double se_op = std::sqrt(g00 * gpp + g0p * g0p) / rn;
  CHECK(std::abs(s_op / reps - g0p) < 4.0 * se_op);
  // negation invariance kills the third moment
  CHECK(std::abs(s_o3 / reps) < 4.0 * std::sqrt(15.0) * std::pow(g00, 1.5) / rn);
}

TEST_CASE("law respects the box symmetries") {
  BoxSpec box(8);
  SiteIndex idx(box);
  FieldSampler sampler(box);
  const Coord probe{3, 2};
  const int reps = 20000;
  std::array<double, 8> second{};
  auto base = RngStream::make(321, 0);
  std::vector<double> f;
  for (int r = 0; r < reps; ++r) {
    auto rng = purpose_stream(spawn_replica_stream(base, std::uint64_t(r)),
                              StreamPurpose::field);
    sampler.sample(rng, f);
    for (int s = 0; s < 8; ++s) {
      const double v = f[std::size_t(idx.offset(apply_box_symmetry(s, probe)))];
      second[std::size_t(s)] += v * v;
    }
  }
  const double g = green_entry(box, probe, probe);
  const double se = g * std::sqrt(2.0 / double(reps));
  for (int s = 0; s < 8; ++s)
    CHECK(std::abs(second[std::size_t(s)] / reps - g) < 4.0 * se);
}

TEST_CASE("conditioning on the origin value") {
  BoxSpec box(8);
  SiteIndex idx(box);
  auto table = green_table(box);
  FieldSampler sampler(box);
  std::vector<double> f;
  // v = 0 pins the origin exactly
  auto rng = RngStream::make(5, 8);
  sampler.sample_conditioned_origin(rng, 0.0, f);
  CHECK(std::abs(f[std::size_t(idx.origin())]) < 1e-12);
  // v != 0: conditional mean and variance at a probe site
  const Coord probe{3, 2};
  const double v = 2.5;
  const double g00 = table.origin_variance();
  const double g0p = table.at_coord(Coord{0, 0}, probe);
  const double gpp = table.at_coord(probe, probe);
  const double want_mean = v * g0p / g00;
  const double want_var = gpp - g0p * g0p / g00;
  const int reps = 20000;
  double s1 = 0, s2 = 0;
  auto base = RngStream::make(999, 0);
  for (int r = 0; r < reps; ++r) {
    auto rr = purpose_stream(spawn_replica_stream(base, std::uint64_t(r)),
                             StreamPurpose::field);
    sampler.sample_conditioned_origin(rr, v, f);
    const double x = f[std::size_t(idx.offset(probe))];
    s1 += x;
    s2 += x * x;
    CHECK(std::abs(f[std::size_t(idx.origin())] - v) < 1e-12);
  }
  const double mean = s1 / reps;
  const double var = s2 / reps - mean * mean;
  const double rn = std::sqrt(double(reps));
  CHECK(std::abs(mean - want_mean) < 4.0 * std::sqrt(want_var) / rn);
  CHECK(std::abs(var - want_var) < 4.0 * want_var * std::sqrt(2.0) / rn);
}

TEST_CASE("spectral and Cholesky samplers agree in law (energy test)") {
  BoxSpec box(8);
  SiteIndex idx(box);
  auto table = green_table(box);
  FieldSampler spectral(box);
  CholeskySampler dense(table);
  std::vector<Coord> probes;
  for (int x : {-6, -2, 2, 6})
    for (int y : {-6, -2, 2, 6}) probes.push_back(Coord{x, y});
  const std::size_t dim = probes.size();
  const int n = 1000;
  std::vector<double> xs, ys;
  xs.reserve(std::size_t(n) * dim);
  ys.reserve(std::size_t(n) * dim);
  auto base = RngStream::make(2718, 0);
  std::vector<double> f;
  for (int r = 0; r < n; ++r) {
    auto rng = purpose_stream(spawn_replica_stream(base, std::uint64_t(r)),
                              StreamPurpose::field);
    spectral.sample(rng, f);
    for (Coord c : probes) xs.push_back(f[std::size_t(idx.offset(c))]);
  }
  for (int r = 0; r < n; ++r) {
    auto rng = purpose_stream(spawn_replica_stream(base, std::uint64_t(n + r)),
                              StreamPurpose::field);
    dense.sample(rng, f);
    for (Coord c : probes) ys.push_back(f[std::size_t(idx.offset(c))]);
  }
  auto res = energy_distance_test(xs, ys, dim, 199, RngStream::make(1, 4096));
  CHECK(res.p_value > 0.01);
}
