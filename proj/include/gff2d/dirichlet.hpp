#pragma once
// Green's function and discrete-harmonic solves for the simple random
// walk on the box, killed on the zero ring.
//
// Conventions, fixed here and relied on by every other module:
//   - the walk is discrete time with step kernel 1/4 to each nearest
//     neighbor; killing happens on the zero ring |x|_inf = N+1;
//   - G solves (I - P) G = I over the (2N+1)^2 free sites, i.e. G(x,y)
//     is the expected number of visits to y from x, counting time 0, so
//     G(x,x) >= 1 and G vanishes whenever either argument is on the
//     zero ring;
//   - fields and overlays elsewhere are normalized so that the field
//     covariance equals this G (checked against it, not derived).
//
// Two independent routes to G coexist on purpose: a dense factorization
// of (I - P) (the table), and the closed-form eigenbasis sum for single
// entries. Large-domain solves go through a matrix-free conjugate
// gradient on the 5-point stencil; the diagonal of (I - P) is 1, so
// diagonal preconditioning is the identity and plain CG applies.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "gff2d/errors.hpp"
#include "gff2d/geometry.hpp"

namespace gff2d {

inline constexpr std::int64_t kDefaultGreenCapacity = 40000;

// Dense table of G over the free sites. Row/column indices run over the
// interior in row-major order; boundary arguments return 0.
struct GreenTable {
  BoxSpec box;
  std::vector<std::int32_t> interior_of_full;  // -1 outside the interior
  std::vector<std::int32_t> full_of_interior;
  Eigen::MatrixXd g;

  explicit GreenTable(const BoxSpec& b) : box(b) {}

  double at(std::int32_t full_a, std::int32_t full_b) const {
    const std::int32_t ia = interior_of_full.at(full_a);
    const std::int32_t ib = interior_of_full.at(full_b);
    if (ia < 0 || ib < 0) return 0.0;
    return g(ia, ib);
  }
  double at_coord(Coord a, Coord b) const {
    SiteIndex idx(box);
    return at(idx.offset(a), idx.offset(b));
  }
  double origin_variance() const { return at_coord(Coord{0, 0}, Coord{0, 0}); }
};

namespace detail {

inline void build_interior_maps(const BoxSpec& box,
                                std::vector<std::int32_t>& interior_of_full,
                                std::vector<std::int32_t>& full_of_interior) {
  const SiteIndex idx(box);
  interior_of_full.assign(std::size_t(box.total_sites()), -1);
  full_of_interior.clear();
  full_of_interior.reserve(std::size_t(box.interior_sites()));
  for (std::int32_t off = 0; off < box.total_sites(); ++off) {
    if (idx.ring(off) <= box.N) {
      interior_of_full[std::size_t(off)] = std::int32_t(full_of_interior.size());
      full_of_interior.push_back(off);
    }
  }
}

}  // namespace detail

inline GreenTable green_table(const BoxSpec& box,
                              std::int64_t capacity = kDefaultGreenCapacity) {
  if (box.interior_sites() > capacity)
    throw CapacityError("green_table: " + std::to_string(box.interior_sites()) +
                        " interior sites exceed the dense-table capacity of " +
                        std::to_string(capacity) + " (N too large)");
  GreenTable t(box);
  detail::build_interior_maps(box, t.interior_of_full, t.full_of_interior);
  const std::int32_t n = std::int32_t(t.full_of_interior.size());
  const int side = box.side();
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  for (std::int32_t i = 0; i < n; ++i) {
    const std::int32_t off = t.full_of_interior[std::size_t(i)];
    for (std::int32_t d : {std::int32_t(1), std::int32_t(-1), std::int32_t(side),
                           std::int32_t(-side)}) {
      const std::int32_t j = t.interior_of_full[std::size_t(off + d)];
      if (j >= 0) a(i, j) = -0.25;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("green_table: factorization failed");
  t.g = llt.solve(Eigen::MatrixXd::Identity(n, n));
  t.g = ((t.g + t.g.transpose()) * 0.5).eval();  // exact symmetry
  return t;
}

// Single Green entry by the eigenbasis sum: the 5-point Dirichlet
// Laplacian L on the (2N+1)^2 interior has eigenvalues
// lambda_{j,k} = 4 - 2cos(pi j / M) - 2cos(pi k / M), M = 2N+2, with
// product-sine eigenvectors, and G = 4 L^{-1}. O(n^2) per entry.
inline double green_entry(const BoxSpec& box, Coord a, Coord b) {
  const SiteIndex idx(box);
  if (!idx.contains(a) || !idx.contains(b))
    throw std::out_of_range("green_entry: coordinate outside box");
  if (idx.ring(a) > box.N || idx.ring(b) > box.N) return 0.0;
  const int n = box.interior_side();
  const int M = n + 1;
  const int shift = box.N + 1;
  std::vector<double> cosj(std::size_t(n) + 1), pa(std::size_t(n) + 1),
      pb(std::size_t(n) + 1);
  for (int j = 1; j <= n; ++j) {
    cosj[std::size_t(j)] = 2.0 * std::cos(M_PI * j / M);
    pa[std::size_t(j)] = std::sin(M_PI * j * (a.x + shift) / M) *
                         std::sin(M_PI * j * (b.x + shift) / M);
    pb[std::size_t(j)] = std::sin(M_PI * j * (a.y + shift) / M) *
                         std::sin(M_PI * j * (b.y + shift) / M);
  }
  double sum = 0.0;
  for (int j = 1; j <= n; ++j) {
    double row = 0.0;
    for (int k = 1; k <= n; ++k)
      row += pb[std::size_t(k)] / (4.0 - cosj[std::size_t(j)] - cosj[std::size_t(k)]);
    sum += pa[std::size_t(j)] * row;
  }
  return 4.0 * sum * (2.0 / M) * (2.0 / M);
}

inline double green_origin_variance(const BoxSpec& box) {
  return green_entry(box, Coord{0, 0}, Coord{0, 0});
}

// Matrix-free 5-point problem (I - P) u = f on the free sites outside an
// absorbing set. Vectors live on the full grid; entries off the free set
// are held at zero.
struct StencilProblem {
  const BoxSpec box;
  int side;
  std::vector<std::uint8_t> free_mask;  // 1 where u is unknown

  explicit StencilProblem(const BoxSpec& b) : box(b), side(b.side()) {
    const SiteIndex idx(box);
    free_mask.assign(std::size_t(box.total_sites()), 0);
    for (std::int32_t off = 0; off < box.total_sites(); ++off)
      if (idx.ring(off) <= box.N) free_mask[std::size_t(off)] = 1;
  }

  void absorb(std::int32_t off) { free_mask[std::size_t(off)] = 0; }

  void apply(const std::vector<double>& u, std::vector<double>& out) const {
    const std::int32_t total = std::int32_t(u.size());
    for (std::int32_t i = 0; i < total; ++i) {
      if (!free_mask[std::size_t(i)]) {
        out[std::size_t(i)] = 0.0;
        continue;
      }
      out[std::size_t(i)] =
          u[std::size_t(i)] -
          0.25 * (u[std::size_t(i - 1)] + u[std::size_t(i + 1)] +
                  u[std::size_t(i - side)] + u[std::size_t(i + side)]);
    }
  }
};

// Plain CG, warm-startable. Terminates on ||r||_2 <= tol * max(||f||_2, eps).
inline int cg_solve(const StencilProblem& prob, const std::vector<double>& rhs,
                    std::vector<double>& u, double tol = 1e-10,
                    int max_iter = -1) {
  const std::size_t total = rhs.size();
  if (max_iter < 0) max_iter = int(10 * std::sqrt(double(total)) + 1000);
  std::vector<double> r(total, 0.0), p(total, 0.0), ap(total, 0.0);
  for (std::size_t i = 0; i < total; ++i)
    if (!prob.free_mask[i]) u[i] = 0.0;
  prob.apply(u, ap);
  double rr = 0.0, ff = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    if (!prob.free_mask[i]) continue;
    r[i] = rhs[i] - ap[i];
    rr += r[i] * r[i];
    ff += rhs[i] * rhs[i];
  }
  const double stop2 = tol * tol * std::max(ff, 1e-300);
  p = r;
  int it = 0;
  while (rr > stop2 && it < max_iter) {
    prob.apply(p, ap);
    double pap = 0.0;
    for (std::size_t i = 0; i < total; ++i)
      if (prob.free_mask[i]) pap += p[i] * ap[i];
    const double alpha = rr / pap;
    double rr_new = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
      if (!prob.free_mask[i]) continue;
      u[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
      rr_new += r[i] * r[i];
    }
    const double beta = rr_new / rr;
    for (std::size_t i = 0; i < total; ++i)
      if (prob.free_mask[i]) p[i] = r[i] + beta * p[i];
    rr = rr_new;
    ++it;
  }
  if (rr > stop2)
    throw std::runtime_error("cg_solve: no convergence in " +
                             std::to_string(max_iter) + " iterations");
  return it;
}

// One column of G: G(., target) = solve (I - P) g = e_target.
inline std::vector<double> green_column(const BoxSpec& box, std::int32_t target,
                                        double tol = 1e-10) {
  StencilProblem prob(box);
  if (!prob.free_mask[std::size_t(target)])
    throw std::invalid_argument("green_column: target not a free site");
  std::vector<double> rhs(std::size_t(box.total_sites()), 0.0);
  rhs[std::size_t(target)] = 1.0;
  std::vector<double> u(rhs.size(), 0.0);
  cg_solve(prob, rhs, u, tol);
  return u;
}

// Hitting distribution of the walk from `source` on the absorbing set A,
// with the leftover mass escaping to the zero ring. Computed by the
// adjoint route: one CG solve for the visit counts w = G_Omega e_source
// on Omega = interior \ A, then one sweep collecting the inflow
// w(z)/4 over neighbors z of each target. P is symmetric on Omega, so
// this equals the per-target Dirichlet solve.
struct HarmonicMeasure {
  std::vector<double> weight;  // aligned with the targets argument
  double escape = 0.0;
};

inline HarmonicMeasure harmonic_measure(const BoxSpec& box,
                                        const std::vector<std::int32_t>& targets,
                                        std::int32_t source,
                                        double tol = 1e-10) {
  if (targets.empty())
    throw std::invalid_argument("harmonic_measure: empty absorbing set");
  const SiteIndex idx(box);
  HarmonicMeasure out;
  out.weight.assign(targets.size(), 0.0);
  for (std::size_t t = 0; t < targets.size(); ++t)
    if (targets[t] == source) {  // walk starts on the absorbing set
      out.weight[t] = 1.0;
      return out;
    }
  if (idx.ring(source) == box.half()) {  // starts on the zero ring
    out.escape = 1.0;
    return out;
  }
  StencilProblem prob(box);
  for (std::int32_t t : targets) prob.absorb(t);
  std::vector<double> rhs(std::size_t(box.total_sites()), 0.0);
  rhs[std::size_t(source)] = 1.0;
  std::vector<double> w(rhs.size(), 0.0);
  cg_solve(prob, rhs, w, tol);
  const int side = box.side();
  double mass = 0.0;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const std::int32_t off = targets[t];
    double inflow = 0.0;
    for (std::int32_t d : {std::int32_t(1), std::int32_t(-1), std::int32_t(side),
                           std::int32_t(-side)}) {
      const std::int32_t z = off + d;
      if (z >= 0 && z < std::int32_t(w.size()) && prob.free_mask[std::size_t(z)])
        inflow += w[std::size_t(z)];
    }
    out.weight[t] = 0.25 * inflow;
    mass += out.weight[t];
  }
  out.escape = std::max(0.0, 1.0 - mass);
  return out;
}

// Discrete-harmonic extension of data prescribed on V (and implicitly 0
// on the zero ring): u = data on V, (I - P) u = 0 off V. Returns a
// full-grid vector.
inline std::vector<double> harmonic_extension(
    const BoxSpec& box, const std::vector<std::int32_t>& v_sites,
    const std::vector<double>& data, double tol = 1e-10) {
  if (v_sites.size() != data.size())
    throw std::invalid_argument("harmonic_extension: sites/data size mismatch");
  StencilProblem prob(box);
  std::vector<double> boundary(std::size_t(box.total_sites()), 0.0);
  for (std::size_t i = 0; i < v_sites.size(); ++i) {
    if (!prob.free_mask[std::size_t(v_sites[i])])
      throw std::invalid_argument("harmonic_extension: site not free");
    prob.absorb(v_sites[i]);
    boundary[std::size_t(v_sites[i])] = data[i];
  }
  const int side = box.side();
  std::vector<double> rhs(boundary.size(), 0.0);
  for (std::int32_t i = 0; i < std::int32_t(boundary.size()); ++i) {
    if (!prob.free_mask[std::size_t(i)]) continue;
    double acc = 0.0;
    for (std::int32_t d : {std::int32_t(1), std::int32_t(-1), std::int32_t(side),
                           std::int32_t(-side)})
      acc += boundary[std::size_t(i + d)];
    if (acc != 0.0) rhs[std::size_t(i)] = 0.25 * acc;
  }
  std::vector<double> u(boundary.size(), 0.0);
  cg_solve(prob, rhs, u, tol);
  for (std::size_t i = 0; i < v_sites.size(); ++i)
    u[std::size_t(v_sites[i])] = data[i];
  return u;
}

// P^x[ hit S before the zero ring ] for a connected S containing the
// origin inside B_{N/2}, evaluated at a site of the annulus
// A_{5N/8, 7N/8}. The bound-side preconditions are checked literally.
inline double hitting_probability_annulus(const BoxSpec& box, Coord x,
                                          const std::vector<std::int32_t>& s_sites,
                                          double tol = 1e-10) {
  const SiteIndex idx(box);
  if (s_sites.empty())
    throw std::invalid_argument("hitting_probability_annulus: empty S");
  // S inside B_{N/2}, containing the origin
  bool has_origin = false;
  for (std::int32_t off : s_sites) {
    if (idx.ring(off) > box.N / 2)
      throw std::domain_error("hitting_probability_annulus: S leaves B_{N/2}");
    if (off == idx.origin()) has_origin = true;
  }
  if (!has_origin)
    throw std::domain_error("hitting_probability_annulus: S must contain 0");
  // S connected
  {
    std::vector<std::uint8_t> in_s(std::size_t(box.total_sites()), 0);
    for (std::int32_t off : s_sites) in_s[std::size_t(off)] = 1;
    std::vector<std::int32_t> stack{s_sites[0]};
    std::vector<std::uint8_t> seen(in_s.size(), 0);
    seen[std::size_t(s_sites[0])] = 1;
    std::size_t found = 1;
    const int side = box.side();
    while (!stack.empty()) {
      const std::int32_t cur = stack.back();
      stack.pop_back();
      for (std::int32_t d : {std::int32_t(1), std::int32_t(-1), std::int32_t(side),
                             std::int32_t(-side)}) {
        const std::int32_t nb = cur + d;
        if (nb < 0 || nb >= std::int32_t(in_s.size())) continue;
        if (in_s[std::size_t(nb)] && !seen[std::size_t(nb)]) {
          seen[std::size_t(nb)] = 1;
          ++found;
          stack.push_back(nb);
        }
      }
    }
    if (found != s_sites.size())
      throw std::domain_error("hitting_probability_annulus: S not connected");
  }
  const int r = idx.ring(x);
  if (!(r >= (5 * box.N) / 8 + 1 && r <= (7 * box.N) / 8))
    throw std::domain_error(
        "hitting_probability_annulus: x outside A_{5N/8,7N/8}");
  std::vector<double> ones(s_sites.size(), 1.0);
  auto u = harmonic_extension(box, s_sites, ones, tol);
  return u[std::size_t(idx.offset(x))];
}

// ---- binary Green table cache -------------------------------------------

inline constexpr char kGreenCacheMagic[8] = {'G', 'F', 'F', '2',
                                             'D', 'G', 'R', 'N'};
inline constexpr std::uint32_t kGreenCacheVersion = 1;

inline void green_cache_save(const std::string& path, const GreenTable& t) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("green_cache_save: cannot open " + path);
  const std::uint64_t n = std::uint64_t(t.full_of_interior.size());
  const std::uint64_t boxn = std::uint64_t(t.box.N);
  bool ok = std::fwrite(kGreenCacheMagic, 1, 8, f) == 8;
  ok = ok && std::fwrite(&kGreenCacheVersion, sizeof kGreenCacheVersion, 1, f) == 1;
  ok = ok && std::fwrite(&boxn, sizeof boxn, 1, f) == 1;
  ok = ok && std::fwrite(&n, sizeof n, 1, f) == 1;
  // G is symmetric, so its contiguous columns are exactly the row-major rows.
  for (std::uint64_t row = 0; ok && row < n; ++row)
    ok = std::fwrite(t.g.col(Eigen::Index(row)).data(), sizeof(double),
                     std::size_t(n), f) == std::size_t(n);
  const int rc = std::fclose(f);
  if (!ok || rc != 0) throw IoError("green_cache_save: short write to " + path);
}

inline GreenTable green_cache_load(const std::string& path, const BoxSpec& box) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw IoError("green_cache_load: cannot open " + path);
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t boxn = 0, n = 0;
  bool ok = std::fread(magic, 1, 8, f) == 8 &&
            std::memcmp(magic, kGreenCacheMagic, 8) == 0;
  ok = ok && std::fread(&version, sizeof version, 1, f) == 1 &&
       version == kGreenCacheVersion;
  ok = ok && std::fread(&boxn, sizeof boxn, 1, f) == 1 &&
       boxn == std::uint64_t(box.N);
  ok = ok && std::fread(&n, sizeof n, 1, f) == 1 &&
       n == std::uint64_t(box.interior_sites());
  GreenTable t(box);
  if (ok) {
    detail::build_interior_maps(box, t.interior_of_full, t.full_of_interior);
    t.g.resize(Eigen::Index(n), Eigen::Index(n));
    for (std::uint64_t row = 0; ok && row < n; ++row)
      ok = std::fread(t.g.col(Eigen::Index(row)).data(), sizeof(double),
                      std::size_t(n), f) == std::size_t(n);
  }
  std::fclose(f);
  if (!ok) throw IoError("green_cache_load: " + path +
                         " is not a valid cache for this box");
  return t;
}

}  // namespace gff2d
