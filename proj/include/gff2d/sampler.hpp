#pragma once
// Exact sampling of the zero-boundary Gaussian field whose covariance is
// the Green table from dirichlet.hpp.
//
// Primary route: spectral synthesis. The 5-point Dirichlet Laplacian L
// on the (2N+1)^2 interior diagonalizes in the product sine basis with
// eigenvalues lambda_{j,k} = 4 - 2cos(pi j/M) - 2cos(pi k/M), M = 2N+2,
// and the field covariance is G = 4 L^{-1} = (I - P)^{-1}. So a sample
// is: iid standard normals z_{j,k} (drawn row-major, a fixed order),
// scaled by (lambda_{j,k}/4)^{-1/2}, pushed through the orthonormal
// 2D sine transform. The transform runs through FFTW (RODFT00 with
// FFTW_ESTIMATE plans only, which are deterministic for a given size, so
// identical seeds give identical fields across runs and worker counts).
// A direct O(n^2)-per-line transform is kept alongside as the
// cross-check route, and a dense Cholesky sampler over the Green table
// covers small boxes as the second independent sampler.
//
// Fields live on the full grid (side^2 doubles) with exact zeros on the
// zero ring. Sampler instances own FFTW buffers and are not meant to be
// shared between threads; each worker builds its own.

#include <fftw3.h>

#include <cmath>
#include <cstdint>
#include <mutex>
#include <vector>

#include <Eigen/Cholesky>

#include "gff2d/dirichlet.hpp"
#include "gff2d/geometry.hpp"
#include "gff2d/rng.hpp"

namespace gff2d {

namespace detail {
inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

// Orthonormal 2D DST-I by explicit summation; the oracle route for the
// FFTW path and the slow fallback for odd sizes. In place on a dense
// n x n row-major block.
inline void dst2d_direct(std::vector<double>& a, int n) {
  const int M = n + 1;
  const double norm = std::sqrt(2.0 / M);
  std::vector<double> s(std::size_t(n) * n);
  std::vector<double> tmp(std::size_t(n), 0.0);
  for (int j = 1; j <= n; ++j)
    for (int x = 1; x <= n; ++x)
      s[std::size_t(j - 1) * n + (x - 1)] = norm * std::sin(M_PI * j * x / M);
  // rows
  for (int r = 0; r < n; ++r) {
    double* row = a.data() + std::size_t(r) * n;
    for (int x = 0; x < n; ++x) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += s[std::size_t(j) * n + x] * row[j];
      tmp[std::size_t(x)] = acc;
    }
    for (int x = 0; x < n; ++x) row[x] = tmp[std::size_t(x)];
  }
  // columns
  for (int c = 0; c < n; ++c) {
    for (int x = 0; x < n; ++x) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += s[std::size_t(j) * n + x] * a[std::size_t(j) * n + c];
      tmp[std::size_t(x)] = acc;
    }
    for (int x = 0; x < n; ++x) a[std::size_t(x) * n + c] = tmp[std::size_t(x)];
  }
}

class FieldSampler {
 public:
  explicit FieldSampler(const BoxSpec& box)
      : box_(box), n_(box.interior_side()), m_(n_ + 1) {
    scale_.resize(std::size_t(n_) * n_);
    for (int j = 1; j <= n_; ++j) {
      const double cj = 2.0 * std::cos(M_PI * j / m_);
      for (int k = 1; k <= n_; ++k) {
        const double lambda = 4.0 - cj - 2.0 * std::cos(M_PI * k / m_);
        scale_[std::size_t(j - 1) * n_ + (k - 1)] = 2.0 / std::sqrt(lambda);
      }
    }
    buf_ = static_cast<double*>(fftw_malloc(sizeof(double) * std::size_t(n_) * n_));
    if (!buf_) throw std::bad_alloc();
    std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
    plan_ = fftw_plan_r2r_2d(n_, n_, buf_, buf_, FFTW_RODFT00, FFTW_RODFT00,
                             FFTW_ESTIMATE);
    if (!plan_) {
      fftw_free(buf_);
      throw std::runtime_error("FieldSampler: FFTW plan creation failed");
    }
  }

  FieldSampler(const FieldSampler&) = delete;
  FieldSampler& operator=(const FieldSampler&) = delete;

  ~FieldSampler() {
    std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(buf_);
  }

  const BoxSpec& box() const { return box_; }
  int interior_side() const { return n_; }
  double eigen_scale(int j, int k) const {  // 1-based mode indices
    return scale_[std::size_t(j - 1) * n_ + (k - 1)];
  }

  // One exact draw into a full-grid field (resized as needed).
  void sample(RngStream& rng, std::vector<double>& field) {
    rng.normal_fill(buf_, std::size_t(n_) * n_);
    for (std::size_t i = 0; i < std::size_t(n_) * n_; ++i) buf_[i] *= scale_[i];
    fftw_execute(plan_);
    const double norm = 1.0 / (2.0 * m_);  // unnormalized DST-I -> orthonormal
    spread_to_grid(norm, field);
  }

  // Draw conditioned on the origin value: phi = phi' + (v - phi'_0) g
  // with g = G(.,0)/G(0,0).
  void sample_conditioned_origin(RngStream& rng, double v,
                                 std::vector<double>& field) {
    ensure_conditioning();
    sample(rng, field);
    const SiteIndex idx(box_);
    const double delta = v - field[std::size_t(idx.origin())];
    for (std::size_t i = 0; i < field.size(); ++i)
      field[i] += delta * green_ratio_[i];
  }

  // G(x,0)/G(0,0) as a full-grid vector (CG route, cached).
  const std::vector<double>& origin_green_ratio() {
    ensure_conditioning();
    return green_ratio_;
  }

  // The oracle route: same normals, same scaling, direct transform.
  void sample_direct(RngStream& rng, std::vector<double>& field) {
    std::vector<double> coeff(std::size_t(n_) * n_);
    rng.normal_fill(coeff.data(), coeff.size());
    for (std::size_t i = 0; i < coeff.size(); ++i) coeff[i] *= scale_[i];
    dst2d_direct(coeff, n_);
    field.assign(std::size_t(box_.total_sites()), 0.0);
    const int side = box_.side();
    for (int r = 0; r < n_; ++r)
      for (int c = 0; c < n_; ++c)
        field[std::size_t(r + 1) * side + (c + 1)] = coeff[std::size_t(r) * n_ + c];
  }

  // Inverse of sample(): recover the iid normals from a field. Used by
  // the whitening round-trip tests.
  std::vector<double> whiten(const std::vector<double>& field) {
    const int side = box_.side();
    for (int r = 0; r < n_; ++r)
      for (int c = 0; c < n_; ++c)
        buf_[std::size_t(r) * n_ + c] = field[std::size_t(r + 1) * side + (c + 1)];
    fftw_execute(plan_);
    std::vector<double> z(std::size_t(n_) * n_);
    const double norm = 1.0 / (2.0 * m_);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = buf_[i] * norm / scale_[i];
    return z;
  }

 private:
  void spread_to_grid(double norm, std::vector<double>& field) const {
    field.assign(std::size_t(box_.total_sites()), 0.0);
    const int side = box_.side();
    for (int r = 0; r < n_; ++r) {
      const double* src = buf_ + std::size_t(r) * n_;
      double* dst = field.data() + std::size_t(r + 1) * side + 1;
      for (int c = 0; c < n_; ++c) dst[c] = src[c] * norm;
    }
  }

  void ensure_conditioning() {
    if (!green_ratio_.empty()) return;
    const SiteIndex idx(box_);
    green_ratio_ = green_column(box_, idx.origin());
    const double g00 = green_ratio_[std::size_t(idx.origin())];
    for (double& v : green_ratio_) v /= g00;
  }

  BoxSpec box_;
  int n_, m_;
  std::vector<double> scale_;
  std::vector<double> green_ratio_;
  double* buf_ = nullptr;
  fftw_plan plan_ = nullptr;
};

// Dense-route sampler: phi_int = chol(G) z. Only for boxes whose Green
// table fits the dense capacity; the second law-identical route used to
// validate the spectral sampler.
class CholeskySampler {
 public:
  explicit CholeskySampler(const GreenTable& table)
      : box_(table.box), full_of_interior_(table.full_of_interior) {
    Eigen::LLT<Eigen::MatrixXd> llt(table.g);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("CholeskySampler: Green table not PD");
    l_ = llt.matrixL();
  }

  void sample(RngStream& rng, std::vector<double>& field) {
    const Eigen::Index n = l_.rows();
    Eigen::VectorXd z(n);
    rng.normal_fill(z.data(), std::size_t(n));
    Eigen::VectorXd phi = l_ * z;
    field.assign(std::size_t(box_.total_sites()), 0.0);
    for (Eigen::Index i = 0; i < n; ++i)
      field[std::size_t(full_of_interior_[std::size_t(i)])] = phi[i];
  }

 private:
  BoxSpec box_;
  std::vector<std::int32_t> full_of_interior_;
  Eigen::MatrixXd l_;
};

}  // namespace gff2d
