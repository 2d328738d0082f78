#pragma once
// Small statistics toolbox shared by the harness, the test suites, and
// the acceptance checks: binomial intervals, KS distance, least squares
// on transformed axes, and a permutation-calibrated two-sample energy
// distance test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "gff2d/rng.hpp"

namespace gff2d {

inline double binomial_se(double phat, std::uint64_t n) {
  if (n == 0) return 0.0;
  return std::sqrt(std::max(phat * (1.0 - phat), 0.0) / double(n));
}

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

// Wilson score interval, the project's default 95% interval.
inline WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t n,
                                      double z = 1.959963984540054) {
  if (n == 0) return {0.0, 1.0};
  const double p = double(successes) / double(n);
  const double z2n = z * z / double(n);
  const double denom = 1.0 + z2n;
  const double center = (p + z2n / 2.0) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / double(n) + z2n / (4.0 * double(n))) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// Two-sided KS statistic of a sample against a reference CDF.
inline double ks_statistic(std::vector<double> xs,
                           const std::function<double(double)>& cdf) {
  if (xs.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = double(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::max(f - double(i) / n, double(i + 1) / n - f));
  }
  return d;
}

// Asymptotic two-sided KS critical value at level alpha.
inline double ks_critical(std::size_t n, double alpha) {
  return std::sqrt(-std::log(alpha / 2.0) / 2.0) / std::sqrt(double(n));
}

struct LeastSquaresFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;  // from per-point sigmas, 0 when none given
};

// Unweighted least squares of y on x; slope_se propagates the supplied
// per-point standard errors of y through the slope estimator.
inline LeastSquaresFit least_squares(const std::vector<double>& x,
                                     const std::vector<double>& y,
                                     const std::vector<double>& sigma = {}) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2)
    throw std::invalid_argument("least_squares: need >= 2 matched points");
  if (!sigma.empty() && sigma.size() != n)
    throw std::invalid_argument("least_squares: sigma size mismatch");
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xbar += x[i];
    ybar += y[i];
  }
  xbar /= double(n);
  ybar /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  if (sxx == 0.0) throw std::invalid_argument("least_squares: degenerate x");
  LeastSquaresFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  if (!sigma.empty()) {
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = (x[i] - xbar) / sxx;
      var += w * w * sigma[i] * sigma[i];
    }
    fit.slope_se = std::sqrt(var);
  }
  return fit;
}

struct EnergyTestResult {
  double statistic = 0.0;  // scaled two-sample energy distance
  double p_value = 1.0;    // permutation p-value, (1+c)/(R+1)
};

// Two-sample energy distance test. X and Y are flat row-major samples of
// common dimension `dim`. Calibration is by label permutation with the
// supplied stream, so the whole test is reproducible. Rejecting at level
// alpha means p_value <= alpha; with R = 1/alpha - 1 permutations that
// happens only when the observed statistic beats every permuted one.
inline EnergyTestResult energy_distance_test(const std::vector<double>& xflat,
                                             const std::vector<double>& yflat,
                                             std::size_t dim, int permutations,
                                             RngStream rng) {
  if (dim == 0 || xflat.size() % dim || yflat.size() % dim)
    throw std::invalid_argument("energy_distance_test: bad dimensions");
  const std::size_t n = xflat.size() / dim, m = yflat.size() / dim;
  if (n < 2 || m < 2)
    throw std::invalid_argument("energy_distance_test: samples too small");
  const std::size_t total = n + m;
  // condensed pairwise distance matrix over the pooled sample
  std::vector<float> dist(total * (total - 1) / 2);
  auto point = [&](std::size_t i) -> const double* {
    return i < n ? xflat.data() + i * dim : yflat.data() + (i - n) * dim;
  };
  std::size_t pos = 0;
  for (std::size_t i = 0; i < total; ++i) {
    const double* pi = point(i);
    for (std::size_t j = i + 1; j < total; ++j, ++pos) {
      const double* pj = point(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double d = pi[k] - pj[k];
        acc += d * d;
      }
      dist[pos] = float(std::sqrt(acc));
    }
  }
  auto pair_at = [&](std::size_t i, std::size_t j) -> float {
    if (i > j) std::swap(i, j);
    return dist[i * total - i * (i + 1) / 2 + (j - i - 1)];
  };
  double s_all = 0.0;
  for (float d : dist) s_all += d;
  // Only the two within-group sums are needed per relabeling: the cross
  // sum is S_all minus both, and S_all is permutation-invariant.
  auto full_statistic = [&](const std::vector<std::uint32_t>& labels_x,
                            const std::vector<std::uint32_t>& labels_y) {
    double sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        sxx += pair_at(labels_x[i], labels_x[j]);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        syy += pair_at(labels_y[i], labels_y[j]);
    const double sxy = s_all - sxx - syy;
    return 2.0 * sxy / (double(n) * m) - 2.0 * sxx / (double(n) * n) -
           2.0 * syy / (double(m) * m);
  };
  std::vector<std::uint32_t> lx(n), ly(m);
  for (std::size_t i = 0; i < n; ++i) lx[i] = std::uint32_t(i);
  for (std::size_t i = 0; i < m; ++i) ly[i] = std::uint32_t(n + i);
  EnergyTestResult res;
  res.statistic = full_statistic(lx, ly) * (double(n) * m / double(total));
  std::vector<std::uint32_t> pool(total);
  for (std::size_t i = 0; i < total; ++i) pool[i] = std::uint32_t(i);
  int exceed = 0;
  for (int p = 0; p < permutations; ++p) {
    for (std::size_t i = total - 1; i > 0; --i) {
      const std::size_t j = std::size_t(rng.uniform() * double(i + 1));
      std::swap(pool[i], pool[std::min(j, i)]);
    }
    std::vector<std::uint32_t> px(pool.begin(), pool.begin() + std::ptrdiff_t(n));
    std::vector<std::uint32_t> py(pool.begin() + std::ptrdiff_t(n), pool.end());
    const double t = full_statistic(px, py) * (double(n) * m / double(total));
    if (t >= res.statistic) ++exceed;
  }
  res.p_value = double(1 + exceed) / double(permutations + 1);
  return res;
}

}  // namespace gff2d
