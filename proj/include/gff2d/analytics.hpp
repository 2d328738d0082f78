#pragma once
// Closed-form reference quantities and predicted envelopes.
//
// psi(m, b, T) is the probability that a standard Brownian motion stays
// strictly above the line t -> m t - b (b > 0) up to time T:
//
//   psi = Phibar(m sqrt(T) - b/sqrt(T)) - e^{2bm} Phibar(m sqrt(T) + b/sqrt(T)).
//
// The e^{2bm} factor can overflow long before the product does, so the
// second term is assembled in log space; m sqrt(T) + b/sqrt(T) >=
// 2 sqrt(bm) keeps the combined exponent nonpositive up to the tail
// prefactor, so the product itself never overflows.
//
// The exact connection value 1 - 2 Phibar(|h|/sqrt(G(0,0))) is the
// closed-form check that binds the field normalization, the overlay
// constant and the connection events together; it is exact at every N.
//
// The envelope expressions carry free multiplicative rates; the
// calibration runs pin bracket constants, nothing here claims sharpness.

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "gff2d/rng.hpp"

namespace gff2d {

// P[Z > s] for standard normal Z, accurate to >= 12 significant digits.
inline double gaussian_upper_tail(double s) {
  return 0.5 * std::erfc(s * 0.70710678118654752440);
}

// log P[Z > s], usable far beyond where the tail itself underflows. The
// direct branch is exact while erfc stays normal; past that an
// asymptotic series in 1/s^2 takes over (relative error ~ 1e-11 at the
// switch point and falling).
inline double log_gaussian_upper_tail(double s) {
  if (s < 20.0) return std::log(gaussian_upper_tail(s));
  const double s2 = s * s;
  const double series =
      1.0 - 1.0 / s2 + 3.0 / (s2 * s2) - 15.0 / (s2 * s2 * s2) +
      105.0 / (s2 * s2 * s2 * s2);
  return -0.5 * s2 - std::log(s * 2.50662827463100050242) + std::log(series);
}

struct PsiParams {
  double m = 0.0;  // line slope per unit time
  double b = 1.0;  // offset below zero at time zero
  double T = 1.0;  // horizon

  PsiParams(double m_, double b_, double T_) : m(m_), b(b_), T(T_) {
    if (!(b_ > 0.0)) throw std::invalid_argument("PsiParams: b must be > 0");
    if (!(T_ > 0.0)) throw std::invalid_argument("PsiParams: T must be > 0");
  }
};

inline double psi(const PsiParams& p) {
  const double rt = std::sqrt(p.T);
  const double lo = p.m * rt - p.b / rt;
  const double hi = p.m * rt + p.b / rt;
  const double second = std::exp(2.0 * p.b * p.m + log_gaussian_upper_tail(hi));
  const double value = gaussian_upper_tail(lo) - second;
  return value < 0.0 ? 0.0 : (value > 1.0 ? 1.0 : value);
}

// (a v b) ^ 1: the larger of the two, capped at one.
inline double nabla(double a, double b) {
  const double big = a > b ? a : b;
  return big > 1.0 ? 1.0 : big;
}

struct PsiEnvelopeConstants {
  double decay_lower = 1.0;    // rate in the lower envelope, m > 0 regime
  double decay_upper = 0.25;   // rate in the upper envelope, m > 0 regime
  double factor_lower = 0.25;  // bracket constants, m <= 0 regime
  double factor_upper = 4.0;
};

struct PsiEnvelope {
  double lower = 0.0;
  double upper = 0.0;
};

// Bracket expressions for psi in the two regimes: for m > 0 (and then
// only when 0 < b <= sqrt(T)) a Gaussian-decay pair (b/sqrt(T)) e^{-c m^2 T};
// for m <= 0 constant multiples of |mb| v b/sqrt(T) capped at one.
inline PsiEnvelope psi_envelopes(const PsiParams& p,
                                 const PsiEnvelopeConstants& k = {}) {
  const double rt = std::sqrt(p.T);
  PsiEnvelope out;
  if (p.m > 0.0) {
    if (!(p.b <= rt))
      throw std::domain_error("psi_envelopes: m > 0 regime needs b <= sqrt(T)");
    const double base = p.b / rt;
    out.lower = base * std::exp(-k.decay_lower * p.m * p.m * p.T);
    out.upper = base * std::exp(-k.decay_upper * p.m * p.m * p.T);
    return out;
  }
  const double e = nabla(std::fabs(p.m) * p.b, p.b / rt);
  out.lower = k.factor_lower * e;
  out.upper = nabla(0.0, k.factor_upper * e);
  return out;
}

// 1 - 2 Phibar(|h|/sigma), the chance that a centered normal with
// variance g00 lands in [-|h|, |h|]. Exact at every box size.
inline double exact_connection_oracle(double h, double g00) {
  if (!(h < 0.0))
    throw std::domain_error("exact_connection_oracle: needs h < 0");
  if (!(g00 >= 1.0))
    throw std::invalid_argument("exact_connection_oracle: bad variance");
  return 1.0 - 2.0 * gaussian_upper_tail(-h / std::sqrt(g00));
}

struct McEstimate {
  double value = 0.0;
  double se = 0.0;
  std::int64_t replicas = 0;
};

inline constexpr int kBrownianStepsPerUnit = 64;

// Monte Carlo estimate of psi by simulating the walk on a time grid and
// correcting each step with the exact probability exp(-2 d_i d_{i+1}/dt)
// that the connecting bridge dips to the line between grid points. The
// correction makes the survival estimate unbiased at any step count;
// the step count only moves the variance.
inline McEstimate brownian_line_hitting_mc(const PsiParams& p, int steps,
                                           std::int64_t replicas,
                                           const RngStream& base) {
  if (steps <= 0) steps = int(std::ceil(p.T * kBrownianStepsPerUnit));
  if (replicas <= 0)
    throw std::invalid_argument("brownian_line_hitting_mc: replicas must be > 0");
  const double dt = p.T / steps;
  const double sdt = std::sqrt(dt);
  std::int64_t alive = 0;
  for (std::int64_t r = 0; r < replicas; ++r) {
    auto rng = spawn_replica_stream(base, std::uint64_t(r));
    double w = 0.0;
    double d_prev = p.b;  // distance above the line at t = 0
    bool ok = true;
    for (int i = 1; i <= steps && ok; ++i) {
      w += sdt * rng.normal();
      const double d = w - (p.m * (dt * i) - p.b);
      if (d <= 0.0) {
        ok = false;
        break;
      }
      const double cross = std::exp(-2.0 * d_prev * d / dt);
      if (rng.uniform() < cross) ok = false;
      d_prev = d;
    }
    if (ok) ++alive;
  }
  McEstimate out;
  out.replicas = replicas;
  out.value = double(alive) / double(replicas);
  out.se = std::sqrt(out.value * (1.0 - out.value) / double(replicas));
  return out;
}

enum class EnvelopeKind { g_lower, g_upper, eta, eta_tilde };

struct EnvelopeParams {
  double h = 0.0;        // level
  std::int64_t N = 0;    // box size
  double r = 0.0;        // inner scale fraction, g envelopes
  std::int64_t k = 0;    // inner radius, eta_tilde
  double x = 1.0;        // free magnitude factor, g envelopes
  double rho = 1.0;      // decay rate, eta envelopes
  double c = 1.0;        // decay rate, g_upper
  double c_bound = 1.0;  // admissible-x constant, g_upper
};

inline double envelope(EnvelopeKind kind, const EnvelopeParams& p) {
  if (p.N < 2) throw std::domain_error("envelope: need N >= 2");
  const double log_n = std::log(double(p.N));
  switch (kind) {
    case EnvelopeKind::g_lower: {
      if (!(p.r > 0.0 && p.r < 1.0) || !(p.x > 0.0))
        throw std::domain_error("envelope: g_lower needs 0 < r < 1 and x > 0");
      const double lr = std::fabs(std::log(p.r));
      return nabla(p.x * std::fabs(p.h) / std::sqrt(log_n),
                   p.x * std::sqrt(lr) / std::sqrt(log_n));
    }
    case EnvelopeKind::g_upper: {
      if (!(p.h > 0.0) || !(p.r > 0.0 && p.r < 1.0) || !(p.x > 0.0))
        throw std::domain_error("envelope: g_upper needs h > 0, 0 < r < 1, x > 0");
      const double lr = std::fabs(std::log(p.r));
      if (!(p.x <= p.c_bound * std::sqrt(log_n) / std::sqrt(lr)))
        throw std::domain_error("envelope: g_upper x outside admissible range");
      const double cap_k = p.h / std::sqrt(lr);
      return p.x * std::exp(-p.c * cap_k * cap_k) * std::sqrt(lr / log_n);
    }
    case EnvelopeKind::eta:
      return std::exp(-p.rho * p.h * p.h) / std::sqrt(log_n);
    case EnvelopeKind::eta_tilde: {
      if (p.k < 1 || p.k >= p.N)
        throw std::domain_error("envelope: eta_tilde needs 1 <= k < N");
      const double gap = log_n - std::log(double(p.k));
      return std::sqrt(gap / log_n) * std::exp(-p.rho * p.h * p.h / gap);
    }
  }
  throw std::logic_error("envelope: unknown kind");
}

}  // namespace gff2d
