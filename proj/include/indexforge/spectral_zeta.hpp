#pragma once

// Zeta-regularized determinants of -d^2/dtau^2 + omega^2 on an interval with
// Dirichlet conditions, the free/oscillator determinant ratio and the
// regularized constant product.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>

#include "indexforge/errors.hpp"
#include "indexforge/quadrature.hpp"

namespace indexforge::zeta {

using cplx = std::complex<double>;
using std::numbers::pi;

/// Riemann zeta at the origin.
inline constexpr double kZetaAtZero = -0.5;
/// zeta'(0) = -log(2 pi) / 2.
inline const double kZetaPrimeAtZero = -0.5 * std::log(2.0 * pi);

/// Spectrum lambda_n = (pi n / dtau)^2 + omega^2, n >= 1.
class SpectralProblem {
 public:
  SpectralProblem(double interval_length, double frequency)
      : dtau_(interval_length), omega_(frequency) {
    if (!(dtau_ > 0.0)) {
      throw DomainError("interval length must be positive, got " + std::to_string(dtau_));
    }
    if (!(omega_ >= 0.0)) {
      throw DomainError("frequency must be non-negative, got " + std::to_string(omega_));
    }
  }

  double interval_length() const { return dtau_; }
  double frequency() const { return omega_; }

  double eigenvalue(std::int64_t n) const {
    const double k = pi * static_cast<double>(n) / dtau_;
    return k * k + omega_ * omega_;
  }

 private:
  double dtau_;
  double omega_;
};

namespace detail {

/// sinh(x)/x, stable at small x.
inline double sinhc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 + x * x / 6.0 + x * x * x * x / 120.0;
  return std::sinh(x) / x;
}

}  // namespace detail

/// exp(-zeta'_A(0)).
///
/// omega = 0: zeta_A(s) = (dtau/pi)^{2s} zeta(2s), hence
///   -zeta_A'(0) = -2 log(dtau/pi) zeta(0) - 2 zeta'(0) = log(2 dtau).
/// omega > 0: 2 sinh(omega dtau) / omega.
inline double zeta_det(const SpectralProblem& p) {
  const double dtau = p.interval_length();
  const double free_log = -2.0 * std::log(dtau / pi) * kZetaAtZero - 2.0 * kZetaPrimeAtZero;
  const double free_det = std::exp(free_log);
  if (p.frequency() == 0.0) return free_det;
  return free_det * detail::sinhc(p.frequency() * dtau);
}

struct DetRatio {
  double closed = 1.0;     // omega dtau / sinh(omega dtau)
  double truncated = 1.0;  // prod_{n <= N} lambda_n(0) / lambda_n(omega)
};

/// Closed-form ratio det(-d^2) / det(-d^2 + omega^2) for a complex interval
/// length; dtau = i (t_f - t_i) gives the real-time form omega t / sin(omega t).
inline cplx det_ratio_closed(cplx dtau, double omega) {
  const cplx z = omega * dtau;
  if (std::abs(z) < 1e-4) return 1.0 / (1.0 + z * z / 6.0 + z * z * z * z / 120.0);
  return z / std::sinh(z);
}

inline DetRatio det_ratio(double dtau, double omega, std::int64_t truncation) {
  const SpectralProblem p(dtau, omega);  // validates
  if (truncation < 1) throw DomainError("truncation must be >= 1");
  DetRatio out;
  out.closed = 1.0 / detail::sinhc(omega * dtau);
  if (omega == 0.0) {
    out.truncated = 1.0;
    return out;
  }
  const double c = omega * omega * dtau * dtau / (pi * pi);
  quad::CompensatedSum log_sum;
  for (std::int64_t n = 1; n <= truncation; ++n) {
    const double dn = static_cast<double>(n);
    log_sum.add(-std::log1p(c / (dn * dn)));
  }
  out.truncated = std::exp(log_sum.value());
  return out;
}

/// Zeta-regularized prod_{n >= 1} b = b^{-1/2}, principal branch of log b.
/// On the negative real axis log b = log|b| + i pi, so b^{-1/2} = |b|^{-1/2} e^{-i pi/2}.
inline cplx zeta_reg_constant_product(cplx b) {
  if (b == cplx{}) throw DomainError("constant product requires b != 0");
  return std::exp(-0.5 * std::log(b));
}

}  // namespace indexforge::zeta
