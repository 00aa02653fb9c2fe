#pragma once

// One-dimensional stationary phase: locating nondegenerate stationary points,
// the leading-order estimate, a quadrature reference value for
// int exp(i f(x) / hbar) dx and measurement of the remainder's order.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "indexforge/errors.hpp"
#include "indexforge/quadrature.hpp"

namespace indexforge::asymptotics {

using cplx = std::complex<double>;
using std::numbers::pi;

struct PhaseFunction {
  std::function<double(double)> f;
  std::function<double(double)> df;   // optional; central differences otherwise
  std::function<double(double)> d2f;  // optional
  double a = -std::numeric_limits<double>::infinity();
  double b = std::numeric_limits<double>::infinity();
  /// Window used to scan for stationary points when the domain is unbounded.
  double scan_half_width = 20.0;

  double first(double x) const {
    if (df) return df(x);
    const double h = 1e-5 * (1.0 + std::abs(x));
    return (f(x + h) - f(x - h)) / (2.0 * h);
  }
  double second(double x) const {
    if (d2f) return d2f(x);
    if (df) {
      const double h = 1e-5 * (1.0 + std::abs(x));
      return (df(x + h) - df(x - h)) / (2.0 * h);
    }
    const double h = 1e-4 * (1.0 + std::abs(x));
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
  }
  bool bounded() const { return std::isfinite(a) && std::isfinite(b); }
  double scan_lo() const { return std::isfinite(a) ? a : -scan_half_width; }
  double scan_hi() const { return std::isfinite(b) ? b : scan_half_width; }
};

struct StationaryPoint {
  double x = 0.0;
  double value = 0.0;   // f(x)
  double second = 0.0;  // f''(x)
};

inline constexpr double kDegeneracyTol = 1e-8;

namespace detail {

inline double bisect(const PhaseFunction& pf, double lo, double hi) {
  double flo = pf.first(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = pf.first(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Golden-section minimization of |f'| on [lo, hi].
inline double minimize_abs_first(const PhaseFunction& pf, double lo, double hi) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    if (std::abs(pf.first(c)) < std::abs(pf.first(d))) {
      hi = d;
    } else {
      lo = c;
    }
    c = hi - g * (hi - lo);
    d = lo + g * (hi - lo);
  }
  return 0.5 * (lo + hi);
}

[[noreturn]] inline void throw_degenerate(double x, double second) {
  std::ostringstream os;
  os << "degenerate stationary point at x = " << x << " (f'' = " << second << ")";
  throw DegeneracyError(os.str());
}

}  // namespace detail

/// All roots of f' on the scan window, by sign scan plus bisection.
/// Touching zeros of f' (no sign change) are degenerate by construction and
/// are reported as such.
inline std::vector<StationaryPoint> find_stationary_points(const PhaseFunction& pf, int scan_cells = 20000) {
  const double lo = pf.scan_lo(), hi = pf.scan_hi();
  const double h = (hi - lo) / scan_cells;
  std::vector<double> xs(scan_cells + 1), ds(scan_cells + 1);
  double scale = 0.0;
  for (int k = 0; k <= scan_cells; ++k) {
    xs[k] = lo + k * h;
    ds[k] = pf.first(xs[k]);
    scale = std::max(scale, std::abs(ds[k]));
  }

  std::vector<double> roots;
  for (int k = 0; k <= scan_cells; ++k) {
    if (ds[k] == 0.0) {
      roots.push_back(xs[k]);
      continue;
    }
    if (k < scan_cells && ds[k + 1] != 0.0 && (ds[k] < 0.0) != (ds[k + 1] < 0.0)) {
      roots.push_back(detail::bisect(pf, xs[k], xs[k + 1]));
    }
  }
  // Local minima of |f'| without a sign change: candidate double roots.
  for (int k = 1; k < scan_cells; ++k) {
    const double m = std::abs(ds[k]);
    if (m == 0.0 || m > std::abs(ds[k - 1]) || m > std::abs(ds[k + 1])) continue;
    if ((ds[k - 1] < 0.0) != (ds[k + 1] < 0.0)) continue;
    if (m > 1e-3 * std::max(scale, 1.0)) continue;
    const double xm = detail::minimize_abs_first(pf, xs[k - 1], xs[k + 1]);
    if (std::abs(pf.first(xm)) < 1e-10) detail::throw_degenerate(xm, pf.second(xm));
  }

  std::vector<StationaryPoint> out;
  for (double x : roots) {
    const double f2 = pf.second(x);
    if (std::abs(f2) < kDegeneracyTol) detail::throw_degenerate(x, f2);
    out.push_back({x, pf.f(x), f2});
  }
  return out;
}

struct StationaryPhaseEstimate {
  cplx value{};
  bool no_stationary_points = false;
  std::vector<StationaryPoint> points;
};

/// sum_i exp(i f(x_i)/hbar) sqrt(2 pi hbar / |f''(x_i)|) e^{i (pi/4) sgn f''(x_i)}.
inline StationaryPhaseEstimate stationary_phase_estimate(const PhaseFunction& pf, double hbar) {
  if (!(hbar > 0.0)) throw DomainError("hbar must be positive");
  StationaryPhaseEstimate est;
  est.points = find_stationary_points(pf);
  est.no_stationary_points = est.points.empty();
  for (const auto& p : est.points) {
    const double mag = std::sqrt(2.0 * pi * hbar / std::abs(p.second));
    const double phase = p.value / hbar + (p.second > 0.0 ? pi / 4.0 : -pi / 4.0);
    est.value += std::polar(mag, phase);
  }
  return est;
}

inline constexpr double kMinHbar = 1e-5;

namespace detail {

inline double max_abs_first(const PhaseFunction& pf, double lo, double hi, int samples = 4096) {
  double m = 0.0;
  for (int k = 0; k <= samples; ++k) m = std::max(m, std::abs(pf.first(lo + (hi - lo) * k / samples)));
  return m;
}

}  // namespace detail

/// Reference value of int_a^b exp(i f(x)/hbar) dx. Bounded domains use
/// phase-resolved composite Gauss-Legendre; the whole real line uses Gaussian
/// damping extrapolated to zero damping.
inline cplx oscillatory_integral(const PhaseFunction& pf, double hbar) {
  if (!(hbar >= kMinHbar)) {
    throw DomainError("oscillatory_integral supports hbar >= 1e-5");
  }
  const cplx i(0.0, 1.0);
  auto integrand = [&](double x) { return std::exp(i * (pf.f(x) / hbar)); };
  try {
    if (pf.bounded()) {
      quad::ConvergenceOptions opt;
      opt.initial_panels = quad::panels_for_rate(1.1 * detail::max_abs_first(pf, pf.a, pf.b) / hbar, pf.b - pf.a);
      opt.rel_tol = 1e-12;
      opt.abs_tol = 1e-13 * (pf.b - pf.a);
      return quad::integrate(integrand, pf.a, pf.b, opt);
    }
    if (std::isfinite(pf.a) || std::isfinite(pf.b)) {
      throw ArgumentError("half-infinite phase domains are not supported");
    }
    return quad::damped_real_line_integral(
        integrand, [&](double x_max) { return 1.1 * detail::max_abs_first(pf, -x_max, x_max) / hbar; },
        1.0 / hbar);
  } catch (const IntegrationError& e) {
    throw NumericalError(std::string("oscillatory integral failed to converge: ") + e.what());
  }
}

struct RemainderFit {
  double slope = 0.0;
  bool exact = false;
  std::vector<double> hbars;
  std::vector<double> remainders;  // envelope |oracle - estimate| per hbar
};

/// Log-log slope of |oracle - estimate| against hbar.
///
/// Endpoint contributions oscillate like exp(i f(a)/hbar), so the remainder
/// at a single hbar can sit near a node. Each point therefore takes the
/// maximum over `cluster` values hbar (1 + 2 pi hbar j / cluster), which
/// sweeps 1/hbar through one full period and recovers the envelope.
inline RemainderFit remainder_slope(const PhaseFunction& pf, std::span<const double> hbar_list, int cluster = 6) {
  if (hbar_list.size() < 4) throw ArgumentError("remainder_slope needs at least 4 hbar values");
  RemainderFit fit;
  double scale = 0.0;
  for (double hbar : hbar_list) {
    double env = 0.0;
    for (int j = 0; j < cluster; ++j) {
      const double h = hbar * (1.0 + 2.0 * pi * hbar * j / cluster);
      const cplx est = stationary_phase_estimate(pf, h).value;
      env = std::max(env, std::abs(oscillatory_integral(pf, h) - est));
      scale = std::max(scale, std::abs(est));
    }
    fit.hbars.push_back(hbar);
    fit.remainders.push_back(env);
  }
  const double worst = *std::max_element(fit.remainders.begin(), fit.remainders.end());
  // The damped reference is good to roughly 1e-10 relative; below that the
  // leading term is exact.
  if (worst < std::max(1e-12, 1e-9 * scale)) {
    fit.exact = true;
    return fit;
  }
  fit.slope = quad::loglog_slope(fit.hbars, fit.remainders);
  return fit;
}

/// Van der Corput constant 4/gamma with gamma = min |f'| on a bounded domain
/// where f' is monotone and nonvanishing.
inline double van_der_corput_constant(const PhaseFunction& pf, int samples = 4096) {
  if (!pf.bounded()) throw ArgumentError("Van der Corput bound needs a bounded domain");
  double gamma = std::numeric_limits<double>::infinity();
  int direction = 0;
  double prev = pf.first(pf.a);
  gamma = std::abs(prev);
  for (int k = 1; k <= samples; ++k) {
    const double d = pf.first(pf.a + (pf.b - pf.a) * k / samples);
    gamma = std::min(gamma, std::abs(d));
    const int step = (d > prev) - (d < prev);
    if (step != 0) {
      if (direction != 0 && step != direction) throw ArgumentError("f' is not monotone on the domain");
      direction = step;
    }
    prev = d;
  }
  if (!(gamma > 0.0)) throw ArgumentError("f' vanishes on the domain");
  return 4.0 / gamma;
}

// ---------------------------------------------------------------------------
// Named phases

inline PhaseFunction quadratic_phase() {
  PhaseFunction p;
  p.f = [](double x) { return 0.5 * x * x; };
  p.df = [](double x) { return x; };
  p.d2f = [](double) { return 1.0; };
  return p;
}

inline PhaseFunction quartic_phase() {
  PhaseFunction p;
  p.f = [](double x) { return 0.5 * x * x + 0.1 * x * x * x * x; };
  p.df = [](double x) { return x + 0.4 * x * x * x; };
  p.d2f = [](double x) { return 1.0 + 1.2 * x * x; };
  p.a = -2.0;
  p.b = 2.0;
  return p;
}

inline PhaseFunction double_well_phase() {
  PhaseFunction p;
  p.f = [](double x) { return (x * x - 1.0) * (x * x - 1.0); };
  p.df = [](double x) { return 4.0 * x * (x * x - 1.0); };
  p.d2f = [](double x) { return 12.0 * x * x - 4.0; };
  p.a = -1.5;
  p.b = 1.5;
  return p;
}

inline PhaseFunction linear_phase() {
  PhaseFunction p;
  p.f = [](double x) { return x; };
  p.df = [](double) { return 1.0; };
  p.d2f = [](double) { return 0.0; };
  p.a = 0.0;
  p.b = 1.0;
  return p;
}

/// x^2/2 restricted to [1, 3]: no stationary point, f' = x monotone.
inline PhaseFunction ramp_phase() {
  PhaseFunction p = quadratic_phase();
  p.a = 1.0;
  p.b = 3.0;
  return p;
}

inline std::optional<PhaseFunction> phase_preset(const std::string& name) {
  if (name == "quadratic") return quadratic_phase();
  if (name == "quartic") return quartic_phase();
  if (name == "double_well") return double_well_phase();
  if (name == "linear") return linear_phase();
  if (name == "ramp") return ramp_phase();
  return std::nullopt;
}

}  // namespace indexforge::asymptotics
