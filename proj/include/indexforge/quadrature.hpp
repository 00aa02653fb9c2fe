#pragma once

// Shared numerical plumbing: Gauss-Legendre panels, convergence-checked
// composite quadrature, Gaussian-damped improper integrals with polynomial
// extrapolation, compensated sums and log-log slope fits.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "indexforge/errors.hpp"

namespace indexforge::quad {

using cplx = std::complex<double>;

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

namespace detail {

inline GaussLegendreRule make_gauss_legendre(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

}  // namespace detail

template <int N>
const GaussLegendreRule& gauss_legendre() {
  static const GaussLegendreRule rule = detail::make_gauss_legendre(N);
  return rule;
}

/// Composite N-point Gauss-Legendre over `panels` equal panels of [a, b].
template <int N = 16, class F>
auto composite_gl(F&& f, double a, double b, std::size_t panels) {
  using R = decltype(f(a));
  const auto& rule = gauss_legendre<N>();
  const double h = (b - a) / static_cast<double>(panels);
  R total{};
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = a + (static_cast<double>(p) + 0.5) * h;
    R panel{};
    for (int k = 0; k < N; ++k) panel += rule.weights[k] * f(mid + 0.5 * h * rule.nodes[k]);
    total += panel * (0.5 * h);
  }
  return total;
}

struct ConvergenceOptions {
  std::size_t initial_panels = 32;
  std::size_t max_panels = std::size_t{1} << 24;
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
};

/// Composite GL with panel doubling until two successive estimates agree.
template <class F>
auto integrate(F&& f, double a, double b, ConvergenceOptions opt = {}) {
  std::size_t panels = opt.initial_panels;
  auto prev = composite_gl(f, a, b, panels);
  while (true) {
    panels *= 2;
    if (panels > opt.max_panels) {
      throw IntegrationError("quadrature did not converge on [" + std::to_string(a) + ", " +
                             std::to_string(b) + "] within " + std::to_string(opt.max_panels) +
                             " panels");
    }
    auto next = composite_gl(f, a, b, panels);
    if (std::abs(next - prev) <= std::max(opt.abs_tol, opt.rel_tol * std::abs(next))) return next;
    prev = next;
  }
}

/// Panel count that keeps the phase change per panel under `rad_per_panel`
/// for an integrand oscillating at most at `max_rate` rad per unit length.
inline std::size_t panels_for_rate(double max_rate, double length, double rad_per_panel = 2.0) {
  const double p = std::ceil(std::abs(max_rate) * length / rad_per_panel);
  return std::max<std::size_t>(32, static_cast<std::size_t>(p));
}

/// Value at 0 of the interpolating polynomial through (xs[i], ys[i]) (Neville).
template <class T>
T extrapolate_to_zero(std::span<const double> xs, std::span<const T> ys) {
  std::vector<T> p(ys.begin(), ys.end());
  const std::size_t n = xs.size();
  for (std::size_t m = 1; m < n; ++m) {
    for (std::size_t i = 0; i + m < n; ++i) {
      p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i]);
    }
  }
  return p[0];
}

/// Damping strengths used for Abel-style regularization of oscillatory
/// integrals over the real line. Geometric spacing keeps the extrapolation
/// well conditioned.
inline constexpr std::array<double, 8> kDampings{0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125, 0.0015625};

/// Improper integral over R of an oscillatory g(x): integrate
/// g(x) exp(-delta * scale * x^2) for each delta in kDampings and extrapolate
/// delta -> 0. `scale` should match the curvature of the phase (a for
/// exp(i a x^2)) so that the damped family is smooth on the sampled range.
/// `max_rate(X)` must bound |d(phase)/dx| on [-X, X].
template <class G, class Rate>
cplx damped_real_line_integral(G&& g, Rate&& max_rate, double scale = 1.0) {
  std::array<cplx, kDampings.size()> values{};
  for (std::size_t k = 0; k < kDampings.size(); ++k) {
    const double delta = kDampings[k] * scale;
    const double cutoff = std::sqrt(40.0 / delta);  // e^{-40} tail
    auto damped = [&](double x) { return g(x) * std::exp(-delta * x * x); };
    ConvergenceOptions opt;
    opt.initial_panels = panels_for_rate(max_rate(cutoff), 2.0 * cutoff);
    opt.rel_tol = 1e-11;
    values[k] = integrate(damped, -cutoff, cutoff, opt);
  }
  return extrapolate_to_zero<cplx>(kDampings, values);
}

/// Kahan-Babuska compensated summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(xs[i]);
    const double ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

/// `count` geometrically spaced values from `first` to `last` inclusive.
inline std::vector<double> geometric_space(double first, double last, std::size_t count) {
  std::vector<double> out(count);
  const double r = std::log(last / first) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = first * std::exp(r * static_cast<double>(i));
  out.back() = last;
  return out;
}

}  // namespace indexforge::quad
