#pragma once

// Supersymmetric quantum mechanics on the line with superpotential h:
//   H_B = p^2/2 + h'(x)^2/2 - h''(x)/2,   H_F = p^2/2 + h'(x)^2/2 + h''(x)/2,
// discretized by second-order finite differences with Dirichlet walls. Also
// the zero-dimensional model Z = (2 pi)^{-1/2} int dX dpsi1 dpsi2
// exp(-h'(X)^2/2 + h''(X) psi1 psi2).

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "indexforge/asymptotics.hpp"
#include "indexforge/errors.hpp"
#include "indexforge/grassmann.hpp"
#include "indexforge/quadrature.hpp"

namespace indexforge::susy {

using std::numbers::pi;

struct Superpotential {
  std::string name;
  std::function<double(double)> h;
  std::function<double(double)> hp;   // h'
  std::function<double(double)> hpp;  // h''; central differences of h' if empty
  bool confining = true;              // h'(x)^2 -> infinity as |x| -> infinity

  double d1(double x) const { return hp(x); }
  double d2(double x) const {
    if (hpp) return hpp(x);
    const double e = 1e-5 * (1.0 + std::abs(x));
    return (hp(x + e) - hp(x - e)) / (2.0 * e);
  }
};

struct Grid {
  double x_min = -8.0;
  double x_max = 8.0;
  int points = 2000;  // interior points

  double spacing() const { return (x_max - x_min) / (points + 1); }
  double node(int i) const { return x_min + (i + 1) * spacing(); }

  void validate() const {
    if (!(x_max > x_min)) throw DomainError("grid needs x_min < x_max");
    if (points < 10) throw DomainError("grid needs at least 10 points");
  }
};

inline constexpr double kZeroTol = 1e-4;
inline constexpr double kPairingTol = 1e-3;

struct GradedSpectrum {
  Grid grid;
  std::vector<double> bosonic;    // ascending
  std::vector<double> fermionic;  // ascending
  double zero_tol = kZeroTol;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<double> tridiagonal_eigenvalues(const Eigen::VectorXd& diag, const Eigen::VectorXd& off) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("tridiagonal eigensolver did not converge");
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

}  // namespace detail

inline GradedSpectrum build_susy_hamiltonians(const Superpotential& w, const Grid& grid) {
  grid.validate();
  const int n = grid.points;
  const double dx = grid.spacing();
  const double kinetic = 1.0 / (dx * dx);
  Eigen::VectorXd diag_b(n), diag_f(n), off = Eigen::VectorXd::Constant(n - 1, -0.5 * kinetic);
  for (int i = 0; i < n; ++i) {
    const double x = grid.node(i);
    const double v = 0.5 * w.d1(x) * w.d1(x);
    const double s = 0.5 * w.d2(x);
    diag_b(i) = kinetic + v - s;
    diag_f(i) = kinetic + v + s;
  }
  GradedSpectrum out;
  out.grid = grid;
  out.bosonic = detail::tridiagonal_eigenvalues(diag_b, off);
  out.fermionic = detail::tridiagonal_eigenvalues(diag_f, off);

  const double edge = std::min(std::abs(w.d1(grid.x_min)), std::abs(w.d1(grid.x_max)));
  if (!w.confining || 0.5 * edge * edge < 20.0) {
    std::ostringstream os;
    os << "potential h'^2/2 reaches only " << 0.5 * edge * edge
       << " at the window edges; low levels may feel the walls (continuum contamination)";
    out.warnings.push_back(os.str());
  }
  return out;
}

namespace detail {

inline int count_zero_modes(const std::vector<double>& ev, double zero_tol, const char* sector) {
  int zeros = 0;
  for (double e : ev) {
    const double a = std::abs(e);
    if (a < zero_tol / 10.0) {
      ++zeros;
    } else if (a <= zero_tol * 10.0) {
      std::ostringstream os;
      os << sector << " eigenvalue " << e << " lies in the ambiguous band [" << zero_tol / 10.0 << ", "
         << zero_tol * 10.0 << "] around the zero threshold; refine the grid";
      throw NumericalError(os.str());
    } else if (e > zero_tol * 10.0) {
      break;
    }
  }
  return zeros;
}

}  // namespace detail

struct WittenIndex {
  int index = 0;
  int bosonic_zero_modes = 0;
  int fermionic_zero_modes = 0;
};

/// dim ker H_B - dim ker H_F. Eigenvalues below zero_tol/10 count as zero;
/// anything in [zero_tol/10, 10 zero_tol] is rejected as ambiguous.
inline WittenIndex witten_index(const GradedSpectrum& s) {
  WittenIndex w;
  w.bosonic_zero_modes = detail::count_zero_modes(s.bosonic, s.zero_tol, "bosonic");
  w.fermionic_zero_modes = detail::count_zero_modes(s.fermionic, s.zero_tol, "fermionic");
  w.index = w.bosonic_zero_modes - w.fermionic_zero_modes;
  return w;
}

inline WittenIndex witten_index(const Superpotential& w, const Grid& grid) {
  return witten_index(build_susy_hamiltonians(w, grid));
}

/// Largest |E_B - E_F| over the lowest `levels` nonzero levels of each sector.
inline double pairing_max_gap(const GradedSpectrum& s, int levels = 10) {
  auto nonzero = [&](const std::vector<double>& ev) {
    std::vector<double> out;
    for (double e : ev) {
      if (std::abs(e) >= s.zero_tol) out.push_back(e);
      if (static_cast<int>(out.size()) == levels) break;
    }
    return out;
  };
  const auto b = nonzero(s.bosonic), f = nonzero(s.fermionic);
  if (static_cast<int>(b.size()) < levels || static_cast<int>(f.size()) < levels) {
    throw NumericalError("spectrum has fewer than " + std::to_string(levels) + " nonzero levels");
  }
  double gap = 0.0;
  for (int k = 0; k < levels; ++k) gap = std::max(gap, std::abs(b[k] - f[k]));
  return gap;
}

inline constexpr double kTraceEnergyCut = 60.0;
inline constexpr double kTraceTailTol = 1e-4;

/// Tr (-1)^F e^{-beta H} over levels with E <= e_max, for each beta. The
/// discarded levels are bounded by their own Boltzmann weights; a bound above
/// 1e-4 raises a truncation error.
inline std::vector<double> witten_trace(const GradedSpectrum& s, const std::vector<double>& betas,
                                        double e_max = kTraceEnergyCut) {
  std::vector<double> out;
  for (double beta : betas) {
    if (!(beta > 0.0)) throw DomainError("beta must be positive");
    quad::CompensatedSum trace, tail;
    for (double e : s.bosonic) (e <= e_max ? trace : tail).add(std::exp(-beta * e));
    for (double e : s.fermionic) {
      if (e <= e_max) {
        trace.add(-std::exp(-beta * e));
      } else {
        tail.add(std::exp(-beta * e));
      }
    }
    if (tail.value() > kTraceTailTol) {
      std::ostringstream os;
      os << "graded trace tail beyond E = " << e_max << " is " << tail.value() << " at beta = " << beta
         << "; raise the energy cut or beta";
      throw TruncationError(os.str());
    }
    out.push_back(trace.value());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Zero-dimensional localization

struct LocalizationResult {
  double quadrature = 0.0;
  int critical_sum = 0;
  std::vector<asymptotics::StationaryPoint> critical_points;
};

/// The Berezin integral of exp(-S0 + S1 psi1 psi2) over dpsi1 dpsi2, with the
/// measure ordered so that it equals S1 exp(-S0).
inline double berezin_weight(double s0, double s1) {
  using grassmann::GrassmannElement;
  const GrassmannElement action =
      GrassmannElement::scalar(2, -s0) + GrassmannElement::monomial(2, {0, 1}, s1);
  return grassmann::berezin_integrate(grassmann::gr_exp(action), {0, 1}).real();
}

inline constexpr double kEdgeSlope = 6.0;

/// Z on [a, b] by quadrature, and sum of sgn h'' over the zeros of h'.
inline LocalizationResult localization_partition(const Superpotential& w, double a, double b) {
  if (!(b > a)) throw DomainError("localization window needs a < b");
  if (std::abs(w.d1(a)) < kEdgeSlope || std::abs(w.d1(b)) < kEdgeSlope) {
    std::ostringstream os;
    os << "|h'| at the window edges (" << std::abs(w.d1(a)) << ", " << std::abs(w.d1(b)) << ") is below "
       << kEdgeSlope << "; the Gaussian tail is not negligible";
    throw DomainError(os.str());
  }
  LocalizationResult out;
  asymptotics::PhaseFunction pf;
  pf.f = w.h;
  pf.df = w.hp;
  pf.d2f = [&w](double x) { return w.d2(x); };
  pf.a = a;
  pf.b = b;
  out.critical_points = asymptotics::find_stationary_points(pf);
  for (const auto& p : out.critical_points) out.critical_sum += p.second > 0.0 ? 1 : -1;

  auto integrand = [&](double x) {
    const double hp = w.d1(x);
    return berezin_weight(0.5 * hp * hp, w.d2(x));
  };
  quad::ConvergenceOptions opt;
  opt.initial_panels = 64;
  opt.rel_tol = 1e-13;
  opt.abs_tol = 1e-14;
  out.quadrature = quad::integrate(integrand, a, b, opt) / std::sqrt(2.0 * pi);
  return out;
}

// ---------------------------------------------------------------------------
// Presets

inline Superpotential harmonic() {
  return {"harmonic", [](double x) { return 0.5 * x * x; }, [](double x) { return x; },
          [](double) { return 1.0; }, true};
}

inline Superpotential inverted() {
  return {"inverted", [](double x) { return -0.5 * x * x; }, [](double x) { return -x; },
          [](double) { return -1.0; }, true};
}

inline Superpotential cubic() {
  return {"cubic", [](double x) { return x * x * x / 3.0; }, [](double x) { return x * x; },
          [](double x) { return 2.0 * x; }, true};
}

inline Superpotential quartic() {
  return {"quartic", [](double x) { return 0.25 * x * x * x * x; }, [](double x) { return x * x * x; },
          [](double x) { return 3.0 * x * x; }, true};
}

inline Superpotential deformed() {
  return {"deformed", [](double x) { return 0.5 * x * x + 0.3 * std::sin(x); },
          [](double x) { return x + 0.3 * std::cos(x); }, [](double x) { return 1.0 - 0.3 * std::sin(x); },
          true};
}

/// h' = x^2 + 1: no critical points.
inline Superpotential no_critical() {
  return {"no_critical", [](double x) { return x * x * x / 3.0 + x; }, [](double x) { return x * x + 1.0; },
          [](double x) { return 2.0 * x; }, true};
}

/// h' = x^3 - x: critical points at -1, 0, 1.
inline Superpotential double_well() {
  return {"double_well", [](double x) { return 0.25 * x * x * x * x - 0.5 * x * x; },
          [](double x) { return x * x * x - x; }, [](double x) { return 3.0 * x * x - 1.0; }, true};
}

inline std::optional<Superpotential> superpotential_preset(const std::string& name) {
  if (name == "harmonic") return harmonic();
  if (name == "inverted") return inverted();
  if (name == "cubic") return cubic();
  if (name == "quartic") return quartic();
  if (name == "deformed") return deformed();
  if (name == "no_critical") return no_critical();
  if (name == "double_well") return double_well();
  return std::nullopt;
}

/// Window suited to a preset: the sextic well of the quartic superpotential
/// is narrow, so a tighter window buys resolution for its higher levels.
inline Grid default_grid(const Superpotential& w) {
  if (w.name == "quartic") return {-4.0, 4.0, 2000};
  return {};
}

/// Localization presets are named after h': linear (x), no_critical
/// (x^2 + 1) and cubic (x^3 - x).
inline std::optional<Superpotential> localization_preset(const std::string& name) {
  if (name == "linear") return harmonic();
  if (name == "no_critical") return no_critical();
  if (name == "cubic") return double_well();
  return std::nullopt;
}

}  // namespace indexforge::susy
