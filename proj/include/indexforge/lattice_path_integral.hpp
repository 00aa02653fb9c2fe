#pragma once

// Propagators: closed forms (free particle, harmonic oscillator), the
// time-sliced Euclidean lattice kernel, Trotter splitting defects, lattice
// partition functions and the Schrodinger-equation residual of a kernel.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "indexforge/errors.hpp"
#include "indexforge/quadrature.hpp"

namespace indexforge::lattice {

using cplx = std::complex<double>;
using std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

// ---------------------------------------------------------------------------
// Closed forms

/// K(x_f, t_i + dt; x_i, t_i) = sqrt(m / (2 pi i hbar dt)) exp(i m (x_f - x_i)^2 / (2 hbar dt)).
inline cplx free_propagator(double m, double hbar, double dt, double x_i, double x_f) {
  if (dt == 0.0) throw DomainError("free propagator is singular at zero elapsed time");
  const double dx = x_f - x_i;
  return std::sqrt(m / (2.0 * pi * kI * hbar * dt)) * std::exp(kI * m * dx * dx / (2.0 * hbar * dt));
}

/// Free action m (x_f - x_i)^2 / (2 dt) along the straight-line path.
inline double free_classical_action(double m, double dt, double x_i, double x_f) {
  const double dx = x_f - x_i;
  return m * dx * dx / (2.0 * dt);
}

/// Heat kernel sqrt(m / (2 pi hbar tau)) exp(-m (x_f - x_i)^2 / (2 hbar tau)).
inline double free_propagator_euclidean(double m, double hbar, double tau, double x_i, double x_f) {
  if (!(tau > 0.0)) throw DomainError("Euclidean propagator needs tau > 0");
  const double dx = x_f - x_i;
  return std::sqrt(m / (2.0 * pi * hbar * tau)) * std::exp(-m * dx * dx / (2.0 * hbar * tau));
}

/// Euler-Lagrange boundary-value solution for m x'' = -sign V'(x) with
/// sign = +1 in real time and -1 in Euclidean time; the action integrates
/// (m/2) x'^2 - sign V(x).
struct ClassicalPath {
  double action = 0.0;
  double initial_velocity = 0.0;
  double boundary_miss = 0.0;
  int shooting_iterations = 0;
};

struct ShootingOptions {
  int steps = 2000;  // RK4 steps; even, for Simpson
  double boundary_tol = 1e-10;
  int max_iterations = 50;
};

inline ClassicalPath classical_action(const std::function<double(double)>& potential,
                                      const std::function<double(double)>& force_gradient,
                                      double m, double duration, double x_i, double x_f,
                                      bool euclidean, ShootingOptions opt = {}) {
  const double sign = euclidean ? -1.0 : 1.0;
  const int steps = opt.steps + (opt.steps & 1);
  const double h = duration / steps;
  auto accel = [&](double x) { return -sign * force_gradient(x) / m; };

  std::vector<double> xs(steps + 1), vs(steps + 1);
  auto shoot = [&](double v0) {
    double x = x_i, v = v0;
    xs[0] = x;
    vs[0] = v;
    for (int k = 0; k < steps; ++k) {
      const double k1x = v, k1v = accel(x);
      const double k2x = v + 0.5 * h * k1v, k2v = accel(x + 0.5 * h * k1x);
      const double k3x = v + 0.5 * h * k2v, k3v = accel(x + 0.5 * h * k2x);
      const double k4x = v + h * k3v, k4v = accel(x + h * k3x);
      x += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
      v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
      xs[k + 1] = x;
      vs[k + 1] = v;
    }
    return x - x_f;
  };

  // Secant iteration on the initial velocity.
  double v_a = (x_f - x_i) / duration;
  double v_b = v_a + 1.0;
  double miss_a = shoot(v_a);
  double miss_b = shoot(v_b);
  ClassicalPath out;
  int it = 0;
  while (std::abs(miss_b) > opt.boundary_tol) {
    if (++it > opt.max_iterations || miss_b == miss_a) {
      throw NumericalError("shooting for the classical path did not converge (miss " +
                           std::to_string(miss_b) + ")");
    }
    const double v_next = v_b - miss_b * (v_b - v_a) / (miss_b - miss_a);
    v_a = v_b;
    miss_a = miss_b;
    v_b = v_next;
    miss_b = shoot(v_b);
  }
  // shoot() left the trajectory of v_b in xs/vs.
  double s = 0.0;
  for (int k = 0; k <= steps; ++k) {
    const double lag = 0.5 * m * vs[k] * vs[k] - sign * potential(xs[k]);
    const double w = (k == 0 || k == steps) ? 1.0 : ((k & 1) ? 4.0 : 2.0);
    s += w * lag;
  }
  out.action = s * h / 3.0;
  out.initial_velocity = v_b;
  out.boundary_miss = miss_b;
  out.shooting_iterations = it;
  return out;
}

namespace detail {

inline double sinc(double x) { return std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 + x * x * x * x / 120.0 : std::sin(x) / x; }
inline double sinhc(double x) { return std::abs(x) < 1e-4 ? 1.0 + x * x / 6.0 + x * x * x * x / 120.0 : std::sinh(x) / x; }

inline void check_caustic(double omega, double dt) {
  const double turns = omega * dt / pi;
  if (turns != 0.0 && std::abs(turns - std::round(turns)) < 1e-6) {
    std::ostringstream os;
    os << "harmonic-oscillator propagator has a caustic at omega*dt/pi = " << turns;
    throw DomainError(os.str());
  }
}

}  // namespace detail

/// sqrt(m / (2 pi i hbar dt)) sqrt(omega dt / sin(omega dt)) exp(i S_cl / hbar),
/// with S_cl from a shooting solution of the oscillator's Euler-Lagrange equation.
inline cplx ho_propagator(double m, double hbar, double omega, double dt, double x_i, double x_f,
                          ShootingOptions opt = {}) {
  if (dt == 0.0) throw DomainError("oscillator propagator is singular at zero elapsed time");
  detail::check_caustic(omega, dt);
  const double k = m * omega * omega;
  const ClassicalPath path = classical_action([k](double x) { return 0.5 * k * x * x; },
                                              [k](double x) { return k * x; }, m, dt, x_i, x_f,
                                              /*euclidean=*/false, opt);
  // sqrt(omega dt / sin(omega dt)) beyond the first caustic picks up the
  // principal-branch phase of a negative radicand.
  const cplx fluct = std::sqrt(cplx(1.0 / detail::sinc(omega * dt)));
  return std::sqrt(m / (2.0 * pi * kI * hbar * dt)) * fluct * std::exp(kI * path.action / hbar);
}

/// Imaginary-time continuation: sqrt(m / (2 pi hbar tau)) sqrt(omega tau / sinh(omega tau)) e^{-S_E/hbar}.
inline double ho_propagator_euclidean(double m, double hbar, double omega, double tau, double x_i,
                                      double x_f, ShootingOptions opt = {}) {
  if (!(tau > 0.0)) throw DomainError("Euclidean propagator needs tau > 0");
  const double k = m * omega * omega;
  const ClassicalPath path = classical_action([k](double x) { return 0.5 * k * x * x; },
                                              [k](double x) { return k * x; }, m, tau, x_i, x_f,
                                              /*euclidean=*/true, opt);
  return std::sqrt(m / (2.0 * pi * hbar * tau)) / std::sqrt(detail::sinhc(omega * tau)) *
         std::exp(-path.action / hbar);
}

// ---------------------------------------------------------------------------
// Euclidean lattice

struct Grid {
  double x_min = -10.0;
  double x_max = 10.0;
  int points = 400;

  double spacing() const { return (x_max - x_min) / (points - 1); }
  double at(int k) const { return x_min + k * spacing(); }
};

struct SliceConfig {
  double mass = 1.0;
  double hbar = 1.0;
  double tau = 1.0;  // Euclidean time span
  int slices = 256;
  Grid grid;
  std::function<double(double)> potential = [](double) { return 0.0; };

  double epsilon() const { return tau / slices; }

  /// Throws on hard violations; returns advisory warnings.
  std::vector<std::string> validate() const {
    if (!(mass > 0.0)) throw DomainError("mass must be positive");
    if (!(hbar > 0.0)) throw DomainError("hbar must be positive");
    if (!(tau > 0.0)) throw DomainError("Euclidean time span must be positive");
    if (slices < 1) throw DomainError("need at least one time slice");
    if (grid.points < 3 || !(grid.x_max > grid.x_min)) throw DomainError("grid needs x_max > x_min and >= 3 points");
    std::vector<std::string> warnings;
    const double width = std::sqrt(hbar * tau / mass);
    if (grid.x_max - grid.x_min < 6.0 * width) {
      warnings.push_back("grid spans fewer than 6 thermal widths; boundary truncation may dominate");
    }
    return warnings;
  }
};

/// One-step kernel sampled on the grid plus trapezoid weights.
/// step(i, j) = K_eps(x_i, x_j) with the potential taken at the earlier point x_j.
struct KernelMatrix {
  Grid grid;
  double epsilon = 0.0;
  Eigen::MatrixXd step;
  Eigen::VectorXd weights;

  /// Transfer matrix acting on grid samples: (step * W).
  Eigen::MatrixXd transfer() const { return step * weights.asDiagonal(); }

  /// Weighted matrix power (step W)^k by repeated squaring.
  Eigen::MatrixXd transfer_power(int k) const {
    const Eigen::Index p = step.rows();
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(p, p);
    Eigen::MatrixXd base = transfer();
    while (k > 0) {
      if (k & 1) result = result * base;
      k >>= 1;
      if (k > 0) base = base * base;
    }
    return result;
  }

  /// N-step kernel on grid nodes: (step W)^{N-1} step.
  Eigen::MatrixXd n_step(int n) const { return transfer_power(n - 1) * step; }
};

namespace detail {

inline double step_kernel(const SliceConfig& cfg, double x, double x_prev) {
  const double eps = cfg.epsilon();
  const double dx = x - x_prev;
  return std::sqrt(cfg.mass / (2.0 * pi * cfg.hbar * eps)) *
         std::exp(-(cfg.mass * dx * dx / (2.0 * eps) + eps * cfg.potential(x_prev)) / cfg.hbar);
}

inline void check_resolution(const SliceConfig& cfg) {
  const double sigma = std::sqrt(cfg.hbar * cfg.epsilon() / cfg.mass);
  const double dx = cfg.grid.spacing();
  if (sigma < dx) {
    std::ostringstream os;
    os << "lattice too coarse: one-step kernel width " << sigma << " is below one grid cell ("
       << dx << "); add grid points or reduce slices";
    throw ResolutionError(os.str());
  }
}

}  // namespace detail

inline KernelMatrix lattice_kernel(const SliceConfig& cfg) {
  cfg.validate();
  detail::check_resolution(cfg);
  const int p = cfg.grid.points;
  KernelMatrix k;
  k.grid = cfg.grid;
  k.epsilon = cfg.epsilon();
  k.weights = Eigen::VectorXd::Constant(p, cfg.grid.spacing());
  k.weights(0) *= 0.5;
  k.weights(p - 1) *= 0.5;

  std::vector<double> xs(p), vs(p);
  for (int j = 0; j < p; ++j) {
    xs[j] = cfg.grid.at(j);
    vs[j] = cfg.potential(xs[j]);
    if (!std::isfinite(vs[j])) throw DomainError("potential is not finite on the grid");
  }
  k.step.resize(p, p);
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) k.step(i, j) = detail::step_kernel(cfg, xs[i], xs[j]);
  }
  return k;
}

/// Lattice value K_N(x_f, tau; x_i, 0). The endpoints need not be grid nodes:
/// the first and last steps are evaluated at the exact endpoints and only the
/// N-1 intermediate positions are summed over the grid.
inline double lattice_propagator(const SliceConfig& cfg, double x_i, double x_f) {
  cfg.validate();
  detail::check_resolution(cfg);
  if (cfg.slices == 1) return detail::step_kernel(cfg, x_f, x_i);
  const KernelMatrix k = lattice_kernel(cfg);
  const int p = cfg.grid.points;
  Eigen::VectorXd v(p);
  for (int j = 0; j < p; ++j) v(j) = detail::step_kernel(cfg, cfg.grid.at(j), x_i);
  const Eigen::MatrixXd m = k.transfer();
  for (int s = 0; s < cfg.slices - 2; ++s) v = m * v;
  double total = 0.0;
  for (int j = 0; j < p; ++j) total += k.weights(j) * detail::step_kernel(cfg, x_f, cfg.grid.at(j)) * v(j);
  return total;
}

struct PartitionResult {
  double value = 0.0;
  std::vector<std::string> warnings;
};

/// Z(beta) = Tr (step W)^N over the grid with tau = beta.
inline PartitionResult partition_function(SliceConfig cfg, double beta) {
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  cfg.tau = beta;
  PartitionResult out;
  out.warnings = cfg.validate();
  double v_min = INFINITY;
  for (int j = 0; j < cfg.grid.points; ++j) v_min = std::min(v_min, cfg.potential(cfg.grid.at(j)));
  const double v_edge = std::min(cfg.potential(cfg.grid.x_min), cfg.potential(cfg.grid.x_max));
  if (std::exp(-beta * (v_edge - v_min) / cfg.hbar) > 1e-6) {
    out.warnings.push_back("potential does not confine on the grid; trace includes boundary states");
  }
  const KernelMatrix k = lattice_kernel(cfg);
  out.value = k.transfer_power(cfg.slices).trace();
  return out;
}

// ---------------------------------------------------------------------------
// Trotter splitting

namespace detail {

inline void check_hermitian(const Eigen::MatrixXcd& m, const char* name) {
  if (m.rows() != m.cols()) throw ArgumentError(std::string(name) + " must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ArgumentError(std::string(name) + " is not Hermitian");
  }
}

/// exp(-i t H) for Hermitian H.
inline Eigen::MatrixXcd unitary_exp(const Eigen::MatrixXcd& h, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXcd phases =
      es.eigenvalues().unaryExpr([t](double e) { return std::exp(cplx(0.0, -t * e)); });
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline double spectral_norm(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

}  // namespace detail

inline constexpr int kMaxTrotterDim = 16;

struct TrotterDefect {
  double plain = 0.0;      // ||e^{-i eps (T+V)} - e^{-i eps T} e^{-i eps V}||
  double corrected = 0.0;  // same with the e^{A}, A = (eps^2/2)[T, V], factor appended
};

inline TrotterDefect trotter_defect_pair(const Eigen::MatrixXcd& t, const Eigen::MatrixXcd& v, double eps) {
  detail::check_hermitian(t, "T");
  detail::check_hermitian(v, "V");
  if (t.rows() != v.rows()) throw ArgumentError("T and V must have the same dimension");
  if (t.rows() > kMaxTrotterDim) throw ArgumentError("Trotter defect supports dimension <= 16");

  const Eigen::MatrixXcd exact = detail::unitary_exp(t + v, eps);
  const Eigen::MatrixXcd split = detail::unitary_exp(t, eps) * detail::unitary_exp(v, eps);
  // A = (eps^2/2)[T,V] is anti-Hermitian; A = -i H' with H' = i A Hermitian.
  const Eigen::MatrixXcd comm = t * v - v * t;
  const Eigen::MatrixXcd h_corr = kI * comm;
  const Eigen::MatrixXcd h_corr_sym = 0.5 * (h_corr + h_corr.adjoint());
  const Eigen::MatrixXcd correction = detail::unitary_exp(h_corr_sym, 0.5 * eps * eps);

  TrotterDefect d;
  d.plain = detail::spectral_norm(exact - split);
  d.corrected = detail::spectral_norm(exact - split * correction);
  return d;
}

inline double trotter_defect(const Eigen::MatrixXcd& t, const Eigen::MatrixXcd& v, double eps) {
  return trotter_defect_pair(t, v, eps).plain;
}

inline double commutator_norm(const Eigen::MatrixXcd& t, const Eigen::MatrixXcd& v) {
  return detail::spectral_norm(t * v - v * t);
}

struct TrotterSlopes {
  double plain = 0.0;
  double corrected = 0.0;
};

inline TrotterSlopes trotter_slopes(const Eigen::MatrixXcd& t, const Eigen::MatrixXcd& v,
                                    std::span<const double> eps_list) {
  std::vector<double> plain, corrected;
  for (double e : eps_list) {
    const TrotterDefect d = trotter_defect_pair(t, v, e);
    plain.push_back(d.plain);
    corrected.push_back(d.corrected);
  }
  return {quad::loglog_slope(eps_list, plain), quad::loglog_slope(eps_list, corrected)};
}

// ---------------------------------------------------------------------------
// Schrodinger residual

enum class PropagatorKind { free, harmonic };

struct ResidualParams {
  double mass = 1.0;
  double hbar = 1.0;
  double omega = 1.0;  // harmonic only
};

struct SpacetimePoint {
  double x_f = 0.0;
  double t_f = 1.0;
  double x_i = 0.0;
  double t_i = 0.0;
};

/// |i hbar dK/dt_f - H K| at the final point, central differences with step delta.
inline double schrodinger_residual(PropagatorKind kind, const SpacetimePoint& pt, double delta,
                                   const ResidualParams& prm = {}) {
  if (!(pt.t_f > pt.t_i)) throw DomainError("residual needs t_f > t_i");
  auto kernel = [&](double x, double t) -> cplx {
    const double dt = t - pt.t_i;
    if (kind == PropagatorKind::free) return free_propagator(prm.mass, prm.hbar, dt, pt.x_i, x);
    return ho_propagator(prm.mass, prm.hbar, prm.omega, dt, pt.x_i, x);
  };
  auto potential = [&](double x) {
    return kind == PropagatorKind::free ? 0.0 : 0.5 * prm.mass * prm.omega * prm.omega * x * x;
  };
  const cplx k0 = kernel(pt.x_f, pt.t_f);
  const cplx dk_dt = (kernel(pt.x_f, pt.t_f + delta) - kernel(pt.x_f, pt.t_f - delta)) / (2.0 * delta);
  const cplx d2k_dx2 =
      (kernel(pt.x_f + delta, pt.t_f) - 2.0 * k0 + kernel(pt.x_f - delta, pt.t_f)) / (delta * delta);
  const cplx hk = -prm.hbar * prm.hbar / (2.0 * prm.mass) * d2k_dx2 + potential(pt.x_f) * k0;
  return std::abs(kI * prm.hbar * dk_dt - hk);
}

}  // namespace indexforge::lattice
