#pragma once

// Multivariate Gaussian and Fresnel integrals in closed form, together with
// the damped-quadrature routes used to check them.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "indexforge/errors.hpp"
#include "indexforge/quadrature.hpp"

namespace indexforge::quadratic {

using cplx = std::complex<double>;
using std::numbers::pi;

/// Symmetric matrix with its spectrum and determinant cached.
class QuadraticForm {
 public:
  explicit QuadraticForm(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
      throw DimensionError("quadratic form needs a non-empty square matrix");
    }
    const double asym = (matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-14 * std::max(1.0, matrix_.cwiseAbs().maxCoeff())) {
      throw ArgumentError("quadratic form matrix is not symmetric (max |A - A^T| = " +
                          std::to_string(asym) + ")");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix_, Eigen::EigenvaluesOnly);
    eigenvalues_ = es.eigenvalues();
    det_ = eigenvalues_.prod();
    positive_definite_ = eigenvalues_.minCoeff() > 0.0;
  }

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  double det() const { return det_; }
  bool positive_definite() const { return positive_definite_; }

  void require_positive_definite(const char* op) const {
    if (positive_definite_) return;
    std::ostringstream os;
    os << op << " requires a positive-definite form; eigenvalue " << eigenvalues_.minCoeff()
       << " is not positive";
    throw DomainError(os.str());
  }

 private:
  Eigen::MatrixXd matrix_;
  Eigen::VectorXd eigenvalues_;
  double det_ = 0.0;
  bool positive_definite_ = false;
};

/// int d^n x exp(-x^T A x) = pi^{n/2} / sqrt(det A).
inline double gaussian_nd(const QuadraticForm& a) {
  a.require_positive_definite("gaussian_nd");
  return std::pow(pi, 0.5 * a.dim()) / std::sqrt(a.det());
}

/// int d^n x exp(i x^T A x) = (pi i)^{n/2} / sqrt(det A), with i^{1/2} = e^{i pi/4}.
inline cplx fresnel_nd(const QuadraticForm& a) {
  a.require_positive_definite("fresnel_nd");
  const double n = a.dim();
  return std::polar(std::pow(pi, 0.5 * n) / std::sqrt(a.det()), pi * n / 4.0);
}

/// int dx exp(-(i/2) a x^2 + b x) = sqrt(2 pi / (a i)) exp(-i b^2 / (2a)).
inline cplx fresnel_linear(double a, cplx b) {
  if (a == 0.0) throw DomainError("fresnel_linear requires a != 0");
  const cplx i(0.0, 1.0);
  return std::sqrt(2.0 * pi / (a * i)) * std::exp(-i * b * b / (2.0 * a));
}

// ---------------------------------------------------------------------------
// Quadrature routes. Kept alongside the closed forms because the CLI reports
// both; none of them consult det A or the eigenvalues.

/// Damped quadrature of int dx exp(i a x^2), a > 0.
inline cplx fresnel_1d_quadrature(double a) {
  const cplx i(0.0, 1.0);
  if (a == 0.0) throw DomainError("fresnel quadrature requires a != 0");
  return quad::damped_real_line_integral([&](double x) { return std::exp(i * a * x * x); },
                                         [&](double x_max) { return 2.0 * std::abs(a) * x_max; },
                                         std::abs(a));
}

/// Damped quadrature of int d^n x exp(i x^T A x) for n = 1 or 2. In two
/// dimensions the plane is swept in polar coordinates: an angular trapezoid
/// rule (exact for the smooth periodic integrand) around radial quadratures.
inline cplx fresnel_nd_quadrature(const Eigen::MatrixXd& a) {
  const cplx i(0.0, 1.0);
  if (a.rows() == 1) return fresnel_1d_quadrature(a(0, 0));
  if (a.rows() != 2) throw DimensionError("fresnel quadrature supports n <= 2");

  // Each ray contributes int_0^inf r exp(i q r^2) dr with q = u^T A u; the
  // damping on a ray is scaled by |q| so every ray extrapolates alike.
  constexpr int kAngles = 32;
  cplx total{};
  for (int j = 0; j < kAngles; ++j) {
    const double th = 2.0 * pi * (j + 0.5) / kAngles;
    const double c = std::cos(th), s = std::sin(th);
    const double q = a(0, 0) * c * c + (a(0, 1) + a(1, 0)) * c * s + a(1, 1) * s * s;
    if (std::abs(q) < 1e-12) throw DomainError("fresnel quadrature hit a null direction of the form");
    std::array<cplx, quad::kDampings.size()> values{};
    for (std::size_t k = 0; k < quad::kDampings.size(); ++k) {
      const double delta = quad::kDampings[k] * std::abs(q);
      const double cutoff = std::sqrt(40.0 / delta);
      auto radial = [&](double r) { return r * std::exp((i * q - delta) * r * r); };
      quad::ConvergenceOptions opt;
      opt.initial_panels = quad::panels_for_rate(2.0 * std::abs(q) * cutoff, cutoff, 4.0);
      opt.rel_tol = 1e-12;
      values[k] = quad::integrate(radial, 0.0, cutoff, opt);
    }
    total += quad::extrapolate_to_zero<cplx>(quad::kDampings, values);
  }
  return total * (2.0 * pi / kAngles);
}

/// Damped quadrature of int dx exp(-(i/2) a x^2 + b x). For Re b != 0 the
/// integrand grows along the real line and only the closed form (an analytic
/// continuation) exists, so the quadrature route needs b on the imaginary axis.
inline cplx fresnel_linear_quadrature(double a, cplx b) {
  if (a == 0.0) throw DomainError("fresnel_linear requires a != 0");
  if (b.real() != 0.0) throw DomainError("fresnel_linear quadrature needs Re b = 0; the integral diverges otherwise");
  const cplx i(0.0, 1.0);
  return quad::damped_real_line_integral(
      [&](double x) { return std::exp(-0.5 * i * a * x * x + b * x); },
      [&](double x_max) { return std::abs(a) * x_max + std::abs(b.imag()); }, 0.5 * std::abs(a));
}

/// |int over the circular arc z = R e^{it}, t in [0, pi/4]| of exp(i a z^2),
/// evaluated by quadrature. Bounded above by pi / (4 a R).
inline double fresnel_arc_magnitude(double a, double radius) {
  const cplx i(0.0, 1.0);
  auto arc = [&](double t) {
    const cplx z = std::polar(radius, t);
    return i * z * std::exp(i * a * z * z);
  };
  quad::ConvergenceOptions opt;
  opt.initial_panels = quad::panels_for_rate(2.0 * a * radius * radius, pi / 4.0);
  return std::abs(quad::integrate(arc, 0.0, pi / 4.0, opt));
}

inline double fresnel_arc_bound(double a, double radius) { return pi / (4.0 * a * radius); }

}  // namespace indexforge::quadratic
