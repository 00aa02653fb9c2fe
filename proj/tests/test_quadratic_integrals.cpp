#include <gtest/gtest.h>

#include "indexforge/quadratic_integrals.hpp"

using namespace indexforge;
using namespace indexforge::quadratic;
using cplx = std::complex<double>;
using std::numbers::pi;

namespace {

Eigen::MatrixXd diag(std::initializer_list<double> d) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v(i++) = x;
  return v.asDiagonal();
}

const cplx kI(0.0, 1.0);

}  // namespace

TEST(Gaussian, StandardValues) {
  EXPECT_NEAR(gaussian_nd(QuadraticForm(diag({1.0}))), std::sqrt(pi), 1e-14);
  EXPECT_NEAR(gaussian_nd(QuadraticForm(diag({1.0, 4.0}))), pi / 2.0, 1e-14);
  EXPECT_NEAR(gaussian_nd(QuadraticForm(diag({pi}))), 1.0, 1e-14);
}

TEST(Gaussian, ScalingLaw) {
  // int exp(-c x^T A x) = c^{-n/2} int exp(-x^T A x)
  Eigen::MatrixXd a(3, 3);
  a << 2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0;
  for (double c : {0.25, 3.0}) {
    EXPECT_NEAR(gaussian_nd(QuadraticForm(c * a)), std::pow(c, -1.5) * gaussian_nd(QuadraticForm(a)), 1e-12);
  }
}

TEST(Gaussian, RejectsIndefiniteFormAndNamesEigenvalue) {
  try {
    gaussian_nd(QuadraticForm(diag({1.0, -0.5})));
    FAIL() << "expected a domain error";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("-0.5"), std::string::npos) << e.what();
  }
  EXPECT_THROW(QuadraticForm(Eigen::MatrixXd(2, 3)), DimensionError);
}

TEST(Fresnel, ClosedForms) {
  EXPECT_LT(std::abs(fresnel_nd(QuadraticForm(diag({0.5}))) - std::polar(std::sqrt(2.0 * pi), pi / 4.0)), 1e-14);
  EXPECT_LT(std::abs(fresnel_nd(QuadraticForm(diag({pi, pi}))) - kI), 1e-14);
  EXPECT_LT(std::abs(fresnel_nd(QuadraticForm(diag({1.0, 2.0}))) - pi * kI / std::sqrt(2.0)), 1e-14);
}

TEST(Fresnel, ModulusEqualsRealGaussian) {
  Eigen::MatrixXd a(2, 2);
  a << 1.2, 0.4, 0.4, 0.9;
  const QuadraticForm q(a);
  EXPECT_NEAR(std::abs(fresnel_nd(q)), gaussian_nd(q), 1e-13);
}

TEST(Fresnel, DampedQuadratureOneDimension) {
  for (double a : {0.5, 1.0, 3.0}) {
    EXPECT_LT(std::abs(fresnel_1d_quadrature(a) - fresnel_nd(QuadraticForm(diag({a})))), 1e-10) << a;
  }
}

TEST(Fresnel, DampedQuadratureTwoDimensions) {
  EXPECT_LT(std::abs(fresnel_nd_quadrature(diag({1.0, 2.0})) - pi * kI / std::sqrt(2.0)), 1e-8);
}

TEST(FresnelLinear, ClosedForms) {
  const cplx base = std::sqrt(2.0 * pi / kI);
  EXPECT_LT(std::abs(fresnel_linear(1.0, 0.0) - base), 1e-14);
  EXPECT_LT(std::abs(fresnel_linear(1.0, kI) - base * std::exp(0.5 * kI)), 1e-14);
  EXPECT_LT(std::abs(fresnel_linear(2.0, 0.0) - std::sqrt(pi / kI)), 1e-14);
}

TEST(FresnelLinear, QuadratureAgreesOnImaginaryAxis) {
  EXPECT_LT(std::abs(fresnel_linear_quadrature(1.0, kI) - fresnel_linear(1.0, kI)), 1e-10);
  EXPECT_LT(std::abs(fresnel_linear_quadrature(-1.5, 0.3 * kI) - fresnel_linear(-1.5, 0.3 * kI)), 1e-10);
}

TEST(FresnelLinear, DomainErrors) {
  EXPECT_THROW(fresnel_linear(0.0, 1.0), DomainError);
  EXPECT_THROW(fresnel_linear_quadrature(1.0, cplx(0.5, 0.0)), DomainError);
}

TEST(Fresnel, ArcContributionBound) {
  // |int_arc exp(i a z^2) dz| <= pi / (4 a R)
  for (double r : {10.0, 100.0}) {
    const double mag = fresnel_arc_magnitude(1.0, r);
    EXPECT_LE(mag, fresnel_arc_bound(1.0, r)) << r;
    EXPECT_GT(mag, 0.0);
  }
}
