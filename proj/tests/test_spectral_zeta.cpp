#include <gtest/gtest.h>

#include <random>

#include "indexforge/spectral_zeta.hpp"
#include "indexforge/testing/oracle.hpp"

using namespace indexforge;
using namespace indexforge::zeta;
using cplx = std::complex<double>;
using std::numbers::pi;

TEST(SpectralProblem, EigenvaluesAndValidation) {
  const SpectralProblem p(2.0, 3.0);
  EXPECT_DOUBLE_EQ(p.eigenvalue(1), pi * pi / 4.0 + 9.0);
  EXPECT_THROW(SpectralProblem(0.0, 1.0), DomainError);
  EXPECT_THROW(SpectralProblem(-1.0, 1.0), DomainError);
  EXPECT_THROW(SpectralProblem(1.0, -0.1), DomainError);
}

TEST(ZetaDeterminant, FreeAndMassive) {
  // det(-d^2) = 2 dtau, det(-d^2 + w^2) = 2 sinh(w dtau) / w
  EXPECT_NEAR(zeta_det(SpectralProblem(1.0, 0.0)), 2.0, 1e-14);
  EXPECT_NEAR(zeta_det(SpectralProblem(1.0, 1.0)), 2.0 * std::sinh(1.0), 1e-14);
  EXPECT_NEAR(zeta_det(SpectralProblem(3.0, 1e-9)), 6.0, 1e-12);
}

TEST(ZetaDeterminant, MatchesZetaFunctionOracle) {
  // Oracle: exp(-zeta'(0)) of the spectrum, built from the Riemann zeta
  // function and an extrapolated infinite product.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> len(0.2, 4.0), freq(0.05, 2.5);
  for (int k = 0; k < 20; ++k) {
    const double dtau = len(rng), omega = freq(rng);
    EXPECT_NEAR(zeta_det(SpectralProblem(dtau, 0.0)) / oracle::free_zeta_determinant(dtau), 1.0, 1e-12);
    EXPECT_NEAR(zeta_det(SpectralProblem(dtau, omega)) / oracle::massive_zeta_determinant(dtau, omega), 1.0, 1e-12);
  }
}

TEST(ZetaDeterminant, RegularizedRatioEqualsUnregularized) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> len(0.2, 4.0), freq(0.05, 2.5);
  for (int k = 0; k < 20; ++k) {
    const double dtau = len(rng), omega = freq(rng);
    const double ratio = zeta_det(SpectralProblem(dtau, omega)) / zeta_det(SpectralProblem(dtau, 0.0));
    EXPECT_NEAR(ratio * det_ratio(dtau, omega, 1).closed, 1.0, 1e-12);
  }
}

TEST(DetRatio, IdenticalSpectra) {
  const auto r = det_ratio(1.5, 0.0, 1000);
  EXPECT_EQ(r.closed, 1.0);
  EXPECT_EQ(r.truncated, 1.0);
}

TEST(DetRatio, TruncatedProductConverges) {
  const auto r = det_ratio(1.0, 2.0, 100000);
  EXPECT_NEAR(r.closed, 2.0 / std::sinh(2.0), 1e-14);
  EXPECT_NEAR(r.truncated, r.closed, 1e-4);
}

TEST(DetRatio, TailShrinksLikeOneOverN) {
  double prev = 0.0;
  for (std::int64_t n : {1000, 2000, 4000, 8000}) {
    const auto r = det_ratio(1.0, 2.0, n);
    const double err = std::abs(r.truncated - r.closed);
    if (prev > 0.0) {
      EXPECT_GE(prev / err, 1.8);
      EXPECT_LE(prev / err, 2.2);
    }
    prev = err;
  }
  EXPECT_THROW(det_ratio(1.0, 2.0, 0), DomainError);
}

TEST(DetRatio, RealTimeContinuation) {
  // dtau = i t turns w dtau / sinh(w dtau) into w t / sin(w t)
  for (double t : {0.3, 1.0, 2.5}) {
    const double omega = 1.2;
    EXPECT_LT(std::abs(det_ratio_closed(cplx(0.0, t), omega) - omega * t / std::sin(omega * t)), 1e-13);
  }
}

TEST(ConstantProduct, PrincipalBranch) {
  // prod_n b = b^{zeta(0)} = b^{-1/2}
  EXPECT_LT(std::abs(zeta_reg_constant_product(1.0) - 1.0), 1e-15);
  EXPECT_LT(std::abs(zeta_reg_constant_product(4.0) - 0.5), 1e-15);
  EXPECT_LT(std::abs(zeta_reg_constant_product(cplx(0.0, 1.0)) - std::polar(1.0, -pi / 4.0)), 1e-15);
  EXPECT_THROW(zeta_reg_constant_product(0.0), DomainError);
}

TEST(ConstantProduct, ReciprocalIdentity) {
  for (cplx b : {cplx(2.0, 0.0), cplx(0.3, -1.7), cplx(-5.0, 0.1)}) {
    EXPECT_LT(std::abs(zeta_reg_constant_product(b) * zeta_reg_constant_product(1.0 / b) - 1.0), 1e-12);
    EXPECT_LT(std::abs(zeta_reg_constant_product(b) - oracle::regularized_constant_product(b)), 1e-12);
  }
}
