#include <gtest/gtest.h>

#include <random>

#include "indexforge/gauss_bonnet.hpp"
#include "indexforge/testing/oracle.hpp"

using namespace indexforge;
using namespace indexforge::gauss_bonnet;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using geometry::ParametricChart;
using std::numbers::pi;

namespace {

VectorXd random_point(const ParametricChart& c, std::mt19937_64& rng) {
  VectorXd x(c.dim);
  for (int k = 0; k < c.dim; ++k) {
    std::uniform_real_distribution<double> u(c.lo(k) + 0.05 * c.span(k), c.hi(k) - 0.05 * c.span(k));
    x(k) = u(rng);
  }
  return x;
}

EulerResult chi_of(const ParametricChart& c, std::vector<int> res, unsigned threads = 0) {
  EulerOptions opt;
  opt.resolution = std::move(res);
  opt.threads = threads;
  return integrate_euler_characteristic(c, opt);
}

}  // namespace

TEST(EulerDensity, SurfaceDensityIsCurvatureOverTwoPi) {
  std::mt19937_64 rng(7);
  for (const auto& c : {geometry::sphere(1.0), geometry::sphere(2.5), geometry::torus(3.0, 1.0)}) {
    for (int i = 0; i < 100; ++i) {
      const VectorXd x = random_point(c, rng);
      EXPECT_NEAR(euler_density(c, x), geometry::gaussian_curvature(c, x) / (2.0 * pi), 1e-8) << c.name;
    }
  }
}

TEST(EulerDensity, FlatTorusVanishes) {
  std::mt19937_64 rng(3);
  const auto c = geometry::flat_torus();
  for (int i = 0; i < 20; ++i) EXPECT_NEAR(euler_density(c, random_point(c, rng)), 0.0, 1e-10);
}

TEST(EulerDensity, ProductOfSpheresFactorizes) {
  const auto a = geometry::sphere(1.0);
  const auto b = geometry::sphere(1.0);
  const auto ab = geometry::product(a, b);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 10; ++i) {
    const VectorXd x = random_point(ab, rng);
    const double expected = euler_density(a, x.head(2)) * euler_density(b, x.tail(2));
    EXPECT_NEAR(euler_density(ab, x), expected, 1e-6 * std::max(1.0, std::abs(expected)));
  }
}

TEST(EulerDensity, OddDimensionIsRejected) {
  auto c = geometry::detail::make_chart("cube", {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, {false, false, false});
  c.metric = [](const VectorXd&) { return MatrixXd(MatrixXd::Identity(3, 3)); };
  EXPECT_THROW(euler_density(c, VectorXd::Constant(3, 0.5)), DimensionError);
  EXPECT_EQ(odd_dimension_chi(1), 0);
  EXPECT_EQ(odd_dimension_chi(3), 0);
  EXPECT_THROW(odd_dimension_chi(2), ArgumentError);
}

TEST(EulerIntegral, SphereAndTorus) {
  const auto s = chi_of(geometry::sphere(1.0), {200});
  EXPECT_EQ(s.chi_rounded, 2);
  EXPECT_LT(s.residual, 1e-3);
  const auto t = chi_of(geometry::torus(3.0, 1.0), {200});
  EXPECT_EQ(t.chi_rounded, 0);
  EXPECT_LT(t.residual, 1e-3);
}

TEST(EulerIntegral, ScaleInvariant) {
  for (double c : {0.5, 2.0}) {
    const auto r = chi_of(geometry::scaled(geometry::sphere(1.0), c), {200});
    EXPECT_EQ(r.chi_rounded, 2) << c;
    EXPECT_LT(r.residual, 1e-3) << c;
  }
}

TEST(EulerIntegral, ResidualShrinksWithResolution) {
  EulerOptions opt;
  opt.fail_residual = 1.0;
  opt.resolution = {6};
  const double coarse = integrate_euler_characteristic(geometry::sphere(1.0), opt).residual;
  opt.resolution = {12};
  const double fine = integrate_euler_characteristic(geometry::sphere(1.0), opt).residual;
  EXPECT_GT(coarse, 0.0);
  EXPECT_LE(fine, coarse / 4.0) << coarse << " -> " << fine;
}

TEST(EulerIntegral, ProductOfSpheresMatchesKunneth) {
  const int expected = oracle::euler_from_betti(oracle::kunneth({1, 0, 1}, {1, 0, 1}));
  const auto r = chi_of(geometry::product(geometry::sphere(1.0), geometry::sphere(1.0)), {24, 8, 24, 8});
  EXPECT_EQ(r.chi_rounded, expected);
}

TEST(EulerIntegral, WrongNormalizationIsDetected) {
  EulerOptions opt;
  opt.prefactor_scale = 1.5;
  EXPECT_THROW(integrate_euler_characteristic(geometry::sphere(1.0), opt), IntegrationError);
}

TEST(EulerIntegral, ThreadCountDoesNotChangeResult) {
  const auto one = chi_of(geometry::torus(3.0, 1.0), {80}, 1);
  const auto three = chi_of(geometry::torus(3.0, 1.0), {80}, 3);
  EXPECT_EQ(one.chi_raw, three.chi_raw);
}
