#include <gtest/gtest.h>

#include <random>

#include "indexforge/riemann_geometry.hpp"
#include "indexforge/testing/oracle.hpp"

using namespace indexforge;
using namespace indexforge::geometry;
using std::numbers::pi;

namespace {

VectorXd pt(double a, double b) {
  VectorXd x(2);
  x << a, b;
  return x;
}

}  // namespace

TEST(Christoffel, FlatCartesianPlaneVanishes) {
  EXPECT_EQ(christoffel(plane_cartesian(), pt(0.2, -0.5)).max_abs(), 0.0);
  EXPECT_LT(riemann_tensor(plane_cartesian(), pt(0.2, -0.5)).riemann_down.max_abs(), 1e-8);
}

TEST(Christoffel, PolarPlane) {
  const auto g = christoffel(plane_polar(), pt(1.3, 0.4));
  EXPECT_NEAR(g(0, 1, 1), -1.3, 1e-8);       // Gamma^r_{theta theta} = -r
  EXPECT_NEAR(g(1, 0, 1), 1.0 / 1.3, 1e-8);  // Gamma^theta_{r theta} = 1/r
  EXPECT_NEAR(g(1, 1, 0), 1.0 / 1.3, 1e-8);
  EXPECT_LT(riemann_tensor(plane_polar(), pt(1.3, 0.4)).riemann_down.max_abs(), 1e-8);
}

TEST(Christoffel, UnitSphere) {
  const double th = 0.8;
  EXPECT_NEAR(christoffel(sphere(), pt(th, 2.0))(0, 1, 1), -std::sin(th) * std::cos(th), 1e-8);
}

TEST(Christoffel, VanishAtOriginOfNormalCoordinates) {
  EXPECT_LT(christoffel(sphere_normal(), pt(0.0, 0.0)).max_abs(), 1e-9);
  EXPECT_NEAR(gaussian_curvature(sphere_normal(), pt(0.0, 0.0)), 1.0, 1e-6);
}

TEST(Christoffel, SingularMetricIsDomainError) {
  ParametricChart c = plane_polar();
  c.lo(0) = 0.0;
  EXPECT_THROW(christoffel(c, pt(0.0, 1.0)), DomainError);
  EXPECT_THROW(christoffel(plane_polar(), pt(3.0, 1.0)), DomainError);
  EXPECT_THROW(christoffel(plane_polar(), VectorXd::Zero(3)), DimensionError);
}

TEST(Riemann, SphereComponent) {
  for (double th : {0.3, 1.1, 2.6}) {
    EXPECT_NEAR(riemann_tensor(sphere(), pt(th, 0.5)).riemann_down(0, 1, 0, 1), std::sin(th) * std::sin(th), 1e-8);
  }
}

TEST(Riemann, SymmetriesAndMetricCompatibility) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const ParametricChart charts[] = {sphere(1.7), torus(2.0, 1.0), sphere_normal(),
                                    product(sphere(1.0), torus(3.0, 1.0))};
  for (const auto& c : charts) {
    for (int k = 0; k < 10; ++k) {
      VectorXd x(c.dim);
      for (int i = 0; i < c.dim; ++i) x(i) = c.lo(i) + (0.05 + 0.9 * u(rng)) * c.span(i);
      const auto cs = riemann_tensor(c, x);
      EXPECT_LT(cs.residuals.max_identity(), 1e-6) << c.name;
      EXPECT_LT(cs.residuals.metric_compatibility, 1e-6) << c.name;
    }
  }
}

TEST(GaussianCurvature, SphereTorusAndPlane) {
  for (int k = 0; k < 20; ++k) {
    const auto x = pt(0.1 + 2.9 * k / 19.0, 0.3 * k);
    EXPECT_NEAR(gaussian_curvature(sphere(), x), 1.0, 1e-5);
    EXPECT_NEAR(gaussian_curvature(sphere(2.0), x), 0.25, 1e-5);
    const auto y = pt(0.3 * k, 2.0 * pi * k / 20.0);
    EXPECT_NEAR(gaussian_curvature(torus(2.0, 1.0), y), torus_gaussian_curvature(2.0, 1.0, y(1)), 1e-5);
  }
  EXPECT_NEAR(gaussian_curvature(plane_cartesian(), pt(0.1, 0.1)), 0.0, 1e-12);
}

TEST(GaussianCurvature, AgreesWithBrioschiFormula) {
  const auto t = torus(3.0, 1.2);
  for (double v : {0.0, 1.0, 2.5, 4.0}) {
    EXPECT_NEAR(gaussian_curvature(t, pt(0.7, v)), oracle::brioschi_curvature(t.metric, pt(0.7, v)), 1e-6);
  }
  EXPECT_NEAR(gaussian_curvature(sphere_normal(), pt(0.3, -0.4)),
              oracle::brioschi_curvature(sphere_normal().metric, pt(0.3, -0.4)), 1e-6);
}

TEST(GaussianCurvature, NeedsTwoDimensions) {
  VectorXd x(4);
  x << 1.0, 0.5, 1.0, 0.5;
  EXPECT_THROW(gaussian_curvature(product(sphere(), sphere()), x), DimensionError);
}

TEST(ChartPresets, ParseAndReject) {
  EXPECT_EQ(chart_preset("torus:3,1").dim, 2);
  EXPECT_EQ(chart_preset("sphere_x_sphere").dim, 4);
  EXPECT_NEAR(gaussian_curvature(chart_preset("sphere:2"), pt(1.0, 1.0)), 0.25, 1e-5);
  EXPECT_THROW(chart_preset("klein_bottle"), ArgumentError);
  EXPECT_THROW(chart_preset("torus:1,2"), DomainError);
}
