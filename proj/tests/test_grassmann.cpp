#include <gtest/gtest.h>

#include <bit>
#include <random>

#include "indexforge/grassmann.hpp"
#include "indexforge/testing/oracle.hpp"

using namespace indexforge;
using namespace indexforge::grassmann;
using cplx = std::complex<double>;

namespace {

GrassmannElement g(int n, int i) { return GrassmannElement::generator(n, i); }
GrassmannElement one(int n) { return GrassmannElement::scalar(n, 1.0); }

GrassmannElement random_homogeneous(std::mt19937_64& rng, int n, int degree) {
  std::uniform_int_distribution<int> coef(-4, 4);
  GrassmannElement e(n);
  for (Mask m = 0; m < (1u << n); ++m) {
    if (std::popcount(m) == degree) e.add_term(m, static_cast<double>(coef(rng)));
  }
  return e;
}

}  // namespace

TEST(GrassmannProduct, Anticommutes) {
  EXPECT_EQ(g(2, 0) * g(2, 1), GrassmannElement::monomial(2, {0, 1}));
  EXPECT_EQ(g(2, 1) * g(2, 0), GrassmannElement::monomial(2, {0, 1}, -1.0));
}

TEST(GrassmannProduct, GeneratorsAreNilpotent) { EXPECT_TRUE((g(1, 0) * g(1, 0)).is_zero()); }

TEST(GrassmannProduct, ExpandsByDistributivity) {
  // (1 + psi1)(1 + psi2) = 1 + psi1 + psi2 + psi1 psi2
  const auto lhs = (one(2) + g(2, 0)) * (one(2) + g(2, 1));
  const auto rhs = one(2) + g(2, 0) + g(2, 1) + GrassmannElement::monomial(2, {0, 1});
  EXPECT_EQ(lhs, rhs);
}

TEST(GrassmannProduct, MismatchedAlgebrasAreRejected) {
  EXPECT_THROW(gr_mul(g(2, 0), g(3, 0)), DimensionError);
}

TEST(GrassmannProduct, AssociativeOnRandomTriples) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> coef(-3, 3);
  for (int k = 0; k < 30; ++k) {
    GrassmannElement e[3] = {GrassmannElement(5), GrassmannElement(5), GrassmannElement(5)};
    for (auto& x : e)
      for (Mask m = 0; m < 32; ++m) x.add_term(m, static_cast<double>(coef(rng)));
    EXPECT_EQ((e[0] * e[1]) * e[2], e[0] * (e[1] * e[2]));
  }
}

TEST(GrassmannProduct, GradedCommutativity) {
  // a b = (-1)^{deg a deg b} b a for homogeneous a, b
  std::mt19937_64 rng(5);
  for (int da = 0; da <= 3; ++da) {
    for (int db = 0; db <= 3; ++db) {
      const auto a = random_homogeneous(rng, 6, da);
      const auto b = random_homogeneous(rng, 6, db);
      const double sign = (da * db) % 2 ? -1.0 : 1.0;
      EXPECT_EQ(a * b, (b * a) * cplx(sign)) << "degrees " << da << ", " << db;
    }
  }
}

TEST(Berezin, SingleGenerator) {
  // int dpsi = 0, int psi dpsi = 1
  EXPECT_EQ(berezin_integrate(one(1), {0}), cplx(0.0));
  EXPECT_EQ(berezin_integrate(g(1, 0), {0}), cplx(1.0));
}

TEST(Berezin, PicksTopComponent) {
  const auto f = GrassmannElement::scalar(2, 3.0) + GrassmannElement::monomial(2, {0, 1}, 5.0);
  EXPECT_EQ(berezin_integrate(f, {0, 1}), cplx(5.0));
}

TEST(Berezin, TopFormPermutationSign) {
  // int psi_{s(1)} ... psi_{s(n)} dpsi_1 ... dpsi_n = sgn(s)
  std::vector<int> perm{0, 1, 2, 3};
  do {
    int inversions = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) inversions += perm[i] > perm[j];
    auto top = one(4);
    for (int i : perm) top = top * g(4, i);
    EXPECT_EQ(berezin_integrate(top, {0, 1, 2, 3}), cplx(inversions % 2 ? -1.0 : 1.0));
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST(Berezin, DuplicateIndexIsRejected) {
  EXPECT_THROW(berezin_integrate(GrassmannElement::monomial(2, {0, 1}), {0, 0}), ArgumentError);
}

TEST(GrassmannExp, Identity) { EXPECT_EQ(gr_exp(GrassmannElement(2)), one(2)); }

TEST(GrassmannExp, TruncatesAfterFirstOrder) {
  const auto x = GrassmannElement::monomial(2, {0, 1}, 2.5);
  EXPECT_EQ(gr_exp(x), one(2) + x);
}

TEST(GrassmannExp, CrossTermFromSquare) {
  // exp(psi1 psi2 + psi3 psi4) = 1 + psi1 psi2 + psi3 psi4 + psi1 psi2 psi3 psi4
  const auto a = GrassmannElement::monomial(4, {0, 1});
  const auto b = GrassmannElement::monomial(4, {2, 3});
  EXPECT_EQ(gr_exp(a + b), one(4) + a + b + GrassmannElement::monomial(4, {0, 1, 2, 3}));
}

TEST(GrassmannExp, OddExponentIsRejected) { EXPECT_THROW(gr_exp(g(2, 0)), ArgumentError); }

TEST(GrassmannGaussian, SmallCases) {
  EXPECT_NEAR(std::abs(grassmann_gaussian(Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 2))) - 1.0), 0.0, 1e-15);
  Eigen::MatrixXd d(2, 2);
  d << 2, 0, 0, 3;
  EXPECT_NEAR(std::abs(grassmann_gaussian(d) - 6.0), 0.0, 1e-14);
  Eigen::MatrixXd a(1, 1);
  a << -1.75;
  EXPECT_NEAR(std::abs(grassmann_gaussian(a) - (-1.75)), 0.0, 1e-15);
}

TEST(GrassmannGaussian, MatchesCofactorDeterminant) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 50; ++k) {
    const int n = 1 + k % 4;
    Eigen::MatrixXcd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = cplx(nd(rng), nd(rng));
    const cplx ref = oracle::cofactor_determinant(a);
    EXPECT_LT(std::abs(grassmann_gaussian(a) - ref) / std::abs(ref), 1e-12);
  }
}

TEST(GrassmannGaussian, CapacityLimit) {
  EXPECT_THROW(grassmann_gaussian(Eigen::MatrixXd(Eigen::MatrixXd::Identity(kMaxGaussianDim + 1, kMaxGaussianDim + 1))),
               CapacityError);
}
