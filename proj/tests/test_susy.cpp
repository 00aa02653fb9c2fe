#include <gtest/gtest.h>

#include <algorithm>

#include "indexforge/susy_witten.hpp"
#include "indexforge/testing/oracle.hpp"

using namespace indexforge;
using namespace indexforge::susy;

namespace {

GradedSpectrum spectrum(const Superpotential& w) { return build_susy_hamiltonians(w, default_grid(w)); }

}  // namespace

TEST(SusySpectrum, HarmonicLevels) {
  const auto s = spectrum(harmonic());
  for (int k = 0; k < 6; ++k) {
    EXPECT_NEAR(s.bosonic[k], k, 1e-3);
    EXPECT_NEAR(s.fermionic[k], k + 1, 1e-3);
  }
}

TEST(SusySpectrum, InvertedSwapsSectors) {
  const auto s = spectrum(inverted());
  for (int k = 0; k < 6; ++k) {
    EXPECT_NEAR(s.fermionic[k], k, 1e-3);
    EXPECT_NEAR(s.bosonic[k], k + 1, 1e-3);
  }
}

TEST(SusySpectrum, QuarticLevelsPair) {
  EXPECT_LT(pairing_max_gap(spectrum(quartic())), kPairingTol);
}

TEST(WittenIndex, Presets) {
  EXPECT_EQ(witten_index(harmonic(), default_grid(harmonic())).index, 1);
  EXPECT_EQ(witten_index(inverted(), default_grid(inverted())).index, -1);
  EXPECT_EQ(witten_index(cubic(), default_grid(cubic())).index, 0);
  EXPECT_EQ(witten_index(quartic(), default_grid(quartic())).index, 1);
  EXPECT_EQ(witten_index(deformed(), default_grid(deformed())).index, 1);
}

TEST(WittenIndex, AgreesWithZeroModeNormalizability) {
  for (const auto& w : {harmonic(), inverted(), cubic(), deformed()}) {
    EXPECT_EQ(witten_index(w, default_grid(w)).index, oracle::zero_mode_index(w.h)) << w.name;
  }
}

TEST(WittenTrace, IndependentOfBeta) {
  const std::vector<double> betas{0.5, 1.0, 2.0, 5.0};
  const auto h = witten_trace(spectrum(harmonic()), betas);
  const auto c = witten_trace(spectrum(cubic()), betas);
  for (std::size_t i = 0; i < betas.size(); ++i) {
    EXPECT_NEAR(h[i], 1.0, 1e-3) << betas[i];
    EXPECT_NEAR(c[i], 0.0, 1e-3) << betas[i];
  }
  const auto [lo, hi] = std::minmax_element(h.begin(), h.end());
  EXPECT_LT(*hi - *lo, 1e-3);
}

TEST(WittenTrace, RejectsNonPositiveBeta) {
  EXPECT_THROW(witten_trace(spectrum(harmonic()), {0.0}), DomainError);
}

TEST(WittenTrace, SmallBetaTailIsReported) {
  EXPECT_THROW(witten_trace(spectrum(harmonic()), {0.01}), TruncationError);
}

TEST(SusySpectrum, NarrowWindowWarns) {
  const auto s = build_susy_hamiltonians(harmonic(), {-3.0, 3.0, 400});
  EXPECT_FALSE(s.warnings.empty());
  EXPECT_TRUE(spectrum(harmonic()).warnings.empty());
}

TEST(Localization, CriticalPointCount) {
  const auto lin = localization_partition(*localization_preset("linear"), -8.0, 8.0);
  EXPECT_NEAR(lin.quadrature, 1.0, 1e-8);
  EXPECT_EQ(lin.critical_sum, 1);

  const auto none = localization_partition(*localization_preset("no_critical"), -3.0, 3.0);
  EXPECT_NEAR(none.quadrature, 0.0, 1e-8);
  EXPECT_EQ(none.critical_sum, 0);

  const auto cub = localization_partition(*localization_preset("cubic"), -3.0, 3.0);
  EXPECT_NEAR(cub.quadrature, 1.0, 1e-8);
  EXPECT_EQ(cub.critical_sum, 1);
  EXPECT_EQ(cub.critical_points.size(), 3u);
}

TEST(Localization, WindowIndependent) {
  const auto w = *localization_preset("cubic");
  EXPECT_NEAR(localization_partition(w, -3.0, 3.0).quadrature, localization_partition(w, -4.0, 5.0).quadrature,
              1e-8);
}

TEST(Localization, ShallowWindowEdgeIsRejected) {
  EXPECT_THROW(localization_partition(harmonic(), -2.0, 2.0), DomainError);
}

TEST(Localization, BerezinWeight) {
  EXPECT_NEAR(berezin_weight(0.7, 2.5), 2.5 * std::exp(-0.7), 1e-15);
  EXPECT_NEAR(berezin_weight(3.0, -1.0), -std::exp(-3.0), 1e-15);
}
