#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "hcm/errors.hpp"
#include "hcm/lon.hpp"
#include "test_support.hpp"

using namespace hcm;

TEST(CrossCorrelationLon, FourteenEightySixIsLossless) {
    const auto lon = make_cross_correlation_lon(std::sqrt(0.14), complex(0.0, std::sqrt(0.86)));
    EXPECT_NEAR(lon.row_norm_squared(1), 1.0, 1e-15);
    EXPECT_NEAR(lon.row_norm_squared(2), 1.0, 1e-15);
    EXPECT_EQ(lon(1, 1), lon(2, 2));
    EXPECT_EQ(lon(1, 2), lon(2, 1));
    EXPECT_EQ(lon(1, 3), complex{});
}

TEST(CrossCorrelationLon, TransparentSplitterRoutesSignalToFirstDetector) {
    const auto lon = make_cross_correlation_lon(1.0, 0.0);
    const LocalOscillator lo{3.0, 0.0};
    EXPECT_EQ(output_amplitude(lon, 1, complex(2.0, 1.0), lo), complex(2.0, 1.0));
    EXPECT_EQ(output_amplitude(lon, 2, complex(2.0, 1.0), lo), complex(3.0, 0.0));
}

TEST(CrossCorrelationLon, RejectsLosslessRealPhases) {
    EXPECT_THROW(make_cross_correlation_lon(std::sqrt(0.5), std::sqrt(0.5)), DomainError);
}

TEST(CrossCorrelationLon, RejectsGain) {
    EXPECT_THROW(make_cross_correlation_lon(0.9, complex(0.0, 0.9)), DomainError);
}

TEST(CrossCorrelationLon, LossyRealPhasesAllowed) {
    EXPECT_NO_THROW(make_cross_correlation_lon(0.5, 0.5));
}

TEST(CrossCorrelationLon, RatiosUseSymmetricPhaseConvention) {
    const auto lon = make_cross_correlation_lon_from_ratios(0.14, 0.86);
    EXPECT_DOUBLE_EQ(lon(1, 1).real(), std::sqrt(0.14));
    EXPECT_EQ(lon(1, 1).imag(), 0.0);
    EXPECT_EQ(lon(1, 2).real(), 0.0);
    EXPECT_DOUBLE_EQ(lon(1, 2).imag(), std::sqrt(0.86));
}

TEST(IntensityCorrelationLon, LosslessSplittersEmbedInUnitary) {
    const double s = std::sqrt(0.5);
    const auto lon = make_intensity_correlation_lon(s, complex(0.0, s), s, complex(0.0, s));
    const auto ev = lon.gram_eigenvalues();
    EXPECT_LE(ev[1], 1.0 + kUnitarityTolerance);
    EXPECT_GE(ev[0], -kUnitarityTolerance);
    EXPECT_EQ(lon(1, 1), complex(s * s, 0.0));
    EXPECT_EQ(lon(1, 3), complex(0.0, s));
    EXPECT_EQ(lon(2, 3), complex(s, 0.0));
}

TEST(IntensityCorrelationLon, LossyNetwork) {
    const auto lon = make_intensity_correlation_lon(0.6, complex(0.0, 0.6), 0.7, complex(0.0, 0.5));
    EXPECT_LT(lon.row_norm_squared(1), 1.0);
    EXPECT_LT(lon.row_norm_squared(2), 1.0);
}

TEST(IntensityCorrelationLon, RejectsGain) {
    EXPECT_THROW(make_intensity_correlation_lon(1.0, 1.0, 0.5, 0.5), DomainError);
}

TEST(LonMatrix, RejectsSuperUnitaryGram) {
    LonMatrix::Rows q{};
    q[0] = {complex(0.8, 0.0), complex(0.6, 0.0), complex{}};
    q[1] = {complex(0.8, 0.0), complex(0.6, 0.0), complex{}};  // rows parallel, eigenvalue 2
    EXPECT_THROW(LonMatrix{q}, DomainError);
}

TEST(LonMatrix, RejectsBadIndex) {
    const auto lon = make_cross_correlation_lon(1.0, 0.0);
    EXPECT_THROW(lon(0, 1), std::out_of_range);
    EXPECT_THROW(lon(1, 4), std::out_of_range);
}

namespace {

// Random 3x3 unitary from Givens rotations with random phases, first two rows
// scaled by random transmissions in [0, 1].
LonMatrix random_network(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::array<std::array<complex, 3>, 3> m{};
    for (int i = 0; i < 3; ++i) m[i][i] = std::polar(1.0, 2.0 * M_PI * u(rng));
    for (int rep = 0; rep < 6; ++rep) {
        const int a = rep % 3;
        const int b = (a + 1) % 3;
        const double th = 2.0 * M_PI * u(rng);
        const complex ph = std::polar(1.0, 2.0 * M_PI * u(rng));
        for (int col = 0; col < 3; ++col) {
            const complex x = m[a][col];
            const complex y = m[b][col];
            m[a][col] = std::cos(th) * x - std::sin(th) * ph * y;
            m[b][col] = std::sin(th) * std::conj(ph) * x + std::cos(th) * y;
        }
    }
    LonMatrix::Rows q{};
    for (int j = 0; j < 2; ++j) {
        const double loss = std::sqrt(u(rng));
        for (int col = 0; col < 3; ++col) q[j][col] = loss * m[j][col];
    }
    return LonMatrix{q};
}

}  // namespace

TEST(LonProperties, GramEigenvaluesWithinUnitInterval) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const auto lon = random_network(rng);
        const auto ev = lon.gram_eigenvalues();
        EXPECT_GE(ev[0], -1e-12);
        EXPECT_LE(ev[1], 1.0 + 1e-12);
        EXPECT_LE(lon.row_norm_squared(1), 1.0 + 1e-12);
        EXPECT_LE(lon.row_norm_squared(2), 1.0 + 1e-12);
    }
}

TEST(LonProperties, OutputAmplitudeIsLinear) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n(0.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto lon = random_network(rng);
        const complex a(n(rng), n(rng)), b(n(rng), n(rng)), x(n(rng), n(rng)), y(n(rng), n(rng));
        const LocalOscillator lo{std::abs(n(rng)), n(rng)};
        const LocalOscillator off{0.0, 0.0};
        for (int j = 1; j <= 2; ++j) {
            const complex lhs = output_amplitude(lon, j, a * x + b * y, lo);
            const complex rhs = a * output_amplitude(lon, j, x, off) + b * output_amplitude(lon, j, y, off) +
                                output_amplitude(lon, j, 0.0, lo);
            EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-12 * (1.0 + std::abs(lhs)));
        }
    }
}

TEST(OutputAmplitude, FourteenEightySixExample) {
    const auto lon = make_cross_correlation_lon(std::sqrt(0.14), complex(0.0, std::sqrt(0.86)));
    const complex a = output_amplitude(lon, 1, 2.0, LocalOscillator{3.0, 0.0});
    EXPECT_NEAR(a.real(), 0.7483, 5e-5);
    EXPECT_NEAR(a.imag(), 2.7821, 5e-5);
    EXPECT_EQ(output_amplitude(lon, 2, 0.0, LocalOscillator{0.0, 0.0}), complex{});
}

TEST(BuildContext, FiftyFiftyIdeal) {
    const auto ctx = hcm::testing::cross_context(0.5, 0.5, 1e4);
    EXPECT_NEAR(ctx.sigma_sq(1), 5000.0, 1e-9);
    EXPECT_NEAR(ctx.sigma_sq(2), 5000.0, 1e-9);
    EXPECT_TRUE(ctx.high_intensity());
}

TEST(BuildContext, EfficiencyAndDarkCounts) {
    const auto ideal = hcm::testing::cross_context(0.5, 0.5, 1e4);
    const auto half = hcm::testing::cross_context(0.5, 0.5, 1e4, 0.0, {}, {0.5, 0.0}, {0.5, 0.0});
    const auto dark = hcm::testing::cross_context(0.5, 0.5, 1e4, 0.0, {}, {1.0, 10.0}, {1.0, 10.0});
    EXPECT_NEAR(half.sigma_sq(1), 0.5 * ideal.sigma_sq(1), 1e-9);
    EXPECT_NEAR(dark.sigma_sq(2), ideal.sigma_sq(2) + 10.0, 1e-9);
    EXPECT_EQ(dark.h(1), ideal.h(1));
}

TEST(BuildContext, HMatchesDefinition) {
    const auto ctx = hcm::testing::generic_context(1e6, complex(30.0, -12.0));
    for (int j = 1; j <= 2; ++j) {
        const complex aj = output_amplitude(ctx.lon(), j, ctx.mean_signal(), ctx.lo());
        const complex expected = ctx.detector(j).eta * std::conj(ctx.lon()(j, 1)) * aj;
        EXPECT_NEAR(std::abs(ctx.h(j) - expected), 0.0, 1e-9);
        EXPECT_NEAR(ctx.sigma_sq(j), ctx.detector(j).eta * std::norm(aj) + ctx.detector(j).nu, 1e-6);
    }
}

TEST(BuildContext, DependsOnStateOnlyThroughMean) {
    const complex mean(40.0, 25.0);
    const SignalState coherent = CoherentState{mean};
    const SignalState squeezed = GaussianState{4.0, 0.5, 1.0, mean};
    const SignalState thermal = thermal_state(3.0, mean);
    const auto base = hcm::testing::generic_context();
    const auto a = with_mean_signal(base, mean_amplitude(coherent));
    const auto b = with_mean_signal(base, mean_amplitude(squeezed));
    const auto c = with_mean_signal(base, mean_amplitude(thermal));
    for (int j = 1; j <= 2; ++j) {
        EXPECT_EQ(a.sigma_sq(j), b.sigma_sq(j));
        EXPECT_EQ(a.sigma_sq(j), c.sigma_sq(j));
        EXPECT_EQ(a.h(j), b.h(j));
        EXPECT_EQ(a.h(j), c.h(j));
    }
}

TEST(BuildContext, LowIntensityWarnsButSucceeds) {
    const auto ctx = hcm::testing::cross_context(0.5, 0.5, 50.0);
    EXPECT_FALSE(ctx.high_intensity());
    ASSERT_EQ(ctx.warnings().size(), 2u);
}

TEST(BuildContext, FloorIsConfigurable) {
    const auto lon = make_cross_correlation_lon_from_ratios(0.5, 0.5);
    const auto ctx = build_context(lon, {}, {}, LocalOscillator{std::sqrt(50.0), 0.0}, 0.0, 10.0);
    EXPECT_TRUE(ctx.high_intensity());
}

TEST(BuildContext, RejectsVanishingVariance) {
    const auto lon = make_cross_correlation_lon_from_ratios(0.5, 0.5);
    EXPECT_THROW(build_context(lon, {}, {}, LocalOscillator{0.0, 0.0}, 0.0), ValidityError);
}

TEST(DetectorConfig, Validation) {
    EXPECT_THROW((DetectorConfig{1.5, 0.0}.validate()), DomainError);
    EXPECT_THROW((DetectorConfig{-0.1, 0.0}.validate()), DomainError);
    EXPECT_THROW((DetectorConfig{0.5, -1.0}.validate()), DomainError);
    EXPECT_NO_THROW((DetectorConfig{0.0, 0.0}.validate()));
}

TEST(LocalOscillator, PhaseReducedOnlyForReporting) {
    const LocalOscillator lo{2.0, 7.0};
    EXPECT_NEAR(lo.reported_phase(), 7.0 - 2.0 * M_PI, 1e-15);
    EXPECT_EQ(lo.phase, 7.0);
    EXPECT_THROW((LocalOscillator{-1.0, 0.0}.validate()), DomainError);
}
