#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hcm/errors.hpp"
#include "hcm/moments.hpp"
#include "hcm/oracle_sim.hpp"
#include "hcm/quadrature.hpp"
#include "hcm/statistics.hpp"
#include "test_support.hpp"

using namespace hcm;
using hcm::testing::cross_context;
using hcm::testing::generic_context;

TEST(RandomStream, Deterministic) {
    auto a = RandomStream::for_shard(42, 3);
    auto b = RandomStream::for_shard(42, 3);
    auto c = RandomStream::for_shard(42, 4);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const double x = a.normal();
        EXPECT_EQ(x, b.normal());
        differs |= x != c.normal();
        EXPECT_EQ(a.poisson(20.0), b.poisson(20.0));
    }
    EXPECT_TRUE(differs);
}

TEST(RandomStream, UniformAndNormalMoments) {
    RandomStream rng(9);
    const int n = 400000;
    double su = 0.0, sn = 0.0, sn2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        su += u;
        const double z = rng.normal();
        sn += z;
        sn2 += z * z;
    }
    EXPECT_NEAR(su / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
    EXPECT_NEAR(sn / n, 0.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(sn2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(RandomStream, PoissonMeanAndVariance) {
    for (double lambda : {3.0, 50.0, 1e6, 1e8}) {
        RandomStream rng(static_cast<std::uint64_t>(lambda) + 1);
        const int n = 200000;
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto k = rng.poisson(lambda);
            ASSERT_GE(k, 0);
            const double d = static_cast<double>(k) - lambda;
            s += d;
            s2 += d * d;
        }
        EXPECT_NEAR(s / n, 0.0, 4.0 * std::sqrt(lambda / n)) << lambda;
        EXPECT_NEAR(s2 / n / lambda, 1.0, 4.0 * std::sqrt(2.0 / n)) << lambda;
    }
}

TEST(RandomStream, PoissonProbabilities) {
    const double lambda = 15.0;
    RandomStream rng(15);
    const int n = 400000;
    std::vector<int> hist(60, 0);
    for (int i = 0; i < n; ++i) {
        const auto k = rng.poisson(lambda);
        if (k < 60) ++hist[static_cast<std::size_t>(k)];
    }
    for (int k = 3; k <= 30; ++k) {
        const double p = std::exp(k * std::log(lambda) - lambda - std::lgamma(k + 1.0));
        EXPECT_NEAR(hist[static_cast<std::size_t>(k)] / static_cast<double>(n), p, 4.5 * std::sqrt(p * (1 - p) / n))
            << "k=" << k;
    }
}

TEST(ClassicalPSampler, GaussianSecondMoments) {
    const GaussianState state{5.0, 2.0, 1.3, complex(7.0, -2.0)};
    const ClassicalPSampler sampler(state);
    EXPECT_EQ(sampler.mean(), state.mean);
    RandomStream rng(3);
    const int n = 400000;
    double abs2 = 0.0;
    complex sq{};
    complex first{};
    for (int i = 0; i < n; ++i) {
        const complex g = sampler.draw(rng);
        first += g;
        abs2 += std::norm(g);
        sq += g * g;
    }
    const double expected_abs2 = (state.v_x + state.v_p - 2.0) / 4.0;
    const complex expected_sq = -std::polar(1.0, state.phi_xi) * (state.v_x - state.v_p) / 4.0;
    const double tol = 5.0 * expected_abs2 / std::sqrt(n);
    EXPECT_NEAR(std::abs(first / static_cast<double>(n)), 0.0, tol);
    EXPECT_NEAR(abs2 / n, expected_abs2, 2 * tol);
    EXPECT_NEAR(std::abs(sq / static_cast<double>(n) - expected_sq), 0.0, 2 * tol);
}

TEST(ClassicalPSampler, CoherentIsPointMass) {
    const ClassicalPSampler sampler(CoherentState{complex(1.0, 2.0)});
    RandomStream rng(1);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(sampler.draw(rng), complex{});
    EXPECT_NO_THROW(ClassicalPSampler(FockState{0}));
}

TEST(ClassicalPSampler, RejectsNonclassicalStates) {
    EXPECT_THROW(ClassicalPSampler(GaussianState{4.0, 0.5, 0.0, 0.0}), ValidityError);
    EXPECT_THROW(ClassicalPSampler(FockState{1}), ValidityError);
}

namespace {

DetectionContext mc_context() { return cross_context(0.5, 0.5, 1e6); }

}  // namespace

TEST(SimulateCounts, IndependentOfWorkerCount) {
    const auto ctx = mc_context();
    const ClassicalPSampler sampler(thermal_state(1.0));
    const auto a = simulate_counts(sampler, ctx, 5, 100000, 1);
    const auto b = simulate_counts(sampler, ctx, 5, 100000, 4);
    ASSERT_EQ(a.samples.size(), 100000u);
    EXPECT_TRUE(a.samples == b.samples);
    EXPECT_EQ(a.products, b.products);
    const auto c = simulate_counts(sampler, ctx, 6, 100000, 4);
    EXPECT_FALSE(a.samples == c.samples);
}

TEST(SimulateCounts, RequiresMatchingMean) {
    const ClassicalPSampler sampler(CoherentState{complex(3.0, 0.0)});
    EXPECT_THROW(simulate_counts(sampler, mc_context(), 1, 10), DomainError);
}

TEST(SimulateCounts, CoherentMoments) {
    const auto ctx = mc_context();
    const auto run = simulate_counts(ClassicalPSampler(CoherentState{0.0}), ctx, 11, 400000);
    EXPECT_EQ(run.scale, ctx.sigma_product());
    EXPECT_NEAR(run.mean_product(), 0.0, 3.0 * run.standard_error_mean());
    const double expected_var = ctx.sigma_sq(1) * ctx.sigma_sq(2);
    EXPECT_NEAR(run.variance_product(), expected_var, 3.0 * run.standard_error_variance());
}

TEST(SimulateCounts, ThermalMeanMatchesAnalytic) {
    const complex mean(300.0, 100.0);
    const auto ctx = generic_context(1e6, mean);
    const auto state = thermal_state(1.0, mean);
    const auto run = simulate_counts(ClassicalPSampler(state), ctx, 12, 400000);
    const auto mv = mean_var_m(state, ctx);
    EXPECT_NEAR(run.mean_product(), mv.mean, 3.0 * run.standard_error_mean());
    EXPECT_NEAR(run.variance_product(), mv.variance, 3.0 * run.standard_error_variance());
}

TEST(SimulateCounts, VarianceConvergesWithSampleSize) {
    const auto ctx = mc_context();
    const auto state = thermal_state(1.0);
    const double expected = mean_var_m(state, ctx).variance;
    double prev_se = INFINITY;
    for (std::size_t n : {10000u, 100000u, 1000000u}) {
        const auto run = simulate_counts(ClassicalPSampler(state), ctx, 13, n);
        const double se = run.standard_error_variance();
        EXPECT_NEAR(run.variance_product(), expected, 3.0 * se) << n;
        EXPECT_LT(se, prev_se);
        prev_se = se;
    }
}

TEST(Histogram, MassAccountsForEverySample) {
    const auto run = simulate_counts(ClassicalPSampler(thermal_state(1.0)), mc_context(), 14, 50000);
    const auto h = empirical_product_histogram(run, 40, -3.0, 3.0);
    double mass = 0.0;
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < h.bins(); ++i) {
        mass += h.density[i] * h.width();
        total += h.counts[i];
    }
    EXPECT_NEAR(mass + h.outside_fraction, 1.0, 1e-12);
    EXPECT_NEAR(static_cast<double>(total) / 50000.0, 1.0 - h.outside_fraction, 1e-12);
    EXPECT_GT(h.outside_fraction, 0.0);
    EXPECT_NEAR(h.center(0), -3.0 + 0.5 * h.width(), 1e-15);
}

TEST(Histogram, TiltFollowsCorrelationSign) {
    const auto ctx = mc_context();
    const auto state = thermal_state(1.0);
    const double c = gaussian_joint_params(state, ctx).corr;
    ASSERT_GT(std::abs(c), 0.3);
    const auto run = simulate_counts(ClassicalPSampler(state), ctx, 15, 200000);
    const auto h = empirical_product_histogram(run, 60);
    double positive = 0.0, negative = 0.0;
    for (std::size_t i = 0; i < h.bins(); ++i) (h.center(i) > 0 ? positive : negative) += h.density[i];
    EXPECT_EQ(positive > negative, c > 0);
}

TEST(Histogram, CoherentIsSymmetric) {
    const auto run = simulate_counts(ClassicalPSampler(CoherentState{0.0}), mc_context(), 16, 400000);
    const auto h = empirical_product_histogram(run, 30, -3.0, 3.0);
    for (std::size_t i = 0; i < h.bins() / 2; ++i) {
        const double a = h.density[i];
        const double b = h.density[h.bins() - 1 - i];
        const double se = std::sqrt((a + b) / (400000.0 * h.width()));
        EXPECT_NEAR(a, b, 4.0 * se) << i;
    }
}

TEST(Histogram, MatchesBinnedClosedForm) {
    const auto ctx = mc_context();
    const auto state = thermal_state(1.0);
    const auto run = simulate_counts(ClassicalPSampler(state), ctx, 17, 1000000);
    const auto h = empirical_product_histogram(run, 60);
    const CorrelationPdf pdf(state, ctx);
    const auto reference = binned_density(pdf, h, ctx.sigma_product());
    EXPECT_LT(sup_distance(h, reference), 0.01);
    double mass = 0.0;
    for (double d : reference) mass += d * h.width();
    EXPECT_NEAR(mass + h.outside_fraction, 1.0, 2e-3);
}

TEST(ProductIntegral, ReproducesClosedForms) {
    const complex mean(500.0, 0.0);
    std::vector<std::pair<SignalState, DetectionContext>> cases{
        {CoherentState{0.0}, generic_context()},
        {GaussianState{4.0, 0.5, M_PI, mean}, cross_context(0.14, 0.86, 1e6, 0.7, mean)},
        {GaussianState{4.0, 0.5, 0.0, mean}, cross_context(0.14, 0.86, 1e6, 2.2, mean)},
        {thermal_state(1.0), cross_context(0.5, 0.5, 1e6)},
        {FockState{1}, generic_context()},
        {FockState{2}, cross_context(0.5, 0.5, 1e6)},
    };
    for (const auto& [state, ctx] : cases) {
        const CorrelationPdf pdf(state, ctx);
        const auto joint = joint_pdf_numeric(state, ctx);
        for (double x = -6.0; x <= 6.0; x += 0.23) {
            if (std::abs(x) < 0.05) continue;
            const double m = x * pdf.scale();
            const double expected = pdf(m);
            EXPECT_NEAR(pdf_via_product_integral(joint, m), expected, 1e-6 * expected) << x;
        }
    }
}

TEST(ProductIntegral, ScalingProperty) {
    const auto ctx = generic_context();
    const auto joint = joint_pdf_numeric(thermal_state(2.0), ctx);
    const double a = 3.5;
    const JointDensity scaled{[p = joint.p, a](double c1, double c2) { return p(c1 / a, c2) / a; },
                              joint.scale1 * a, joint.scale2};
    for (double x : {-4.0, -0.7, 0.3, 2.0}) {
        const double m = x * ctx.sigma_product();
        EXPECT_NEAR(pdf_via_product_integral(scaled, a * m), pdf_via_product_integral(joint, m) / a,
                    1e-7 * pdf_via_product_integral(joint, m) / a);
    }
}

TEST(ProductIntegral, Errors) {
    const auto joint = joint_pdf_numeric(CoherentState{0.0}, mc_context());
    EXPECT_THROW(pdf_via_product_integral(joint, 0.0), DomainError);
    EXPECT_THROW(pdf_via_product_integral(joint, 1e5, 1e-300), ConvergenceError);
}

TEST(JointDensity, CoherentPeak) {
    const auto ctx = generic_context();
    const auto joint = joint_pdf_numeric(CoherentState{0.0}, ctx);
    EXPECT_NEAR(joint.p(0.0, 0.0), 1.0 / (2 * M_PI * ctx.sigma(1) * ctx.sigma(2)), 1e-20);
}

TEST(JointDensity, UncorrelatedGaussianIsCoherent) {
    const complex mean(80.0, 10.0);
    const auto ctx = generic_context(1e6, mean);
    const auto g = joint_pdf_numeric(GaussianState{1.0, 1.0, 0.2, mean}, ctx);
    const auto c = joint_pdf_numeric(CoherentState{mean}, ctx);
    for (double x : {-2.0, 0.0, 1.3})
        for (double y : {-0.5, 0.4, 2.2}) {
            const double c1 = x * ctx.sigma(1), c2 = y * ctx.sigma(2);
            EXPECT_NEAR(g.p(c1, c2), c.p(c1, c2), 1e-12 * c.p(c1, c2));
        }
}

TEST(JointDensity, FockIsNormalizedAndNonnegative) {
    const auto ctx = generic_context();
    for (int n = 1; n <= kMaxFockJoint; ++n) {
        const auto joint = joint_pdf_numeric(FockState{n}, ctx);
        const double r1 = 14.0 * joint.scale1, r2 = 14.0 * joint.scale2;
        if (n <= 2) {
            const auto outer = integrate_adaptive(
                [&](double c1) {
                    return integrate_adaptive([&](double c2) { return joint.p(c1, c2); }, -r2, r2, 1e-12).value;
                },
                -r1, r1, 1e-11);
            EXPECT_NEAR(outer.value, 1.0, 1e-8) << "n=" << n;
        }
        for (double x = -6.0; x <= 6.0; x += 0.25)
            for (double y = -6.0; y <= 6.0; y += 0.25)
                EXPECT_GE(joint.p(x * joint.scale1, y * joint.scale2), 0.0) << n << ' ' << x << ' ' << y;
    }
    EXPECT_THROW(joint_pdf_numeric(FockState{kMaxFockJoint + 1}, ctx), DomainError);
}

TEST(JointDensity, FockClosesOnSeries) {
    for (const auto& ctx : {generic_context(), cross_context(0.5, 0.5, 1e6), cross_context(0.3, 0.7, 1e6, 1.0)}) {
        for (int n = 1; n <= 3; ++n) {
            const auto joint = joint_pdf_numeric(FockState{n}, ctx);
            for (double x = -5.0; x <= 5.0; x += 0.7) {
                const double m = x * ctx.sigma_product();
                const double expected = pdf_fock(m, n, ctx);
                EXPECT_NEAR(pdf_via_product_integral(joint, m), expected, 1e-5 * expected) << n << ' ' << x;
            }
        }
    }
}
