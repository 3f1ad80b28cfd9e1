#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "hcm/lon.hpp"
#include "hcm/signal_state.hpp"
#include "hcm/statistics.hpp"

namespace hcm {

/// Deterministic random stream on top of mt19937_64. Uniform, normal and
/// Poisson variates are generated here rather than by <random>
/// distributions so that sample streams are identical across standard
/// library implementations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Stream for shard `index` of a run seeded with `seed` (SplitMix64 derivation).
    static RandomStream for_shard(std::uint64_t seed, std::uint64_t index);

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal (Marsaglia polar method).
    double normal();
    /// Poisson variate; multiplication method below mean 10, Hoermann's
    /// transformed rejection (PTRS) above. Valid to mean 1e8 and beyond.
    std::int64_t poisson(double mean);

private:
    std::mt19937_64 engine_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// Draws the signal noise gamma from a nonnegative P function.
///
/// Coherent states: point mass at 0. Classical Gaussian states: a bivariate
/// normal with variance (V_p - 1)/4 along e^{i phi_xi/2} and (V_x - 1)/4
/// along i e^{i phi_xi/2}, which reproduces <gamma^2> = -e^{i phi_xi}(V_x - V_p)/4
/// and <|gamma|^2> = (V_x + V_p - 2)/4. Construction throws ValidityError for
/// V_p < 1 and for Fock states with n >= 1.
class ClassicalPSampler {
public:
    explicit ClassicalPSampler(const SignalState& state);

    complex draw(RandomStream& rng) const;
    complex mean() const noexcept { return mean_; }

private:
    complex mean_;
    complex axis_;  ///< unit vector e^{i phi_xi / 2}
    double sd_along_ = 0.0;
    double sd_across_ = 0.0;
};

struct CountPair {
    std::int64_t m1 = 0;
    std::int64_t m2 = 0;
    bool operator==(const CountPair&) const = default;
};

/// Photocount samples for one run. Fluctuation products use the empirical
/// mean counts: M_i = (m1_i - <x1>)(m2_i - <x2>).
struct SimulationRun {
    std::uint64_t seed = 0;
    std::size_t n_samples = 0;
    std::vector<CountPair> samples;
    double mean_x1 = 0.0;
    double mean_x2 = 0.0;
    std::vector<double> products;
    /// sigma_1 sigma_2 of the context the run was simulated for.
    double scale = 1.0;

    double mean_product() const;
    /// Unbiased sample variance of M.
    double variance_product() const;
    double standard_error_mean() const;
    /// Standard error of the sample variance, sqrt((m4 - s^4) / n).
    double standard_error_variance() const;
};

/// Samples per shard; each shard owns an independent deterministic stream.
inline constexpr std::size_t kShardSize = 1u << 15;

/// Poisson-level simulation of the two detectors: gamma ~ P, alpha = gamma + <a>,
/// m_j ~ Poisson(eta_j |alpha_j(alpha, alpha_L)|^2 + nu_j). Bit-reproducible from
/// the seed irrespective of the number of worker threads.
SimulationRun simulate_counts(const ClassicalPSampler& sampler, const DetectionContext& ctx, std::uint64_t seed,
                              std::size_t n_samples, unsigned workers = 0);

struct Histogram {
    double lo = -6.0;
    double hi = 6.0;
    std::vector<double> density;       ///< count / (n * width)
    std::vector<std::uint64_t> counts;
    double outside_fraction = 0.0;     ///< samples outside [lo, hi)

    std::size_t bins() const noexcept { return counts.size(); }
    double width() const noexcept { return (hi - lo) / static_cast<double>(counts.size()); }
    double center(std::size_t i) const noexcept { return lo + (static_cast<double>(i) + 0.5) * width(); }
    double edge(std::size_t i) const noexcept { return lo + static_cast<double>(i) * width(); }
};

/// Density histogram of M_i / (sigma_1 sigma_2), normalized by the total
/// sample count so that sum(density) * width + outside_fraction = 1.
Histogram empirical_product_histogram(const SimulationRun& run, std::size_t bins, double lo = -6.0,
                                      double hi = 6.0);

/// Bin averages of a density of the normalized variable M / scale, on the
/// bins of `hist` (splitting at 0 where needed).
std::vector<double> binned_density(const CorrelationPdf& pdf, const Histogram& hist, double scale);

/// max_i |hist.density[i] - reference[i]|
double sup_distance(const Histogram& hist, const std::vector<double>& reference);

/// Joint density p(c1, c2) of the current fluctuations with the scales on
/// which each marginal decays.
struct JointDensity {
    std::function<double(double, double)> p;
    double scale1 = 1.0;
    double scale2 = 1.0;
};

/// p(c1, c2) for coherent, Gaussian and Fock (n <= 5) signals. Fock densities
/// are polynomials times the vacuum Gaussian, obtained by applying the
/// delta-derivative P function under the gamma integral.
JointDensity joint_pdf_numeric(const SignalState& state, const DetectionContext& ctx);

inline constexpr int kMaxFockJoint = 5;

/// w(M) = integral dy/|y| p(y, M/y), with y = +-e^t and adaptive Gauss-Kronrod
/// over t. Throws ConvergenceError when the estimate misses `rel_tol`.
double pdf_via_product_integral(const JointDensity& joint, double m, double rel_tol = 1e-8);

}  // namespace hcm
