#include "hcm/oracle_sim.hpp"

#include <math.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include <fmt/format.h>

#include "hcm/errors.hpp"
#include "hcm/quadrature.hpp"
#include "hcm/special_functions.hpp"

namespace hcm {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double log_factorial(std::int64_t k) {
    int sign = 0;
    return ::lgamma_r(static_cast<double>(k) + 1.0, &sign);
}

}  // namespace

RandomStream RandomStream::for_shard(std::uint64_t seed, std::uint64_t index) {
    return RandomStream(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

double RandomStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double RandomStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_normal_ = v * f;
    has_spare_ = true;
    return u * f;
}

std::int64_t RandomStream::poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) throw DomainError(fmt::format("Poisson mean {} is invalid", mean));
    if (mean == 0.0) return 0;
    if (mean < 10.0) {
        const double limit = std::exp(-mean);
        std::int64_t k = 0;
        double prod = uniform();
        while (prod > limit) {
            ++k;
            prod *= uniform();
        }
        return k;
    }
    // Hoermann (1993), "The transformed rejection method for generating Poisson random variables".
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = uniform() - 0.5;
        const double v = uniform();
        const double us = 0.5 - std::abs(u);
        const auto k = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + mean + 0.43));
        if (us >= 0.07 && v <= vr) return k;
        if (k < 0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -mean + static_cast<double>(k) * loglam - log_factorial(k)) {
            return k;
        }
    }
}

// ---------------------------------------------------------------------------

ClassicalPSampler::ClassicalPSampler(const SignalState& state) : axis_(1.0, 0.0) {
    validate(state);
    mean_ = mean_amplitude(state);
    if (const auto* g = std::get_if<GaussianState>(&state)) {
        if (!g->is_classical()) {
            throw ValidityError(fmt::format(
                "Gaussian state with V_p = {} < 1 has no nonnegative P function and cannot be sampled", g->v_p));
        }
        axis_ = std::polar(1.0, 0.5 * g->phi_xi);
        sd_along_ = 0.5 * std::sqrt(g->v_p - 1.0);
        sd_across_ = 0.5 * std::sqrt(g->v_x - 1.0);
    } else if (const auto* f = std::get_if<FockState>(&state); f && f->n > 0) {
        throw ValidityError(fmt::format("Fock state |{}> has a singular P function and cannot be sampled", f->n));
    }
}

complex ClassicalPSampler::draw(RandomStream& rng) const {
    if (sd_along_ == 0.0 && sd_across_ == 0.0) return {};
    const double u = sd_along_ * rng.normal();
    const double v = sd_across_ * rng.normal();
    return axis_ * complex(u, v);
}

// ---------------------------------------------------------------------------

double SimulationRun::mean_product() const {
    double sum = 0.0;
    for (double m : products) sum += m;
    return sum / static_cast<double>(products.size());
}

double SimulationRun::variance_product() const {
    const double mean = mean_product();
    double sum = 0.0;
    for (double m : products) sum += (m - mean) * (m - mean);
    return sum / static_cast<double>(products.size() - 1);
}

double SimulationRun::standard_error_mean() const {
    return std::sqrt(variance_product() / static_cast<double>(products.size()));
}

double SimulationRun::standard_error_variance() const {
    const double mean = mean_product();
    const auto n = static_cast<double>(products.size());
    double m2 = 0.0;
    double m4 = 0.0;
    for (double m : products) {
        const double d2 = (m - mean) * (m - mean);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    return std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
}

SimulationRun simulate_counts(const ClassicalPSampler& sampler, const DetectionContext& ctx, std::uint64_t seed,
                              std::size_t n_samples, unsigned workers) {
    if (n_samples < 2) throw DomainError("simulation needs at least 2 samples");
    if (std::abs(sampler.mean() - ctx.mean_signal()) > 1e-12 * std::max(1.0, std::abs(sampler.mean()))) {
        throw DomainError("sampler mean amplitude differs from the context's mean signal");
    }

    SimulationRun run;
    run.seed = seed;
    run.n_samples = n_samples;
    run.samples.resize(n_samples);
    run.scale = ctx.sigma_product();

    const std::size_t shards = (n_samples + kShardSize - 1) / kShardSize;
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, shards));

    const auto run_shard = [&](std::size_t shard) {
        RandomStream rng = RandomStream::for_shard(seed, shard);
        const std::size_t begin = shard * kShardSize;
        const std::size_t end = std::min(begin + kShardSize, n_samples);
        for (std::size_t i = begin; i < end; ++i) {
            const complex alpha = sampler.draw(rng) + ctx.mean_signal();
            std::array<std::int64_t, 2> m{};
            for (int j = 1; j <= 2; ++j) {
                const auto& det = ctx.detector(j);
                const double lambda = det.eta * std::norm(output_amplitude(ctx.lon(), j, alpha, ctx.lo())) + det.nu;
                m[j - 1] = rng.poisson(lambda);
            }
            run.samples[i] = {m[0], m[1]};
        }
    };

    if (workers <= 1) {
        for (std::size_t s = 0; s < shards; ++s) run_shard(s);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t s = w; s < shards; s += workers) run_shard(s);
            });
        }
        for (auto& t : pool) t.join();
    }

    // Integer sums are exact, so the means do not depend on the reduction order.
    std::int64_t sum1 = 0;
    std::int64_t sum2 = 0;
    for (const auto& c : run.samples) {
        sum1 += c.m1;
        sum2 += c.m2;
    }
    run.mean_x1 = static_cast<double>(sum1) / static_cast<double>(n_samples);
    run.mean_x2 = static_cast<double>(sum2) / static_cast<double>(n_samples);
    run.products.resize(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        run.products[i] = (static_cast<double>(run.samples[i].m1) - run.mean_x1) *
                          (static_cast<double>(run.samples[i].m2) - run.mean_x2);
    }
    return run;
}

// ---------------------------------------------------------------------------

Histogram empirical_product_histogram(const SimulationRun& run, std::size_t bins, double lo, double hi) {
    if (bins == 0 || !(hi > lo)) throw DomainError("histogram needs at least one bin and hi > lo");
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.counts.assign(bins, 0);
    std::uint64_t outside = 0;
    const double width = h.width();
    for (double m : run.products) {
        const double x = m / run.scale;
        const double pos = std::floor((x - lo) / width);
        if (pos < 0.0 || pos >= static_cast<double>(bins)) {
            ++outside;
            continue;
        }
        ++h.counts[static_cast<std::size_t>(pos)];
    }
    const auto n = static_cast<double>(run.products.size());
    h.density.resize(bins);
    for (std::size_t i = 0; i < bins; ++i) h.density[i] = static_cast<double>(h.counts[i]) / (n * width);
    h.outside_fraction = static_cast<double>(outside) / n;
    return h;
}

std::vector<double> binned_density(const CorrelationPdf& pdf, const Histogram& hist, double scale) {
    const auto density = [&](double x) { return pdf(x * scale) * scale; };
    std::vector<double> out(hist.bins());
    for (std::size_t i = 0; i < hist.bins(); ++i) {
        const double a = hist.edge(i);
        const double b = hist.edge(i + 1);
        double mass = 0.0;
        if (a < 0.0 && b > 0.0) {
            mass = integrate_finite(density, a, 0.0, 1e-10).value + integrate_finite(density, 0.0, b, 1e-10).value;
        } else {
            mass = integrate_finite(density, a, b, 1e-10).value;
        }
        out[i] = mass / (b - a);
    }
    return out;
}

double sup_distance(const Histogram& hist, const std::vector<double>& reference) {
    if (reference.size() != hist.bins()) throw DomainError("reference and histogram have different bin counts");
    double sup = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) sup = std::max(sup, std::abs(hist.density[i] - reference[i]));
    return sup;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kInvTwoPi = 0.5 * std::numbers::inv_pi;

JointDensity independent_normals(double s1, double s2) {
    return {[s1, s2](double c1, double c2) {
                const double x = c1 / s1;
                const double y = c2 / s2;
                return kInvTwoPi / (s1 * s2) * std::exp(-0.5 * (x * x + y * y));
            },
            s1, s2};
}

// Probabilists' Hermite polynomials He_0..He_k at t.
std::vector<double> hermite_he(int k, double t) {
    std::vector<double> he(static_cast<std::size_t>(k) + 1);
    he[0] = 1.0;
    if (k >= 1) he[1] = t;
    for (int i = 1; i < k; ++i) he[i + 1] = t * he[i] - i * he[i - 1];
    return he;
}

// Conditioned on gamma the currents are independent normals centred at
// mu_j(gamma), and d/dconj(gamma) of phi(t_j) He_a(t_j) with t_j = (c_j - mu_j)/sigma_j
// is k_j phi(t_j) He_{a+1}(t_j). Hence d^q d*^q acts on the vacuum density as
// ((k1 X + k2 Y)(conj(k1) X + conj(k2) Y))^q with X^a Y^b -> He_a(t1) He_b(t2).
JointDensity fock_joint(int n, const DetectionContext& ctx) {
    const double s1 = ctx.sigma(1);
    const double s2 = ctx.sigma(2);
    const complex k1 = ctx.h(1) / s1;
    const complex k2 = ctx.h(2) / s2;
    const std::array<double, 3> base{std::norm(k1), 2.0 * (k1 * std::conj(k2)).real(), std::norm(k2)};

    // poly[q][a] multiplies He_a(t1) He_{2q-a}(t2).
    std::vector<std::vector<double>> poly(static_cast<std::size_t>(n) + 1);
    poly[0] = {1.0};
    for (int q = 1; q <= n; ++q) {
        const auto& prev = poly[q - 1];
        std::vector<double> next(prev.size() + 2, 0.0);
        for (std::size_t a = 0; a < prev.size(); ++a) {
            for (std::size_t d = 0; d < 3; ++d) next[a + 2 - d] += prev[a] * base[d];
        }
        poly[q] = std::move(next);
    }
    for (int q = 0; q <= n; ++q) {
        const double w = binomial(n, q) / factorial(q);
        for (double& c : poly[q]) c *= w;
    }

    return {[poly, n, s1, s2](double c1, double c2) {
                const double t1 = c1 / s1;
                const double t2 = c2 / s2;
                const auto he1 = hermite_he(2 * n, t1);
                const auto he2 = hermite_he(2 * n, t2);
                double sum = 0.0;
                for (int q = 0; q <= n; ++q) {
                    const int deg = 2 * q;
                    for (int a = 0; a <= deg; ++a) sum += poly[q][a] * he1[a] * he2[deg - a];
                }
                return sum * kInvTwoPi / (s1 * s2) * std::exp(-0.5 * (t1 * t1 + t2 * t2));
            },
            s1 * std::sqrt(1.0 + 2.0 * n), s2 * std::sqrt(1.0 + 2.0 * n)};
}

}  // namespace

JointDensity joint_pdf_numeric(const SignalState& state, const DetectionContext& ctx) {
    validate(state);
    require_matching_mean(state, ctx);
    switch (kind_of(state)) {
        case StateKind::coherent:
            return independent_normals(ctx.sigma(1), ctx.sigma(2));
        case StateKind::gaussian: {
            const auto p = gaussian_joint_params(std::get<GaussianState>(state), ctx);
            const double s1 = p.s1;
            const double s2 = p.s2;
            const double c = p.corr;
            const double det = 1.0 - c * c;
            return {[s1, s2, c, det](double c1, double c2) {
                        const double x = c1 / s1;
                        const double y = c2 / s2;
                        return kInvTwoPi / (s1 * s2 * std::sqrt(det)) *
                               std::exp(-(x * x - 2.0 * c * x * y + y * y) / (2.0 * det));
                    },
                    s1, s2};
        }
        case StateKind::fock: {
            const int n = std::get<FockState>(state).n;
            if (n > kMaxFockJoint) {
                throw DomainError(fmt::format("Fock joint density supports n <= {}, got {}", kMaxFockJoint, n));
            }
            return fock_joint(n, ctx);
        }
    }
    throw DomainError("unsupported state");
}

double pdf_via_product_integral(const JointDensity& joint, double m, double rel_tol) {
    if (m == 0.0) throw DomainError("product-integral density is singular at M = 0");
    if (!(rel_tol > 0.0)) throw DomainError("tolerance must be positive");
    // Beyond 14 scales the Gaussian factor is below e^-98.
    constexpr double reach = 14.0;
    const double t_lo = std::log(std::abs(m) / (reach * joint.scale2));
    const double t_hi = std::log(reach * joint.scale1);
    if (!(t_hi > t_lo)) return 0.0;

    const auto integrand = [&](double t) {
        const double y = std::exp(t);
        const double x = m / y;
        return joint.p(y, x) + joint.p(-y, -x);
    };
    // The integrand peaks near y = sqrt(|M| scale1 / scale2); split there so
    // neither panel hides the peak from the initial Kronrod nodes.
    const double t_mid = std::clamp(0.5 * (std::log(std::abs(m)) + std::log(joint.scale1 / joint.scale2)), t_lo, t_hi);
    QuadratureResult total{};
    for (const auto& [a, b] : {std::pair{t_lo, t_mid}, std::pair{t_mid, t_hi}}) {
        if (b <= a) continue;
        const auto part = integrate_adaptive(integrand, a, b, 0.1 * rel_tol, 15);
        total.value += part.value;
        total.error += part.error;
    }
    if (!(total.error <= rel_tol * std::abs(total.value))) {
        throw ConvergenceError(fmt::format("product integral at M = {} reached error {:.3g} for value {:.6g}", m,
                                           total.error, total.value),
                               total.error);
    }
    return total.value;
}

}  // namespace hcm
