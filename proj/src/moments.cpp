#include "hcm/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "hcm/errors.hpp"
#include "hcm/special_functions.hpp"
#include "hcm/statistics.hpp"

namespace hcm {

double conditional_moment(int k, complex gamma, const DetectionContext& ctx) {
    if (k < 1) throw DomainError(fmt::format("conditional moment order {} must be >= 1", k));
    const double s1 = ctx.sigma(1);
    const double s2 = ctx.sigma(2);
    const double y1 = fluctuation_mean(ctx, 1, gamma) / (std::numbers::sqrt2 * s1);
    const double y2 = fluctuation_mean(ctx, 2, gamma) / (std::numbers::sqrt2 * s2);
    // H_k(iy1) H_k(iy2) = (-1)^k G_k(y1) G_k(y2) with G_k(y) = i^k H_k(iy),
    // which cancels the (-1)^k of the prefactor.
    return std::pow(0.5 * s1 * s2, k) * hermite_imaginary(k, y1) * hermite_imaginary(k, y2);
}

// ---------------------------------------------------------------------------

WirtingerPolynomial WirtingerPolynomial::constant(complex c) {
    WirtingerPolynomial p;
    p.terms_[{0, 0}] = c;
    return p;
}

WirtingerPolynomial WirtingerPolynomial::real_linear(complex h) {
    WirtingerPolynomial p;
    p.terms_[{1, 0}] = std::conj(h);
    p.terms_[{0, 1}] = h;
    return p;
}

WirtingerPolynomial WirtingerPolynomial::operator+(const WirtingerPolynomial& o) const {
    WirtingerPolynomial out = *this;
    for (const auto& [ij, c] : o.terms_) out.terms_[ij] += c;
    return out;
}

WirtingerPolynomial WirtingerPolynomial::operator*(const WirtingerPolynomial& o) const {
    WirtingerPolynomial out;
    for (const auto& [ij, c] : terms_) {
        for (const auto& [kl, d] : o.terms_) {
            out.terms_[{ij.first + kl.first, ij.second + kl.second}] += c * d;
        }
    }
    return out;
}

complex WirtingerPolynomial::coefficient(int i, int j) const {
    const auto it = terms_.find({i, j});
    return it == terms_.end() ? complex{} : it->second;
}

complex WirtingerPolynomial::evaluate(complex gamma) const {
    complex sum{};
    for (const auto& [ij, c] : terms_) sum += c * std::pow(gamma, ij.first) * std::pow(std::conj(gamma), ij.second);
    return sum;
}

double fock_expectation(const WirtingerPolynomial& f, int n) {
    FockState{n}.validate();
    complex sum{};
    for (int q = 0; q <= n; ++q) {
        // C(n,q)/q! * (q!)^2 * coefficient
        sum += binomial(n, q) * factorial(q) * f.coefficient(q, q);
    }
    return sum.real();
}

MeanVariance mean_var_m(const SignalState& state, const DetectionContext& ctx) {
    validate(state);
    require_matching_mean(state, ctx);
    const double s1s2 = ctx.sigma_product();
    switch (kind_of(state)) {
        case StateKind::coherent:
            return {0.0, s1s2 * s1s2};
        case StateKind::gaussian: {
            const auto p = gaussian_joint_params(std::get<GaussianState>(state), ctx);
            const double sc = p.scale();
            return {p.corr * sc, (1.0 + p.corr * p.corr) * sc * sc};
        }
        case StateKind::fock: {
            const int n = std::get<FockState>(state).n;
            const auto mu1 = WirtingerPolynomial::real_linear(ctx.h(1));
            const auto mu2 = WirtingerPolynomial::real_linear(ctx.h(2));
            const double mean = fock_expectation(mu1 * mu2, n);
            const auto second = (mu1 * mu1 + WirtingerPolynomial::constant(ctx.sigma_sq(1))) *
                                (mu2 * mu2 + WirtingerPolynomial::constant(ctx.sigma_sq(2)));
            return {mean, fock_expectation(second, n) - mean * mean};
        }
    }
    return {};
}

// ---------------------------------------------------------------------------

NormalOrderedMoments gaussian_normal_ordered_moments(const GaussianState& state, double phi) {
    state.validate();
    const double amp = std::abs(state.mean);
    const double arg = std::arg(state.mean);
    const double diff = 0.5 * (state.v_p - state.v_x);
    const double sum = 0.5 * (state.v_x + state.v_p - 2.0);

    NormalOrderedMoments m;
    m.phase = phi;
    m.var_n = amp * amp * (diff * std::cos(2.0 * arg - state.phi_xi) + sum);
    m.cross = amp * (diff * std::cos(phi - arg + state.phi_xi) + sum * std::cos(phi + arg));
    m.var_x = diff * std::cos(2.0 * phi + state.phi_xi) + sum;
    m.large_mean = amp >= kLargeMeanThreshold;
    return m;
}

double mean_decomposition_cc(const NormalOrderedMoments& m, complex t, complex r, const LocalOscillator& lo,
                             double eta1, double eta2) {
    const double t2 = std::norm(t);
    const double r2 = std::norm(r);
    const double tr = std::abs(t) * std::abs(r);
    const double lo_amp = lo.magnitude;
    return eta1 * eta2 *
           (t2 * r2 * m.var_n + lo_amp * tr * (r2 - t2) * m.cross - lo_amp * lo_amp * t2 * r2 * m.var_x);
}

std::optional<std::pair<complex, complex>> as_cross_correlation(const LonMatrix& lon) {
    const auto& q = lon.rows();
    constexpr double tol = 1e-14;
    if (std::abs(q[0][2]) > tol || std::abs(q[1][2]) > tol) return std::nullopt;
    if (std::abs(q[0][0] - q[1][1]) > tol || std::abs(q[0][1] - q[1][0]) > tol) return std::nullopt;
    return std::pair{q[0][0], q[0][1]};
}

namespace {
double splitter_kappa(complex t, complex r) {
    const double im = (std::conj(t) * r).imag();
    if (im == 0.0) throw DomainError("optical phase undefined: conj(T) R has no imaginary part");
    return im > 0.0 ? 1.0 : -1.0;
}
}  // namespace

double optical_phase_cc(complex t, complex r, double lo_phase) {
    return -lo_phase - splitter_kappa(t, r) * std::numbers::pi / 2.0;
}

double lo_phase_for_optical_phase_cc(complex t, complex r, double phi) {
    return -phi - splitter_kappa(t, r) * std::numbers::pi / 2.0;
}

CauchySchwarzResult cauchy_schwarz_d(const NormalOrderedMoments& m, double rel_tol) {
    CauchySchwarzResult out;
    out.d = m.var_n * m.var_x - m.cross * m.cross;
    out.scale = std::max({std::abs(m.var_n * m.var_x), m.cross * m.cross, std::numeric_limits<double>::min()});
    out.anomalous = out.d < -rel_tol * out.scale;
    return out;
}

NonclassicalityR nonclassicality_r(double var_m, const DetectionContext& reference, double rel_tol) {
    const double ref = reference.sigma_sq(1) * reference.sigma_sq(2);
    NonclassicalityR out;
    out.r = var_m / ref - 1.0;
    out.nonclassical = out.r < -rel_tol;
    return out;
}

DetectionContext reference_context(const SignalState& state, const DetectionContext& ctx) {
    return with_mean_signal(ctx, mean_amplitude(state));
}

MomentReport analyze_moments(const SignalState& state, const DetectionContext& ctx,
                             const std::optional<DetectionContext>& reference, const VerdictTolerances& tol) {
    MomentReport report;
    const auto mv = mean_var_m(state, ctx);
    report.mean_m = mv.mean;
    report.var_m = mv.variance;
    report.warnings = ctx.warnings();

    const DetectionContext ref = reference ? *reference : reference_context(state, ctx);
    const auto r = nonclassicality_r(mv.variance, ref, tol.r);
    report.r = r.r;
    report.nonclassical_by_r = r.nonclassical;

    if (const auto* g = std::get_if<GaussianState>(&state)) {
        if (const auto tr = as_cross_correlation(ctx.lon()); tr && (std::conj(tr->first) * tr->second).imag() != 0.0) {
            const double phi = optical_phase_cc(tr->first, tr->second, ctx.lo().phase);
            const auto m = gaussian_normal_ordered_moments(*g, phi);
            if (!m.large_mean) {
                report.warnings.push_back(fmt::format(
                    "normal-ordered moments assume |<a>| >> 1; got |<a>| = {:.4g} < {}", std::abs(g->mean),
                    kLargeMeanThreshold));
            }
            const auto d = cauchy_schwarz_d(m, tol.d);
            report.d_phi = d.d;
            report.anomalous_by_d = d.anomalous;
            report.normal_ordered = m;
        }
    }
    return report;
}

}  // namespace hcm
