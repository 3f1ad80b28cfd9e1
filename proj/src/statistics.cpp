#include "hcm/statistics.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "hcm/errors.hpp"
#include "hcm/special_functions.hpp"

namespace hcm {

namespace {

constexpr double kInvPi = std::numbers::inv_pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// |K_0 weight| below this is treated as an exact cancellation (e.g. the
// lossless 50:50 single-photon case), giving a finite density at M = 0.
constexpr double kVanishingLogWeight = 1e-12;

double sign_power(double z, int p) { return (p % 2 != 0 && z < 0.0) ? -1.0 : 1.0; }

// 1/pi * C(2a, b)/(2a)! = 1/(pi b! (2a-b)!)
double weight_prefactor(int a, int b) { return kInvPi / (factorial(b) * factorial(2 * a - b)); }

}  // namespace

double fluctuation_mean(const DetectionContext& ctx, int j, complex gamma) {
    return 2.0 * (std::conj(ctx.h(j)) * gamma).real();
}

double weight_w(int a, int b, double z) {
    if (a < 0 || b < 0 || b > 2 * a) {
        throw DomainError(fmt::format("W_(a,b) requires 0 <= b <= 2a, got a = {}, b = {}", a, b));
    }
    if (z == 0.0 || !std::isfinite(z)) throw DomainError("W_(a,b)(z) requires finite z != 0");
    // z^(2a-b) |z|^(b-a) = sign(z)^b |z|^a
    const double x = std::abs(z);
    return weight_prefactor(a, b) * sign_power(z, b) * std::pow(x, a) * bessel_k(std::abs(b - a), x);
}

double g_function(int a, int b, complex gamma, const DetectionContext& ctx) {
    if (a < 0 || b < 0) throw DomainError("G_(a,b) requires a, b >= 0");
    const double x1 = fluctuation_mean(ctx, 1, gamma) / ctx.sigma(1);
    const double x2 = fluctuation_mean(ctx, 2, gamma) / ctx.sigma(2);
    return std::pow(x1, a) * std::pow(x2, b) * std::exp(-0.5 * (x1 * x1 + x2 * x2));
}

double pdf_coherent(double m, const DetectionContext& ctx) {
    const double scale = ctx.sigma_product();
    if (m == 0.0) return kInf;
    const double z = std::abs(m) / scale;
    return kInvPi / scale * bessel_k_scaled(0, z) * std::exp(-z);
}

GaussianJointParams gaussian_joint_params(const GaussianState& state, const DetectionContext& ctx) {
    state.validate();
    require_matching_mean(SignalState{state}, ctx);

    const double sum_term = state.v_p + state.v_x - 2.0;
    const double diff_term = state.v_p - state.v_x;
    const complex rot = std::polar(1.0, -state.phi_xi);
    double j[2][2];
    for (int u = 1; u <= 2; ++u) {
        for (int l = 1; l <= 2; ++l) {
            const complex hu = ctx.h(u);
            const complex hl = ctx.h(l);
            const double sign = ((u + l) % 2 == 0) ? 1.0 : -1.0;
            const double diag = (u == l) ? ctx.sigma(u) * ctx.sigma(l) : 0.0;
            j[u - 1][l - 1] =
                diag + 0.5 * sign * (sum_term * (hu * std::conj(hl)).real() + diff_term * (hu * hl * rot).real());
        }
    }
    if (!(j[0][0] > 0.0) || !(j[1][1] > 0.0)) {
        throw ValidityError(
            fmt::format("Gaussian joint statistics: non-positive variance J11 = {}, J22 = {}", j[0][0], j[1][1]));
    }
    const double corr = -j[0][1] / std::sqrt(j[0][0] * j[1][1]);
    if (!(std::abs(corr) < 1.0)) {
        throw ValidityError(fmt::format("Gaussian joint statistics: correlation |C| = {} >= 1", std::abs(corr)));
    }
    return {std::sqrt(j[0][0]), std::sqrt(j[1][1]), corr};
}

double pdf_gaussian(double m, const GaussianJointParams& p) {
    if (!(p.s1 > 0.0) || !(p.s2 > 0.0) || !(std::abs(p.corr) < 1.0)) {
        throw ValidityError("invalid Gaussian joint parameters");
    }
    if (m == 0.0) return kInf;
    const double one_minus = 1.0 - p.corr * p.corr;
    const double x = m / (p.scale() * one_minus);
    const double ax = std::abs(x);
    // exp(C x) K_0(|x|) = exp(C x - |x|) * [e^|x| K_0(|x|)]
    return kInvPi / (p.scale() * std::sqrt(one_minus)) * std::exp(p.corr * x - ax) * bessel_k_scaled(0, ax);
}

// ---------------------------------------------------------------------------
// G-basis symbolic derivatives

GExpansion GExpansion::basis(int a, int b) {
    if (a < 0 || b < 0) throw DomainError("G basis indices must be >= 0");
    GExpansion e;
    e.terms_[{a, b}] = 1.0;
    return e;
}

GExpansion GExpansion::apply(const Ratios& k, int keep_total) const {
    GExpansion out;
    auto add = [&](int a, int b, complex c) {
        if (keep_total >= 0 && a + b > keep_total) return;
        out.terms_[{a, b}] += c;
    };
    for (const auto& [ab, c] : terms_) {
        const auto [a, b] = ab;
        add(a + 1, b, -k[0] * c);
        add(a, b + 1, -k[1] * c);
        if (a > 0) add(a - 1, b, static_cast<double>(a) * k[0] * c);
        if (b > 0) add(a, b - 1, static_cast<double>(b) * k[1] * c);
    }
    return out;
}

GExpansion GExpansion::d_conj_gamma(const Ratios& k, int keep_total) const { return apply(k, keep_total); }

GExpansion GExpansion::d_gamma(const Ratios& k, int keep_total) const {
    return apply({std::conj(k[0]), std::conj(k[1])}, keep_total);
}

complex GExpansion::at_origin() const { return coefficient(0, 0); }

complex GExpansion::coefficient(int a, int b) const {
    const auto it = terms_.find({a, b});
    return it == terms_.end() ? complex{} : it->second;
}

std::size_t GExpansion::term_count() const noexcept { return terms_.size(); }

GExpansion::Ratios g_ratios(const DetectionContext& ctx) {
    return {ctx.h(1) / ctx.sigma(1), ctx.h(2) / ctx.sigma(2)};
}

double GDerivativeTable::at(int a, int b) const {
    const auto it = values.find({a, b});
    return it == values.end() ? 0.0 : it->second;
}

GDerivativeTable fock_g_derivatives(int q, const DetectionContext& ctx, int n_max) {
    if (q < 0 || q > n_max) throw DomainError(fmt::format("derivative order q = {} outside [0, {}]", q, n_max));
    const auto k = g_ratios(ctx);
    const std::array<complex, 2> kc{std::conj(k[0]), std::conj(k[1])};

    // The derivative rule is linear, so instead of expanding every starting
    // G_{a,b} forward we carry the evaluation functional backwards:
    // value[a][b] = (ops s+1..2q applied to G_{a,b}) at gamma = 0.
    // Ops 1..q are d/dconj(gamma), ops q+1..2q are d/dgamma.
    const int size = 2 * q + 2;
    std::vector<std::vector<complex>> value(size, std::vector<complex>(size));
    value[0][0] = 1.0;
    for (int s = 2 * q; s >= 1; --s) {
        const auto& kk = (s > q) ? kc : k;
        const int reach = 2 * q - s + 1;  // a + b that can still reach the origin
        std::vector<std::vector<complex>> prev(size, std::vector<complex>(size));
        auto at = [&](int a, int b) -> complex {
            if (a < 0 || b < 0 || a >= size || b >= size) return {};
            return value[a][b];
        };
        for (int a = 0; a <= reach; ++a) {
            for (int b = 0; a + b <= reach; ++b) {
                prev[a][b] = -kk[0] * at(a + 1, b) - kk[1] * at(a, b + 1) +
                             static_cast<double>(a) * kk[0] * at(a - 1, b) +
                             static_cast<double>(b) * kk[1] * at(a, b - 1);
            }
        }
        value = std::move(prev);
    }

    GDerivativeTable table;
    table.q = q;
    for (int a = 0; a <= 2 * q; ++a) {
        for (int b = 0; a + b <= 2 * q; ++b) {
            if ((a + b) % 2 == 0) table.values[{a, b}] = value[a][b].real();
        }
    }
    return table;
}

// ---------------------------------------------------------------------------
// Fock states

FockSeries::FockSeries(int n, const DetectionContext& ctx, int n_max) : n_(n), scale_(ctx.sigma_product()) {
    FockState{n}.validate();
    if (n > n_max) throw DomainError(fmt::format("Fock photon number {} exceeds the limit {}", n, n_max));
    require_matching_mean(SignalState{FockState{n}}, ctx);

    coeff_.resize(n + 1);
    for (int u = 0; u <= n; ++u) coeff_[u].assign(2 * u + 1, 0.0);
    for (int q = 0; q <= n; ++q) {
        const auto table = fock_g_derivatives(q, ctx, n_max);
        const double weight = binomial(n, q) / factorial(q);
        for (int u = 0; u <= q; ++u) {
            for (int l = 0; l <= 2 * u; ++l) coeff_[u][l] += weight * table.at(l, 2 * u - l);
        }
    }
}

double FockSeries::coefficient(int u, int l) const {
    if (u < 0 || u > n_ || l < 0 || l > 2 * u) return 0.0;
    return coeff_[u][l];
}

bool FockSeries::singular_at_zero() const noexcept { return std::abs(coeff_[0][0]) > kVanishingLogWeight; }

double FockSeries::operator()(double m) const {
    if (m == 0.0) {
        if (singular_at_zero()) return kInf;
        // Finite limit: only W_{u,0} and W_{u,2u} (u >= 1) survive, each
        // tending to (u-1)! 2^(u-1) / (pi (2u)!).
        double sum = 0.0;
        for (int u = 1; u <= n_; ++u) {
            const double lim = factorial(u - 1) * std::pow(2.0, u - 1) * kInvPi / factorial(2 * u);
            sum += lim * (coeff_[u][0] + coeff_[u][2 * u]);
        }
        return sum / scale_;
    }
    const double z = m / scale_;
    const double x = std::abs(z);
    std::vector<double> k_scaled(n_ + 1);
    for (int v = 0; v <= n_; ++v) k_scaled[v] = bessel_k_scaled(v, x);

    double sum = 0.0;
    double x_pow = 1.0;
    for (int u = 0; u <= n_; ++u) {
        for (int l = 0; l <= 2 * u; ++l) {
            const double c = coeff_[u][l];
            if (c == 0.0) continue;
            sum += c * weight_prefactor(u, l) * sign_power(z, l) * x_pow * k_scaled[std::abs(l - u)];
        }
        x_pow *= x;
    }
    return sum * std::exp(-x) / scale_;
}

double pdf_fock(double m, int n, const DetectionContext& ctx) { return FockSeries(n, ctx)(m); }

double pdf_single_photon(double m, const DetectionContext& ctx) {
    require_matching_mean(SignalState{FockState{1}}, ctx);
    const double scale = ctx.sigma_product();
    const double a = std::norm(ctx.h(1)) / ctx.sigma_sq(1) + std::norm(ctx.h(2)) / ctx.sigma_sq(2);
    const double cross = 2.0 * (ctx.h(1) * std::conj(ctx.h(2))).real() / scale;
    if (m == 0.0) return std::abs(1.0 - a) > kVanishingLogWeight ? kInf : a * kInvPi / scale;
    const double z = m / scale;
    const double x = std::abs(z);
    const double k0 = bessel_k(0, x);
    const double k1 = bessel_k(1, x);
    return kInvPi / scale * ((1.0 - a) * k0 + a * x * k1 + cross * z * k0);
}

// ---------------------------------------------------------------------------

void require_matching_mean(const SignalState& state, const DetectionContext& ctx) {
    const complex expected = mean_amplitude(state);
    const complex actual = ctx.mean_signal();
    const double tol = 1e-12 * std::max({1.0, std::abs(expected), std::abs(actual)});
    if (std::abs(expected - actual) > tol) {
        throw DomainError(fmt::format("context mean signal ({}, {}) differs from the state's mean amplitude ({}, {})",
                                      actual.real(), actual.imag(), expected.real(), expected.imag()));
    }
}

CorrelationPdf::CorrelationPdf(const SignalState& state, const DetectionContext& ctx, int n_max)
    : state_(state), ctx_(ctx) {
    validate(state_);
    require_matching_mean(state_, ctx_);
    switch (kind()) {
        case StateKind::coherent:
            scale_ = ctx_.sigma_product();
            break;
        case StateKind::gaussian:
            gaussian_ = gaussian_joint_params(std::get<GaussianState>(state_), ctx_);
            scale_ = gaussian_.scale();
            break;
        case StateKind::fock:
            fock_ = std::make_shared<const FockSeries>(std::get<FockState>(state_).n, ctx_, n_max);
            scale_ = ctx_.sigma_product();
            break;
    }
}

double CorrelationPdf::operator()(double m) const {
    switch (kind()) {
        case StateKind::coherent:
            return pdf_coherent(m, ctx_);
        case StateKind::gaussian:
            return pdf_gaussian(m, gaussian_);
        case StateKind::fock:
            return (*fock_)(m);
    }
    return 0.0;
}

bool CorrelationPdf::singular_at_zero() const noexcept { return kind() != StateKind::fock || fock_->singular_at_zero(); }

int CorrelationPdf::truncation_order() const noexcept { return fock_ ? fock_->photon_number() : 0; }

QuadratureResult CorrelationPdf::normalization(double rel_tol) const { return raw_moment(0, rel_tol); }

QuadratureResult CorrelationPdf::raw_moment(int k, double rel_tol) const {
    if (k < 0) throw DomainError("moment order must be >= 0");
    // Integrate in units of the natural scale to keep the rule well conditioned.
    const double s = scale_;
    const auto result = integrate_real_line_split(
        [&](double x) {
            if (x == 0.0) return 0.0;
            return std::pow(x, k) * (*this)(x * s) * s;
        },
        1.0, rel_tol);
    const double factor = std::pow(s, k);
    return {result.value * factor, result.error * factor};
}

}  // namespace hcm
