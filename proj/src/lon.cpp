#include "hcm/lon.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "hcm/errors.hpp"

namespace hcm {

namespace {

void check_index(int j, int upper, const char* what) {
    if (j < 1 || j > upper) {
        throw std::out_of_range(fmt::format("{} index {} outside [1, {}]", what, j, upper));
    }
}

void check_splitter(complex t, complex r, const char* name) {
    const double norm = std::norm(t) + std::norm(r);
    if (norm > 1.0 + kUnitarityTolerance) {
        throw DomainError(fmt::format("{}: |t|^2 + |r|^2 = {} exceeds 1 (non-physical splitter)", name, norm));
    }
}

}  // namespace

LonMatrix::LonMatrix(const Rows& q) : q_(q) {
    for (const auto& row : q_) {
        for (const auto& v : row) {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
                throw DomainError("network matrix has non-finite entries");
            }
        }
    }
    for (int j = 1; j <= 2; ++j) {
        if (row_norm_squared(j) > 1.0 + kUnitarityTolerance) {
            throw DomainError(fmt::format("network row {} has squared norm {} > 1", j, row_norm_squared(j)));
        }
    }
    const auto ev = gram_eigenvalues();
    if (ev[1] > 1.0 + kUnitarityTolerance) {
        throw DomainError(
            fmt::format("network is not sub-unitary: Gram eigenvalue {} > 1 (rows not extendable to a unitary)", ev[1]));
    }
}

complex LonMatrix::operator()(int j, int u) const {
    check_index(j, 2, "network row");
    check_index(u, 3, "network column");
    return q_[j - 1][u - 1];
}

double LonMatrix::row_norm_squared(int j) const {
    check_index(j, 2, "network row");
    double s = 0.0;
    for (const auto& v : q_[j - 1]) s += std::norm(v);
    return s;
}

std::array<double, 2> LonMatrix::gram_eigenvalues() const {
    // Hermitian 2x2 [[a, c], [conj(c), b]].
    const double a = row_norm_squared(1);
    const double b = row_norm_squared(2);
    complex c{};
    for (int u = 0; u < 3; ++u) c += q_[0][u] * std::conj(q_[1][u]);
    const double mean = 0.5 * (a + b);
    const double radius = std::hypot(0.5 * (a - b), std::abs(c));
    return {mean - radius, mean + radius};
}

LonMatrix make_cross_correlation_lon(complex t, complex r) {
    check_splitter(t, r, "cross-correlation splitter");
    const double norm = std::norm(t) + std::norm(r);
    if (std::abs(norm - 1.0) <= kUnitarityTolerance) {
        const double phase_condition = 2.0 * (std::conj(t) * r).real();  // t* r + r* t
        if (std::abs(phase_condition) > 1e-10) {
            throw DomainError(fmt::format(
                "lossless cross-correlation splitter violates t* r + r* t = 0 (got {})", phase_condition));
        }
    }
    return LonMatrix({{{t, r, complex{}}, {r, t, complex{}}}});
}

LonMatrix make_cross_correlation_lon_from_ratios(double t_squared, double r_squared) {
    if (t_squared < 0.0 || r_squared < 0.0) {
        throw DomainError("splitter intensity ratios must be non-negative");
    }
    return make_cross_correlation_lon(complex{std::sqrt(t_squared), 0.0}, complex{0.0, std::sqrt(r_squared)});
}

LonMatrix make_intensity_correlation_lon(complex t1, complex r1, complex t2, complex r2) {
    check_splitter(t1, r1, "first intensity-correlation splitter");
    check_splitter(t2, r2, "second intensity-correlation splitter");
    return LonMatrix({{{t2 * t1, t2 * r1, r2}, {r2 * t1, r2 * r1, t2}}});
}

void DetectorConfig::validate() const {
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw DomainError(fmt::format("detector efficiency {} outside [0, 1]", eta));
    }
    if (!(nu >= 0.0) || !std::isfinite(nu)) {
        throw DomainError(fmt::format("dark-count rate {} must be finite and >= 0", nu));
    }
}

double LocalOscillator::reported_phase() const {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double p = std::fmod(phase, two_pi);
    if (p < 0.0) p += two_pi;
    return p;
}

void LocalOscillator::validate() const {
    if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) {
        throw DomainError(fmt::format("local-oscillator magnitude {} must be finite and >= 0", magnitude));
    }
    if (!std::isfinite(phase)) throw DomainError("local-oscillator phase must be finite");
}

complex output_amplitude(const LonMatrix& lon, int j, complex alpha, const LocalOscillator& lo) {
    return lon(j, 1) * alpha + lon(j, 2) * lo.amplitude();
}

DetectionContext::DetectionContext(const LonMatrix& lon, const DetectorConfig& d1, const DetectorConfig& d2,
                                   const LocalOscillator& lo, complex mean)
    : lon_(lon), det_{d1, d2}, lo_(lo), mean_signal_(mean) {}

const DetectorConfig& DetectionContext::detector(int j) const {
    check_index(j, 2, "detector");
    return det_[j - 1];
}

double DetectionContext::sigma_sq(int j) const {
    check_index(j, 2, "detector");
    return sigma_sq_[j - 1];
}

double DetectionContext::sigma(int j) const {
    check_index(j, 2, "detector");
    return sigma_[j - 1];
}

complex DetectionContext::h(int j) const {
    check_index(j, 2, "detector");
    return h_[j - 1];
}

DetectionContext build_context(const LonMatrix& lon, const DetectorConfig& det1, const DetectorConfig& det2,
                               const LocalOscillator& lo, complex mean_signal, double high_intensity_floor) {
    det1.validate();
    det2.validate();
    lo.validate();
    if (!std::isfinite(mean_signal.real()) || !std::isfinite(mean_signal.imag())) {
        throw DomainError("mean signal amplitude must be finite");
    }

    DetectionContext ctx(lon, det1, det2, lo, mean_signal);
    for (int j = 1; j <= 2; ++j) {
        const auto& det = ctx.det_[j - 1];
        const complex amp = output_amplitude(lon, j, mean_signal, lo);
        const double intensity = det.eta * std::norm(amp);
        const double s2 = intensity + det.nu;
        if (!(s2 > 0.0)) {
            throw ValidityError(fmt::format("detector {} receives no light: sigma^2 = {}", j, s2));
        }
        ctx.sigma_sq_[j - 1] = s2;
        ctx.sigma_[j - 1] = std::sqrt(s2);
        ctx.h_[j - 1] = det.eta * std::conj(lon(j, 1)) * amp;
        if (intensity < high_intensity_floor) {
            ctx.warnings_.push_back(fmt::format(
                "not in high-intensity regime: detector {} intensity eta|alpha|^2 = {:.6g} < {:.6g}", j, intensity,
                high_intensity_floor));
        }
    }
    return ctx;
}

DetectionContext with_mean_signal(const DetectionContext& ctx, complex mean_signal, double high_intensity_floor) {
    return build_context(ctx.lon(), ctx.detector(1), ctx.detector(2), ctx.lo(), mean_signal, high_intensity_floor);
}

DetectionContext with_local_oscillator(const DetectionContext& ctx, const LocalOscillator& lo,
                                       double high_intensity_floor) {
    return build_context(ctx.lon(), ctx.detector(1), ctx.detector(2), lo, ctx.mean_signal(), high_intensity_floor);
}

}  // namespace hcm
