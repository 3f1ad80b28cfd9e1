#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

namespace hcm {

using complex = std::complex<double>;

/// 2x3 input-output matrix of the linear optical network.
///
/// Rows are the detected output modes a1, a2; columns are the signal, the
/// reference (local oscillator) and the vacuum input. The matrix is a
/// sub-block of a 3x3 unitary, so q q^dagger has eigenvalues in [0, 1].
/// Constant losses appear only as a deficit in the row norms.
class LonMatrix {
public:
    using Rows = std::array<std::array<complex, 3>, 2>;

    /// Validates the sub-unitarity of `q`; throws DomainError otherwise.
    explicit LonMatrix(const Rows& q);

    /// Element Q_{j,u} with 1-based row j in {1,2} and column u in {1,2,3}.
    complex operator()(int j, int u) const;

    const Rows& rows() const noexcept { return q_; }

    /// Eigenvalues of the Gram matrix q q^dagger in ascending order.
    std::array<double, 2> gram_eigenvalues() const;

    double row_norm_squared(int j) const;

    bool operator==(const LonMatrix&) const = default;

private:
    Rows q_;
};

/// Tolerance used when checking |t|^2 + |r|^2 <= 1 and the Gram bound.
inline constexpr double kUnitarityTolerance = 1e-12;

/// Homodyne cross-correlation network [[t, r, 0], [r, t, 0]].
LonMatrix make_cross_correlation_lon(complex t, complex r);

/// Cross-correlation network from intensity ratios |T|^2 : |R|^2 with the
/// symmetric beam-splitter phases T = |T|, R = i|R|.
LonMatrix make_cross_correlation_lon_from_ratios(double t_squared, double r_squared);

/// Homodyne intensity-correlation network built from two beam splitters:
/// [[t2 t1, t2 r1, r2], [r2 t1, r2 r1, t2]].
LonMatrix make_intensity_correlation_lon(complex t1, complex r1, complex t2, complex r2);

struct DetectorConfig {
    double eta = 1.0;  ///< quantum efficiency in [0, 1]
    double nu = 0.0;   ///< mean dark counts, >= 0

    void validate() const;
    bool operator==(const DetectorConfig&) const = default;
};

/// Coherent reference beam alpha_L = magnitude * exp(i phase).
struct LocalOscillator {
    double magnitude = 0.0;
    double phase = 0.0;

    complex amplitude() const { return std::polar(magnitude, phase); }
    /// Phase reduced to [0, 2 pi) for reporting.
    double reported_phase() const;
    void validate() const;
    bool operator==(const LocalOscillator&) const = default;
};

/// alpha_j(alpha, alpha_L) = Q_{j1} alpha + Q_{j2} alpha_L for detector j in {1, 2}.
complex output_amplitude(const LonMatrix& lon, int j, complex alpha, const LocalOscillator& lo);

inline constexpr double kDefaultHighIntensityFloor = 100.0;

/// Everything the detection statistics depend on: the network, both
/// detectors, the local oscillator and the mean signal amplitude <a>.
///
/// Caches sigma_j^2 = eta_j |alpha_j(<a>, alpha_L)|^2 + nu_j and
/// h_j = eta_j conj(Q_{j1}) alpha_j(<a>, alpha_L). Immutable after construction.
class DetectionContext {
public:
    const LonMatrix& lon() const noexcept { return lon_; }
    const DetectorConfig& detector(int j) const;
    const LocalOscillator& lo() const noexcept { return lo_; }
    complex mean_signal() const noexcept { return mean_signal_; }

    double sigma_sq(int j) const;
    double sigma(int j) const;
    complex h(int j) const;
    /// sigma_1 * sigma_2, the natural scale of M.
    double sigma_product() const noexcept { return sigma_[0] * sigma_[1]; }

    /// Non-fatal diagnostics, e.g. detector intensity below the high-intensity floor.
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    bool high_intensity() const noexcept { return warnings_.empty(); }

private:
    friend DetectionContext build_context(const LonMatrix&, const DetectorConfig&, const DetectorConfig&,
                                          const LocalOscillator&, complex, double);
    DetectionContext(const LonMatrix& lon, const DetectorConfig& d1, const DetectorConfig& d2,
                     const LocalOscillator& lo, complex mean);

    LonMatrix lon_;
    std::array<DetectorConfig, 2> det_;
    LocalOscillator lo_;
    complex mean_signal_;
    std::array<double, 2> sigma_sq_{};
    std::array<double, 2> sigma_{};
    std::array<complex, 2> h_{};
    std::vector<std::string> warnings_;
};

/// Builds a context. Throws ValidityError if some sigma_j^2 is not strictly
/// positive. Detected intensities eta_j |alpha_j|^2 below `high_intensity_floor`
/// are recorded as warnings only.
DetectionContext build_context(const LonMatrix& lon, const DetectorConfig& det1, const DetectorConfig& det2,
                               const LocalOscillator& lo, complex mean_signal,
                               double high_intensity_floor = kDefaultHighIntensityFloor);

/// Same network, detectors and LO with a different mean signal amplitude.
DetectionContext with_mean_signal(const DetectionContext& ctx, complex mean_signal,
                                  double high_intensity_floor = kDefaultHighIntensityFloor);

/// Same network, detectors and mean signal with a different LO.
DetectionContext with_local_oscillator(const DetectionContext& ctx, const LocalOscillator& lo,
                                       double high_intensity_floor = kDefaultHighIntensityFloor);

}  // namespace hcm
