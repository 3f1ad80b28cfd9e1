#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hcm/lon.hpp"
#include "hcm/signal_state.hpp"

namespace hcm {

/// E(M^k | gamma) = (-sigma_1 sigma_2 / 2)^k H_k(i mu_1 / sqrt2 sigma_1) H_k(i mu_2 / sqrt2 sigma_2),
/// evaluated with the real polynomials i^k H_k(iy). k >= 1.
double conditional_moment(int k, complex gamma, const DetectionContext& ctx);

/// Polynomial in gamma and conj(gamma): sum c_{i,j} gamma^i conj(gamma)^j.
class WirtingerPolynomial {
public:
    WirtingerPolynomial() = default;
    static WirtingerPolynomial constant(complex c);
    /// conj(h) gamma + h conj(gamma)
    static WirtingerPolynomial real_linear(complex h);

    WirtingerPolynomial operator+(const WirtingerPolynomial& o) const;
    WirtingerPolynomial operator*(const WirtingerPolynomial& o) const;
    complex coefficient(int i, int j) const;
    complex evaluate(complex gamma) const;

private:
    std::map<std::pair<int, int>, complex> terms_;
};

/// Integral of f against the Fock-state P function sum_q C(n,q)/q! d^q d*^q delta(gamma):
/// integration by parts turns each term into (q!)^2 times the gamma^q conj(gamma)^q coefficient.
double fock_expectation(const WirtingerPolynomial& f, int n);

struct MeanVariance {
    double mean = 0.0;
    double variance = 0.0;
};

/// Unconditional E(M) and var(M). The context must be built for the state's mean amplitude.
MeanVariance mean_var_m(const SignalState& state, const DetectionContext& ctx);

/// The normal-ordered second moments that enter the mean correlation of the
/// cross-correlation scheme, for quadrature x_phi = a e^{i phi} + a^dagger e^{-i phi}.
struct NormalOrderedMoments {
    double var_n = 0.0;  ///< <:(dn)^2:>
    double cross = 0.0;  ///< <:dx_phi dn:>
    double var_x = 0.0;  ///< <:(dx_phi)^2:>
    double phase = 0.0;  ///< optical phase phi
    bool large_mean = true;  ///< |<a>| >= 10, where the closed forms are accurate
};

inline constexpr double kLargeMeanThreshold = 10.0;

/// Large-mean closed forms for a Gaussian state at optical phase phi.
NormalOrderedMoments gaussian_normal_ordered_moments(const GaussianState& state, double phi);

/// E(M) = eta1 eta2 [ |T|^2|R|^2 var_n + |aL| |T||R| (|R|^2 - |T|^2) cross - |aL|^2 |T|^2|R|^2 var_x ].
double mean_decomposition_cc(const NormalOrderedMoments& m, complex t, complex r, const LocalOscillator& lo,
                             double eta1, double eta2);

/// Extracts (T, R) when the network has the cross-correlation form [[T, R, 0], [R, T, 0]].
std::optional<std::pair<complex, complex>> as_cross_correlation(const LonMatrix& lon);

/// Optical phase of the quadrature probed by a lossless cross-correlation
/// splitter at LO phase `lo_phase`: phi = -lo_phase - kappa pi/2 with
/// kappa = sign Im(conj(T) R).
double optical_phase_cc(complex t, complex r, double lo_phase);
/// Inverse of optical_phase_cc.
double lo_phase_for_optical_phase_cc(complex t, complex r, double phi);

inline constexpr double kVerdictTolerance = 1e-9;

struct CauchySchwarzResult {
    double d = 0.0;
    double scale = 0.0;  ///< natural magnitude used for the verdict tolerance
    bool anomalous = false;
};

/// D(phi) = var_n var_x - cross^2; anomalous when D < -rel_tol * scale.
CauchySchwarzResult cauchy_schwarz_d(const NormalOrderedMoments& m, double rel_tol = kVerdictTolerance);

struct NonclassicalityR {
    double r = 0.0;
    bool nonclassical = false;
};

/// r = var(M) / (sigma_1^2 sigma_2^2) - 1 with sigma_j from a coherent
/// reference of amplitude <a>; nonclassical when r < -rel_tol.
NonclassicalityR nonclassicality_r(double var_m, const DetectionContext& reference,
                                   double rel_tol = kVerdictTolerance);

/// Context of the coherent reference measurement: same device and LO, a
/// coherent signal whose amplitude equals the probed state's mean.
DetectionContext reference_context(const SignalState& state, const DetectionContext& ctx);

struct MomentReport {
    double mean_m = 0.0;
    double var_m = 0.0;
    double r = 0.0;
    std::optional<double> d_phi;
    std::optional<NormalOrderedMoments> normal_ordered;
    bool nonclassical_by_r = false;
    bool anomalous_by_d = false;
    std::vector<std::string> warnings;
};

struct VerdictTolerances {
    double r = kVerdictTolerance;
    double d = kVerdictTolerance;
};

/// Moments and both nonclassicality indicators. D(phi) is reported for
/// Gaussian states probed by a cross-correlation network, at the optical
/// phase set by the context's LO. `reference` overrides the automatic
/// coherent reference context.
MomentReport analyze_moments(const SignalState& state, const DetectionContext& ctx,
                             const std::optional<DetectionContext>& reference = std::nullopt,
                             const VerdictTolerances& tol = {});

}  // namespace hcm
