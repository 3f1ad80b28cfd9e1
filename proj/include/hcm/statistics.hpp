#pragma once

#include <complex>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "hcm/lon.hpp"
#include "hcm/quadrature.hpp"
#include "hcm/signal_state.hpp"

namespace hcm {

/// mu_j(gamma) = conj(h_j) gamma + h_j conj(gamma), the shift of the
/// detector-j current fluctuation caused by signal noise gamma. Always real.
double fluctuation_mean(const DetectionContext& ctx, int j, complex gamma);

/// W_{a,b}(z) = 1/pi * 1/(2a)! * C(2a, b) * z^(2a-b) |z|^(b-a) K_{|b-a|}(|z|),
/// for 0 <= b <= 2a and z != 0.
double weight_w(int a, int b, double z);

/// G_{a,b}(gamma) = (mu_1/sigma_1)^a (mu_2/sigma_2)^b exp(-mu_1^2/2sigma_1^2 - mu_2^2/2sigma_2^2).
double g_function(int a, int b, complex gamma, const DetectionContext& ctx);

/// Coherent-state density w(M) = K_0(|M| / sigma_1 sigma_2) / (pi sigma_1 sigma_2).
/// Returns +inf at the integrable singularity M = 0.
double pdf_coherent(double m, const DetectionContext& ctx);

/// Standard deviations and correlation coefficient of the zero-mean
/// bivariate normal that the current fluctuations follow for a Gaussian signal.
struct GaussianJointParams {
    double s1 = 1.0;
    double s2 = 1.0;
    double corr = 0.0;

    double scale() const noexcept { return s1 * s2; }
    bool operator==(const GaussianJointParams&) const = default;
};

/// Requires ctx.mean_signal() == state.mean. Throws ValidityError when the
/// resulting covariance is not positive definite (|C| >= 1 or J_jj <= 0).
GaussianJointParams gaussian_joint_params(const GaussianState& state, const DetectionContext& ctx);

/// Closed-form product density of two correlated zero-mean normals; +inf at M = 0.
double pdf_gaussian(double m, const GaussianJointParams& params);

/// A finite linear combination sum c_{a,b} G_{a,b} with complex coefficients,
/// closed under the Wirtinger derivatives d/dgamma and d/dconj(gamma).
class GExpansion {
public:
    /// Ratios k_j = h_j / sigma_j that drive the derivative rules.
    using Ratios = std::array<complex, 2>;

    static GExpansion basis(int a, int b);

    /// d/dconj(gamma): G_{a,b} -> -k1 G_{a+1,b} - k2 G_{a,b+1} + a k1 G_{a-1,b} + b k2 G_{a,b-1}.
    /// Terms with a+b > keep_total are dropped (they cannot reach gamma = 0 in
    /// the remaining derivatives); negative keep_total keeps everything.
    GExpansion d_conj_gamma(const Ratios& k, int keep_total = -1) const;
    /// d/dgamma, the same rule with conj(k_j).
    GExpansion d_gamma(const Ratios& k, int keep_total = -1) const;

    /// Value at gamma = 0, using G_{a,b}(0) = delta_{a0} delta_{b0}.
    complex at_origin() const;
    complex coefficient(int a, int b) const;
    std::size_t term_count() const noexcept;

    const std::map<std::pair<int, int>, complex>& terms() const noexcept { return terms_; }

private:
    GExpansion apply(const Ratios& k, int keep_total) const;

    std::map<std::pair<int, int>, complex> terms_;
};

GExpansion::Ratios g_ratios(const DetectionContext& ctx);

/// Values of d^q/dgamma^q d^q/dconj(gamma)^q G_{a,b} at gamma = 0, keyed by (a, b).
/// Only entries with a + b even and <= 2q can be nonzero and only those are stored.
struct GDerivativeTable {
    int q = 0;
    std::map<std::pair<int, int>, double> values;

    double at(int a, int b) const;
};

inline constexpr int kDefaultFockMax = 20;

GDerivativeTable fock_g_derivatives(int q, const DetectionContext& ctx, int n_max = kDefaultFockMax);

/// Precomputed coefficients c_{u,l} = sum_{q>=u} C(n,q)/q! [d^q d*^q G_{l,2u-l}](0)
/// so that w(M) = 1/(sigma_1 sigma_2) sum_{u<=n} sum_{l<=2u} W_{u,l}(M/sigma_1 sigma_2) c_{u,l}.
class FockSeries {
public:
    FockSeries(int n, const DetectionContext& ctx, int n_max = kDefaultFockMax);

    int photon_number() const noexcept { return n_; }
    double coefficient(int u, int l) const;
    double operator()(double m) const;
    /// True when the K_0 term carries weight, so the density diverges at M = 0.
    bool singular_at_zero() const noexcept;

private:
    int n_;
    double scale_;
    std::vector<std::vector<double>> coeff_;  // coeff_[u][l], l in [0, 2u]
};

/// Fock-state density; requires ctx.mean_signal() == 0.
double pdf_fock(double m, int n, const DetectionContext& ctx);

/// Closed single-photon density, written out term by term.
double pdf_single_photon(double m, const DetectionContext& ctx);

/// Evaluable density w(M) of the product observable for one of the
/// implemented state families, bound to its detection context.
class CorrelationPdf {
public:
    /// The context's mean signal must equal the state's mean amplitude.
    CorrelationPdf(const SignalState& state, const DetectionContext& ctx, int n_max = kDefaultFockMax);

    double operator()(double m) const;

    StateKind kind() const noexcept { return kind_of(state_); }
    const SignalState& state() const noexcept { return state_; }
    const DetectionContext& context() const noexcept { return ctx_; }
    /// Natural scale of M: s1 s2 for Gaussian states, sigma_1 sigma_2 otherwise.
    double scale() const noexcept { return scale_; }
    bool singular_at_zero() const noexcept;
    /// Fock photon number; 0 for closed-form families.
    int truncation_order() const noexcept;

    /// Integral of w with M = 0 as a panel boundary.
    QuadratureResult normalization(double rel_tol = 1e-12) const;
    /// Integral of M^k w(M).
    QuadratureResult raw_moment(int k, double rel_tol = 1e-12) const;

private:
    SignalState state_;
    DetectionContext ctx_;
    double scale_ = 1.0;
    GaussianJointParams gaussian_{};
    std::shared_ptr<const FockSeries> fock_;
};

/// Checks that a context was built for the state's mean amplitude.
void require_matching_mean(const SignalState& state, const DetectionContext& ctx);

}  // namespace hcm
