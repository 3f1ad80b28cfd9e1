#pragma once

#include <complex>
#include <string_view>
#include <variant>

namespace hcm {

using complex = std::complex<double>;

struct CoherentState {
    complex alpha;

    bool operator==(const CoherentState&) const = default;
};

/// Gaussian state given by its maximal and minimal quadrature variances
/// (coherent-state variance 1), the orientation angle of the ellipse and
/// the mean amplitude <a>.
struct GaussianState {
    double v_x = 1.0;
    double v_p = 1.0;
    double phi_xi = 0.0;
    complex mean;

    /// Throws DomainError unless v_x >= v_p > 0 and v_x v_p >= 1.
    void validate() const;
    /// V_p >= 1, i.e. the P function is a proper probability density.
    bool is_classical() const noexcept { return v_p >= 1.0; }

    bool operator==(const GaussianState&) const = default;
};

/// Photon-number state |n>. Its mean amplitude is always zero.
struct FockState {
    int n = 0;

    void validate() const;
    bool operator==(const FockState&) const = default;
};

using SignalState = std::variant<CoherentState, GaussianState, FockState>;

enum class StateKind { coherent, gaussian, fock };

StateKind kind_of(const SignalState& state) noexcept;
std::string_view to_string(StateKind kind) noexcept;

/// <a> of the state; zero for Fock states.
complex mean_amplitude(const SignalState& state) noexcept;

/// Validates whichever alternative is held.
void validate(const SignalState& state);

/// Thermal state with mean photon number nbar: V_x = V_p = 1 + 2 nbar.
GaussianState thermal_state(double nbar, complex mean = {});

}  // namespace hcm
