#include "hcm/signal_state.hpp"

#include <cmath>

#include <fmt/format.h>

#include "hcm/errors.hpp"

namespace hcm {

namespace {
// V_x V_p >= 1 is checked with a relative slack so that pure squeezed
// states entered as (V, 1/V) are accepted.
constexpr double kHeisenbergSlack = 1e-12;
}  // namespace

void GaussianState::validate() const {
    if (!std::isfinite(v_x) || !std::isfinite(v_p) || !std::isfinite(phi_xi) || !std::isfinite(mean.real()) ||
        !std::isfinite(mean.imag())) {
        throw DomainError("Gaussian state parameters must be finite");
    }
    if (!(v_p > 0.0)) throw DomainError(fmt::format("Gaussian state: V_p = {} must be > 0", v_p));
    if (v_x < v_p) throw DomainError(fmt::format("Gaussian state: V_x = {} must be >= V_p = {}", v_x, v_p));
    if (v_x * v_p < 1.0 - kHeisenbergSlack) {
        throw DomainError(fmt::format("Gaussian state: V_x V_p = {} violates the uncertainty bound", v_x * v_p));
    }
}

void FockState::validate() const {
    if (n < 0) throw DomainError(fmt::format("Fock state: photon number {} must be >= 0", n));
}

StateKind kind_of(const SignalState& state) noexcept { return static_cast<StateKind>(state.index()); }

std::string_view to_string(StateKind kind) noexcept {
    switch (kind) {
        case StateKind::coherent:
            return "coherent";
        case StateKind::gaussian:
            return "gaussian";
        case StateKind::fock:
            return "fock";
    }
    return "unknown";
}

complex mean_amplitude(const SignalState& state) noexcept {
    if (const auto* c = std::get_if<CoherentState>(&state)) return c->alpha;
    if (const auto* g = std::get_if<GaussianState>(&state)) return g->mean;
    return {};
}

void validate(const SignalState& state) {
    if (const auto* c = std::get_if<CoherentState>(&state)) {
        if (!std::isfinite(c->alpha.real()) || !std::isfinite(c->alpha.imag())) {
            throw DomainError("coherent amplitude must be finite");
        }
    } else if (const auto* g = std::get_if<GaussianState>(&state)) {
        g->validate();
    } else {
        std::get<FockState>(state).validate();
    }
}

GaussianState thermal_state(double nbar, complex mean) {
    if (!(nbar >= 0.0)) throw DomainError("thermal mean photon number must be >= 0");
    const double v = 1.0 + 2.0 * nbar;
    return GaussianState{v, v, 0.0, mean};
}

}  // namespace hcm
