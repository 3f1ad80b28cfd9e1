#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hcm/lon.hpp"
#include "hcm/signal_state.hpp"

namespace hcm {

struct LonSpec {
    std::string preset = "cross";  ///< "cross", "intensity" or "custom"
    double t2 = 0.5;               ///< cross: |T|^2
    double r2 = 0.5;               ///< cross: |R|^2
    complex t1{1.0, 0.0}, r1{}, t2_amp{1.0, 0.0}, r2_amp{};  ///< intensity splitters
    LonMatrix::Rows q{};           ///< custom matrix

    bool operator==(const LonSpec&) const = default;
};

struct SignalSpec {
    std::string kind = "coherent";  ///< "coherent", "gaussian", "thermal" or "fock"
    complex mean{};
    double vx = 1.0;
    double vp = 1.0;
    double phi_xi = 0.0;
    double nbar = 0.0;  ///< thermal only
    int n = 0;          ///< fock only

    bool operator==(const SignalSpec&) const = default;
};

struct GridSpec {
    double m_min = -6.0;
    double m_max = 6.0;
    int m_points = 241;
    double phi_min = 0.0;
    double phi_max = 6.283185307179586;
    int phi_points = 64;

    bool operator==(const GridSpec&) const = default;
};

struct SimulateSpec {
    std::uint64_t samples = 1000000;
    int bins = 60;
    std::uint64_t seed = 1;
    double range = 6.0;  ///< histogram covers [-range, range] in units of sigma_1 sigma_2

    bool operator==(const SimulateSpec&) const = default;
};

/// How phases in `lo.phase` and the phi grid are read: the LO phase itself,
/// or the optical phase of the probed quadrature (cross-correlation networks only).
enum class PhaseConvention { lo, optical };

/// Unit for M in pdf output: sigma_1 sigma_2, |alpha_L|^2 + |<a>|^2 or |alpha_L|^2.
enum class Normalization { sigma, lo_plus_signal, lo };

struct Scenario {
    std::string task = "pdf";
    LonSpec lon;
    DetectorConfig det1;
    DetectorConfig det2;
    double lo_mag2 = 1e6;
    double lo_phase = 0.0;
    PhaseConvention phase_convention = PhaseConvention::lo;
    SignalSpec signal;
    GridSpec grid;
    Normalization normalization = Normalization::sigma;
    SimulateSpec simulate;
    std::optional<complex> reference_alpha;
    int fock_n_max = 20;
    double high_intensity_floor = kDefaultHighIntensityFloor;

    bool operator==(const Scenario&) const = default;
};

/// Throws ConfigError naming the offending field path.
Scenario parse_scenario(const nlohmann::json& j);
/// Canonical form with every field present; parse_scenario inverts it exactly.
nlohmann::json to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);

LonMatrix build_lon(const Scenario& s);
SignalState build_state(const Scenario& s);
/// LO phase actually applied for a phase `phi` read in the scenario's convention.
double lo_phase_for(const Scenario& s, const LonMatrix& lon, double phi);
/// Context for the scenario's state at phase `phi` (scenario convention).
DetectionContext build_context_at(const Scenario& s, double phi);
DetectionContext build_context(const Scenario& s);
double normalization_constant(const Scenario& s, const DetectionContext& ctx);

/// Points of the M grid in normalized units; an exact 0 is dropped.
std::vector<double> m_grid(const GridSpec& g);
std::vector<double> phi_grid(const GridSpec& g);

void run_pdf(const Scenario& s, std::ostream& out);
void run_pdf_map(const Scenario& s, std::ostream& out);
void run_moments(const Scenario& s, std::ostream& out);
void run_phase_scan(const Scenario& s, std::ostream& out);
void run_nonclassicality(const Scenario& s, std::ostream& out);
void run_simulate(const Scenario& s, std::ostream& out);

/// Dispatches on s.task.
void run_task(const Scenario& s, std::ostream& out);

/// Runs every dataset of a figure config ({"figure", "base", "datasets"})
/// into `<out_dir>/fig<N>_<name>.csv` and returns the written paths.
std::vector<std::filesystem::path> run_figure(const nlohmann::json& config, const std::filesystem::path& out_dir,
                                              std::optional<int> grid_points = std::nullopt);

}  // namespace hcm
