// Command-line front end: pdf, moments, phase scans, nonclassicality tests,
// Monte-Carlo comparison and figure datasets.

#include <array>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hcm/errors.hpp"
#include "hcm/scenario.hpp"

#ifndef HCM_CONFIG_DIR
#define HCM_CONFIG_DIR "configs"
#endif

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kValidity = 3, kNonconvergence = 4 };

struct Globals {
    std::string config;
    std::string out;
    std::optional<int> grid_points;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> samples;
    std::optional<int> bins;
};

hcm::Scenario scenario_for(const Globals& g, const std::string& task) {
    hcm::Scenario s = g.config.empty() ? hcm::Scenario{} : hcm::load_scenario(g.config);
    s.task = task;
    if (g.grid_points) {
        if (task == "scan-phase") {
            s.grid.phi_points = *g.grid_points;
        } else {
            s.grid.m_points = *g.grid_points;
        }
    }
    if (g.seed) s.simulate.seed = *g.seed;
    if (g.samples) s.simulate.samples = *g.samples;
    if (g.bins) s.simulate.bins = *g.bins;
    if (s.grid.m_points < 2 || s.grid.phi_points < 2) throw hcm::ConfigError("--grid-points: must be >= 2");
    if (s.simulate.samples < 2) throw hcm::ConfigError("--samples: must be >= 2");
    if (s.simulate.bins < 1) throw hcm::ConfigError("--bins: must be >= 1");
    return s;
}

void emit(const Globals& g, const hcm::Scenario& s) {
    if (g.out.empty() || g.out == "-") {
        hcm::run_task(s, std::cout);
        return;
    }
    std::ofstream out(g.out);
    if (!out) throw hcm::ConfigError(fmt::format("--out: cannot write '{}'", g.out));
    hcm::run_task(s, out);
}

int run_figure(const Globals& g, int figure) {
    const std::string path = g.config.empty() ? fmt::format("{}/fig{}.json", HCM_CONFIG_DIR, figure) : g.config;
    std::ifstream in(path);
    if (!in) throw hcm::ConfigError(fmt::format("cannot open figure config '{}'", path));
    nlohmann::json config;
    try {
        in >> config;
    } catch (const nlohmann::json::exception& e) {
        throw hcm::ConfigError(fmt::format("{}: {}", path, e.what()));
    }
    if (config.value("figure", -1) != figure) {
        throw hcm::ConfigError(fmt::format("{}: config is not for figure {}", path, figure));
    }
    if (g.grid_points && *g.grid_points < 2) throw hcm::ConfigError("--grid-points: must be >= 2");
    const auto written = hcm::run_figure(config, g.out.empty() ? "." : g.out, g.grid_points);
    for (const auto& p : written) std::cout << p.string() << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Correlation statistics of homodyne correlation measurements"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config, "JSON scenario (or figure) config");
    app.add_option("--out", g.out, "Output CSV path (directory for 'figure'); stdout when omitted");
    app.add_option("--grid-points", g.grid_points, "Override the number of grid points");
    app.add_option("--seed", g.seed, "Monte-Carlo seed");

    const std::array<std::pair<const char*, const char*>, 5> tasks{{
        {"pdf", "Correlation density w(M) on an M grid"},
        {"moments", "Mean, variance and nonclassicality indicators"},
        {"scan-phase", "Moments and indicators across a phase grid"},
        {"nonclassicality", "Verdicts of the r and D criteria"},
        {"simulate", "Photocount Monte-Carlo histogram against the closed form"},
    }};
    std::string chosen;
    for (const auto& [name, help] : tasks) {
        auto* sub = app.add_subcommand(name, help);
        sub->callback([&chosen, name = std::string(name)] { chosen = name; });
        if (std::string(name) == "simulate") {
            sub->add_option("--samples", g.samples, "Number of samples");
            sub->add_option("--bins", g.bins, "Histogram bins");
        }
    }
    int figure = 0;
    auto* fig = app.add_subcommand("figure", "Write the datasets of one figure into the --out directory");
    fig->add_option("number", figure, "Figure number")->required()->check(CLI::Range(2, 7));
    fig->callback([&chosen] { chosen = "figure"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (chosen == "figure") return run_figure(g, figure);
        emit(g, scenario_for(g, chosen));
        return kOk;
    } catch (const hcm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const hcm::DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const hcm::ValidityError& e) {
        std::cerr << "validity error: " << e.what() << '\n';
        return kValidity;
    } catch (const hcm::ConvergenceError& e) {
        std::cerr << "nonconvergence: " << e.what() << " (achieved error " << e.achieved_error() << ")\n";
        return kNonconvergence;
    }
}
