#include "hcm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "hcm/errors.hpp"
#include "hcm/moments.hpp"
#include "hcm/oracle_sim.hpp"
#include "hcm/statistics.hpp"

namespace hcm {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering its path for error messages and
// rejecting keys nobody asked for.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(fmt::format("{}: expected an object", display()));
    }

    bool has(const char* key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    double number(const char* key, double def) {
        if (!has(key)) return def;
        const auto& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(fmt::format("{}: expected a number", field(key)));
        return v.get<double>();
    }

    std::int64_t integer(const char* key, std::int64_t def) {
        if (!has(key)) return def;
        const auto& v = j_.at(key);
        if (!v.is_number_integer()) throw ConfigError(fmt::format("{}: expected an integer", field(key)));
        return v.get<std::int64_t>();
    }

    std::uint64_t unsigned_integer(const char* key, std::uint64_t def) {
        if (!has(key)) return def;
        const auto& v = j_.at(key);
        if (!v.is_number_unsigned()) throw ConfigError(fmt::format("{}: expected a nonnegative integer", field(key)));
        return v.get<std::uint64_t>();
    }

    std::string string(const char* key, const std::string& def) {
        if (!has(key)) return def;
        const auto& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(fmt::format("{}: expected a string", field(key)));
        return v.get<std::string>();
    }

    complex complex_number(const char* key, complex def) {
        if (!has(key)) return def;
        return parse_complex(j_.at(key), field(key));
    }

    const json* object(const char* key) {
        if (!has(key)) return nullptr;
        return &j_.at(key);
    }

    void finish() const {
        for (const auto& [key, _] : j_.items()) {
            if (!seen_.count(key)) throw ConfigError(fmt::format("{}: unknown key", field(key.c_str())));
        }
    }

    static complex parse_complex(const json& v, const std::string& path) {
        if (v.is_number()) return {v.get<double>(), 0.0};
        if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
            return {v[0].get<double>(), v[1].get<double>()};
        }
        throw ConfigError(fmt::format("{}: expected a number or [re, im]", path));
    }

private:
    std::string display() const { return path_.empty() ? "<root>" : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

json complex_json(complex c) { return json::array({c.real(), c.imag()}); }

const char* to_string(PhaseConvention c) { return c == PhaseConvention::optical ? "optical" : "lo"; }

const char* to_string(Normalization n) {
    switch (n) {
        case Normalization::sigma: return "sigma";
        case Normalization::lo_plus_signal: return "lo_plus_signal";
        case Normalization::lo: return "lo";
    }
    return "sigma";
}

void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ConfigError(fmt::format("{}: {}", field, what));
}

std::string num(double v) { return fmt::format("{:.10g}", v); }

std::string describe_state(const Scenario& s) {
    const auto& g = s.signal;
    if (g.kind == "coherent") return fmt::format("coherent alpha=({},{})", num(g.mean.real()), num(g.mean.imag()));
    if (g.kind == "fock") return fmt::format("fock n={}", g.n);
    if (g.kind == "thermal") {
        return fmt::format("thermal nbar={} mean=({},{})", num(g.nbar), num(g.mean.real()), num(g.mean.imag()));
    }
    return fmt::format("gaussian vx={} vp={} phi_xi={} mean=({},{})", num(g.vx), num(g.vp), num(g.phi_xi),
                       num(g.mean.real()), num(g.mean.imag()));
}

void write_header(const Scenario& s, const DetectionContext& ctx, std::ostream& out) {
    fmt::print(out, "# task: {}\n", s.task);
    fmt::print(out, "# state: {}\n", describe_state(s));
    fmt::print(out, "# lon: {}\n", s.lon.preset == "cross"
                                       ? fmt::format("cross T2={} R2={}", num(s.lon.t2), num(s.lon.r2))
                                       : s.lon.preset);
    fmt::print(out, "# detectors: eta1={} eta2={} nu1={} nu2={}\n", num(s.det1.eta), num(s.det2.eta),
               num(s.det1.nu), num(s.det2.nu));
    fmt::print(out, "# lo: mag2={} phase={} ({} convention)\n", num(s.lo_mag2), num(s.lo_phase),
               to_string(s.phase_convention));
    fmt::print(out, "# sigma1_sq={} sigma2_sq={}\n", num(ctx.sigma_sq(1)), num(ctx.sigma_sq(2)));
    for (const auto& w : ctx.warnings()) fmt::print(out, "# warning: {}\n", w);
}

}  // namespace

// ---------------------------------------------------------------------------

Scenario parse_scenario(const json& j) {
    Scenario s;
    ObjectReader root(j, "");
    s.task = root.string("task", s.task);
    static const std::set<std::string> tasks{"pdf", "pdf-map", "moments", "scan-phase", "nonclassicality",
                                             "simulate"};
    require(tasks.count(s.task) > 0, "task", fmt::format("unknown task '{}'", s.task));

    if (const json* lon = root.object("lon")) {
        ObjectReader r(*lon, "lon");
        s.lon.preset = r.string("preset", s.lon.preset);
        if (s.lon.preset == "cross") {
            s.lon.t2 = r.number("T2", s.lon.t2);
            s.lon.r2 = r.number("R2", s.lon.r2);
        } else if (s.lon.preset == "intensity") {
            s.lon.t1 = r.complex_number("t1", s.lon.t1);
            s.lon.r1 = r.complex_number("r1", s.lon.r1);
            s.lon.t2_amp = r.complex_number("t2", s.lon.t2_amp);
            s.lon.r2_amp = r.complex_number("r2", s.lon.r2_amp);
        } else if (s.lon.preset == "custom") {
            require(r.has("q"), "lon.q", "required for the custom preset");
            const json& q = (*lon)["q"];
            require(q.is_array() && q.size() == 2, "lon.q", "expected 2 rows");
            for (std::size_t row = 0; row < 2; ++row) {
                const std::string rp = fmt::format("lon.q[{}]", row);
                require(q[row].is_array() && q[row].size() == 3, rp, "expected 3 entries");
                for (std::size_t col = 0; col < 3; ++col) {
                    s.lon.q[row][col] = ObjectReader::parse_complex(q[row][col], fmt::format("{}[{}]", rp, col));
                }
            }
        } else {
            throw ConfigError(fmt::format("lon.preset: unknown preset '{}'", s.lon.preset));
        }
        r.finish();
    }

    if (const json* det = root.object("det")) {
        ObjectReader r(*det, "det");
        s.det1.eta = r.number("eta1", s.det1.eta);
        s.det2.eta = r.number("eta2", s.det2.eta);
        s.det1.nu = r.number("nu1", s.det1.nu);
        s.det2.nu = r.number("nu2", s.det2.nu);
        r.finish();
    }

    if (const json* lo = root.object("lo")) {
        ObjectReader r(*lo, "lo");
        s.lo_mag2 = r.number("mag2", s.lo_mag2);
        s.lo_phase = r.number("phase", s.lo_phase);
        require(s.lo_mag2 >= 0.0, "lo.mag2", "must be >= 0");
        r.finish();
    }

    const std::string convention = root.string("phase_convention", to_string(s.phase_convention));
    if (convention == "lo") {
        s.phase_convention = PhaseConvention::lo;
    } else if (convention == "optical") {
        s.phase_convention = PhaseConvention::optical;
    } else {
        throw ConfigError(fmt::format("phase_convention: expected 'lo' or 'optical', got '{}'", convention));
    }

    if (const json* sig = root.object("signal")) {
        ObjectReader r(*sig, "signal");
        s.signal.kind = r.string("kind", s.signal.kind);
        s.signal.mean = r.complex_number("mean", s.signal.mean);
        if (s.signal.kind == "gaussian") {
            s.signal.vx = r.number("vx", s.signal.vx);
            s.signal.vp = r.number("vp", s.signal.vp);
            s.signal.phi_xi = r.number("phi_xi", s.signal.phi_xi);
        } else if (s.signal.kind == "thermal") {
            s.signal.nbar = r.number("nbar", s.signal.nbar);
            require(s.signal.nbar >= 0.0, "signal.nbar", "must be >= 0");
        } else if (s.signal.kind == "fock") {
            const auto n = r.integer("n", s.signal.n);
            require(n >= 0 && n <= 1000, "signal.n", "must be in [0, 1000]");
            s.signal.n = static_cast<int>(n);
            require(s.signal.mean == complex{}, "signal.mean", "Fock states have zero mean amplitude");
        } else if (s.signal.kind != "coherent") {
            throw ConfigError(fmt::format("signal.kind: unknown kind '{}'", s.signal.kind));
        }
        r.finish();
    }

    if (const json* grid = root.object("grid")) {
        ObjectReader r(*grid, "grid");
        s.grid.m_min = r.number("m_min", s.grid.m_min);
        s.grid.m_max = r.number("m_max", s.grid.m_max);
        s.grid.m_points = static_cast<int>(r.integer("m_points", s.grid.m_points));
        s.grid.phi_min = r.number("phi_min", s.grid.phi_min);
        s.grid.phi_max = r.number("phi_max", s.grid.phi_max);
        s.grid.phi_points = static_cast<int>(r.integer("phi_points", s.grid.phi_points));
        r.finish();
    }
    require(s.grid.m_points >= 2, "grid.m_points", "must be >= 2");
    require(s.grid.phi_points >= 2, "grid.phi_points", "must be >= 2");
    require(s.grid.m_max > s.grid.m_min, "grid.m_max", "must exceed grid.m_min");
    require(s.grid.phi_max > s.grid.phi_min, "grid.phi_max", "must exceed grid.phi_min");

    const std::string norm = root.string("normalization", to_string(s.normalization));
    if (norm == "sigma") {
        s.normalization = Normalization::sigma;
    } else if (norm == "lo_plus_signal") {
        s.normalization = Normalization::lo_plus_signal;
    } else if (norm == "lo") {
        s.normalization = Normalization::lo;
    } else {
        throw ConfigError(fmt::format("normalization: unknown value '{}'", norm));
    }

    if (const json* sim = root.object("simulate")) {
        ObjectReader r(*sim, "simulate");
        s.simulate.samples = r.unsigned_integer("samples", s.simulate.samples);
        s.simulate.bins = static_cast<int>(r.integer("bins", s.simulate.bins));
        s.simulate.seed = r.unsigned_integer("seed", s.simulate.seed);
        s.simulate.range = r.number("range", s.simulate.range);
        r.finish();
    }
    require(s.simulate.samples >= 2, "simulate.samples", "must be >= 2");
    require(s.simulate.bins >= 1, "simulate.bins", "must be >= 1");
    require(s.simulate.range > 0.0, "simulate.range", "must be > 0");

    if (const json* ref = root.object("reference")) {
        ObjectReader r(*ref, "reference");
        require(r.has("alpha"), "reference.alpha", "required when reference is given");
        s.reference_alpha = r.complex_number("alpha", {});
        r.finish();
    }

    s.fock_n_max = static_cast<int>(root.integer("fock_n_max", s.fock_n_max));
    require(s.fock_n_max >= 0, "fock_n_max", "must be >= 0");
    s.high_intensity_floor = root.number("high_intensity_floor", s.high_intensity_floor);
    root.finish();
    return s;
}

json to_json(const Scenario& s) {
    json j;
    j["task"] = s.task;
    json lon;
    lon["preset"] = s.lon.preset;
    if (s.lon.preset == "cross") {
        lon["T2"] = s.lon.t2;
        lon["R2"] = s.lon.r2;
    } else if (s.lon.preset == "intensity") {
        lon["t1"] = complex_json(s.lon.t1);
        lon["r1"] = complex_json(s.lon.r1);
        lon["t2"] = complex_json(s.lon.t2_amp);
        lon["r2"] = complex_json(s.lon.r2_amp);
    } else {
        json rows = json::array();
        for (const auto& row : s.lon.q) {
            json r = json::array();
            for (const auto& c : row) r.push_back(complex_json(c));
            rows.push_back(r);
        }
        lon["q"] = rows;
    }
    j["lon"] = lon;
    j["det"] = {{"eta1", s.det1.eta}, {"eta2", s.det2.eta}, {"nu1", s.det1.nu}, {"nu2", s.det2.nu}};
    j["lo"] = {{"mag2", s.lo_mag2}, {"phase", s.lo_phase}};
    j["phase_convention"] = to_string(s.phase_convention);

    json sig;
    sig["kind"] = s.signal.kind;
    sig["mean"] = complex_json(s.signal.mean);
    if (s.signal.kind == "gaussian") {
        sig["vx"] = s.signal.vx;
        sig["vp"] = s.signal.vp;
        sig["phi_xi"] = s.signal.phi_xi;
    } else if (s.signal.kind == "thermal") {
        sig["nbar"] = s.signal.nbar;
    } else if (s.signal.kind == "fock") {
        sig["n"] = s.signal.n;
    }
    j["signal"] = sig;

    j["grid"] = {{"m_min", s.grid.m_min},         {"m_max", s.grid.m_max},
                 {"m_points", s.grid.m_points},   {"phi_min", s.grid.phi_min},
                 {"phi_max", s.grid.phi_max},     {"phi_points", s.grid.phi_points}};
    j["normalization"] = to_string(s.normalization);
    j["simulate"] = {{"samples", s.simulate.samples},
                     {"bins", s.simulate.bins},
                     {"seed", s.simulate.seed},
                     {"range", s.simulate.range}};
    if (s.reference_alpha) j["reference"] = {{"alpha", complex_json(*s.reference_alpha)}};
    j["fock_n_max"] = s.fock_n_max;
    j["high_intensity_floor"] = s.high_intensity_floor;
    return j;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return parse_scenario(j);
}

// ---------------------------------------------------------------------------

LonMatrix build_lon(const Scenario& s) {
    if (s.lon.preset == "cross") return make_cross_correlation_lon_from_ratios(s.lon.t2, s.lon.r2);
    if (s.lon.preset == "intensity") {
        return make_intensity_correlation_lon(s.lon.t1, s.lon.r1, s.lon.t2_amp, s.lon.r2_amp);
    }
    return LonMatrix(s.lon.q);
}

SignalState build_state(const Scenario& s) {
    SignalState state;
    if (s.signal.kind == "coherent") {
        state = CoherentState{s.signal.mean};
    } else if (s.signal.kind == "gaussian") {
        state = GaussianState{s.signal.vx, s.signal.vp, s.signal.phi_xi, s.signal.mean};
    } else if (s.signal.kind == "thermal") {
        state = thermal_state(s.signal.nbar, s.signal.mean);
    } else {
        state = FockState{s.signal.n};
    }
    validate(state);
    return state;
}

double lo_phase_for(const Scenario& s, const LonMatrix& lon, double phi) {
    if (s.phase_convention == PhaseConvention::lo) return phi;
    const auto tr = as_cross_correlation(lon);
    if (!tr || (std::conj(tr->first) * tr->second).imag() == 0.0) {
        throw ConfigError("phase_convention: 'optical' requires a cross-correlation network with Im(conj(T) R) != 0");
    }
    return lo_phase_for_optical_phase_cc(tr->first, tr->second, phi);
}

DetectionContext build_context_at(const Scenario& s, double phi) {
    const LonMatrix lon = build_lon(s);
    const SignalState state = build_state(s);
    const LocalOscillator lo{std::sqrt(s.lo_mag2), lo_phase_for(s, lon, phi)};
    return build_context(lon, s.det1, s.det2, lo, mean_amplitude(state), s.high_intensity_floor);
}

DetectionContext build_context(const Scenario& s) { return build_context_at(s, s.lo_phase); }

double normalization_constant(const Scenario& s, const DetectionContext& ctx) {
    switch (s.normalization) {
        case Normalization::sigma: return ctx.sigma_product();
        case Normalization::lo_plus_signal: return s.lo_mag2 + std::norm(mean_amplitude(build_state(s)));
        case Normalization::lo: return s.lo_mag2;
    }
    return 1.0;
}

std::vector<double> m_grid(const GridSpec& g) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(g.m_points));
    const double step = (g.m_max - g.m_min) / (g.m_points - 1);
    for (int i = 0; i < g.m_points; ++i) {
        const double x = g.m_min + step * i;
        if (std::abs(x) <= 1e-12 * step) continue;
        out.push_back(x);
    }
    return out;
}

std::vector<double> phi_grid(const GridSpec& g) {
    std::vector<double> out(static_cast<std::size_t>(g.phi_points));
    const double step = (g.phi_max - g.phi_min) / (g.phi_points - 1);
    for (int i = 0; i < g.phi_points; ++i) out[i] = g.phi_min + step * i;
    return out;
}

// ---------------------------------------------------------------------------

void run_pdf(const Scenario& s, std::ostream& out) {
    const auto ctx = build_context(s);
    const auto state = build_state(s);
    const CorrelationPdf pdf(state, ctx, s.fock_n_max);
    const double norm = normalization_constant(s, ctx);
    const auto mv = mean_var_m(state, ctx);

    write_header(s, ctx, out);
    fmt::print(out, "# normalization: {} N={}\n", to_string(s.normalization), num(norm));
    fmt::print(out, "# E_M_norm: {}\n", num(mv.mean / norm));
    fmt::print(out, "# sd_M_norm: {}\n", num(std::sqrt(mv.variance) / norm));
    fmt::print(out, "# w is the density of M_norm = M / N; M = 0 is excluded (integrable singularity)\n");
    fmt::print(out, "M_norm,w\n");
    for (double x : m_grid(s.grid)) fmt::print(out, "{},{}\n", num(x), num(pdf(x * norm) * norm));
}

void run_pdf_map(const Scenario& s, std::ostream& out) {
    write_header(s, build_context(s), out);
    fmt::print(out, "# normalization: {}\n", to_string(s.normalization));
    fmt::print(out, "phi,M_norm,w\n");
    const auto state = build_state(s);
    const auto grid = m_grid(s.grid);
    for (double phi : phi_grid(s.grid)) {
        const auto ctx = build_context_at(s, phi);
        const CorrelationPdf pdf(state, ctx, s.fock_n_max);
        const double norm = normalization_constant(s, ctx);
        for (double x : grid) fmt::print(out, "{},{},{}\n", num(phi), num(x), num(pdf(x * norm) * norm));
    }
}

namespace {

std::optional<DetectionContext> explicit_reference(const Scenario& s, const DetectionContext& ctx) {
    if (!s.reference_alpha) return std::nullopt;
    return with_mean_signal(ctx, *s.reference_alpha, s.high_intensity_floor);
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : "nan"; }

}  // namespace

void run_moments(const Scenario& s, std::ostream& out) {
    const auto ctx = build_context(s);
    const auto state = build_state(s);
    const auto report = analyze_moments(state, ctx, explicit_reference(s, ctx));
    write_header(s, ctx, out);
    for (const auto& w : report.warnings) {
        if (std::find(ctx.warnings().begin(), ctx.warnings().end(), w) == ctx.warnings().end()) {
            fmt::print(out, "# warning: {}\n", w);
        }
    }
    fmt::print(out, "quantity,value\n");
    fmt::print(out, "E_M,{}\n", num(report.mean_m));
    fmt::print(out, "var_M,{}\n", num(report.var_m));
    fmt::print(out, "sd_M,{}\n", num(std::sqrt(report.var_m)));
    fmt::print(out, "r,{}\n", num(report.r));
    fmt::print(out, "D,{}\n", opt_num(report.d_phi));
    if (report.normal_ordered) {
        fmt::print(out, "var_n,{}\n", num(report.normal_ordered->var_n));
        fmt::print(out, "cross,{}\n", num(report.normal_ordered->cross));
        fmt::print(out, "var_x,{}\n", num(report.normal_ordered->var_x));
        fmt::print(out, "optical_phase,{}\n", num(report.normal_ordered->phase));
    }
    fmt::print(out, "nonclassical_by_r,{}\n", report.nonclassical_by_r);
    fmt::print(out, "anomalous_by_d,{}\n", report.anomalous_by_d);
}

void run_nonclassicality(const Scenario& s, std::ostream& out) {
    const auto ctx = build_context(s);
    const auto state = build_state(s);
    const auto ref = explicit_reference(s, ctx);
    const auto report = analyze_moments(state, ctx, ref);
    const auto& ref_ctx = ref ? *ref : reference_context(state, ctx);
    write_header(s, ctx, out);
    fmt::print(out, "# reference: coherent alpha=({},{}) sigma1_sq={} sigma2_sq={}\n",
               num(ref_ctx.mean_signal().real()), num(ref_ctx.mean_signal().imag()), num(ref_ctx.sigma_sq(1)),
               num(ref_ctx.sigma_sq(2)));
    fmt::print(out, "criterion,value,nonclassical\n");
    fmt::print(out, "r,{},{}\n", num(report.r), report.nonclassical_by_r);
    if (report.d_phi) {
        fmt::print(out, "D,{},{}\n", num(*report.d_phi), report.anomalous_by_d);
    } else {
        fmt::print(out, "D,nan,false\n");
    }
}

void run_phase_scan(const Scenario& s, std::ostream& out) {
    const auto state = build_state(s);
    write_header(s, build_context(s), out);
    fmt::print(out, "# phi in the {} convention; D is not normalized (|<a>|^2 = {})\n", to_string(s.phase_convention),
               num(std::norm(mean_amplitude(state))));
    fmt::print(out, "phi,E_M,var_M,r,D,var_x,var_n,cross,nonclassical_by_r,anomalous_by_d\n");
    for (double phi : phi_grid(s.grid)) {
        const auto ctx = build_context_at(s, phi);
        const auto rep = analyze_moments(state, ctx, explicit_reference(s, ctx));
        const auto& m = rep.normal_ordered;
        fmt::print(out, "{},{},{},{},{},{},{},{},{},{}\n", num(phi), num(rep.mean_m), num(rep.var_m), num(rep.r),
                   opt_num(rep.d_phi), m ? num(m->var_x) : "nan", m ? num(m->var_n) : "nan",
                   m ? num(m->cross) : "nan", rep.nonclassical_by_r, rep.anomalous_by_d);
    }
}

void run_simulate(const Scenario& s, std::ostream& out) {
    const auto ctx = build_context(s);
    const auto state = build_state(s);
    const ClassicalPSampler sampler(state);
    const auto run = simulate_counts(sampler, ctx, s.simulate.seed, s.simulate.samples);
    const auto hist = empirical_product_histogram(run, static_cast<std::size_t>(s.simulate.bins), -s.simulate.range,
                                                  s.simulate.range);
    const CorrelationPdf pdf(state, ctx, s.fock_n_max);
    const auto reference = binned_density(pdf, hist, run.scale);
    const auto mv = mean_var_m(state, ctx);

    write_header(s, ctx, out);
    fmt::print(out, "# seed={} samples={} bins={}\n", s.simulate.seed, s.simulate.samples, s.simulate.bins);
    fmt::print(out, "# M normalized to sigma1*sigma2={}\n", num(run.scale));
    fmt::print(out, "bin_center,density,count,closed_form\n");
    for (std::size_t i = 0; i < hist.bins(); ++i) {
        fmt::print(out, "{},{},{},{}\n", num(hist.center(i)), num(hist.density[i]), hist.counts[i],
                   num(reference[i]));
    }
    const double ref_var = ctx.sigma_sq(1) * ctx.sigma_sq(2);
    fmt::print(out, "# sup_distance={}\n", num(sup_distance(hist, reference)));
    fmt::print(out, "# outside_fraction={}\n", num(hist.outside_fraction));
    fmt::print(out, "# E_M empirical={} se={} closed_form={}\n", num(run.mean_product()), num(run.standard_error_mean()),
               num(mv.mean));
    fmt::print(out, "# var_M empirical={} se={} closed_form={}\n", num(run.variance_product()),
               num(run.standard_error_variance()), num(mv.variance));
    fmt::print(out, "# r empirical={} se={}\n", num(run.variance_product() / ref_var - 1.0),
               num(run.standard_error_variance() / ref_var));
}

void run_task(const Scenario& s, std::ostream& out) {
    if (s.task == "pdf") return run_pdf(s, out);
    if (s.task == "pdf-map") return run_pdf_map(s, out);
    if (s.task == "moments") return run_moments(s, out);
    if (s.task == "scan-phase") return run_phase_scan(s, out);
    if (s.task == "nonclassicality") return run_nonclassicality(s, out);
    if (s.task == "simulate") return run_simulate(s, out);
    throw ConfigError(fmt::format("task: unknown task '{}'", s.task));
}

std::vector<std::filesystem::path> run_figure(const json& config, const std::filesystem::path& out_dir,
                                              std::optional<int> grid_points) {
    if (!config.is_object() || !config.contains("figure") || !config["figure"].is_number_integer()) {
        throw ConfigError("figure: expected an integer 'figure' key");
    }
    if (!config.contains("datasets") || !config["datasets"].is_array()) {
        throw ConfigError("datasets: expected an array");
    }
    const int figure = config["figure"].get<int>();
    const json base = config.value("base", json::object());
    std::filesystem::create_directories(out_dir);

    std::vector<std::filesystem::path> written;
    for (std::size_t i = 0; i < config["datasets"].size(); ++i) {
        json entry = config["datasets"][i];
        if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string()) {
            throw ConfigError(fmt::format("datasets[{}].name: expected a string", i));
        }
        const std::string name = entry["name"].get<std::string>();
        entry.erase("name");
        json merged = base;
        merged.merge_patch(entry);
        Scenario s;
        try {
            s = parse_scenario(merged);
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("datasets[{}] ({}): {}", i, name, e.what()));
        }
        if (grid_points) {
            s.grid.m_points = *grid_points;
            s.grid.phi_points = *grid_points;
        }
        const auto path = out_dir / fmt::format("fig{}_{}.csv", figure, name);
        std::ofstream out(path);
        if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
        run_task(s, out);
        written.push_back(path);
    }
    return written;
}

}  // namespace hcm
