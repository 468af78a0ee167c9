// Named presets, single runs and alpha sweeps
//
// b(t) does not depend on the initial state, so a sweep solves the trajectory
// once and fans the alpha values out over worker threads. Each worker writes
// only its own per-point file; the shared tables are assembled afterwards in
// alpha order, so output bytes do not depend on the worker count.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "entdist/config.hpp"
#include "entdist/dynamics.hpp"
#include "entdist/entanglement.hpp"
#include "entdist/io.hpp"
#include "entdist/spectral.hpp"

namespace entdist {

inline constexpr const char* kVersion = "0.1.0";

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"fig1", "fig2", "fig3", "fig4", "fig5"};
    return names;
}

// Reference parameter sets. PBG runs use omega_c = 1 as the unit,
// Ohmic runs omega0 = 1.
inline std::vector<ScenarioSpec> preset(const std::string& name) {
    auto pbg = [](std::string label, double omega0, double alpha) {
        ScenarioSpec s;
        s.label = std::move(label);
        s.model = "pbg";
        s.eta = 0.2;
        s.omega0 = omega0;
        s.alpha = alpha;
        return s;
    };
    auto ohmic = [](std::string label, double eta, double cutoff) {
        ScenarioSpec s;
        s.label = std::move(label);
        s.model = "ohmic";
        s.eta = eta;
        s.cutoff = cutoff;
        s.omega0 = 1.0;
        s.alpha = 0.55;
        return s;
    };
    if (name == "fig1") return {pbg("fig1", 0.1, 0.70710678118654752)};
    if (name == "fig2") return {pbg("fig2", 10.0, 0.5)};
    if (name == "fig3") return {pbg("fig3_w0_0.1", 0.1, 0.70710678118654752), pbg("fig3_w0_10", 10.0, 0.70710678118654752)};
    if (name == "fig4") return {pbg("fig4a", 0.1, 0.70710678118654752), pbg("fig4b", 0.1, 0.57), pbg("fig4c", 0.1, 0.28)};
    if (name == "fig5") return {ohmic("fig5b", 0.1, 5.0), ohmic("fig5c", 0.3, 10.0)};
    throw ConfigError("unknown preset '" + name + "' (fig1 ... fig5)", 0, "preset");
}

// Worst values of the per-grid-point checks.
struct StateChecks {
    double max_identity_residual = 0.0;
    double max_global_deviation = 0.0;  // | C_(q1r1):(q2r2) - 2|alpha beta| |
    double max_hermiticity = 0.0;
    double max_trace_error = 0.0;
    double min_eigenvalue = 0.0;
    double max_population = 0.0;

    bool density_ok(double tol = 1e-9) const {
        return max_hermiticity <= tol && max_trace_error <= tol && min_eigenvalue >= -tol;
    }
};

inline StateChecks check_states(const InitialState& s, const AmplitudeTrajectory& traj, const ConcurrenceSeries& series) {
    StateChecks c;
    c.max_identity_residual = series.max_abs_residual();
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto d = check_density(qq_density_matrix(s, traj.b[i]));
        c.max_hermiticity = std::max(c.max_hermiticity, d.hermiticity);
        c.max_trace_error = std::max(c.max_trace_error, d.trace_error);
        c.min_eigenvalue = std::min(c.min_eigenvalue, d.min_eigenvalue);
        const double global = global_split_concurrence(effective_global_state(s, traj.b[i]));
        c.max_global_deviation = std::max(c.max_global_deviation, std::abs(global - s.global_concurrence()));
        c.max_population = std::max(c.max_population, traj.population(i));
    }
    return c;
}

inline io::json checks_json(const StateChecks& c, double identity_tolerance) {
    return {{"max_identity_residual", c.max_identity_residual},
            {"identity_tolerance", identity_tolerance},
            {"max_global_concurrence_deviation", c.max_global_deviation},
            {"rho_q1q2_max_hermiticity", c.max_hermiticity},
            {"rho_q1q2_max_trace_error", c.max_trace_error},
            {"rho_q1q2_min_eigenvalue", c.min_eigenvalue},
            {"max_population", c.max_population}};
}

inline io::json inputs_json(const ScenarioSpec& s, const SpectralModel& model, const TimeGrid& grid) {
    return {{"label", s.label},
            {"model", model.describe()},
            {"omega0", s.omega0},
            {"alpha", s.alpha},
            {"grid", {{"t_max", grid.t_max}, {"n_steps", grid.n_steps}}},
            {"estimate_error", s.estimate_error},
            {"identity_tolerance", s.identity_tolerance}};
}

struct SimulationResult {
    ScenarioSpec spec;
    SpectralModel model;
    AmplitudeTrajectory trajectory;
    ConcurrenceSeries series;
    EventReport events;
    StateChecks checks;
    std::optional<BoundState> bound_state;
    std::vector<std::filesystem::path> files;

    bool identity_ok() const { return checks.max_identity_residual < spec.identity_tolerance; }
    bool ok() const { return identity_ok() && checks.density_ok() && checks.max_population <= 1.0 + 1e-9; }
};

inline std::optional<BoundState> try_bound_state(const SpectralModel& model, double omega0) {
    if (model.kind() == ModelKind::Lorentzian) return std::nullopt;
    return bound_state_energy(model, omega0);
}

// Solves one scenario and (unless write_files is false) writes the trajectory,
// concurrence table, event report and manifest under spec.output_dir.
inline SimulationResult run_scenario(const ScenarioSpec& spec, bool write_files = true) {
    validate_spec(spec);
    const auto model = resolve_model(spec);
    const auto grid = resolve_grid(spec, model);
    SolverOptions opt;
    opt.estimate_error = spec.estimate_error;
    auto traj = solve_amplitude(model, spec.omega0, grid, opt);
    const auto state = InitialState::from_real_alpha(spec.alpha);

    SimulationResult r{spec, model, std::move(traj), {}, {}, {}, {}, {}};
    r.series = concurrence_series(state, r.trajectory);
    r.events = detect_events(state, r.trajectory);
    r.checks = check_states(state, r.trajectory, r.series);
    if (model.kind() != ModelKind::SingleMode) r.bound_state = try_bound_state(model, spec.omega0);
    if (!write_files) return r;

    const std::filesystem::path dir(spec.output_dir);
    const auto traj_path = dir / (spec.label + "_trajectory.csv");
    const auto conc_path = dir / (spec.label + "_concurrence.csv");
    const auto events_path = dir / (spec.label + "_events.json");
    const auto manifest_path = dir / (spec.label + "_manifest.json");
    {
        auto os = io::open_output(traj_path);
        io::write_trajectory_csv(os, r.trajectory);
    }
    {
        auto os = io::open_output(conc_path);
        io::write_concurrence_csv(os, r.series);
    }
    io::write_json(events_path, io::event_report_json(r.events));

    io::json m;
    m["tool"] = "entdist";
    m["version"] = kVersion;
    m["command"] = "simulate";
    m["inputs"] = inputs_json(spec, model, grid);
    m["solver"] = io::trajectory_json(r.trajectory);
    m["checks"] = checks_json(r.checks, spec.identity_tolerance);
    m["bound_state"] = io::bound_state_json(model, spec.omega0, r.bound_state);
    m["regime"] = r.events.regime;
    m["files"] = {traj_path.filename().string(), conc_path.filename().string(), events_path.filename().string()};
    io::write_json(manifest_path, m);
    r.files = {traj_path, conc_path, events_path, manifest_path};
    return r;
}

struct SweepPoint {
    double alpha = 0.0;
    EventReport events;
    StateChecks checks;
    std::vector<ConcurrenceSet> concurrence;
};

struct SweepResult {
    ScenarioSpec spec;
    SpectralModel model;
    AmplitudeTrajectory trajectory;
    std::vector<SweepPoint> points;
    std::vector<std::filesystem::path> files;

    double max_identity_residual() const {
        double m = 0.0;
        for (const auto& p : points) m = std::max(m, p.checks.max_identity_residual);
        return m;
    }
    bool ok() const {
        return max_identity_residual() < spec.identity_tolerance &&
               std::all_of(points.begin(), points.end(), [](const SweepPoint& p) { return p.checks.density_ok(); });
    }
};

namespace detail {

inline std::string point_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "alpha_%03zu.csv", i);
    return buf;
}

inline void write_surface(const std::filesystem::path& path, const SweepResult& r, std::size_t stride, Partition p) {
    auto os = io::open_output(path);
    os << "alpha";
    for (std::size_t i = 0; i < r.trajectory.size(); i += stride) os << ",t=" << io::num(r.trajectory.grid.time(i));
    os << '\n';
    for (const auto& pt : r.points) {
        os << io::num(pt.alpha);
        for (std::size_t i = 0; i < pt.concurrence.size(); i += stride) os << ',' << io::num(pt.concurrence[i].of(p));
        os << '\n';
    }
}

}  // namespace detail

// Alpha sweep over one trajectory. Writes per-point concurrence tables under
// <label>_sweep/, one (alpha x t) surface per distinct partition, the
// trajectory, a summary table <label>_sweep.csv and a manifest.
inline SweepResult run_sweep(const ScenarioSpec& spec, bool write_files = true) {
    validate_spec(spec);
    const auto model = resolve_model(spec);
    const auto grid = resolve_grid(spec, model);
    SolverOptions opt;
    opt.estimate_error = spec.estimate_error;
    SweepResult r{spec, model, solve_amplitude(model, spec.omega0, grid, opt), {}, {}};

    const auto alphas = resolve_sweep(spec).values();
    r.points.resize(alphas.size());
    const std::filesystem::path dir(spec.output_dir);
    const auto point_dir = dir / (spec.label + "_sweep");
    if (write_files) io::ensure_directory(point_dir);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < alphas.size(); i = next++) {
            try {
                const auto state = InitialState::from_real_alpha(alphas[i]);
                auto series = concurrence_series(state, r.trajectory);
                SweepPoint& pt = r.points[i];
                pt.alpha = alphas[i];
                pt.events = detect_events(state, r.trajectory);
                pt.checks = check_states(state, r.trajectory, series);
                if (write_files) {
                    auto os = io::open_output(point_dir / detail::point_name(i));
                    io::write_concurrence_csv(os, series);
                }
                pt.concurrence = std::move(series.concurrence);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    unsigned n_workers = spec.workers ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
    n_workers = static_cast<unsigned>(std::min<std::size_t>(n_workers, alphas.size()));
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(work);
        work();
    }
    if (failure) std::rethrow_exception(failure);
    if (!write_files) return r;

    const std::array<Partition, 4> distinct{Partition::Q1Q2, Partition::R1R2, Partition::Q1R1, Partition::Q1R2};
    for (auto p : distinct) {
        const auto path = dir / (spec.label + "_sweep_surface_" + partition_name(p) + ".csv");
        detail::write_surface(path, r, spec.surface_stride, p);
        r.files.push_back(path);
    }
    {
        const auto path = dir / (spec.label + "_sweep_trajectory.csv");
        auto os = io::open_output(path);
        io::write_trajectory_csv(os, r.trajectory);
        r.files.push_back(path);
    }
    {
        const auto path = dir / (spec.label + "_sweep.csv");
        auto os = io::open_output(path);
        os << "alpha,regime,esd,esb,esd_revival,esb_revival,plateau_q1q2,plateau_r1r2,plateau_q1r1,plateau_q1r2,"
              "max_identity_residual\n";
        for (const auto& pt : r.points) {
            const auto& e = pt.events;
            os << io::num(pt.alpha) << ',' << e.regime << ',' << e.esd << ',' << e.esb << ',' << e.esd_revival << ','
               << e.esb_revival << ',' << io::num(e.plateau.c_q1q2) << ',' << io::num(e.plateau.c_r1r2) << ','
               << io::num(e.plateau.c_q1r1) << ',' << io::num(e.plateau.c_q1r2) << ','
               << io::num(pt.checks.max_identity_residual) << '\n';
        }
        r.files.push_back(path);
    }

    io::json m;
    m["tool"] = "entdist";
    m["version"] = kVersion;
    m["command"] = "sweep";
    m["inputs"] = inputs_json(spec, model, grid);
    m["inputs"].erase("alpha");
    m["inputs"]["sweep"] = {{"alpha_min", spec.alpha_min}, {"alpha_max", spec.alpha_max}, {"points", spec.sweep_points},
                            {"surface_stride", spec.surface_stride}};
    m["solver"] = io::trajectory_json(r.trajectory);
    m["checks"] = {{"max_identity_residual", r.max_identity_residual()}, {"identity_tolerance", spec.identity_tolerance}};
    io::json files = io::json::array();
    for (const auto& f : r.files) files.push_back(f.filename().string());
    files.push_back((spec.label + "_sweep/").c_str());
    m["files"] = files;
    const auto manifest = dir / (spec.label + "_sweep_manifest.json");
    io::write_json(manifest, m);
    r.files.push_back(manifest);
    return r;
}

}  // namespace entdist
