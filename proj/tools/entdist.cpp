// entdist command-line front end.
//
// Every verb builds its scenarios the same way: preset values first, then
// command-line flags, then the config file (which wins). Exit status 2 marks
// bad input, 3 a run whose numerical checks failed.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "entdist/entdist.hpp"

namespace {

using entdist::ScenarioSpec;
using entdist::io::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct FieldFlag {
    const char* field;
    const char* help;
};

// Flag names are the config keys with '_' spelled '-'.
const std::vector<FieldFlag>& field_flags() {
    static const std::vector<FieldFlag> flags{
        {"label", "Output file stem"},
        {"model", "pbg | ohmic | single_mode | lorentzian"},
        {"eta", "Coupling strength (pbg, ohmic)"},
        {"omega_c", "Band-edge frequency (pbg)"},
        {"kappa_max", "Wave-number cutoff in units of omega_c (pbg)"},
        {"cutoff", "Exponential cutoff Lambda (ohmic)"},
        {"g", "Vacuum Rabi coupling (single_mode)"},
        {"omega_mode", "Mode frequency (single_mode; default omega0)"},
        {"gamma", "Coupling strength (lorentzian)"},
        {"width", "Linewidth lambda (lorentzian)"},
        {"omega_center", "Line centre (lorentzian; default omega0)"},
        {"omega0", "Qubit transition frequency"},
        {"alpha", "Initial amplitude on |--> (0 < alpha < 1)"},
        {"t_max", "End of the time grid"},
        {"n_steps", "Number of time steps"},
        {"output_dir", "Directory for output files"},
        {"alpha_min", "Sweep start"},
        {"alpha_max", "Sweep end"},
        {"sweep_points", "Number of alpha values in a sweep"},
        {"workers", "Sweep worker threads (0: all cores)"},
        {"identity_tolerance", "Largest acceptable identity residual"},
        {"estimate_error", "Estimate solver error by step halving (true/false)"},
        {"surface_stride", "Time-sample stride of the sweep surface files"},
    };
    return flags;
}

std::string flag_name(std::string field) {
    for (auto& c : field)
        if (c == '_') c = '-';
    return "--" + field;
}

struct ScenarioFlags {
    std::string preset;
    std::string config;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;

    void attach(CLI::App* app) {
        app->add_option("--preset", preset, "Named parameter set: fig1 ... fig5");
        app->add_option("-c,--config", config, "key = value config file; overrides flags");
        for (const auto& f : field_flags()) options[f.field] = app->add_option(flag_name(f.field), values[f.field], f.help);
    }

    std::vector<ScenarioSpec> build() const {
        std::vector<entdist::ConfigEntry> entries;
        if (!config.empty()) entries = entdist::read_config_file(config);
        std::string name = preset;
        if (auto from_file = entdist::config_preset(entries)) name = *from_file;

        auto specs = name.empty() ? std::vector<ScenarioSpec>{ScenarioSpec{}} : entdist::preset(name);
        for (auto& s : specs) {
            for (const auto& [field, opt] : options)
                if (opt->count() > 0) entdist::apply_field(s, field, values.at(field));
            entdist::apply_config(s, entries);
        }
        // A flag or config label on a multi-run preset would make the files
        // collide; keep it as a prefix instead.
        if (specs.size() > 1) {
            const auto preset_specs = entdist::preset(name);
            for (std::size_t i = 0; i < specs.size(); ++i)
                if (specs[i].label != preset_specs[i].label) specs[i].label += "_" + preset_specs[i].label;
        }
        return specs;
    }
};

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

void print_simulation(const entdist::SimulationResult& r) {
    const auto& e = r.events;
    const auto& t = r.trajectory;
    std::cout << "[" << r.spec.label << "] " << r.model.describe() << ", omega0 = " << fmt(r.spec.omega0)
              << ", alpha = " << fmt(r.spec.alpha) << "\n";
    std::cout << "  regime              " << e.regime << (e.consistent ? "" : "  (differs from the min|b|^2 prediction)")
              << "\n";
    std::cout << "  esd / esb           " << (e.esd ? "yes" : "no") << (e.esd_revival ? " (revives)" : "") << " / "
              << (e.esb ? "yes" : "no") << (e.esb_revival ? " (revives)" : "") << "\n";
    std::cout << "  plateau |b|^2       " << fmt(e.population.mean) << (e.trapped ? "  trapped" : "") << "\n";
    std::cout << "  plateau C           q1q2 " << fmt(e.plateau.c_q1q2) << "  r1r2 " << fmt(e.plateau.c_r1r2)
              << "  q1r1 " << fmt(e.plateau.c_q1r1) << "  q1r2 " << fmt(e.plateau.c_q1r2) << "\n";
    std::cout << "  identity residual   " << fmt(r.checks.max_identity_residual, "%.3e") << " (tolerance "
              << fmt(r.spec.identity_tolerance, "%.1e") << ")\n";
    std::cout << "  solver error est.   "
              << (t.error_estimate ? fmt(*t.error_estimate, "%.3e") : std::string("not computed")) << "\n";
    if (r.bound_state)
        std::cout << "  bound state         E = " << fmt(r.bound_state->energy) << ", weight "
                  << fmt(r.bound_state->weight) << "\n";
    for (const auto& f : r.files) std::cout << "  wrote " << f.string() << "\n";
}

// Reasons a run counts as a numerical failure; empty when it passed.
std::vector<std::string> simulation_failures(const entdist::SimulationResult& r) {
    std::vector<std::string> why;
    if (!r.identity_ok()) why.push_back("identity residual " + fmt(r.checks.max_identity_residual, "%.3e") + " above tolerance");
    if (!r.checks.density_ok()) why.push_back("rho_q1q2 failed the Hermitian/trace/PSD check");
    if (r.checks.max_population > 1.0 + 1e-9) why.push_back("|b| exceeded 1");
    return why;
}

int report_failures(const std::string& label, const std::vector<std::string>& why) {
    for (const auto& w : why) std::cerr << "entdist: [" << label << "] " << w << "\n";
    return why.empty() ? kExitOk : kExitNumerical;
}

int cmd_simulate(const ScenarioFlags& flags) {
    int status = kExitOk;
    for (const auto& spec : flags.build()) {
        const auto r = entdist::run_scenario(spec);
        print_simulation(r);
        status = std::max(status, report_failures(spec.label, simulation_failures(r)));
    }
    return status;
}

int cmd_sweep(const ScenarioFlags& flags) {
    int status = kExitOk;
    for (const auto& spec : flags.build()) {
        const auto r = entdist::run_sweep(spec);
        std::map<std::string, int> regimes;
        double lo = 2.0, hi = -1.0;
        for (const auto& p : r.points) {
            ++regimes[p.events.regime];
            if (p.events.plateau.c_q1q2 > 1e-3) {
                lo = std::min(lo, p.alpha);
                hi = std::max(hi, p.alpha);
            }
        }
        std::cout << "[" << spec.label << "] " << r.model.describe() << ", omega0 = " << fmt(spec.omega0) << ", "
                  << r.points.size() << " alpha values in [" << fmt(spec.alpha_min) << ", " << fmt(spec.alpha_max)
                  << "]\n";
        for (const auto& [name, count] : regimes) std::cout << "  " << name << ": " << count << "\n";
        if (hi >= lo) std::cout << "  q1q2 plateau > 1e-3 for alpha in [" << fmt(lo) << ", " << fmt(hi) << "]\n";
        else std::cout << "  q1q2 plateau vanishes for every alpha\n";
        std::cout << "  plateau |b|^2       " << fmt(entdist::plateau_population(r.trajectory).mean) << "\n";
        std::cout << "  identity residual   " << fmt(r.max_identity_residual(), "%.3e") << "\n";
        std::cout << "  solver error est.   "
                  << (r.trajectory.error_estimate ? fmt(*r.trajectory.error_estimate, "%.3e") : std::string("not computed"))
                  << "\n";
        for (const auto& f : r.files) std::cout << "  wrote " << f.string() << "\n";

        std::vector<std::string> why;
        if (r.max_identity_residual() >= spec.identity_tolerance) why.push_back("identity residual above tolerance");
        for (const auto& p : r.points)
            if (!p.checks.density_ok()) {
                why.push_back("rho_q1q2 check failed at alpha = " + fmt(p.alpha));
                break;
            }
        status = std::max(status, report_failures(spec.label, why));
    }
    return status;
}

int cmd_events(const ScenarioFlags& flags) {
    int status = kExitOk;
    json all = json::array();
    for (const auto& spec : flags.build()) {
        const auto r = entdist::run_scenario(spec, false);
        json j;
        j["label"] = spec.label;
        j["model"] = r.model.describe();
        j["omega0"] = spec.omega0;
        j["alpha"] = spec.alpha;
        j["events"] = entdist::io::event_report_json(r.events);
        j["max_identity_residual"] = r.checks.max_identity_residual;
        all.push_back(j);
        status = std::max(status, report_failures(spec.label, simulation_failures(r)));
    }
    std::cout << (all.size() == 1 ? all[0] : all).dump(2) << "\n";
    return status;
}

int cmd_boundstate(const ScenarioFlags& flags) {
    json all = json::array();
    for (const auto& spec : flags.build()) {
        entdist::validate_spec(spec);
        const auto model = entdist::resolve_model(spec);
        if (model.kind() == entdist::ModelKind::SingleMode)
            throw entdist::ConfigError("boundstate: the single-mode reservoir has no continuum", 0, "model");
        auto j = entdist::io::bound_state_json(model, spec.omega0, entdist::try_bound_state(model, spec.omega0));
        if (model.kind() == entdist::ModelKind::Ohmic) {
            const auto& p = model.as<entdist::OhmicParams>();
            j["eta_cutoff"] = p.eta * p.cutoff;
        }
        json labelled{{"label", spec.label}};
        labelled.update(j);
        all.push_back(labelled);
    }
    std::cout << (all.size() == 1 ? all[0] : all).dump(2) << "\n";
    return kExitOk;
}

struct OracleFlags {
    std::size_t modes = 2000;
    double output_dt = 0.01;
    std::size_t refine = 200;
    std::optional<double> window;
    double tolerance = 1e-4;
    std::optional<double> band_low, band_high;
    std::optional<std::size_t> tail_modes;
    std::string sampling = "end-corrected";

    void attach(CLI::App* app) {
        app->add_option("--modes", modes, "Number of bath modes N (tail modes included)")->check(CLI::Range(1, 10000));
        app->add_option("--output-dt", output_dt, "Spacing of the compared samples")->check(CLI::PositiveNumber);
        app->add_option("--refine", refine, "Volterra steps per compared sample")->check(CLI::Range(1, 100000));
        app->add_option("--window", window, "Comparison window (default: half the recurrence time)");
        app->add_option("--tolerance", tolerance, "Largest acceptable max |b_volterra - b_oracle|");
        app->add_option("--band-low", band_low, "Lower end of the sampled band");
        app->add_option("--band-high", band_high, "Upper end of the sampled band");
        app->add_option("--tail-modes", tail_modes, "Modes representing J beyond the band (ohmic)");
        app->add_option("--sampling", sampling, "midpoint | end-corrected")
            ->check(CLI::IsMember({"midpoint", "end-corrected"}));
    }
};

int cmd_oracle(const ScenarioFlags& flags, const OracleFlags& of) {
    int status = kExitOk;
    for (const auto& spec : flags.build()) {
        entdist::validate_spec(spec);
        const auto model = entdist::resolve_model(spec);
        entdist::OracleComparisonOptions opt;
        opt.n_modes = of.modes;
        opt.output_dt = of.output_dt;
        opt.volterra_refine = of.refine;
        opt.window = of.window;
        if (of.band_low || of.band_high) {
            const auto def = entdist::default_band(model);
            opt.bath.band = std::pair{of.band_low.value_or(def.first), of.band_high.value_or(def.second)};
        }
        opt.bath.tail_modes = of.tail_modes;
        opt.bath.sampling = of.sampling == "midpoint" ? entdist::BathSampling::Midpoint : entdist::BathSampling::EndCorrected;

        const auto cmp = entdist::compare_with_oracle(model, spec.omega0, opt);

        const std::filesystem::path dir(spec.output_dir);
        const auto oracle_path = dir / (spec.label + "_oracle_trajectory.csv");
        const auto volterra_path = dir / (spec.label + "_oracle_volterra.csv");
        const auto manifest_path = dir / (spec.label + "_oracle_manifest.json");
        {
            auto os = entdist::io::open_output(oracle_path);
            entdist::io::write_trajectory_csv(os, cmp.oracle.trajectory);
        }
        {
            auto os = entdist::io::open_output(volterra_path);
            entdist::io::write_trajectory_csv(os, cmp.volterra);
        }
        json m;
        m["tool"] = "entdist";
        m["version"] = entdist::kVersion;
        m["command"] = "oracle-check";
        m["inputs"] = {{"label", spec.label},
                       {"model", model.describe()},
                       {"omega0", spec.omega0},
                       {"modes", of.modes},
                       {"output_dt", of.output_dt},
                       {"volterra_refine", of.refine},
                       {"sampling", of.sampling}};
        m["oracle"] = entdist::io::trajectory_json(cmp.oracle.trajectory);
        m["oracle"]["rk4_step"] = cmp.oracle.step;
        m["oracle"]["norm_deviation"] = cmp.oracle.norm_deviation;
        m["volterra"] = entdist::io::trajectory_json(cmp.volterra);
        m["comparison"] = {{"window", cmp.window},
                           {"recurrence_time", cmp.recurrence_time},
                           {"max_amplitude_error", cmp.max_amplitude_error},
                           {"max_population_error", cmp.max_population_error},
                           {"max_complement_error", cmp.max_complement_error},
                           {"tolerance", of.tolerance},
                           {"pass", cmp.max_amplitude_error <= of.tolerance}};
        m["files"] = {oracle_path.filename().string(), volterra_path.filename().string()};
        entdist::io::write_json(manifest_path, m);

        std::cout << "[" << spec.label << "] " << model.describe() << ", omega0 = " << fmt(spec.omega0) << ", N = "
                  << of.modes << "\n";
        std::cout << "  window              [0, " << fmt(cmp.window) << "]  (recurrence " << fmt(cmp.recurrence_time)
                  << ")\n";
        std::cout << "  max |db|            " << fmt(cmp.max_amplitude_error, "%.3e") << " (tolerance "
                  << fmt(of.tolerance, "%.1e") << ")\n";
        std::cout << "  max |d|b|^2|        " << fmt(cmp.max_population_error, "%.3e") << "\n";
        std::cout << "  norm deviation      " << fmt(cmp.oracle.norm_deviation, "%.3e") << "\n";
        std::cout << "  b~ reconstruction   " << fmt(cmp.max_complement_error, "%.3e") << "\n";
        for (const auto& f : {oracle_path, volterra_path, manifest_path}) std::cout << "  wrote " << f.string() << "\n";

        std::vector<std::string> why;
        if (cmp.max_amplitude_error > of.tolerance) why.push_back("Volterra and oracle differ beyond tolerance");
        if (cmp.oracle.norm_deviation > 1e-8) why.push_back("oracle norm drifted beyond 1e-8");
        if (cmp.max_complement_error > 1e-6) why.push_back("b~ reconstruction off by more than 1e-6");
        status = std::max(status, report_failures(spec.label, why));
    }
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entanglement distribution between two qubits in independent reservoirs", "entdist"};
    app.set_version_flag("--version", entdist::kVersion);
    app.require_subcommand(1);

    ScenarioFlags sim_flags, sweep_flags, event_flags, bound_flags, oracle_flags;
    OracleFlags oracle_opts;
    auto* sim = app.add_subcommand("simulate", "Solve one scenario and write trajectory, concurrences and events");
    sim_flags.attach(sim);
    auto* sweep = app.add_subcommand("sweep", "Sweep alpha over one trajectory and write surface tables");
    sweep_flags.attach(sweep);
    auto* events = app.add_subcommand("events", "Print the ESD/ESB event report as JSON");
    event_flags.attach(events);
    auto* bound = app.add_subcommand("boundstate", "Report the qubit-reservoir bound state below the band");
    bound_flags.attach(bound);
    auto* oracle = app.add_subcommand("oracle-check", "Compare the Volterra solution with a discretised bath");
    oracle_flags.attach(oracle);
    oracle_opts.attach(oracle);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_flags);
        if (sweep->parsed()) return cmd_sweep(sweep_flags);
        if (events->parsed()) return cmd_events(event_flags);
        if (bound->parsed()) return cmd_boundstate(bound_flags);
        return cmd_oracle(oracle_flags, oracle_opts);
    } catch (const entdist::ConfigError& e) {
        std::cerr << "entdist: config error: " << e.what();
        if (!e.field().empty()) std::cerr << " [" << e.field() << "]";
        std::cerr << "\n";
        return kExitConfig;
    } catch (const entdist::InputError& e) {
        std::cerr << "entdist: invalid input: " << e.what() << "\n";
        return kExitConfig;
    } catch (const entdist::NumericalError& e) {
        std::cerr << "entdist: numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "entdist: " << e.what() << "\n";
        return 1;
    }
}
