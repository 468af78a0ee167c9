// CSV tables and JSON envelopes for run output
//
// Numbers are written with 17 significant digits so files round-trip exactly
// and identical runs produce identical bytes.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "entdist/dynamics.hpp"
#include "entdist/entanglement.hpp"
#include "entdist/errors.hpp"
#include "entdist/oracle.hpp"
#include "entdist/spectral.hpp"

namespace entdist::io {

using json = nlohmann::ordered_json;

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_trajectory_csv(std::ostream& os, const AmplitudeTrajectory& traj) {
    os << "t,re_b,im_b,abs_b2,b_tilde\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        os << num(traj.grid.time(i)) << ',' << num(traj.b[i].real()) << ',' << num(traj.b[i].imag()) << ','
           << num(traj.population(i)) << ',' << num(traj.b_tilde[i]) << '\n';
    }
}

inline void write_concurrence_csv(std::ostream& os, const ConcurrenceSeries& s) {
    os << "t,c_q1q2,c_r1r2,c_q1r1,c_q1r2,identity_residual\n";
    for (std::size_t i = 0; i < s.time.size(); ++i) {
        const auto& c = s.concurrence[i];
        os << num(s.time[i]) << ',' << num(c.c_q1q2) << ',' << num(c.c_r1r2) << ',' << num(c.c_q1r1) << ','
           << num(c.c_q1r2) << ',' << num(s.identity_residual[i]) << '\n';
    }
}

// Trajectory metadata without the samples.
inline json trajectory_json(const AmplitudeTrajectory& traj) {
    json j;
    j["source"] = traj.source;
    j["model"] = traj.model;
    j["omega0"] = traj.omega0;
    j["grid"] = {{"t_max", traj.grid.t_max}, {"n_steps", traj.grid.n_steps}, {"dt", traj.grid.dt()}};
    j["error_estimate"] = traj.error_estimate ? json(*traj.error_estimate) : json(nullptr);
    j["kernel_error"] = traj.kernel_error;
    j["recurrence_time"] = traj.recurrence_time ? json(*traj.recurrence_time) : json(nullptr);
    const auto pl = plateau_population(traj);
    j["plateau"] = {{"population", pl.mean}, {"stddev", pl.stddev}, {"drift", pl.drift}};
    return j;
}

inline json concurrence_json(const ConcurrenceSet& c) {
    return {{"q1q2", c.c_q1q2}, {"r1r2", c.c_r1r2}, {"q1r1", c.c_q1r1}, {"q1r2", c.c_q1r2}};
}

inline json event_report_json(const EventReport& r) {
    json j;
    j["regime"] = r.regime;
    j["ratio"] = r.ratio;
    json esd = json::array();
    for (const auto& iv : r.esd_intervals)
        esd.push_back({{"t_start", iv.t_start}, {"t_end", iv.t_end}, {"revived", iv.revived}});
    j["esd"] = {{"present", r.esd}, {"revival", r.esd_revival}, {"intervals", esd}};
    j["esb"] = {{"present", r.esb}, {"revival", r.esb_revival}, {"onsets", r.esb_onsets}};
    j["always_zero"] = {{"q1q2", r.q1q2_always_zero}, {"r1r2", r.r1r2_always_zero}};
    j["plateau"] = {{"concurrence", concurrence_json(r.plateau)},
                    {"population", r.population.mean},
                    {"population_stddev", r.population.stddev},
                    {"population_drift", r.population.drift},
                    {"trapped", r.trapped}};
    j["inequality"] = {{"min_population", r.min_population},
                       {"esd_predicted", r.esd_predicted},
                       {"esb_predicted", r.esb_predicted},
                       {"holds", r.inequality_holds},
                       {"consistent", r.consistent}};
    return j;
}

inline json bound_state_json(const SpectralModel& model, double omega0, const std::optional<BoundState>& bs) {
    json j;
    j["model"] = model.describe();
    j["omega0"] = omega0;
    j["present"] = bs.has_value();
    if (bs) {
        j["energy"] = bs->energy;
        j["residual"] = bs->residual;
        j["trapped_population"] = bs->weight;
    }
    return j;
}

inline void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create directory " + dir.string() + ": " + ec.message(), 0, "output_dir");
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) ensure_directory(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path.string(), 0, "output_dir");
    return os;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    auto os = open_output(path);
    os << j.dump(2) << '\n';
}

}  // namespace entdist::io
