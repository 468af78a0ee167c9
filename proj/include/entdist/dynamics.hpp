// Single-pair amplitude b(t) from the memory-kernel equation
//
//   db/dt + i omega0 b(t) + int_0^t f(t - tau) b(tau) d tau = 0,   b(0) = 1.
//
// The default path works in the rotating frame B(t) = exp(i omega0 t) b(t),
//   dB/dt = -int_0^t g(t - tau) B(tau) d tau,   g(s) = f(s) exp(i omega0 s),
// and marches it with a trapezoidal predictor-corrector: trapezoid rule for the
// history integral, Euler predictor, one trapezoidal corrector pass.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "entdist/convolution.hpp"
#include "entdist/errors.hpp"
#include "entdist/spectral.hpp"

namespace entdist {

struct TimeGrid {
    double t_max = 50.0;
    std::size_t n_steps = 5000;

    TimeGrid() = default;
    TimeGrid(double t_max_, std::size_t n_steps_) : t_max(t_max_), n_steps(n_steps_) { validate(); }

    void validate() const {
        if (!(std::isfinite(t_max) && t_max > 0.0)) throw InputError("TimeGrid: t_max must be finite and > 0");
        if (n_steps < 2) throw InputError("TimeGrid: n_steps must be >= 2");
    }
    double dt() const noexcept { return t_max / static_cast<double>(n_steps); }
    double time(std::size_t i) const noexcept { return t_max * static_cast<double>(i) / static_cast<double>(n_steps); }
    std::size_t size() const noexcept { return n_steps + 1; }
    TimeGrid refined() const { return TimeGrid(t_max, 2 * n_steps); }
};

// Defaults that let the long-time plateaus settle.
inline TimeGrid default_grid(const SpectralModel& model) {
    if (model.kind() == ModelKind::Ohmic) return TimeGrid(20.0, 4000);
    return TimeGrid(50.0, 5000);
}

struct AmplitudeTrajectory {
    TimeGrid grid;
    std::vector<cplx> b;
    std::vector<double> b_tilde;  // sqrt(max(0, 1 - |b|^2))
    double omega0 = 0.0;
    std::string model;           // SpectralModel::describe() or bath description
    std::string source = "volterra";
    std::optional<double> error_estimate;   // max_i |b_dt[i] - b_{dt/2}[2i]|
    double kernel_error = 0.0;              // worst quadrature error in the tabulated kernel
    std::optional<double> recurrence_time;  // discretised-bath runs only

    double population(std::size_t i) const { return std::norm(b[i]); }
    std::size_t size() const noexcept { return b.size(); }
};

enum class Frame { Rotating, Lab };

struct SolverOptions {
    Frame frame = Frame::Rotating;
    bool estimate_error = false;
    double instability_tol = 1e-6;  // |b| may exceed 1 by at most this much
};

namespace detail {

// Marches the amplitude on a tabulated kernel. kernel[n * stride] = f(n dt).
inline std::vector<cplx> march_amplitude(const std::vector<cplx>& kernel, std::size_t stride, const TimeGrid& grid,
                                         double omega0, const SolverOptions& opt) {
    const std::size_t n_steps = grid.n_steps;
    const double dt = grid.dt();
    const bool rotating = opt.frame == Frame::Rotating;

    std::vector<cplx> g(n_steps + 1);
    for (std::size_t n = 0; n <= n_steps; ++n) {
        g[n] = kernel[n * stride];
        if (rotating) {
            const double ph = omega0 * grid.time(n);
            g[n] *= cplx(std::cos(ph), std::sin(ph));
        }
    }
    const cplx free_rate = rotating ? cplx(0.0) : cplx(0.0, -omega0);

    OnlineConvolution history_sum(g);
    std::vector<cplx> B(n_steps + 1);
    B[0] = 1.0;
    history_sum.push(B[0]);

    const double limit = (1.0 + opt.instability_tol) * (1.0 + opt.instability_tol);
    cplx f_now = free_rate;  // derivative at t = 0: the history integral is empty
    for (std::size_t n = 0; n < n_steps; ++n) {
        // History part of the trapezoid at t_{n+1}: dt [g_{n+1} B_0 / 2 + sum_{j=1}^{n} g_{n+1-j} B_j].
        const std::size_t m = n + 1;
        const cplx history = dt * (history_sum.sum(m) - 0.5 * g[m] * B[0]);
        auto derivative = [&](cplx b_next) { return free_rate * b_next - (history + 0.5 * dt * g[0] * b_next); };

        const cplx predicted = B[n] + dt * f_now;
        const cplx corrected = B[n] + 0.5 * dt * (f_now + derivative(predicted));
        if (!(std::norm(corrected) <= limit))
            throw InstabilityError("amplitude exceeded unit norm at t = " + std::to_string(grid.time(m)) +
                                       "; reduce dt",
                                   grid.time(m));
        B[m] = corrected;
        history_sum.push(corrected);
        f_now = derivative(corrected);
    }

    std::vector<cplx> b(n_steps + 1);
    for (std::size_t n = 0; n <= n_steps; ++n) {
        cplx v = B[n];
        if (rotating && n > 0) {
            const double ph = -omega0 * grid.time(n);
            v *= cplx(std::cos(ph), std::sin(ph));
        }
        b[n] = v;
    }
    b[0] = cplx(1.0, 0.0);
    return b;
}

inline std::vector<double> amplitude_complement(const std::vector<cplx>& b) {
    std::vector<double> out(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) out[i] = std::sqrt(std::max(0.0, 1.0 - std::norm(b[i])));
    return out;
}

}  // namespace detail

// Trajectory assembled from an externally computed amplitude sequence.
inline AmplitudeTrajectory make_trajectory(const TimeGrid& grid, std::vector<cplx> b, double omega0, std::string model,
                                           std::string source) {
    if (b.size() != grid.size()) throw InputError("make_trajectory: amplitude length does not match the grid");
    AmplitudeTrajectory traj;
    traj.grid = grid;
    traj.b_tilde = detail::amplitude_complement(b);
    traj.b = std::move(b);
    traj.omega0 = omega0;
    traj.model = std::move(model);
    traj.source = std::move(source);
    return traj;
}

inline AmplitudeTrajectory solve_amplitude(const SpectralModel& model, double omega0, const TimeGrid& grid,
                                           const SolverOptions& opt = {}) {
    grid.validate();
    if (!(std::isfinite(omega0) && omega0 > 0.0)) throw InputError("solve_amplitude: omega0 must be > 0");

    // With an error estimate requested the kernel is tabulated once at dt/2 and
    // the coarse solve reads every second entry.
    const TimeGrid fine = grid.refined();
    double kernel_error = 0.0;
    const auto kernel = opt.estimate_error ? tabulate_kernel(model, fine.dt(), fine.size(), &kernel_error)
                                           : tabulate_kernel(model, grid.dt(), grid.size(), &kernel_error);

    auto traj = make_trajectory(grid, detail::march_amplitude(kernel, opt.estimate_error ? 2 : 1, grid, omega0, opt),
                                omega0, model.describe(), "volterra");
    traj.kernel_error = kernel_error;
    if (opt.estimate_error) {
        const auto b_fine = detail::march_amplitude(kernel, 1, fine, omega0, opt);
        double err = 0.0;
        for (std::size_t i = 0; i < traj.b.size(); ++i) err = std::max(err, std::abs(traj.b[i] - b_fine[2 * i]));
        traj.error_estimate = err;
    }
    return traj;
}

// Richardson-style estimate for an already solved trajectory (re-solves at dt/2).
inline double estimate_solver_error(const SpectralModel& model, const AmplitudeTrajectory& traj,
                                    const SolverOptions& opt = {}) {
    SolverOptions o = opt;
    o.estimate_error = false;
    const auto fine = solve_amplitude(model, traj.omega0, traj.grid.refined(), o);
    double err = 0.0;
    for (std::size_t i = 0; i < traj.b.size(); ++i) err = std::max(err, std::abs(traj.b[i] - fine.b[2 * i]));
    return err;
}

// ---------------------------------------------------------------------------
// Time-local master-equation coefficients
// ---------------------------------------------------------------------------

struct MasterCoefficients {
    std::vector<std::optional<double>> lamb_shift;  // Delta(t) = -Im[b'/b]
    std::vector<std::optional<double>> decay_rate;  // Gamma(t) = -Re[b'/b]
};

// Delta(t) and Gamma(t) from the logarithmic derivative of b. The derivative is
// taken on the slowly varying envelope exp(i omega0 t) b(t) with second-order
// differences (centred inside, one-sided at the ends); points with |b| < 1e-8
// are left undefined.
inline MasterCoefficients master_coefficients(const AmplitudeTrajectory& traj, double min_amplitude = 1e-8) {
    const std::size_t n = traj.size();
    if (n < 3) throw InputError("master_coefficients: need at least three grid points");
    const double dt = traj.grid.dt();
    const double w0 = traj.omega0;

    std::vector<cplx> env(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ph = w0 * traj.grid.time(i);
        env[i] = traj.b[i] * cplx(std::cos(ph), std::sin(ph));
    }

    MasterCoefficients out;
    out.lamb_shift.resize(n);
    out.decay_rate.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(traj.b[i]) < min_amplitude) continue;
        cplx d;
        if (i == 0)
            d = (-3.0 * env[0] + 4.0 * env[1] - env[2]) / (2.0 * dt);
        else if (i == n - 1)
            d = (3.0 * env[i] - 4.0 * env[i - 1] + env[i - 2]) / (2.0 * dt);
        else
            d = (env[i + 1] - env[i - 1]) / (2.0 * dt);
        // b'/b = B'/B - i omega0
        const cplx log_deriv = d / env[i] - cplx(0.0, w0);
        out.lamb_shift[i] = -log_deriv.imag();
        out.decay_rate[i] = -log_deriv.real();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Long-time plateau
// ---------------------------------------------------------------------------

struct Plateau {
    double mean = 0.0;    // mean of |b|^2 over the window
    double stddev = 0.0;  // plateau quality
    double drift = 0.0;   // (mean of second half - mean of first half) / mean
    std::size_t first_index = 0;
};

inline std::size_t plateau_start(std::size_t n_points, double fraction) {
    const auto window = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n_points))));
    return n_points - std::min(window, n_points);
}

inline Plateau plateau_population(const AmplitudeTrajectory& traj, double fraction = 0.1) {
    Plateau p;
    p.first_index = plateau_start(traj.size(), fraction);
    const double count = static_cast<double>(traj.size() - p.first_index);
    for (std::size_t i = p.first_index; i < traj.size(); ++i) p.mean += traj.population(i);
    p.mean /= count;
    for (std::size_t i = p.first_index; i < traj.size(); ++i) {
        const double d = traj.population(i) - p.mean;
        p.stddev += d * d;
    }
    p.stddev = std::sqrt(p.stddev / count);
    const std::size_t mid = p.first_index + (traj.size() - p.first_index) / 2;
    double early = 0.0, late = 0.0;
    for (std::size_t i = p.first_index; i < mid; ++i) early += traj.population(i);
    for (std::size_t i = mid; i < traj.size(); ++i) late += traj.population(i);
    early /= static_cast<double>(std::max<std::size_t>(1, mid - p.first_index));
    late /= static_cast<double>(traj.size() - mid);
    p.drift = p.mean > 0.0 ? (late - early) / p.mean : 0.0;
    return p;
}

}  // namespace entdist
