// Brute-force reference: the reservoir as N discrete modes
//
// In the single-excitation sector the qubit plus N modes is a linear
// (N+1)-dimensional Schrodinger equation,
//   b'   = -i omega0 b   - i sum_k g_k b_k
//   b_k' = -i omega_k b_k - i g_k b,
// integrated here with classical RK4. This path never touches the memory
// kernel, so it checks the Volterra solver and the collective-mode reduction
// independently. Results are meaningful only before the recurrence time
// 2 pi / d omega of the discrete bath.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "entdist/dynamics.hpp"
#include "entdist/errors.hpp"
#include "entdist/spectral.hpp"

namespace entdist {

struct DiscretizedBath {
    std::vector<double> frequencies;  // omega_k
    std::vector<double> couplings;    // g_k
    double band_low = 0.0;
    double band_high = 0.0;
    std::size_t tail_modes = 0;  // trailing entries standing in for J beyond band_high
    std::string description;

    std::size_t size() const noexcept { return frequencies.size(); }
    std::size_t band_modes() const noexcept { return size() - tail_modes; }
    double spacing() const noexcept {
        return band_modes() ? (band_high - band_low) / static_cast<double>(band_modes()) : 0.0;
    }
    // 2 pi / d omega; infinite for a single mode.
    double recurrence_time() const noexcept {
        return band_modes() > 1 ? 2.0 * std::numbers::pi / spacing() : std::numeric_limits<double>::infinity();
    }
    double coupling_weight() const noexcept {
        double s = 0.0;
        for (double g : couplings) s += g * g;
        return s;
    }
    double max_frequency() const noexcept {
        double m = 0.0;
        for (double w : frequencies) m = std::max(m, std::abs(w));
        return m;
    }
};

inline DiscretizedBath make_bath(std::vector<double> frequencies, std::vector<double> couplings, std::string description = "custom") {
    if (frequencies.empty() || frequencies.size() != couplings.size())
        throw InputError("make_bath: need matching, non-empty frequency and coupling lists");
    DiscretizedBath bath;
    const auto [lo, hi] = std::minmax_element(frequencies.begin(), frequencies.end());
    bath.band_low = *lo;
    bath.band_high = *hi;
    bath.frequencies = std::move(frequencies);
    bath.couplings = std::move(couplings);
    bath.description = std::move(description);
    return bath;
}

// Default sampling band: Ohmic [0, 8 Lambda] (the rest goes to tail modes);
// PBG [omega_c, omega(kappa_max)]; Lorentzian omega_center -+ 200 lambda.
inline std::pair<double, double> default_band(const SpectralModel& model) {
    switch (model.kind()) {
        case ModelKind::Ohmic: return {0.0, 8.0 * model.as<OhmicParams>().cutoff};
        case ModelKind::Pbg: {
            const auto& p = model.as<PbgParams>();
            return {p.omega_c, pbg_band_top(p)};
        }
        case ModelKind::Lorentzian: {
            const auto& p = model.as<LorentzianParams>();
            return {p.omega_center - 200.0 * p.width, p.omega_center + 200.0 * p.width};
        }
        case ModelKind::SingleMode: {
            const double w = model.as<SingleModeParams>().omega_mode;
            return {w, w};
        }
    }
    return {0.0, 0.0};
}

enum class BathSampling {
    Midpoint,      // g_k^2 = J(omega_k) d omega
    EndCorrected,  // midpoint nodes, endpoint weights corrected to O(d omega^4)
};

struct DiscretizeOptions {
    std::optional<std::pair<double, double>> band;  // default_band() when absent
    BathSampling sampling = BathSampling::EndCorrected;
    std::optional<std::size_t> tail_modes;          // Ohmic only; default 2
};

namespace detail {

// n-point Gauss rule for the weight (a + u) e^{-u} on [0, inf). The inner
// product is represented exactly by a 60-point Gauss-Laguerre rule, the
// recurrence coefficients come from Stieltjes' procedure and the nodes from the
// resulting Jacobi matrix.
inline std::pair<std::vector<double>, std::vector<double>> shifted_laguerre_rule(double a, std::size_t n) {
    constexpr int M = 60;
    Eigen::MatrixXd lag = Eigen::MatrixXd::Zero(M, M);
    for (int k = 0; k < M; ++k) {
        lag(k, k) = 2.0 * k + 1.0;
        if (k + 1 < M) lag(k, k + 1) = lag(k + 1, k) = k + 1.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> base(lag);
    const Eigen::ArrayXd x = base.eigenvalues().array();
    const Eigen::ArrayXd w = base.eigenvectors().row(0).transpose().array().square() * (a + x);

    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::VectorXd alpha(nn), beta(nn);
    Eigen::ArrayXd p_prev = Eigen::ArrayXd::Zero(M), p = Eigen::ArrayXd::Ones(M);
    double norm_prev = 1.0;
    for (Eigen::Index j = 0; j < nn; ++j) {
        const double norm = (w * p.square()).sum();
        alpha(j) = (w * x * p.square()).sum() / norm;
        beta(j) = j == 0 ? norm : norm / norm_prev;
        const Eigen::ArrayXd next = (x - alpha(j)) * p - (j == 0 ? 0.0 : beta(j)) * p_prev;
        p_prev = p;
        p = next;
        norm_prev = norm;
    }
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(nn, nn);
    for (Eigen::Index j = 0; j < nn; ++j) {
        jac(j, j) = alpha(j);
        if (j + 1 < nn) jac(j, j + 1) = jac(j + 1, j) = std::sqrt(beta(j + 1));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    std::vector<double> nodes(n), weights(n);
    for (Eigen::Index j = 0; j < nn; ++j) {
        nodes[j] = es.eigenvalues()(j);
        weights[j] = beta(0) * es.eigenvectors()(0, j) * es.eigenvectors()(0, j);
    }
    return {nodes, weights};
}

}  // namespace detail

// Samples the density on midpoint nodes omega_k = low + (k + 1/2) d omega.
//
// Plain midpoint weights carry the Euler-Maclaurin endpoint error
// -(d omega^2/24)[h'(high) - h'(low)] for any integrand h = J * phi, which for an
// Ohmic bath (J' = eta at omega = 0) shifts the bound-state energy by O(d omega^2)
// and shows up as a linear phase drift. EndCorrected replaces h'(low) by the
// three-point difference (-2 h_0 + 3 h_1 - h_2)/d omega, i.e. weights
// d omega (1 + {2, -3, 1}/24) on the first three nodes (mirrored at the top).
// The correction is skipped at a PBG band edge, where J is singular.
//
// For an Ohmic bath the exponential tail beyond the band is folded into a few
// Gauss modes (weight J on [high, inf)). They cost no recurrence time, so the
// band can stay short and d omega small. n_modes counts them.
// A single-mode model maps onto its one mode regardless of n_modes.
inline DiscretizedBath discretize(const SpectralModel& model, std::size_t n_modes, const DiscretizeOptions& opt = {}) {
    if (model.kind() == ModelKind::SingleMode) {
        const auto& p = model.as<SingleModeParams>();
        return make_bath({p.omega_mode}, {p.g}, model.describe());
    }
    if (n_modes > 10000) throw InputError("discretize: the reference propagator is capped at 10^4 modes");
    const auto [low, high] = opt.band.value_or(default_band(model));
    if (!(high > low)) throw InputError("discretize: empty band");
    const bool ohmic = model.kind() == ModelKind::Ohmic;
    const std::size_t tail = ohmic ? opt.tail_modes.value_or(2) : 0;
    if (opt.tail_modes && *opt.tail_modes > 0 && !ohmic)
        throw InputError("discretize: tail modes are only defined for the Ohmic density");
    if (n_modes < tail + 1) throw InputError("discretize: need at least one in-band mode");
    const std::size_t n_band = n_modes - tail;

    DiscretizedBath bath;
    bath.band_low = low;
    bath.band_high = high;
    bath.tail_modes = tail;
    bath.description = model.describe();
    const double dw = (high - low) / static_cast<double>(n_band);
    std::vector<double> weight(n_band, dw);
    if (opt.sampling == BathSampling::EndCorrected && n_band >= 6) {
        constexpr double corr[3] = {2.0 / 24.0, -3.0 / 24.0, 1.0 / 24.0};
        const bool singular_low = model.kind() == ModelKind::Pbg && low <= model.as<PbgParams>().omega_c;
        for (std::size_t i = 0; i < 3; ++i) {
            if (!singular_low) weight[i] += dw * corr[i];
            weight[n_band - 1 - i] += dw * corr[i];
        }
    }
    bath.frequencies.resize(n_band);
    bath.couplings.resize(n_band);
    for (std::size_t k = 0; k < n_band; ++k) {
        const double w = low + (static_cast<double>(k) + 0.5) * dw;
        bath.frequencies[k] = w;
        bath.couplings[k] = std::sqrt(evaluate_density(model, w) * weight[k]);
    }
    if (tail > 0) {
        // int_high^inf eta w e^{-w/L} phi(w) dw = eta L^2 e^{-a} int_0^inf (a + u) e^{-u} phi(high + L u) du
        const auto& p = model.as<OhmicParams>();
        const double a = high / p.cutoff;
        const auto [u, wt] = detail::shifted_laguerre_rule(a, tail);
        for (std::size_t j = 0; j < tail; ++j) {
            bath.frequencies.push_back(high + p.cutoff * u[j]);
            bath.couplings.push_back(std::sqrt(p.eta * p.cutoff * p.cutoff * std::exp(-a) * wt[j]));
        }
    }
    return bath;
}

struct OracleOptions {
    double step_factor = 0.05;        // RK4 step <= step_factor / max(omega_k, omega0)
    std::optional<double> max_step;   // explicit step; rejected if above the stability bound
};

struct OracleResult {
    AmplitudeTrajectory trajectory;          // qubit amplitude b(t), source "oracle"
    std::vector<double> reservoir_population; // sum_k |b_k|^2 per grid point
    double norm_deviation = 0.0;             // max_t | |psi| - 1 |
    double step = 0.0;                       // RK4 step actually used
};

// max over snapshots of | ||psi|| - 1 |.
inline double norm_check(std::span<const std::vector<cplx>> states) {
    double worst = 0.0;
    for (const auto& psi : states) {
        double n2 = 0.0;
        for (const auto& a : psi) n2 += std::norm(a);
        worst = std::max(worst, std::abs(std::sqrt(n2) - 1.0));
    }
    return worst;
}

inline OracleResult discretized_reference(const DiscretizedBath& bath, double omega0, const TimeGrid& grid,
                                          const OracleOptions& opt = {}) {
    grid.validate();
    if (bath.size() == 0) throw InputError("discretized_reference: empty bath");
    const std::size_t n = bath.size();
    const double w_max = std::max(bath.max_frequency(), std::abs(omega0));
    const double bound = std::min(opt.step_factor, 0.1) / w_max;
    if (opt.max_step && *opt.max_step > bound)
        throw InstabilityError("discretized_reference: step " + std::to_string(*opt.max_step) +
                                   " exceeds the stability bound " + std::to_string(bound),
                               0.0);
    const double h_cap = opt.max_step.value_or(bound);
    const auto substeps = static_cast<std::size_t>(std::ceil(grid.dt() / h_cap));
    const double h = grid.dt() / static_cast<double>(substeps);

    // Interaction picture: c_0 = e^{-i omega0 t} y_0, c_k = e^{-i omega_k t} y_k. The free
    // evolution is then exact and RK4 only sees the couplings, so a decoupled
    // bath keeps |psi| = 1 to rounding.
    //   y_0' = -i sum_k g_k P_k y_k,   y_k' = -i g_k conj(P_k) y_0,   P_k = e^{i (omega0 - omega_k) t}
    const auto& g = bath.couplings;
    std::vector<cplx> half_turn(n), p0(n), p1(n), p2(n);
    for (std::size_t k = 0; k < n; ++k) half_turn[k] = std::polar(1.0, 0.5 * h * (omega0 - bath.frequencies[k]));
    auto apply = [&](const std::vector<cplx>& y, const std::vector<cplx>& phase, std::vector<cplx>& dy) {
        cplx acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            acc += g[k] * phase[k] * y[k + 1];
            dy[k + 1] = cplx(0.0, -1.0) * g[k] * std::conj(phase[k]) * y[0];
        }
        dy[0] = cplx(0.0, -1.0) * acc;
    };

    std::vector<cplx> y(n + 1, cplx(0.0)), k1(n + 1), k2(n + 1), k3(n + 1), k4(n + 1), tmp(n + 1);
    y[0] = 1.0;

    std::vector<cplx> b(grid.size());
    OracleResult out;
    out.reservoir_population.resize(grid.size());
    out.step = h;
    auto record = [&](std::size_t i) {
        b[i] = y[0] * std::polar(1.0, -omega0 * grid.time(i));
        double bath_pop = 0.0;
        for (std::size_t k = 1; k <= n; ++k) bath_pop += std::norm(y[k]);
        out.reservoir_population[i] = bath_pop;
        out.norm_deviation = std::max(out.norm_deviation, std::abs(std::sqrt(std::norm(y[0]) + bath_pop) - 1.0));
    };
    record(0);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        // Phases are re-seeded exactly at every output sample; in between they
        // advance by half-step rotations.
        const double t0 = grid.time(i - 1);
        for (std::size_t k = 0; k < n; ++k) p0[k] = std::polar(1.0, (omega0 - bath.frequencies[k]) * t0);
        for (std::size_t s = 0; s < substeps; ++s) {
            for (std::size_t k = 0; k < n; ++k) {
                p1[k] = p0[k] * half_turn[k];
                p2[k] = p1[k] * half_turn[k];
            }
            apply(y, p0, k1);
            for (std::size_t j = 0; j <= n; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
            apply(tmp, p1, k2);
            for (std::size_t j = 0; j <= n; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
            apply(tmp, p1, k3);
            for (std::size_t j = 0; j <= n; ++j) tmp[j] = y[j] + h * k3[j];
            apply(tmp, p2, k4);
            for (std::size_t j = 0; j <= n; ++j) y[j] += (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            std::swap(p0, p2);
        }
        record(i);
    }
    b[0] = cplx(1.0, 0.0);

    out.trajectory = make_trajectory(grid, std::move(b), omega0, bath.description + " [N=" + std::to_string(n) + "]", "oracle");
    out.trajectory.recurrence_time = bath.recurrence_time();
    return out;
}

struct OracleComparisonOptions {
    std::size_t n_modes = 2000;
    DiscretizeOptions bath;
    double output_dt = 0.01;            // spacing of the compared samples
    std::size_t volterra_refine = 200;  // Volterra steps per output sample
    std::optional<double> window;       // default: half the recurrence time
    OracleOptions oracle;
};

struct OracleComparison {
    AmplitudeTrajectory volterra;   // subsampled onto the output grid
    OracleResult oracle;
    double window = 0.0;
    double recurrence_time = 0.0;
    double max_amplitude_error = 0.0;   // max |b_volterra - b_oracle|
    double max_population_error = 0.0;  // max ||b_volterra|^2 - |b_oracle|^2|
    double max_complement_error = 0.0;  // max |b~ - sqrt(sum_k |b_k|^2)| within the oracle
};

// Volterra solution against the discretised bath over [0, window].
inline OracleComparison compare_with_oracle(const SpectralModel& model, double omega0,
                                            const OracleComparisonOptions& opt = {}) {
    if (!(opt.output_dt > 0.0) || opt.volterra_refine < 1) throw InputError("compare_with_oracle: bad sampling");
    const auto bath = discretize(model, opt.n_modes, opt.bath);
    OracleComparison out;
    out.recurrence_time = bath.recurrence_time();
    const double window = opt.window.value_or(0.5 * out.recurrence_time);
    if (!std::isfinite(window)) throw InputError("compare_with_oracle: a single-mode bath needs an explicit window");
    if (window > 0.5 * out.recurrence_time * (1.0 + 1e-12))
        throw InputError("compare_with_oracle: window extends past half the recurrence time");
    const auto n_out = static_cast<std::size_t>(std::floor(window / opt.output_dt));
    if (n_out < 2) throw InputError("compare_with_oracle: window shorter than two samples");
    const TimeGrid grid(opt.output_dt * static_cast<double>(n_out), n_out);
    out.window = grid.t_max;

    out.oracle = discretized_reference(bath, omega0, grid, opt.oracle);
    const auto fine = solve_amplitude(model, omega0, TimeGrid(grid.t_max, n_out * opt.volterra_refine));
    std::vector<cplx> b(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) b[i] = fine.b[i * opt.volterra_refine];
    out.volterra = make_trajectory(grid, std::move(b), omega0, fine.model, "volterra");
    out.volterra.kernel_error = fine.kernel_error;

    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& o = out.oracle.trajectory;
        out.max_amplitude_error = std::max(out.max_amplitude_error, std::abs(out.volterra.b[i] - o.b[i]));
        out.max_population_error =
            std::max(out.max_population_error, std::abs(out.volterra.population(i) - o.population(i)));
        out.max_complement_error = std::max(out.max_complement_error,
                                            std::abs(o.b_tilde[i] - std::sqrt(out.oracle.reservoir_population[i])));
    }
    return out;
}

}  // namespace entdist
