// Reservoir spectral densities and their memory kernels
//
// A SpectralModel is an immutable tagged union over the four reservoir shapes
// the simulator knows about. Everything here is a pure function of the model.
//
// Conventions
//   J(omega) = sum_k |g_k|^2 delta(omega - omega_k)
//   f(s)     = int J(omega) exp(-i omega s) d omega
//
// The photonic band-gap (PBG) reservoir uses the isotropic band-edge dispersion
// omega(kappa) = omega_c (1 + (kappa - 1)^2) with kappa = k/k0 and c k0 = omega_c,
// which turns the kernel into
//   f(s) = eta omega_c^2 int_0^kappa_max kappa^2/(1+(kappa-1)^2) exp(-i omega(kappa) s) d kappa.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "entdist/errors.hpp"
#include "entdist/quadrature.hpp"

namespace entdist {

using cplx = std::complex<double>;

struct PbgParams {
    double eta = 0.2;        // dimensionless coupling
    double omega_c = 1.0;    // upper band-edge frequency
    double kappa_max = 10.0; // wave-vector cutoff in units of k0
};

struct OhmicParams {
    double eta = 0.1;     // dimensionless coupling
    double cutoff = 5.0;  // Lambda
};

struct SingleModeParams {
    double g = 0.1;          // vacuum Rabi coupling
    double omega_mode = 1.0;
};

struct LorentzianParams {
    double gamma = 0.1;        // f(0) = gamma * width / 2
    double width = 1.0;        // lambda, the kernel's decay rate
    double omega_center = 1.0;
};

enum class ModelKind { Pbg, Ohmic, SingleMode, Lorentzian };

class SpectralModel {
public:
    using Variant = std::variant<PbgParams, OhmicParams, SingleModeParams, LorentzianParams>;

    static SpectralModel pbg(double eta, double omega_c = 1.0, double kappa_max = 10.0) {
        require_coupling(eta, "eta");
        require_frequency(omega_c, "omega_c");
        if (!(std::isfinite(kappa_max) && kappa_max > 1.0))
            throw InputError("kappa_max must be finite and > 1");
        return SpectralModel(PbgParams{eta, omega_c, kappa_max});
    }
    static SpectralModel ohmic(double eta, double cutoff) {
        require_coupling(eta, "eta");
        require_frequency(cutoff, "Lambda");
        return SpectralModel(OhmicParams{eta, cutoff});
    }
    static SpectralModel single_mode(double g, double omega_mode) {
        require_coupling(g, "g");
        require_frequency(omega_mode, "omega_mode");
        return SpectralModel(SingleModeParams{g, omega_mode});
    }
    static SpectralModel lorentzian(double gamma, double width, double omega_center) {
        require_coupling(gamma, "gamma");
        require_frequency(width, "lambda");
        require_frequency(omega_center, "omega_center");
        return SpectralModel(LorentzianParams{gamma, width, omega_center});
    }

    ModelKind kind() const noexcept { return static_cast<ModelKind>(params_.index()); }
    const Variant& params() const noexcept { return params_; }

    template <typename P>
    const P& as() const {
        return std::get<P>(params_);
    }

    std::string name() const {
        switch (kind()) {
            case ModelKind::Pbg: return "pbg";
            case ModelKind::Ohmic: return "ohmic";
            case ModelKind::SingleMode: return "single_mode";
            case ModelKind::Lorentzian: return "lorentzian";
        }
        return "unknown";
    }

    std::string describe() const {
        std::ostringstream os;
        os.precision(15);
        os << name();
        std::visit(
            [&](const auto& p) {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, PbgParams>)
                    os << "(eta=" << p.eta << ", omega_c=" << p.omega_c << ", kappa_max=" << p.kappa_max << ")";
                else if constexpr (std::is_same_v<P, OhmicParams>)
                    os << "(eta=" << p.eta << ", Lambda=" << p.cutoff << ")";
                else if constexpr (std::is_same_v<P, SingleModeParams>)
                    os << "(g=" << p.g << ", omega_mode=" << p.omega_mode << ")";
                else
                    os << "(gamma=" << p.gamma << ", lambda=" << p.width << ", omega_center=" << p.omega_center << ")";
            },
            params_);
        return os.str();
    }

    // Largest frequency scale of the kernel; sets how fine dt must be.
    double kernel_scale() const {
        return std::visit(
            [](const auto& p) -> double {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, PbgParams>)
                    return std::sqrt(p.eta) * p.omega_c * std::sqrt(p.kappa_max);
                else if constexpr (std::is_same_v<P, OhmicParams>)
                    return p.cutoff;
                else if constexpr (std::is_same_v<P, SingleModeParams>)
                    return p.g;
                else
                    return std::max(p.width, std::sqrt(p.gamma * p.width));
            },
            params_);
    }

private:
    explicit SpectralModel(Variant v) : params_(std::move(v)) {}

    static void require_frequency(double v, const char* name) {
        if (!(std::isfinite(v) && v > 0.0))
            throw InputError(std::string(name) + " must be finite and strictly positive");
    }
    static void require_coupling(double v, const char* name) {
        if (!(std::isfinite(v) && v >= 0.0))
            throw InputError(std::string(name) + " must be finite and non-negative");
    }

    Variant params_;
};

// ---------------------------------------------------------------------------
// Spectral density
// ---------------------------------------------------------------------------

// Lowest frequency carrying modes; nullopt when the support is the whole real line.
inline std::optional<double> band_minimum(const SpectralModel& model) {
    switch (model.kind()) {
        case ModelKind::Pbg: return model.as<PbgParams>().omega_c;
        case ModelKind::Ohmic: return 0.0;
        case ModelKind::SingleMode: return model.as<SingleModeParams>().omega_mode;
        case ModelKind::Lorentzian: return std::nullopt;
    }
    return std::nullopt;
}

inline double pbg_band_top(const PbgParams& p) {
    const double u = p.kappa_max - 1.0;
    return p.omega_c * (1.0 + u * u);
}

// J(omega). Throws DivergenceError at the PBG band edge and on the single-mode
// delta peak, where no finite value exists.
inline double evaluate_density(const SpectralModel& model, double omega) {
    if (!std::isfinite(omega)) throw InputError("evaluate_density: omega must be finite");
    return std::visit(
        [omega](const auto& p) -> double {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, PbgParams>) {
                if (omega == p.omega_c)
                    throw DivergenceError("PBG density diverges as (omega - omega_c)^(-1/2) at the band edge", omega);
                if (omega < p.omega_c || omega > pbg_band_top(p)) return 0.0;
                // J d omega = eta omega_c^3 kappa^2/omega d kappa, summed over both
                // dispersion branches kappa = 1 -+ u that fall inside [0, kappa_max].
                const double u = std::sqrt(omega / p.omega_c - 1.0);
                const double jac = 2.0 * p.omega_c * u;
                const double pref = p.eta * p.omega_c * p.omega_c * p.omega_c / omega;
                double j = 0.0;
                const double k_hi = 1.0 + u;
                if (k_hi <= p.kappa_max) j += pref * k_hi * k_hi / jac;
                const double k_lo = 1.0 - u;
                if (k_lo >= 0.0) j += pref * k_lo * k_lo / jac;
                return j;
            } else if constexpr (std::is_same_v<P, OhmicParams>) {
                if (omega < 0.0) return 0.0;
                return p.eta * omega * std::exp(-omega / p.cutoff);
            } else if constexpr (std::is_same_v<P, SingleModeParams>) {
                if (omega == p.omega_mode)
                    throw DivergenceError("single-mode density is a delta peak at omega_mode", omega);
                return 0.0;
            } else {
                const double d = omega - p.omega_center;
                return p.gamma * p.width * p.width / (2.0 * std::numbers::pi * (d * d + p.width * p.width));
            }
        },
        model.params());
}

// ---------------------------------------------------------------------------
// Memory kernel
// ---------------------------------------------------------------------------

struct KernelValue {
    cplx value;
    double error = 0.0;  // estimated absolute quadrature error; 0 for closed forms
};

struct KernelOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    int max_refinements = 8;
};

namespace detail {

// Panel breakpoints in u = kappa - 1 over [0, u_max]: one cut per phase step
// of the oscillation omega_c s u^2, and no panel wider than h_max.
inline void pbg_side_breakpoints(double u_max, double phase_rate, double phase_step, double h_max,
                                 std::vector<double>& out) {
    std::vector<double> cuts{0.0};
    if (phase_rate > 0.0) {
        for (std::size_t m = 1;; ++m) {
            const double u = std::sqrt(static_cast<double>(m) * phase_step / phase_rate);
            if (u >= u_max) break;
            cuts.push_back(u);
        }
    }
    cuts.push_back(u_max);
    out.clear();
    out.push_back(0.0);
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        const double a = cuts[i - 1], b = cuts[i];
        const auto pieces = static_cast<std::size_t>(std::ceil((b - a) / h_max));
        for (std::size_t j = 1; j <= pieces; ++j)
            out.push_back(j == pieces ? b : a + (b - a) * static_cast<double>(j) / static_cast<double>(pieces));
    }
}

// One pass of the PBG kappa-integral at refinement level L: 16-point
// Gauss-Legendre panels spanning at most two local periods (8 nodes per period)
// at L = 0, halved at each level.
inline cplx pbg_kernel_pass(const PbgParams& p, double s, int level) {
    const double scale = std::ldexp(1.0, -level);
    const double phase_step = 4.0 * std::numbers::pi * scale;
    const double h_max = 0.25 * scale;
    const double rate = p.omega_c * s;

    auto integrand = [rate](double u) -> cplx {
        const double kappa = 1.0 + u;
        const double u2 = u * u;
        const double amp = kappa * kappa / (1.0 + u2);
        const double phase = -rate * u2;
        return amp * cplx(std::cos(phase), std::sin(phase));
    };

    std::vector<double> right, left;
    pbg_side_breakpoints(p.kappa_max - 1.0, rate, phase_step, h_max, right);
    pbg_side_breakpoints(1.0, rate, phase_step, h_max, left);
    // The left side runs over u in [-1, 0]; mirror it.
    std::vector<double> left_u(left.rbegin(), left.rend());
    for (auto& u : left_u) u = -u;

    const cplx sum = quad::integrate_panels<16>(integrand, right) + quad::integrate_panels<16>(integrand, left_u);
    const double carrier = -rate;  // exp(-i omega_c s) factored out of exp(-i omega s)
    return p.eta * p.omega_c * p.omega_c * cplx(std::cos(carrier), std::sin(carrier)) * sum;
}

}  // namespace detail

// f(s) with an error estimate. For PBG the estimate is the change under node
// doubling; AccuracyError if it cannot be brought below tolerance.
inline KernelValue evaluate_kernel_checked(const SpectralModel& model, double s, const KernelOptions& opt = {}) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw InputError("evaluate_kernel: delay s must be finite and >= 0");
    return std::visit(
        [&](const auto& p) -> KernelValue {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, PbgParams>) {
                cplx coarse = detail::pbg_kernel_pass(p, s, 0);
                double err = 0.0;
                for (int level = 1; level <= opt.max_refinements; ++level) {
                    const cplx fine = detail::pbg_kernel_pass(p, s, level);
                    err = std::abs(fine - coarse);
                    coarse = fine;
                    if (err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(fine))) return {fine, err};
                }
                throw AccuracyError("PBG kernel quadrature did not converge", err);
            } else if constexpr (std::is_same_v<P, OhmicParams>) {
                const cplx den = cplx(1.0, p.cutoff * s);
                return {p.eta * p.cutoff * p.cutoff / (den * den), 0.0};
            } else if constexpr (std::is_same_v<P, SingleModeParams>) {
                const double ph = -p.omega_mode * s;
                return {p.g * p.g * cplx(std::cos(ph), std::sin(ph)), 0.0};
            } else {
                const double ph = -p.omega_center * s;
                return {0.5 * p.gamma * p.width * std::exp(-p.width * s) * cplx(std::cos(ph), std::sin(ph)), 0.0};
            }
        },
        model.params());
}

inline cplx evaluate_kernel(const SpectralModel& model, double s) {
    return evaluate_kernel_checked(model, s).value;
}

// f(0) = int J d omega, in closed form for every model.
inline double kernel_at_zero(const SpectralModel& model) {
    return std::visit(
        [](const auto& p) -> double {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, PbgParams>) {
                const double u = p.kappa_max - 1.0;
                return p.eta * p.omega_c * p.omega_c * (p.kappa_max + std::log((1.0 + u * u) / 2.0));
            } else if constexpr (std::is_same_v<P, OhmicParams>) {
                return p.eta * p.cutoff * p.cutoff;
            } else if constexpr (std::is_same_v<P, SingleModeParams>) {
                return p.g * p.g;
            } else {
                return 0.5 * p.gamma * p.width;
            }
        },
        model.params());
}

// |f_{2 kappa_max}(s) - f_{kappa_max}(s)|: how much the PBG kernel still depends on
// the wave-vector cutoff. Zero for the other models, which have no cutoff.
inline double kernel_cutoff_sensitivity(const SpectralModel& model, double s) {
    if (model.kind() != ModelKind::Pbg) return 0.0;
    const auto& p = model.as<PbgParams>();
    const auto doubled = SpectralModel::pbg(p.eta, p.omega_c, 2.0 * p.kappa_max);
    return std::abs(evaluate_kernel(doubled, s) - evaluate_kernel(model, s));
}

// f(n dt) for n = 0..n_points-1. The kernel depends on the delay only, so the
// solver tabulates it once instead of inside the O(N^2) convolution.
inline std::vector<cplx> tabulate_kernel(const SpectralModel& model, double dt, std::size_t n_points,
                                         double* max_error = nullptr) {
    std::vector<cplx> table(n_points);
    double worst = 0.0;
    for (std::size_t n = 0; n < n_points; ++n) {
        const auto kv = evaluate_kernel_checked(model, dt * static_cast<double>(n));
        table[n] = kv.value;
        worst = std::max(worst, kv.error);
    }
    if (max_error) *max_error = worst;
    return table;
}

// ---------------------------------------------------------------------------
// Bound states
// ---------------------------------------------------------------------------

namespace detail {

// int J(omega) / (E - omega)^power d omega for E strictly below the band.
inline double resolvent_moment(const SpectralModel& model, double energy, int power) {
    // Integrate against (omega - E)^power > 0 and restore the sign of (E - omega)^power.
    const double parity = (power % 2 == 1) ? -1.0 : 1.0;
    switch (model.kind()) {
        case ModelKind::Pbg: {
            const auto& p = model.as<PbgParams>();
            const double w3 = p.eta * p.omega_c * p.omega_c * p.omega_c;
            auto f = [&](double kappa) {
                const double u = kappa - 1.0;
                const double w = p.omega_c * (1.0 + u * u);
                return w3 * kappa * kappa / (w * std::pow(w - energy, power));
            };
            const double width = std::sqrt(std::max(0.0, (p.omega_c - energy) / p.omega_c));
            const std::vector<double> cuts{1.0 - width, 1.0, 1.0 + width, 2.0};
            const auto r = quad::integrate_adaptive(f, 0.0, p.kappa_max, 0.0, 1e-13, cuts, 20000);
            return parity * r.value;
        }
        case ModelKind::Ohmic: {
            const auto& p = model.as<OhmicParams>();
            auto f = [&](double w) { return p.eta * w * std::exp(-w / p.cutoff) / std::pow(w - energy, power); };
            const std::vector<double> cuts{-energy, p.cutoff, 10.0 * p.cutoff};
            const auto r = quad::integrate_adaptive(f, 0.0, 60.0 * p.cutoff, 0.0, 1e-13, cuts, 20000);
            return parity * r.value;
        }
        case ModelKind::SingleMode: {
            const auto& p = model.as<SingleModeParams>();
            return p.g * p.g / std::pow(energy - p.omega_mode, power);
        }
        case ModelKind::Lorentzian: break;
    }
    throw InputError("resolvent integrals need a model with a band minimum");
}

}  // namespace detail

// Sigma(E) = int J(omega)/(E - omega) d omega, E below the band minimum.
inline double self_energy(const SpectralModel& model, double energy) {
    const auto band = band_minimum(model);
    if (!band) throw InputError("self_energy: model has no band minimum");
    if (!(energy < *band)) throw InputError("self_energy: energy must lie strictly below the band");
    return detail::resolvent_moment(model, energy, 1);
}

struct BoundState {
    double energy;    // E, root of E = omega0 + Sigma(E)
    double residual;  // |E - omega0 - Sigma(E)|
    double weight;    // Z^2 = 1/(1 + int J/(E-omega)^2)^2, the trapped population |b(inf)|^2
};

struct BoundStateOptions {
    double bracket_depth = 1e3;   // search down to band_min - depth * unit
    double edge_gap = 1e-12;      // ... and up to band_min - edge_gap * unit
    double tolerance = 1e-10;     // bisection width, in units
    double max_residual = 1e-8;   // in units
    int max_iterations = 200;
};

// Frequency unit used for the bound-state bracket: omega_c for PBG, omega0 otherwise.
inline double bound_state_unit(const SpectralModel& model, double omega0) {
    return model.kind() == ModelKind::Pbg ? model.as<PbgParams>().omega_c : omega0;
}

// Exact qubit-reservoir eigenstate below the band, if one exists. For Ohmic
// reservoirs existence should reduce to eta * Lambda > omega0, since
// Sigma(0^-) = -int J/omega = -eta Lambda; the code does not assume it.
inline std::optional<BoundState> bound_state_energy(const SpectralModel& model, double omega0,
                                                    const BoundStateOptions& opt = {}) {
    if (!(std::isfinite(omega0) && omega0 > 0.0)) throw InputError("bound_state_energy: omega0 must be > 0");
    const auto band = band_minimum(model);
    if (!band) return std::nullopt;

    const double unit = bound_state_unit(model, omega0);
    const double lo0 = *band - opt.bracket_depth * unit;
    const double hi0 = *band - opt.edge_gap * unit;
    auto h = [&](double e) { return e - omega0 - self_energy(model, e); };

    // A root exists iff h changes sign on the bracket; h is increasing there, so
    // the band-edge value decides.
    const bool exists = h(hi0) > 0.0;
    if (!exists) return std::nullopt;

    double lo = lo0, hi = hi0;
    if (!(h(lo) < 0.0)) throw NumericalError("bound_state_energy: lower bracket does not enclose the root");
    // Near a singular edge h is steep, so the width test alone can leave a large
    // residual; keep halving until both hold or the bracket stops shrinking.
    int iter = 0;
    double e = 0.5 * (lo + hi), he = h(e);
    while (hi - lo > opt.tolerance * unit || std::abs(he) > opt.max_residual * unit) {
        if (++iter > opt.max_iterations)
            throw NumericalError("bound_state_energy: bisection did not converge");
        (he > 0.0 ? hi : lo) = e;
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) break;
        e = mid;
        he = h(e);
    }
    const double residual = std::abs(he);
    if (residual > opt.max_residual * unit)
        throw NumericalError("bound_state_energy: fixed-point residual " + std::to_string(residual) + " too large");
    const double z = 1.0 / (1.0 + detail::resolvent_moment(model, e, 2));
    return BoundState{e, residual, z * z};
}

}  // namespace entdist
