// Two-pair state, bipartite concurrences and sudden death/birth events
//
// Each pair is a qubit q_i and its reservoir collapsed onto the collective
// one-photon mode, an effective qubit r_i with states |0~> (vacuum) and |1~>.
// Starting from alpha|--> + beta|++> the pair state is
//   |phi(t)> = b |+ 0~> + b~ |- 1~>,   b~ = sqrt(1 - |b|^2) >= 0,
// and the four-body state is alpha|-0~>|-0~> + beta |phi>|phi>.
//
// Basis: sites ordered (q1, r1, q2, r2), flat index 8 q1 + 4 r1 + 2 q2 + r2.
// Local index 0 is the excited state (|+> or |1~>), 1 the ground state, so the
// two-qubit ordering is (++, +-, -+, --).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "entdist/dynamics.hpp"
#include "entdist/errors.hpp"

namespace entdist {

using Matrix4c = Eigen::Matrix4cd;
using State16 = Eigen::Matrix<cplx, 16, 1>;

struct InitialState {
    cplx alpha{0.0};
    cplx beta{1.0};

    InitialState() = default;
    InitialState(cplx a, cplx b) : alpha(a), beta(b) {
        if (!(std::isfinite(std::abs(a)) && std::isfinite(std::abs(b))))
            throw InputError("InitialState: amplitudes must be finite");
        if (std::abs(std::norm(a) + std::norm(b) - 1.0) > 1e-12)
            throw InputError("InitialState: |alpha|^2 + |beta|^2 must equal 1");
    }
    // Real alpha in (0, 1) with beta = sqrt(1 - alpha^2).
    static InitialState from_real_alpha(double a) {
        if (!(a >= 0.0 && a <= 1.0)) throw InputError("InitialState: alpha must lie in [0, 1]");
        return {cplx(a), cplx(std::sqrt(1.0 - a * a))};
    }

    double abs_alpha() const { return std::abs(alpha); }
    double abs_beta() const { return std::abs(beta); }
    // |alpha| / |beta|, the threshold in the ESD/ESB inequality. Infinite for beta = 0.
    double ratio() const {
        return abs_beta() > 0.0 ? abs_alpha() / abs_beta() : std::numeric_limits<double>::infinity();
    }
    // The conserved (q1 r1):(q2 r2) concurrence.
    double global_concurrence() const { return 2.0 * abs_alpha() * abs_beta(); }
};

enum class Partition { Q1Q2, R1R2, Q1R1, Q2R2, Q1R2, Q2R1 };

inline constexpr std::array<Partition, 6> kAllPartitions = {Partition::Q1Q2, Partition::R1R2, Partition::Q1R1,
                                                            Partition::Q2R2, Partition::Q1R2, Partition::Q2R1};

inline std::string partition_name(Partition p) {
    switch (p) {
        case Partition::Q1Q2: return "q1q2";
        case Partition::R1R2: return "r1r2";
        case Partition::Q1R1: return "q1r1";
        case Partition::Q2R2: return "q2r2";
        case Partition::Q1R2: return "q1r2";
        case Partition::Q2R1: return "q2r1";
    }
    return "?";
}

// Sites (q1, r1, q2, r2) = (0, 1, 2, 3); the first site is the matrix's leading factor.
inline std::array<int, 2> partition_sites(Partition p) {
    switch (p) {
        case Partition::Q1Q2: return {0, 2};
        case Partition::R1R2: return {1, 3};
        case Partition::Q1R1: return {0, 1};
        case Partition::Q2R2: return {2, 3};
        case Partition::Q1R2: return {0, 3};
        case Partition::Q2R1: return {2, 1};
    }
    return {0, 0};
}

struct PartitionQSet {
    double q_q1q2 = 0.0;
    double q_r1r2 = 0.0;
    double q_q1r1 = 0.0;
    double q_q1r2 = 0.0;
    std::optional<std::size_t> index;  // grid point, when taken from a trajectory
};

struct ConcurrenceSet {
    double c_q1q2 = 0.0;
    double c_r1r2 = 0.0;
    double c_q1r1 = 0.0;
    double c_q1r2 = 0.0;

    static ConcurrenceSet from(const PartitionQSet& q) {
        return {std::max(0.0, q.q_q1q2), std::max(0.0, q.q_r1r2), std::max(0.0, q.q_q1r1), std::max(0.0, q.q_q1r2)};
    }
    // Symmetric partners q2r2 and q2r1 equal q1r1 and q1r2.
    double of(Partition p) const {
        switch (p) {
            case Partition::Q1Q2: return c_q1q2;
            case Partition::R1R2: return c_r1r2;
            case Partition::Q1R1:
            case Partition::Q2R2: return c_q1r1;
            case Partition::Q1R2:
            case Partition::Q2R1: return c_q1r2;
        }
        return 0.0;
    }
};

namespace detail {

inline void require_amplitude(cplx b) {
    if (!std::isfinite(std::abs(b))) throw InputError("amplitude b must be finite");
    if (std::norm(b) > 1.0 + 1e-9) throw InputError("amplitude |b| exceeds 1");
}

inline double complement(cplx b) { return std::sqrt(std::max(0.0, 1.0 - std::norm(b))); }

}  // namespace detail

// rho_{q1 q2}: an X-state with p = |beta b|^2 b~^2 on the middle diagonal,
// |beta|^2 |b|^4 and x = 1 - |beta|^2 |b|^4 - 2p on the corners, and the single
// coherence beta b^2 alpha* between |++> and |-->.
inline Matrix4c qq_density_matrix(const InitialState& s, cplx b) {
    detail::require_amplitude(b);
    const double pop = std::min(1.0, std::norm(b));
    const double bt2 = 1.0 - pop;
    const double beta2 = std::norm(s.beta);
    const double p = beta2 * pop * bt2;
    Matrix4c rho = Matrix4c::Zero();
    rho(0, 0) = beta2 * pop * pop;
    rho(1, 1) = p;
    rho(2, 2) = p;
    rho(3, 3) = 1.0 - beta2 * pop * pop - 2.0 * p;
    rho(0, 3) = s.beta * b * b * std::conj(s.alpha);
    rho(3, 0) = std::conj(rho(0, 3));
    return rho;
}

inline State16 effective_global_state(const InitialState& s, cplx b) {
    detail::require_amplitude(b);
    const double bt = detail::complement(b);
    // Single pair over (q, r) with index 2 q + r: |+0~> = 1, |-1~> = 2, |-0~> = 3.
    Eigen::Vector4cd phi = Eigen::Vector4cd::Zero();
    phi(1) = b;
    phi(2) = bt;
    Eigen::Vector4cd ground = Eigen::Vector4cd::Zero();
    ground(3) = 1.0;

    State16 psi;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) psi(4 * i + j) = s.alpha * ground(i) * ground(j) + s.beta * phi(i) * phi(j);
    return psi;
}

// Reduced 4x4 matrix on two of the four sites, leading factor = sites[0].
inline Matrix4c reduced_density(const State16& psi, std::array<int, 2> sites) {
    const int a = sites[0], b = sites[1];
    if (a == b || a < 0 || a > 3 || b < 0 || b > 3) throw InputError("reduced_density: need two distinct sites");
    std::array<int, 2> traced{};
    for (int k = 0, n = 0; k < 4; ++k)
        if (k != a && k != b) traced[n++] = k;
    auto bit = [](int index, int site) { return (index >> (3 - site)) & 1; };

    Matrix4c rho = Matrix4c::Zero();
    for (int i = 0; i < 16; ++i) {
        for (int j = 0; j < 16; ++j) {
            if (bit(i, traced[0]) != bit(j, traced[0]) || bit(i, traced[1]) != bit(j, traced[1])) continue;
            const int r = 2 * bit(i, a) + bit(i, b);
            const int c = 2 * bit(j, a) + bit(j, b);
            rho(r, c) += psi(i) * std::conj(psi(j));
        }
    }
    return rho;
}

inline Matrix4c partition_density(const InitialState& s, cplx b, Partition p) {
    return reduced_density(effective_global_state(s, b), partition_sites(p));
}

// Closed forms with p = |beta b|^2 b~^2:
//   Q_q1q2 = 2|alpha beta| |b|^2 - 2p      Q_r1r2 = 2|alpha beta| b~^2 - 2p
//   Q_q1r1 = 2|beta|^2 |b| b~              Q_q1r2 = 2|alpha beta| |b| b~ - 2p
inline PartitionQSet partition_Q(const InitialState& s, cplx b) {
    detail::require_amplitude(b);
    const double pop = std::min(1.0, std::norm(b));
    const double mag = std::sqrt(pop);
    const double bt = std::sqrt(1.0 - pop);
    const double ab = s.abs_alpha() * s.abs_beta();
    const double beta2 = std::norm(s.beta);
    const double p = beta2 * pop * bt * bt;
    PartitionQSet q;
    q.q_q1q2 = 2.0 * ab * pop - 2.0 * p;
    q.q_r1r2 = 2.0 * ab * bt * bt - 2.0 * p;
    q.q_q1r1 = 2.0 * beta2 * mag * bt;
    q.q_q1r2 = 2.0 * ab * mag * bt - 2.0 * p;
    return q;
}

// Q_q1q2 + Q_r1r2 + 2|alpha/beta| Q_q1r1 - 2 Q_q1r2 - 2|alpha beta|; vanishes identically.
inline double identity_residual(const InitialState& s, const PartitionQSet& q) {
    if (s.abs_beta() == 0.0) throw InputError("identity_residual: the |alpha/beta| coefficient is undefined for beta = 0");
    return q.q_q1q2 + q.q_r1r2 + 2.0 * s.ratio() * q.q_q1r1 - 2.0 * q.q_q1r2 - s.global_concurrence();
}

// Spin-flip concurrence. With rho = V V^dagger (V = U sqrt(D)) the square roots of
// the eigenvalues of rho (sy x sy) rho* (sy x sy) are the singular values of
// V^T (sy x sy) V, which avoids square roots of a non-Hermitian product.
inline double wootters_concurrence(const Matrix4c& rho, double psd_tol = 1e-9) {
    if (!rho.allFinite()) throw InputError("wootters_concurrence: non-finite matrix");
    const Matrix4c herm = 0.5 * (rho + rho.adjoint());
    if ((rho - herm).norm() > 1e-9) throw InputError("wootters_concurrence: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix4c> es(herm);
    const Eigen::Vector4d ev = es.eigenvalues();
    if (ev.minCoeff() < -psd_tol) throw InputError("wootters_concurrence: matrix is not positive semidefinite");

    Matrix4c v = es.eigenvectors();
    for (int k = 0; k < 4; ++k) v.col(k) *= std::sqrt(std::max(0.0, ev(k)));
    // sy x sy in the (++, +-, -+, --) ordering: anti-diagonal (-1, 1, 1, -1).
    Matrix4c yy = Matrix4c::Zero();
    yy(0, 3) = -1.0;
    yy(1, 2) = 1.0;
    yy(2, 1) = 1.0;
    yy(3, 0) = -1.0;
    const Matrix4c tau = v.transpose() * yy * v;
    Eigen::JacobiSVD<Matrix4c> svd(tau);
    const Eigen::Vector4d l = svd.singularValues();  // descending
    return std::clamp(l(0) - l(1) - l(2) - l(3), 0.0, 1.0);
}

// sqrt(2 (1 - tr rho_A^2)) across (q1 r1):(q2 r2); for this pure state it is 2|alpha beta|.
inline double global_split_concurrence(const State16& psi) {
    Matrix4c rho = reduced_density(psi, {0, 1});
    const double purity = (rho * rho).trace().real();
    return std::sqrt(std::max(0.0, 2.0 * (1.0 - purity)));
}

struct DensityCheck {
    double hermiticity = 0.0;   // ||rho - rho^dagger||
    double trace_error = 0.0;   // |tr rho - 1|
    double min_eigenvalue = 0.0;

    bool ok(double tol = 1e-9) const {
        return hermiticity <= tol && trace_error <= tol && min_eigenvalue >= -tol;
    }
};

inline DensityCheck check_density(const Matrix4c& rho) {
    DensityCheck c;
    c.hermiticity = (rho - rho.adjoint()).norm();
    c.trace_error = std::abs(rho.trace() - cplx(1.0));
    const Matrix4c herm = 0.5 * (rho + rho.adjoint());
    c.min_eigenvalue = Eigen::SelfAdjointEigenSolver<Matrix4c>(herm, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    return c;
}

// ---------------------------------------------------------------------------
// Time series and events
// ---------------------------------------------------------------------------

struct ConcurrenceSeries {
    std::vector<double> time;
    std::vector<ConcurrenceSet> concurrence;
    std::vector<double> identity_residual;

    double max_abs_residual() const {
        double m = 0.0;
        for (double r : identity_residual) m = std::max(m, std::abs(r));
        return m;
    }
};

inline ConcurrenceSeries concurrence_series(const InitialState& s, const AmplitudeTrajectory& traj) {
    ConcurrenceSeries out;
    out.time.resize(traj.size());
    out.concurrence.resize(traj.size());
    out.identity_residual.resize(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        auto q = partition_Q(s, traj.b[i]);
        q.index = i;
        out.time[i] = traj.grid.time(i);
        out.concurrence[i] = ConcurrenceSet::from(q);
        out.identity_residual[i] = s.abs_beta() > 0.0 ? identity_residual(s, q) : 0.0;
    }
    return out;
}

struct ZeroInterval {
    double t_start = 0.0;
    double t_end = 0.0;       // last zero point; equals the grid end if open
    std::size_t i_start = 0;
    std::size_t i_end = 0;
    bool revived = false;     // the channel is positive again after this interval
};

struct EventThresholds {
    double zero = 1e-9;            // C below this counts as zero
    std::size_t min_points = 3;    // shorter zero runs are discretisation chatter
    double plateau_fraction = 0.1; // final share of the grid used for plateaus
    double plateau_floor = 1e-3;   // plateau concurrence counted as nonzero above this
    double trapping_floor = 1e-3;  // |b(inf)|^2 counted as trapped above this ...
    double max_decay = 0.1;        // ... unless it still falls by this fraction across the window
};

struct EventReport {
    double ratio = 0.0;                       // |alpha|/|beta|
    std::vector<ZeroInterval> esd_intervals;  // q1q2 zero runs after being positive
    std::vector<double> esb_onsets;           // r1r2 turns positive after a zero run
    bool esd = false;
    bool esb = false;
    bool esd_revival = false;
    bool esb_revival = false;                 // r1r2 dies after an ESB and is born again
    bool q1q2_always_zero = false;
    bool r1r2_always_zero = false;

    ConcurrenceSet plateau;                   // mean over the plateau window
    Plateau population;                       // |b|^2 over the plateau window
    bool trapped = false;
    std::string regime;

    // Direct evaluation of the inequality min|b|^2 < r < 1 - min|b|^2.
    double min_population = 1.0;
    bool esd_predicted = false;               // min|b|^2 < 1 - r
    bool esb_predicted = false;               // min|b|^2 < r < 1
    bool inequality_holds = false;
    bool consistent = false;                  // detected flags match the predictions
};

namespace detail {

// Runs of consecutive zero points of length >= min_points: [first, last] index pairs.
// A run only counts when Q itself drops below -zero somewhere inside it, so a
// concurrence that merely decays towards zero (Q > 0 throughout) is not a death.
inline std::vector<std::pair<std::size_t, std::size_t>> zero_runs(const std::vector<double>& q, double zero,
                                                                  std::size_t min_points) {
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    std::size_t i = 0;
    while (i < q.size()) {
        if (q[i] >= zero) {
            ++i;
            continue;
        }
        std::size_t j = i;
        double lowest = q[i];
        while (j + 1 < q.size() && q[j + 1] < zero) lowest = std::min(lowest, q[++j]);
        if (j - i + 1 >= min_points && lowest < -zero) runs.emplace_back(i, j);
        i = j + 1;
    }
    return runs;
}

}  // namespace detail

// Regime labels:
//   stable-distribution  trapped, all four distinct partitions keep C above the floor
//   full-transfer        not trapped, r1r2 keeps C above the floor
//   esd-and-esb / esd-no-esb / esb-no-esd  otherwise, from the detected events
// With no events and neither condition met the label falls back on trapping.
inline EventReport detect_events(const InitialState& s, const AmplitudeTrajectory& traj,
                                 const EventThresholds& th = {}) {
    const auto series = concurrence_series(s, traj);
    const std::size_t n = traj.size();
    std::vector<double> cqq(n), crr(n), qqq(n), qrr(n);
    for (std::size_t i = 0; i < n; ++i) {
        cqq[i] = series.concurrence[i].c_q1q2;
        crr[i] = series.concurrence[i].c_r1r2;
        const auto q = partition_Q(s, traj.b[i]);
        qqq[i] = q.q_q1q2;
        qrr[i] = q.q_r1r2;
    }

    EventReport rep;
    rep.ratio = s.ratio();
    rep.q1q2_always_zero = std::all_of(cqq.begin(), cqq.end(), [&](double c) { return c < th.zero; });
    rep.r1r2_always_zero = std::all_of(crr.begin(), crr.end(), [&](double c) { return c < th.zero; });

    if (!rep.q1q2_always_zero) {
        const auto first_positive = static_cast<std::size_t>(
            std::find_if(cqq.begin(), cqq.end(), [&](double c) { return c >= th.zero; }) - cqq.begin());
        for (const auto& [a, b] : detail::zero_runs(qqq, th.zero, th.min_points)) {
            if (a <= first_positive) continue;
            ZeroInterval iv{traj.grid.time(a), traj.grid.time(b), a, b, b + 1 < n};
            rep.esd_intervals.push_back(iv);
        }
    }
    rep.esd = !rep.esd_intervals.empty();
    rep.esd_revival = std::any_of(rep.esd_intervals.begin(), rep.esd_intervals.end(),
                                  [](const ZeroInterval& iv) { return iv.revived; });

    if (!rep.r1r2_always_zero) {
        for (const auto& [a, b] : detail::zero_runs(qrr, th.zero, th.min_points))
            if (b + 1 < n) rep.esb_onsets.push_back(traj.grid.time(b + 1));
    }
    rep.esb = !rep.esb_onsets.empty();
    rep.esb_revival = rep.esb_onsets.size() >= 2;

    // Plateaus
    rep.population = plateau_population(traj, th.plateau_fraction);
    const std::size_t first = rep.population.first_index;
    const double count = static_cast<double>(n - first);
    for (std::size_t i = first; i < n; ++i) {
        const auto& c = series.concurrence[i];
        rep.plateau.c_q1q2 += c.c_q1q2 / count;
        rep.plateau.c_r1r2 += c.c_r1r2 / count;
        rep.plateau.c_q1r1 += c.c_q1r1 / count;
        rep.plateau.c_q1r2 += c.c_q1r2 / count;
    }
    // Trapped: a population plateau that is nonzero and no longer decaying.
    rep.trapped = rep.population.mean > th.trapping_floor && rep.population.drift > -th.max_decay;

    const bool all_four = rep.plateau.c_q1q2 > th.plateau_floor && rep.plateau.c_r1r2 > th.plateau_floor &&
                          rep.plateau.c_q1r1 > th.plateau_floor && rep.plateau.c_q1r2 > th.plateau_floor;
    if (rep.trapped && all_four)
        rep.regime = "stable-distribution";
    else if (!rep.trapped && rep.plateau.c_r1r2 > th.plateau_floor)
        rep.regime = "full-transfer";
    else if (rep.esd && rep.esb)
        rep.regime = "esd-and-esb";
    else if (rep.esd)
        rep.regime = "esd-no-esb";
    else if (rep.esb)
        rep.regime = "esb-no-esd";
    else
        rep.regime = rep.trapped ? "stable-distribution" : "full-transfer";

    for (std::size_t i = 0; i < n; ++i) rep.min_population = std::min(rep.min_population, traj.population(i));
    const double r = rep.ratio;
    // r within the zero threshold of 1 counts as 1: q1q2 then never dies and
    // r1r2 is born at t = 0+, so neither event is sudden.
    const bool r_below_one = r < 1.0 - th.zero;
    rep.esd_predicted = r_below_one && rep.min_population < 1.0 - r;
    rep.esb_predicted = r_below_one && rep.min_population < r;
    rep.inequality_holds = rep.esd_predicted && rep.esb_predicted;  // min|b|^2 < r < 1 - min|b|^2
    rep.consistent = rep.esd == rep.esd_predicted && rep.esb == rep.esb_predicted &&
                     rep.inequality_holds == (rep.esd && rep.esb);
    return rep;
}

}  // namespace entdist
