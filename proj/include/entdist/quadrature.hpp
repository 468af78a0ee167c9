// Gauss-Legendre panels and adaptive Gauss-Kronrod integration
//
// Both integrators are templated on the value type so the same code handles
// real spectral integrals and complex oscillatory kernels.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <queue>
#include <span>
#include <vector>

namespace entdist::quad {

template <typename T>
inline double magnitude(const T& v) {
    return std::abs(v);
}

// N-point Gauss-Legendre rule on [-1, 1]; nodes by Newton iteration on P_N.
template <std::size_t N>
struct GaussLegendreRule {
    std::array<double, N> nodes{};
    std::array<double, N> weights{};

    GaussLegendreRule() {
        for (std::size_t i = 0; i < (N + 1) / 2; ++i) {
            double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                                (static_cast<double>(N) + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = x;
                for (std::size_t k = 2; k <= N; ++k) {
                    const double kk = static_cast<double>(k);
                    const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                    p0 = p1;
                    p1 = p2;
                }
                dp = static_cast<double>(N) * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[N - 1 - i] = x;
            weights[i] = w;
            weights[N - 1 - i] = w;
        }
    }
};

template <std::size_t N>
inline const GaussLegendreRule<N>& gauss_legendre() {
    static const GaussLegendreRule<N> rule;
    return rule;
}

// Integrates f over the consecutive panels [b[i], b[i+1]] with an N-point rule each.
template <std::size_t N = 16, typename F>
auto integrate_panels(F&& f, std::span<const double> breakpoints) {
    using R = decltype(f(0.0));
    const auto& rule = gauss_legendre<N>();
    R total{};
    for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
        const double a = breakpoints[p], b = breakpoints[p + 1];
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        R panel{};
        for (std::size_t i = 0; i < N; ++i) panel += rule.weights[i] * f(mid + half * rule.nodes[i]);
        total += half * panel;
    }
    return total;
}

template <typename R>
struct QuadResult {
    R value{};
    double error = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

namespace detail {

// QUADPACK qk15 abscissae and weights.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename R>
struct Segment {
    double a, b;
    R value;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <typename R, typename F>
Segment<R> gk15(F& f, double a, double b) {
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    const R fc = f(mid);
    R kronrod = kWgk[7] * fc;
    R gauss = kWg[3] * fc;
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const R sum = f(mid - dx) + f(mid + dx);
        kronrod += kWgk[j] * sum;
        if (j % 2 == 1) gauss += kWg[j / 2] * sum;
    }
    kronrod *= half;
    gauss *= half;
    return {a, b, kronrod, magnitude(kronrod - gauss)};
}

}  // namespace detail

// Globally adaptive G7-K15 integration (bisect the worst segment until the
// summed error meets max(abs_tol, rel_tol*|I|)). Optional interior breakpoints
// seed the initial partition.
template <typename F>
auto integrate_adaptive(F&& f, double a, double b, double abs_tol, double rel_tol,
                        std::span<const double> interior = {}, std::size_t max_segments = 2000) {
    using R = decltype(f(0.0));
    std::vector<double> cuts{a};
    for (double x : interior)
        if (x > a && x < b) cuts.push_back(x);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());

    std::priority_queue<detail::Segment<R>> heap;
    R total{};
    double error = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        auto seg = detail::gk15<R>(f, cuts[i], cuts[i + 1]);
        total += seg.value;
        error += seg.error;
        heap.push(seg);
    }

    QuadResult<R> out;
    std::size_t segments = heap.size();
    while (error > std::max(abs_tol, rel_tol * magnitude(total)) && segments < max_segments) {
        auto worst = heap.top();
        heap.pop();
        const double m = 0.5 * (worst.a + worst.b);
        if (!(m > worst.a && m < worst.b)) {
            heap.push(worst);
            break;
        }
        auto left = detail::gk15<R>(f, worst.a, m);
        auto right = detail::gk15<R>(f, m, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++segments;
    }
    // Recompute from the segments to drop accumulated cancellation in the running sums.
    total = R{};
    error = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    out.value = total;
    out.error = error;
    out.evaluations = 15 * (segments);
    out.converged = error <= std::max(abs_tol, rel_tol * magnitude(total));
    return out;
}

}  // namespace entdist::quad
