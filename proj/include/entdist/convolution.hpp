// Online discrete convolution against a known kernel
//
// The marcher needs S_m = sum_{j<m} g[m-j] x[j] at every step while x is
// revealed one sample at a time. A direct sum costs O(N^2) overall. Here the
// lag axis is split into bands d in [L, 2L) for L = L0, 2 L0, 4 L0, ...; once an
// aligned block of L samples is complete its contribution to all future sums
// in that lag band is added with one FFT product. Lags below L0 are summed
// directly. Total cost O(N log^2 N).

#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace entdist {

using cplx = std::complex<double>;

namespace detail {

// FFTW's planner is not thread-safe; plan execution on distinct plans is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

class FftPair {
public:
    explicit FftPair(std::size_t n) : n_(n) {
        buf_ = fftw_alloc_complex(n);
        if (!buf_) throw std::bad_alloc();
        std::lock_guard lock(fftw_planner_mutex());
        fwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    FftPair(const FftPair&) = delete;
    FftPair& operator=(const FftPair&) = delete;
    ~FftPair() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }

    std::size_t size() const noexcept { return n_; }
    cplx* data() noexcept { return reinterpret_cast<cplx*>(buf_); }
    void forward() { fftw_execute(fwd_); }
    void backward() { fftw_execute(bwd_); }

private:
    std::size_t n_;
    fftw_complex* buf_ = nullptr;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

}  // namespace detail

class OnlineConvolution {
public:
    static constexpr std::size_t kDirectLags = 64;

    // kernel[d] for d = 0..n_max; sums are available for m = 1..n_max.
    explicit OnlineConvolution(std::span<const cplx> kernel)
        : g_(kernel.begin(), kernel.end()), acc_(kernel.size(), cplx(0.0)) {
        if (g_.empty()) throw std::invalid_argument("OnlineConvolution: empty kernel");
        x_.reserve(g_.size());
        const std::size_t n_max = g_.size() - 1;
        for (std::size_t L = kDirectLags; L <= n_max; L *= 2) {
            Level lv{L, std::make_unique<detail::FftPair>(2 * L), std::vector<cplx>(2 * L)};
            cplx* buf = lv.fft->data();
            for (std::size_t r = 0; r < 2 * L; ++r) {
                const std::size_t d = L + r;
                buf[r] = (r < L && d <= n_max) ? g_[d] : cplx(0.0);
            }
            lv.fft->forward();
            const double scale = 1.0 / static_cast<double>(2 * L);
            for (std::size_t r = 0; r < 2 * L; ++r) lv.kernel_hat[r] = buf[r] * scale;
            levels_.push_back(std::move(lv));
        }
    }

    std::size_t pushed() const noexcept { return x_.size(); }

    // Appends x[j], j = pushed(), and folds every block it completes into the
    // pending sums.
    void push(cplx value) {
        x_.push_back(value);
        const std::size_t done = x_.size();  // samples x[0..done)
        const std::size_t n_max = g_.size() - 1;
        if (done > n_max) return;
        for (auto& lv : levels_) {
            const std::size_t L = lv.block;
            if (done % L != 0) break;  // blocks are nested: larger L divide less often
            const std::size_t start = done - L;
            cplx* buf = lv.fft->data();
            for (std::size_t p = 0; p < L; ++p) buf[p] = x_[start + p];
            for (std::size_t p = L; p < 2 * L; ++p) buf[p] = cplx(0.0);
            lv.fft->forward();
            for (std::size_t r = 0; r < 2 * L; ++r) buf[r] *= lv.kernel_hat[r];
            lv.fft->backward();
            // Output q lands on m = start + L + q = done + q.
            for (std::size_t q = 0; q + 1 < 2 * L && done + q <= n_max; ++q) acc_[done + q] += buf[q];
        }
    }

    // S_m = sum_{j=0}^{m-1} kernel[m-j] x[j]; needs x[0..m) pushed.
    cplx sum(std::size_t m) const {
        if (m == 0 || m >= g_.size() || m > x_.size()) throw std::out_of_range("OnlineConvolution: sum index");
        cplx s = acc_[m];
        const std::size_t lags = std::min(kDirectLags - 1, m);
        for (std::size_t d = 1; d <= lags; ++d) s += g_[d] * x_[m - d];
        return s;
    }

private:
    struct Level {
        std::size_t block;
        std::unique_ptr<detail::FftPair> fft;
        std::vector<cplx> kernel_hat;  // FFT of kernel[L..2L), pre-scaled by 1/(2L)
    };

    std::vector<cplx> g_;
    std::vector<cplx> x_;
    std::vector<cplx> acc_;
    std::vector<Level> levels_;
};

}  // namespace entdist
