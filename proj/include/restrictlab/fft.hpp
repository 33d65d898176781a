#pragma once

#include <complex>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "restrictlab/common.hpp"

namespace restrictlab {

/// Iterative radix-2 complex FFT. All grid sizes in this project are chosen
/// as powers of two, so no mixed-radix machinery is needed. forward uses the
/// e^{-2pi i jk/n} kernel; inverse uses e^{+2pi i jk/n} and is unnormalized
/// (divide by n to invert).
class Fft {
public:
    explicit Fft(std::size_t n) : n_(n) {
        require(is_pow2(n), "fft.size_pow2", "FFT size must be a power of two, got " + std::to_string(n));
        twiddle_.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k)
            twiddle_[k] = unit_phase(-double(k) / double(n));
        bitrev_.resize(n);
        std::size_t logn = 0;
        while ((std::size_t(1) << logn) < n) ++logn;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < logn; ++b)
                if (i & (std::size_t(1) << b)) r |= std::size_t(1) << (logn - 1 - b);
            bitrev_[i] = r;
        }
    }

    std::size_t size() const { return n_; }

    void forward(complexd* a) const { run(a, false); }
    void inverse(complexd* a) const { run(a, true); }

private:
    void run(complexd* a, bool inv) const {
        const std::size_t n = n_;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = bitrev_[i];
            if (i < j) std::swap(a[i], a[j]);
        }
        for (std::size_t len = 2; len <= n; len <<= 1) {
            const std::size_t half = len / 2, step = n / len;
            for (std::size_t i = 0; i < n; i += len) {
                for (std::size_t k = 0; k < half; ++k) {
                    complexd w = twiddle_[k * step];
                    if (inv) w = std::conj(w);
                    complexd u = a[i + k];
                    complexd v = a[i + k + half] * w;
                    a[i + k] = u + v;
                    a[i + k + half] = u - v;
                }
            }
        }
    }

    std::size_t n_;
    std::vector<complexd> twiddle_;
    std::vector<std::size_t> bitrev_;
};

/// Shared plan cache; plans are immutable after construction.
inline const Fft& fft_plan(std::size_t n) {
    static std::mutex mu;
    static std::unordered_map<std::size_t, std::unique_ptr<Fft>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end())
        it = cache.emplace(n, std::make_unique<Fft>(n)).first;
    return *it->second;
}

inline void fft_forward(std::vector<complexd>& a) { fft_plan(a.size()).forward(a.data()); }
inline void fft_inverse(std::vector<complexd>& a) { fft_plan(a.size()).inverse(a.data()); }

/// Synthesizes a trigonometric polynomial sum_{|n|<=N} coeff[n+N] e^{2pi i n j/M}
/// on the M-point grid (M a power of two, M >= 2N+1). Wraps negative
/// frequencies and runs one unnormalized inverse FFT.
inline std::vector<complexd> synthesize_modes(const std::vector<complexd>& coeff, std::size_t M) {
    const std::size_t two_n1 = coeff.size();
    require(two_n1 % 2 == 1, "fft.mode_count", "coefficient vector must have odd length 2N+1");
    const std::size_t N = (two_n1 - 1) / 2;
    require(M >= two_n1 && is_pow2(M), "fft.synthesis_size",
            "grid size must be a power of two >= 2N+1");
    std::vector<complexd> slot(M, complexd{0.0, 0.0});
    for (std::size_t i = 0; i < two_n1; ++i) {
        long n = long(i) - long(N);
        std::size_t idx = n >= 0 ? std::size_t(n) : M - std::size_t(-n);
        slot[idx] = coeff[i];
    }
    fft_inverse(slot);
    return slot;
}

} // namespace restrictlab
