#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace restrictlab {

using complexd = std::complex<double>;
using int128 = __int128;
using uint128 = unsigned __int128;

inline constexpr double two_pi = 6.283185307179586476925286766559;

/// Thrown when a module invariant or precondition fails. `invariant` names
/// the violated contract (e.g. "counting.mass_conservation") so that batch
/// drivers can report exactly what broke.
class invariant_violation : public std::runtime_error {
public:
    invariant_violation(std::string invariant, const std::string& detail)
        : std::runtime_error(invariant + ": " + detail), invariant_(std::move(invariant)) {}
    const std::string& invariant() const noexcept { return invariant_; }
private:
    std::string invariant_;
};

inline void require(bool ok, const char* invariant, const std::string& detail) {
    if (!ok) throw invariant_violation(invariant, detail);
}

inline std::string to_string_u128(uint128 v) {
    if (v == 0) return "0";
    char buf[40];
    int pos = 40;
    while (v > 0) { buf[--pos] = char('0' + int(v % 10)); v /= 10; }
    return std::string(buf + pos, buf + 40);
}

inline std::string to_string_i128(int128 v) {
    if (v < 0) return "-" + to_string_u128(uint128(-v));
    return to_string_u128(uint128(v));
}

/// Exact fractional part of p*q for exactly representable p (e.g. an integer
/// cast to double) times arbitrary double q. The fma recovers the low part of
/// the 106-bit product, so the result is the true value of p*q mod 1 up to one
/// rounding. Keeps cubic phases t*n^3 accurate when n^3*t is far above 2^32.
inline double mul_mod1(double p, double q) {
    double hi = p * q;
    double lo = std::fma(p, q, -hi);
    double frac = (hi - std::nearbyint(hi)) + lo;
    frac -= std::nearbyint(frac);
    return frac;
}

inline complexd unit_phase(double frac_turns) {
    double a = two_pi * frac_turns;
    return {std::cos(a), std::sin(a)};
}

/// Pairwise (cascade) summation; deterministic and O(eps log n) error.
template <typename T>
T pairwise_sum(const T* data, std::size_t n) {
    if (n == 0) return T{};
    if (n <= 8) {
        T s = data[0];
        for (std::size_t i = 1; i < n; ++i) s += data[i];
        return s;
    }
    std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

template <typename T>
T pairwise_sum(const std::vector<T>& v) {
    return pairwise_sum(v.data(), v.size());
}

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

} // namespace restrictlab
