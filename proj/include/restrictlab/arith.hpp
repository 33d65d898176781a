#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "restrictlab/common.hpp"

namespace restrictlab::arith {

/// Primes up to 10^6 by sieve, built once; trial division against this table
/// factors any q <= 10^12, far beyond the 5*N^3 scales used here.
inline const std::vector<std::int64_t>& prime_table() {
    static const std::vector<std::int64_t> primes = [] {
        const std::size_t limit = 1'000'000;
        std::vector<bool> composite(limit + 1, false);
        std::vector<std::int64_t> out;
        for (std::size_t p = 2; p <= limit; ++p) {
            if (composite[p]) continue;
            out.push_back(std::int64_t(p));
            for (std::size_t m = p * p; m <= limit; m += p) composite[m] = true;
        }
        return out;
    }();
    return primes;
}

struct PrimePower {
    std::int64_t p;
    int e;
};

inline std::vector<PrimePower> factorize(std::int64_t n) {
    require(n >= 1, "arith.factorize_domain", "factorize requires n >= 1");
    std::vector<PrimePower> out;
    for (std::int64_t p : prime_table()) {
        if (p * p > n) break;
        if (n % p == 0) {
            int e = 0;
            while (n % p == 0) { n /= p; ++e; }
            out.push_back({p, e});
        }
    }
    if (n > 1) out.push_back({n, 1});
    return out;
}

inline std::int64_t euler_phi(std::int64_t q) {
    require(q >= 1, "arith.phi_domain", "euler_phi requires q >= 1");
    std::int64_t result = q;
    for (const auto& pp : factorize(q)) result -= result / pp.p;
    return result;
}

inline int mobius(std::int64_t q) {
    require(q >= 1, "arith.mobius_domain", "mobius requires q >= 1");
    int sign = 1;
    for (const auto& pp : factorize(q)) {
        if (pp.e > 1) return 0;
        sign = -sign;
    }
    return sign;
}

/// Ramanujan sum c_q(n) = sum over reduced residues a mod q of e^{2pi i an/q},
/// evaluated exactly as sum_{d | gcd(q,|n|)} d * mu(q/d). gcd(q,0)=q makes the
/// same formula yield c_q(0) = phi(q).
inline std::int64_t ramanujan_sum(std::int64_t q, std::int64_t n) {
    require(q >= 1, "arith.ramanujan_domain", "ramanujan_sum requires q >= 1");
    const std::int64_t g = std::gcd(q, n < 0 ? -n : n);
    std::int64_t total = 0;
    // enumerate divisors d of g
    std::vector<std::int64_t> divs{1};
    for (const auto& pp : factorize(g)) {
        std::size_t count = divs.size();
        std::int64_t pk = 1;
        for (int e = 1; e <= pp.e; ++e) {
            pk *= pp.p;
            for (std::size_t i = 0; i < count; ++i) divs.push_back(divs[i] * pk);
        }
    }
    for (std::int64_t d : divs) total += d * mobius(q / d);
    return total;
}

/// d(n, Q): number of divisors of |n| strictly below Q.
inline std::int64_t divisor_count_below(std::int64_t n, std::int64_t Q) {
    require(n != 0, "arith.divisor_domain", "divisor_count_below rejects n = 0");
    require(Q >= 1, "arith.divisor_domain", "divisor_count_below requires Q >= 1");
    std::int64_t a = n < 0 ? -n : n;
    std::vector<std::int64_t> divs{1};
    for (const auto& pp : factorize(a)) {
        std::size_t count = divs.size();
        std::int64_t pk = 1;
        for (int e = 1; e <= pp.e; ++e) {
            pk *= pp.p;
            for (std::size_t i = 0; i < count; ++i) divs.push_back(divs[i] * pk);
        }
    }
    std::int64_t c = 0;
    for (std::int64_t d : divs) if (d < Q) ++c;
    return c;
}

/// Reduced fraction a/q, q >= 1, gcd(a, q) = 1.
struct Rational {
    std::int64_t a = 0;
    std::int64_t q = 1;

    double value() const { return double(a) / double(q); }
    bool operator==(const Rational& o) const { return a == o.a && q == o.q; }
    bool operator<(const Rational& o) const {
        return int128(a) * o.q < int128(o.a) * q;
    }
};

inline Rational make_rational(std::int64_t a, std::int64_t q) {
    require(q >= 1, "arith.rational_denominator", "denominator must be positive");
    std::int64_t g = std::gcd(a < 0 ? -a : a, q);
    if (g == 0) g = 1;
    return {a / g, q / g};
}

/// Best rational approximation of t in [0,1) with denominator <= q_max, via
/// the continued-fraction convergents. Returns the last convergent whose
/// denominator stays within q_max; Dirichlet's theorem then guarantees
/// |t - a/q| <= 1/(q * q_max) <= 1/q^2.
inline Rational dirichlet_approx(double t, std::int64_t q_max) {
    require(t >= 0.0 && t < 1.0, "arith.dirichlet_domain", "t must lie in [0,1)");
    require(q_max >= 1, "arith.dirichlet_domain", "q_max must be >= 1");
    std::int64_t p_prev = 1, q_prev = 0;   // h_{-1}/k_{-1}
    std::int64_t p_cur = 0, q_cur = 1;     // h_0/k_0 for a0 = 0
    double frac = t;
    for (int iter = 0; iter < 64; ++iter) {
        if (frac < 1e-15) break;
        double inv = 1.0 / frac;
        double floor_inv = std::floor(inv);
        // guard against the 0.99999... representation of an exact integer
        if (inv - floor_inv > 1.0 - 1e-12) floor_inv += 1.0;
        if (floor_inv > 4e18) break;
        std::int64_t digit = std::int64_t(floor_inv);
        std::int64_t p_next = digit * p_cur + p_prev;
        std::int64_t q_next = digit * q_cur + q_prev;
        if (q_next > q_max) break;
        p_prev = p_cur; q_prev = q_cur;
        p_cur = p_next; q_cur = q_next;
        frac = inv - double(digit);
        if (frac < 0) frac = 0;
    }
    if (q_cur < 1) return {0, 1};
    return make_rational(p_cur, q_cur);
}

/// All reduced fractions a/q with Q <= q <= 5Q and 1 <= a <= q, strictly
/// increasing. This is the index set behind the Farey-bump cutoff; the count
/// always equals sum of phi(q) over the range.
struct FareySystem {
    std::int64_t Q = 1;
    std::vector<Rational> fractions;
};

inline FareySystem farey_system(std::int64_t Q, std::size_t max_fractions = std::size_t(1) << 27) {
    require(Q >= 1, "arith.farey_domain", "farey_system requires Q >= 1");
    std::size_t expected = 0;
    for (std::int64_t q = Q; q <= 5 * Q; ++q) expected += std::size_t(euler_phi(q));
    require(expected <= max_fractions, "arith.farey_memory",
            "farey system would hold " + std::to_string(expected) + " fractions, cap is " +
            std::to_string(max_fractions));
    FareySystem sys;
    sys.Q = Q;
    sys.fractions.reserve(expected);
    for (std::int64_t q = Q; q <= 5 * Q; ++q)
        for (std::int64_t a = 1; a <= q; ++a)
            if (std::gcd(a, q) == 1) sys.fractions.push_back({a, q});
    std::sort(sys.fractions.begin(), sys.fractions.end());
    require(sys.fractions.size() == expected, "arith.farey_complete",
            "farey enumeration lost fractions");
    return sys;
}

} // namespace restrictlab::arith
