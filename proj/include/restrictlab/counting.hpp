#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "restrictlab/common.hpp"
#include "restrictlab/curveconv.hpp"
#include "restrictlab/expsum.hpp"

namespace restrictlab::counting {

/// Sparse multiplicity map keyed by (sum n_i, sum n_i^3), the representation
/// counts of b-tuples from [-N, N]. Keys pack both signed 64-bit sums into
/// one 128-bit word.
struct RepCounter {
    std::int64_t b = 0;
    std::int64_t N = 0;

    struct KeyHash {
        std::size_t operator()(uint128 k) const noexcept {
            std::uint64_t lo = std::uint64_t(k), hi = std::uint64_t(k >> 64);
            std::uint64_t x = lo ^ (hi * 0x9e3779b97f4a7c15ull);
            x ^= x >> 33; x *= 0xff51afd7ed558ccdull; x ^= x >> 33;
            return std::size_t(x);
        }
    };
    std::unordered_map<uint128, std::uint64_t, KeyHash> entries;

    static uint128 encode(std::int64_t s, std::int64_t c) {
        return (uint128(std::uint64_t(s)) << 64) | uint128(std::uint64_t(c));
    }
    static std::pair<std::int64_t, std::int64_t> decode(uint128 key) {
        return {std::int64_t(std::uint64_t(key >> 64)), std::int64_t(std::uint64_t(key))};
    }

    void add(std::int64_t s, std::int64_t c, std::uint64_t m = 1) { entries[encode(s, c)] += m; }
    std::uint64_t count(std::int64_t s, std::int64_t c) const {
        auto it = entries.find(encode(s, c));
        return it == entries.end() ? 0 : it->second;
    }
    std::uint64_t total_mass() const {
        std::uint64_t total = 0;
        for (const auto& [k, m] : entries) total += m;
        return total;
    }
    uint128 sum_of_squares() const {
        uint128 total = 0;
        for (const auto& [k, m] : entries) total += uint128(m) * m;
        return total;
    }
};

/// Enumerates all b-tuples and bins them by (sum, cubic sum).
inline RepCounter build_rep_counter(std::int64_t N, std::int64_t b) {
    require(N >= 1 && b >= 1, "counting.domain", "need N >= 1, b >= 1");
    double tuples = std::pow(double(2 * N + 1), double(b));
    require(tuples <= 1e9, "counting.bruteforce_guard",
            "(2N+1)^b exceeds the 1e9 enumeration guard");
    RepCounter rc;
    rc.b = b;
    rc.N = N;
    std::vector<std::int64_t> tuple(std::size_t(b), -N);
    for (;;) {
        std::int64_t s = 0, c = 0;
        for (std::int64_t v : tuple) { s += v; c += v * v * v; }
        rc.add(s, c);
        std::int64_t i = b - 1;
        while (i >= 0 && tuple[std::size_t(i)] == N) { tuple[std::size_t(i)] = -N; --i; }
        if (i < 0) break;
        ++tuple[std::size_t(i)];
    }
    return rc;
}

enum class CountMethod { brute, mim };

struct CountResult {
    std::int64_t N = 0;
    std::int64_t b = 0;
    uint128 value = 0;
    CountMethod method = CountMethod::brute;
    double elapsed_seconds = 0.0;

    std::string value_string() const { return to_string_u128(value); }
    double value_double() const { return double(value); }
};

/// S(N;b) by full enumeration: sum of squared multiplicities of the b-fold
/// representation counts. Guarded to (2N+1)^b <= 1e9.
inline CountResult count_bruteforce(std::int64_t N, std::int64_t b) {
    auto t0 = std::chrono::steady_clock::now();
    RepCounter rc = build_rep_counter(N, b);
    double expected = std::pow(double(2 * N + 1), double(b));
    require(double(rc.total_mass()) == expected, "counting.mass_conservation",
            "brute-force counter mass != (2N+1)^b");
    CountResult res;
    res.N = N;
    res.b = b;
    res.value = rc.sum_of_squares();
    res.method = CountMethod::brute;
    res.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

struct CountConfig {
    std::size_t memory_cap_bytes = std::size_t(8) << 30;
    unsigned threads = 0;
};

/// S(N;b) by the split convolution: the floor(b/2)-fold and ceil(b/2)-fold
/// counters are built sparsely, then their convolution is streamed slice by
/// slice in the linear sum while squared multiplicities accumulate. The
/// full b-fold counter is never materialized; each slice of it is visited
/// once. Exact integer arithmetic throughout, 128-bit accumulator.
inline CountResult count_meet_in_middle(std::int64_t N, std::int64_t b,
                                        const CountConfig& cfg = {}) {
    require(N >= 1 && b >= 1, "counting.domain", "need N >= 1, b >= 1");
    require(b <= 6, "counting.mim_guard", "meet-in-the-middle supports b <= 6");
    auto t0 = std::chrono::steady_clock::now();

    const std::int64_t b_small = b / 2;        // outer (2 for b=5)
    const std::int64_t b_large = b - b_small;  // inner (3 for b=5)
    auto weights = curveconv::unit_weights(N);
    auto large = curveconv::power_table(N, weights, b_large, cfg.threads);

    const double mass_large = std::pow(double(2 * N + 1), double(b_large));
    std::uint64_t got = 0;
    for (const auto& sl : large.slices)
        for (const auto& [c, m] : sl) got += m;
    require(double(got) == mass_large, "counting.mass_conservation",
            "side counter mass != (2N+1)^" + std::to_string(b_large));

    const std::int64_t c_span = b * N * N * N;
    const std::size_t dense_bytes = std::size_t(2 * c_span + 1) * sizeof(std::uint64_t);
    const std::size_t side_bytes = large.entry_count() * 16;
    require(dense_bytes * thread_count(cfg.threads) + side_bytes <= cfg.memory_cap_bytes,
            "counting.memory_cap", "slice buffers would exceed the configured memory cap");

    uint128 total = 0;
    std::uint64_t mass_check = 0;
    if (b_small == 0) {
        for (const auto& sl : large.slices)
            for (const auto& [c, m] : sl) { total += uint128(m) * m; mass_check += m; }
    } else {
        auto small = curveconv::power_table(N, weights, b_small, cfg.threads);
        const std::size_t n_slices = std::size_t(2 * b * N + 1);
        std::vector<uint128> partial_sq(n_slices, 0);
        std::vector<std::uint64_t> partial_mass(n_slices, 0);
        const std::size_t pairs_hint = small.entry_count() * 8;
        const bool use_dense = dense_bytes <= (std::size_t(1) << 26) ||
                               pairs_hint * 8 > dense_bytes;
        if (use_dense) {
            curveconv::stream_dense_slices(small, large,
                [&](std::int64_t s, std::int64_t span, const std::vector<std::uint64_t>& vals) {
                    uint128 sq = 0;
                    std::uint64_t mass = 0;
                    (void)span;
                    for (std::uint64_t v : vals) if (v) { sq += uint128(v) * v; mass += v; }
                    partial_sq[std::size_t(s + b * N)] = sq;
                    partial_mass[std::size_t(s + b * N)] = mass;
                }, cfg.threads);
        } else {
            curveconv::stream_sparse_slices(small, large,
                [&](std::int64_t s, const std::vector<std::pair<std::int64_t, std::uint64_t>>& entries) {
                    uint128 sq = 0;
                    std::uint64_t mass = 0;
                    for (const auto& [c, v] : entries) { sq += uint128(v) * v; mass += v; }
                    partial_sq[std::size_t(s + b * N)] = sq;
                    partial_mass[std::size_t(s + b * N)] = mass;
                }, cfg.threads);
        }
        for (std::size_t i = 0; i < n_slices; ++i) { total += partial_sq[i]; mass_check += partial_mass[i]; }
    }
    require(double(mass_check) == std::pow(double(2 * N + 1), double(b)),
            "counting.mass_conservation", "b-fold mass != (2N+1)^b");

    CountResult res;
    res.N = N;
    res.b = b;
    res.value = total;
    res.method = CountMethod::mim;
    res.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

/// Minimum of Re K_N / (2N+1) over a grid on the box |x| <= 1/(60N),
/// |t| <= 1/(60N^3). Every phase there is within 1/30 of a full turn of zero,
/// so the normalized real part stays above cos(2pi/30) pointwise.
inline double omega_grid_min_ratio(std::int64_t N, std::size_t grid_points = 33) {
    require(N >= 1, "counting.domain", "need N >= 1");
    double min_ratio = 2.0;
    const double x_half = 1.0 / (60.0 * double(N));
    const double t_half = 1.0 / (60.0 * double(N) * double(N) * double(N));
    for (std::size_t i = 0; i < grid_points; ++i) {
        double x = -x_half + 2.0 * x_half * double(i) / double(grid_points - 1);
        for (std::size_t j = 0; j < grid_points; ++j) {
            double t = -t_half + 2.0 * t_half * double(j) / double(grid_points - 1);
            double re = 1.0;
            for (std::int64_t n = 1; n <= N; ++n) {
                double ph = two_pi * (t * double(n * n * n) + x * double(n));
                re += 2.0 * std::cos(ph);
            }
            min_ratio = std::min(min_ratio, re / double(2 * N + 1));
        }
    }
    return min_ratio;
}

struct LowerBoundReport {
    std::int64_t N = 0;
    std::int64_t b = 0;
    double diagonal_ratio = 0.0;   // S / (2N+1)^b, >= 1
    double box_ratio = 0.0;        // S / N^{2b-4}, only meaningful for b >= 3
    double omega_min_ratio = 0.0;  // min over Omega grid of Re K_N / (2N+1)
};

inline LowerBoundReport verify_lower_bound(const CountResult& count) {
    LowerBoundReport rep;
    rep.N = count.N;
    rep.b = count.b;
    const double S = count.value_double();
    rep.diagonal_ratio = S / std::pow(double(2 * count.N + 1), double(count.b));
    if (2 * count.b - 4 >= 1)
        rep.box_ratio = S / std::pow(double(count.N), double(2 * count.b - 4));
    rep.omega_min_ratio = omega_grid_min_ratio(count.N);
    require(rep.diagonal_ratio >= 1.0, "counting.diagonal_bound",
            "S(N;b) fell below the diagonal count");
    require(rep.omega_min_ratio > 0.0, "counting.omega_positive",
            "Omega-box kernel minimum should be positive");
    return rep;
}

/// Exact check of the two cubic rearrangement identities used by the
/// nonlinear estimates. With n = m + n_1 + ... + n_k and a = n_2 + ... + n_k:
///   n^3 - (m^3 + sum n_i^3) = 3(m+n_1)(m+a)(n_1+a) + a^3 - (n_2^3+...+n_k^3)
/// and for k = 4, writing (n_0,n_1,n_2,n_3,m') = (n_1,n_2,n_3,n_4,m):
///   (n_0+n_1+n_2+n_3+m')^3 - sum cubes =
///     3(n_0+n_1)(n_0+n_2+n_3+m')(n_1+n_2+n_3+m') + (n_2+n_3+m')^3 - n_2^3-n_3^3-m'^3.
inline bool verify_cubic_identity(std::int64_t m, const std::vector<std::int64_t>& ns) {
    require(ns.size() >= 2, "counting.identity_arity", "need k >= 2 values n_1..n_k");
    auto cube = [](int128 v) { return v * v * v; };
    int128 n = m;
    int128 sum_cubes = cube(m);
    for (std::int64_t v : ns) { n += v; sum_cubes += cube(v); }
    int128 a = 0;
    for (std::size_t i = 1; i < ns.size(); ++i) a += ns[i];
    int128 tail = 0;
    for (std::size_t i = 1; i < ns.size(); ++i) tail += cube(ns[i]);
    int128 lhs = cube(n) - sum_cubes;
    int128 rhs = 3 * (int128(m) + ns[0]) * (int128(m) + a) * (int128(ns[0]) + a) + cube(a) - tail;
    bool ok = lhs == rhs;
    if (ns.size() == 4) {
        int128 n0 = ns[0], n1 = ns[1], n2 = ns[2], n3 = ns[3], mm = m;
        int128 lhs2 = cube(n0 + n1 + n2 + n3 + mm) - cube(n0) - cube(n1) - cube(n2) - cube(n3) - cube(mm);
        int128 rhs2 = 3 * (n0 + n1) * (n0 + n2 + n3 + mm) * (n1 + n2 + n3 + mm) +
                      cube(n2 + n3 + mm) - cube(n2) - cube(n3) - cube(mm);
        ok = ok && lhs2 == rhs2;
    }
    return ok;
}

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
};

/// Least-squares slope of log(value) against log(N).
inline ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& n_and_value) {
    require(n_and_value.size() >= 2, "counting.fit_points", "need at least two points");
    for (const auto& [n, v] : n_and_value)
        require(n > 0 && v > 0, "counting.fit_domain", "fit needs positive N and values");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = double(n_and_value.size());
    for (const auto& [n, v] : n_and_value) {
        double x = std::log(n), y = std::log(v);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    double denom = m * sxx - sx * sx;
    require(std::abs(denom) > 1e-12, "counting.fit_degenerate", "all N coincide");
    ScalingFit fit;
    fit.slope = (m * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / m;
    for (const auto& [n, v] : n_and_value) {
        double r = std::abs(std::log(v) - (fit.intercept + fit.slope * std::log(n)));
        fit.max_residual = std::max(fit.max_residual, r);
    }
    return fit;
}

inline ScalingFit scaling_fit(const std::vector<CountResult>& results) {
    require(results.size() >= 4, "counting.fit_points", "need at least four counts");
    std::vector<std::pair<double, double>> pts;
    pts.reserve(results.size());
    for (const auto& r : results) pts.emplace_back(double(r.N), r.value_double());
    return scaling_fit(pts);
}

} // namespace restrictlab::counting
