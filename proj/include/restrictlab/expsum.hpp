#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "restrictlab/arith.hpp"
#include "restrictlab/common.hpp"
#include "restrictlab/fft.hpp"
#include "restrictlab/parallel.hpp"

namespace restrictlab::expsum {

/// Coefficients a_n for n = -N..N of F(x,t) = sum a_n e^{2pi i(nx + n^3 t)}.
struct CoeffSequence {
    std::int64_t N = 0;
    std::vector<complexd> coeffs; // index n + N

    complexd& at(std::int64_t n) { return coeffs[std::size_t(n + N)]; }
    const complexd& at(std::int64_t n) const { return coeffs[std::size_t(n + N)]; }

    double l2_norm() const {
        std::vector<double> sq(coeffs.size());
        for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = std::norm(coeffs[i]);
        return std::sqrt(pairwise_sum(sq));
    }

    void normalize() {
        double nrm = l2_norm();
        require(nrm > 0, "expsum.normalize_zero", "cannot normalize the zero sequence");
        for (auto& c : coeffs) c /= nrm;
    }
};

inline CoeffSequence make_sequence(std::int64_t N) {
    require(N >= 0, "expsum.sequence_degree", "N must be nonnegative");
    CoeffSequence s;
    s.N = N;
    s.coeffs.assign(std::size_t(2 * N + 1), complexd{0.0, 0.0});
    return s;
}

inline CoeffSequence uniform_unit_sequence(std::int64_t N) {
    CoeffSequence s = make_sequence(N);
    double v = 1.0 / std::sqrt(double(2 * N + 1));
    for (auto& c : s.coeffs) c = complexd{v, 0.0};
    return s;
}

inline CoeffSequence random_unit_sequence(std::int64_t N, std::uint64_t seed) {
    CoeffSequence s = make_sequence(N);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& c : s.coeffs) c = complexd{gauss(rng), gauss(rng)};
    s.normalize();
    return s;
}

/// Phase t n^3 + b n^2 + c n of the cubic Weyl sum.
struct WeylPhase {
    double t = 0.0;
    double b = 0.0;
    double c = 0.0;
};

/// Fractional part of the full cubic phase, each monomial reduced exactly
/// (n, n^2, n^3 are integers held exactly in doubles for |n| <= 2*10^5).
inline double cubic_phase_mod1(std::int64_t n, const WeylPhase& ph) {
    require(std::llabs(n) <= 200'000, "expsum.phase_range",
            "phase reduction is exact only for |n| <= 2*10^5");
    double n1 = double(n);
    double n2 = double(n * n);
    double n3 = double(n * n * n);
    double f = mul_mod1(n3, ph.t) + mul_mod1(n2, ph.b) + mul_mod1(n1, ph.c);
    f -= std::nearbyint(f);
    return f;
}

/// S(N) = sum_{n=1}^N e^{2pi i(t n^3 + b n^2 + c n)} with pairwise summation.
inline complexd weyl_sum(std::int64_t N, const WeylPhase& ph) {
    require(N >= 1, "expsum.weyl_domain", "weyl_sum requires N >= 1");
    std::vector<complexd> terms(static_cast<std::size_t>(N));
    for (std::int64_t n = 1; n <= N; ++n)
        terms[std::size_t(n - 1)] = unit_phase(cubic_phase_mod1(n, ph));
    return pairwise_sum(terms);
}

/// K_N(x,t) = sum_{n=-N}^{N} e^{2pi i(t n^3 + x n)}.
inline complexd eval_kernel(std::int64_t N, double x, double t) {
    require(N >= 1, "expsum.kernel_domain", "eval_kernel requires N >= 1");
    std::vector<complexd> terms(static_cast<std::size_t>(2 * N + 1));
    for (std::int64_t n = -N; n <= N; ++n)
        terms[std::size_t(n + N)] = unit_phase(cubic_phase_mod1(n, WeylPhase{t, 0.0, x}));
    return pairwise_sum(terms);
}

/// Uniform samples of a complex field on the unit torus square,
/// values[j + M_x * k] = F(j / M_x, k / M_t).
struct SpaceTimeGrid {
    std::size_t M_x = 0;
    std::size_t M_t = 0;
    std::vector<complexd> values;

    complexd at(std::size_t j, std::size_t k) const { return values[j + M_x * k]; }
    double cell_measure() const { return 1.0 / (double(M_x) * double(M_t)); }
};

/// Coefficients of the t-slice polynomial x -> F(x, t): a_n e^{2pi i t n^3}.
inline std::vector<complexd> slice_coefficients(const CoeffSequence& seq, double t) {
    std::vector<complexd> c(seq.coeffs.size());
    for (std::int64_t n = -seq.N; n <= seq.N; ++n) {
        double f = mul_mod1(double(n * n * n), t);
        c[std::size_t(n + seq.N)] = seq.at(n) * unit_phase(f);
    }
    return c;
}

/// Visits every t-slice of F on the M_x x M_t grid: cb(k, slice) receives the
/// M_x synthesized values of row t = k / M_t. Slices are streamed so callers
/// can hold reductions instead of the full grid; the chunk partition is fixed,
/// so per-slice reductions stay deterministic.
template <typename Callback>
void for_each_time_slice(const CoeffSequence& seq, std::size_t M_x, std::size_t M_t,
                         Callback&& cb, unsigned threads = 0) {
    require(M_x >= std::size_t(2 * seq.N + 2), "expsum.grid_resolution",
            "M_x must be at least 2N+2");
    require(M_t >= 2, "expsum.grid_resolution", "M_t must be at least 2");
    require(is_pow2(M_x), "expsum.grid_pow2", "M_x must be a power of two");
    parallel_chunks(M_t, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) {
            double t = double(k) / double(M_t);
            std::vector<complexd> slice = synthesize_modes(slice_coefficients(seq, t), M_x);
            cb(k, slice);
        }
    }, threads, 8);
}

inline SpaceTimeGrid sample_extremal(const CoeffSequence& seq, std::size_t M_x, std::size_t M_t,
                                     unsigned threads = 0) {
    require(M_x * M_t <= (std::size_t(1) << 26), "expsum.grid_memory",
            "materialized grid capped at 2^26 cells; stream slices instead");
    SpaceTimeGrid grid;
    grid.M_x = M_x;
    grid.M_t = M_t;
    grid.values.assign(M_x * M_t, complexd{0.0, 0.0});
    for_each_time_slice(seq, M_x, M_t, [&](std::size_t k, const std::vector<complexd>& slice) {
        std::copy(slice.begin(), slice.end(), grid.values.begin() + long(k * M_x));
    }, threads);
    return grid;
}

/// Empirical check of the Weyl bound |S| <= C N^{1/4} q^{1/4}: random phases,
/// Dirichlet denominator of t with q_max = N^3, trials with q < N^2 excluded.
struct WeylBoundReport {
    std::int64_t N = 0;
    std::uint64_t seed = 0;
    std::size_t trials = 0;
    std::size_t admitted = 0;   // trials passing the q >= N^2 gate
    double max_ratio = 0.0;
    double mean_ratio = 0.0;
    WeylPhase argmax_phase;
    std::int64_t argmax_q = 0;
};

inline WeylBoundReport weyl_bound_report(std::int64_t N, std::size_t trials, std::uint64_t seed) {
    require(N >= 1, "expsum.weyl_domain", "weyl_bound_report requires N >= 1");
    require(trials >= 1, "expsum.weyl_trials", "need at least one trial");
    WeylBoundReport rep;
    rep.N = N;
    rep.seed = seed;
    rep.trials = trials;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::int64_t q_min = N * N;
    const std::int64_t q_max = N * N * N;
    double sum_ratio = 0.0;
    for (std::size_t i = 0; i < trials; ++i) {
        WeylPhase ph{unif(rng), unif(rng), unif(rng)};
        arith::Rational r = arith::dirichlet_approx(ph.t, q_max);
        if (r.q < q_min) continue;
        double ratio = std::abs(weyl_sum(N, ph)) /
                       (std::pow(double(N), 0.25) * std::pow(double(r.q), 0.25));
        ++rep.admitted;
        sum_ratio += ratio;
        if (ratio > rep.max_ratio) {
            rep.max_ratio = ratio;
            rep.argmax_phase = ph;
            rep.argmax_q = r.q;
        }
    }
    rep.mean_ratio = rep.admitted ? sum_ratio / double(rep.admitted) : 0.0;
    return rep;
}

} // namespace restrictlab::expsum
