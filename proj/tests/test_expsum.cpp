#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "restrictlab/expsum.hpp"
#include "restrictlab/parallel.hpp"

using namespace restrictlab;
using namespace restrictlab::expsum;

namespace {

// term-by-term running sum; phases reduced the same way as the library
complexd weyl_sum_naive(std::int64_t N, const WeylPhase& ph) {
    complexd s{0.0, 0.0};
    for (std::int64_t n = 1; n <= N; ++n) s += unit_phase(cubic_phase_mod1(n, ph));
    return s;
}

// fully naive: raw double phases, no reduction; only trustworthy while
// 2 pi t n^3 stays small enough that the argument keeps ~1e-11 accuracy
complexd weyl_sum_raw(std::int64_t N, const WeylPhase& ph) {
    complexd s{0.0, 0.0};
    for (std::int64_t n = 1; n <= N; ++n) {
        double ang = two_pi * (ph.t * double(n) * double(n) * double(n) +
                               ph.b * double(n) * double(n) + ph.c * double(n));
        s += complexd{std::cos(ang), std::sin(ang)};
    }
    return s;
}

double grid_mean_sq(const CoeffSequence& seq, std::size_t M_x, std::size_t M_t) {
    std::vector<double> slice_means(M_t, 0.0);
    for_each_time_slice(seq, M_x, M_t, [&](std::size_t k, const std::vector<complexd>& slice) {
        double acc = 0.0;
        for (const auto& v : slice) acc += std::norm(v);
        slice_means[k] = acc / double(M_x);
    });
    return pairwise_sum(slice_means) / double(M_t);
}

} // namespace

TEST_CASE("weyl sum closed cases") {
    CHECK(std::abs(weyl_sum(10, {0, 0, 0}) - complexd{10.0, 0.0}) < 1e-12);
    // N=2, t=1/2: e^{pi i} + e^{8 pi i} = -1 + 1 = 0
    CHECK(std::abs(weyl_sum(2, {0.5, 0, 0})) < 1e-12);
}

TEST_CASE("weyl sum obeys the trivial bound and matches naive evaluation") {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::int64_t N : {4, 32, 257}) {
        for (int trial = 0; trial < 50; ++trial) {
            WeylPhase ph{unif(rng), unif(rng), unif(rng)};
            complexd s = weyl_sum(N, ph);
            CHECK(std::abs(s) <= double(N) * (1.0 + 1e-9));
            CHECK(std::abs(s - weyl_sum_naive(N, ph)) <= 1e-10 * double(N));
            if (N <= 32) CHECK(std::abs(s - weyl_sum_raw(N, ph)) <= 1e-9 * double(N));
        }
    }
}

TEST_CASE("phase reduction stays exact for large arguments") {
    // t n^3 far beyond 2^32: compare against integer-exact reduction of a
    // rational phase t = p / 2^20.
    std::int64_t n = 150'000;
    double t = 1048573.0 / 1048576.0;
    double f = cubic_phase_mod1(n, {t, 0.0, 0.0});
    // n^3 * p mod 2^20, all exact in __int128
    int128 prod = int128(n) * n * n * 1048573;
    int128 q = 1048576;
    int128 r = prod % q;
    double expected = double(r) / 1048576.0;
    if (expected > 0.5) expected -= 1.0;
    CHECK(std::abs(f - expected) < 1e-12);
}

TEST_CASE("kernel closed values and symmetry") {
    for (std::int64_t N : {1, 5, 33}) {
        CHECK(std::abs(eval_kernel(N, 0.0, 0.0) - complexd{double(2 * N + 1), 0.0}) <
              1e-9 * double(2 * N + 1));
        // n^3 + n is even, so every phase at (1/2, 1/2) is an integer turn
        CHECK(std::abs(eval_kernel(N, 0.5, 0.5) - complexd{double(2 * N + 1), 0.0}) <
              1e-9 * double(2 * N + 1));
    }
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        double x = unif(rng), t = unif(rng);
        complexd a = eval_kernel(8, x, t);
        complexd b = eval_kernel(8, -x, -t);
        CHECK(std::abs(a - std::conj(b)) < 1e-12);
    }
}

TEST_CASE("delta sequence samples to the constant field") {
    CoeffSequence seq = make_sequence(4);
    seq.at(0) = complexd{1.0, 0.0};
    SpaceTimeGrid grid = sample_extremal(seq, 16, 8);
    for (const auto& v : grid.values) CHECK(std::abs(v - complexd{1.0, 0.0}) < 1e-12);
}

TEST_CASE("uniform coefficients reproduce the kernel at grid points") {
    std::int64_t N = 6;
    CoeffSequence ones = make_sequence(N);
    for (auto& c : ones.coeffs) c = complexd{1.0, 0.0};
    SpaceTimeGrid grid = sample_extremal(ones, 32, 16);
    CHECK(std::abs(grid.at(0, 0) - complexd{double(2 * N + 1), 0.0}) < 1e-9 * double(2 * N + 1));
    for (std::size_t j = 0; j < grid.M_x; j += 5) {
        for (std::size_t k = 0; k < grid.M_t; k += 3) {
            complexd direct = eval_kernel(N, double(j) / 32.0, double(k) / 16.0);
            CHECK(std::abs(grid.at(j, k) - direct) <= 1e-9 * double(2 * N + 1));
        }
    }
}

TEST_CASE("Parseval holds for random unit sequences at quadrature-exact sizes") {
    std::mt19937_64 seeds(2024);
    for (std::int64_t N : {4, 8, 16}) {
        std::size_t M_x = next_pow2(std::size_t(2 * N + 2));
        std::size_t M_t = next_pow2(std::size_t(2 * N * N * N + 1));
        for (int i = 0; i < 50; ++i) {
            CoeffSequence seq = random_unit_sequence(N, seeds());
            CHECK(std::abs(grid_mean_sq(seq, M_x, M_t) - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("resolution guards") {
    CoeffSequence seq = uniform_unit_sequence(4);
    CHECK_THROWS_AS(sample_extremal(seq, 8, 4), invariant_violation);  // M_x < 2N+2
    CHECK_THROWS_AS(sample_extremal(seq, 16, 1), invariant_violation); // M_t < 2
}

TEST_CASE("weyl bound report is deterministic and gated") {
    auto rep1 = weyl_bound_report(16, 2000, 42);
    auto rep2 = weyl_bound_report(16, 2000, 42);
    CHECK(rep1.max_ratio == rep2.max_ratio);
    CHECK(rep1.mean_ratio == rep2.mean_ratio);
    CHECK(rep1.admitted == rep2.admitted);
    CHECK(rep1.argmax_q == rep2.argmax_q);
    CHECK(rep1.admitted <= rep1.trials);
    CHECK(rep1.max_ratio > 0.0);
    CHECK(rep1.argmax_q >= 16 * 16);

    auto rep3 = weyl_bound_report(16, 2000, 43);
    CHECK(rep3.max_ratio != rep1.max_ratio);
}

TEST_CASE("weyl ratio drifts by less than a factor 4 across N") {
    double lo = 1e300, hi = 0.0;
    for (std::int64_t N : {8, 16, 32}) {
        auto rep = weyl_bound_report(N, 2000, 1234);
        lo = std::min(lo, rep.max_ratio);
        hi = std::max(hi, rep.max_ratio);
    }
    CHECK(hi / lo < 4.0);
}
