#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "restrictlab/counting.hpp"

using namespace restrictlab;
using namespace restrictlab::counting;

TEST_CASE("brute force on tiny systems") {
    CHECK(count_bruteforce(1, 1).value == 3);
    CHECK(count_bruteforce(1, 2).value == 19);
    CHECK(count_bruteforce(2, 2).value == 61);
}

TEST_CASE("meet-in-the-middle equals brute force") {
    for (std::int64_t b = 1; b <= 4; ++b)
        for (std::int64_t N = 1; N <= 4; ++N)
            CHECK(count_meet_in_middle(N, b).value == count_bruteforce(N, b).value);
    for (std::int64_t N = 1; N <= 2; ++N)
        CHECK(count_meet_in_middle(N, 5).value == count_bruteforce(N, 5).value);
}

TEST_CASE("S(N;2) sparse equals direct pair-class enumeration for N <= 50") {
    for (std::int64_t N = 1; N <= 50; ++N)
        CHECK(count_meet_in_middle(N, 2).value == count_bruteforce(N, 2).value);
}

TEST_CASE("diagonal lower bound") {
    for (std::int64_t N : {1, 3, 8}) {
        for (std::int64_t b : {1, 2, 3, 5}) {
            auto res = count_meet_in_middle(N, b);
            CHECK(res.value_double() >= std::pow(double(2 * N + 1), double(b)));
        }
    }
}

TEST_CASE("counts are strictly increasing in N") {
    for (std::int64_t b : {2, 3, 5}) {
        uint128 prev = 0;
        for (std::int64_t N = 1; N <= 6; ++N) {
            uint128 v = count_meet_in_middle(N, b).value;
            CHECK(v > prev);
            prev = v;
        }
    }
}

TEST_CASE("rep counter symmetry under negation") {
    RepCounter rc = build_rep_counter(3, 3);
    for (const auto& [key, mult] : rc.entries) {
        auto [s, c] = RepCounter::decode(key);
        CHECK(rc.count(-s, -c) == mult);
        CHECK(std::llabs(s) <= 3 * 3);
        CHECK(std::llabs(c) <= 3 * 27);
    }
    CHECK(rc.total_mass() == 7ull * 7ull * 7ull);
}

TEST_CASE("guards reject oversized requests") {
    CHECK_THROWS_AS(count_bruteforce(40, 5), invariant_violation);
    CHECK_THROWS_AS(count_meet_in_middle(4, 7), invariant_violation);
    CountConfig tiny;
    tiny.memory_cap_bytes = 1024;
    CHECK_THROWS_AS(count_meet_in_middle(8, 5, tiny), invariant_violation);
}

TEST_CASE("omega box kernel stays positive") {
    for (std::int64_t N : {4, 16, 32}) {
        double rho = omega_grid_min_ratio(N);
        CHECK(rho > 0.0);
        CHECK(rho <= 1.0);
    }
    CHECK(omega_grid_min_ratio(32) >= 0.5);
}

TEST_CASE("verify_lower_bound report") {
    auto res = count_meet_in_middle(16, 5);
    auto rep = verify_lower_bound(res);
    CHECK(rep.diagonal_ratio >= 1.0);
    CHECK(rep.box_ratio > 0.0);
    CHECK(rep.omega_min_ratio > 0.9);
}

TEST_CASE("cubic identities hold exactly") {
    CHECK(verify_cubic_identity(0, {0, 0}));
    CHECK(verify_cubic_identity(1, {2, 3}));
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::int64_t> pick(-1000, 1000);
    std::uniform_int_distribution<int> arity(2, 5);
    for (int trial = 0; trial < 100000; ++trial) {
        int k = arity(rng);
        std::vector<std::int64_t> ns(static_cast<std::size_t>(k));
        for (auto& v : ns) v = pick(rng);
        REQUIRE(verify_cubic_identity(pick(rng), ns));
    }
}

TEST_CASE("scaling fit recovers exact power laws") {
    std::vector<std::pair<double, double>> pts;
    for (double N : {4.0, 8.0, 16.0, 32.0, 64.0}) pts.emplace_back(N, std::pow(N, 6.0));
    auto fit = scaling_fit(pts);
    CHECK(std::abs(fit.slope - 6.0) < 1e-9);
    CHECK(fit.max_residual < 1e-9);

    // b = 1 sweep: S = 2N+1, slope tends to 1 for large N
    std::vector<std::pair<double, double>> linear;
    for (double N : {100.0, 200.0, 400.0, 800.0}) linear.emplace_back(N, 2.0 * N + 1.0);
    CHECK(std::abs(scaling_fit(linear).slope - 1.0) < 0.01);

    CHECK_THROWS_AS(scaling_fit(std::vector<std::pair<double, double>>{{4, 16}}), invariant_violation);
}

TEST_CASE("mim supports split parity for even and odd b") {
    CHECK(count_meet_in_middle(2, 6).value == count_bruteforce(2, 6).value);
    CHECK(count_meet_in_middle(3, 3).value == count_bruteforce(3, 3).value);
}
