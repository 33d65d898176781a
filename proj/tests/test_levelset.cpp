#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "restrictlab/levelset.hpp"

using namespace restrictlab;
using namespace restrictlab::levelset;
using expsum::CoeffSequence;

TEST_CASE("lp norm closed cases") {
    // unit sequence, p = 2 -> 1 by Parseval
    CoeffSequence seq = expsum::random_unit_sequence(4, 11);
    auto [mx, mt] = exact_grid_for(4, 2.0);
    CHECK(lp_norm(seq, 2.0, mx, mt) == Catch::Approx(1.0).margin(1e-10));

    // delta sequence -> 1 for every p
    CoeffSequence delta = expsum::make_sequence(3);
    delta.at(0) = complexd{1.0, 0.0};
    for (double p : {2.0, 3.0, 4.0, 7.5}) {
        CHECK(lp_norm(delta, p, 32, 512) == Catch::Approx(1.0).margin(1e-12));
    }

    // constant-one coefficients, p = 2 -> sqrt(2N+1)
    CoeffSequence ones = expsum::make_sequence(4);
    for (auto& c : ones.coeffs) c = complexd{1.0, 0.0};
    CHECK(lp_norm(ones, 2.0, mx, mt) == Catch::Approx(3.0).margin(1e-9));
}

TEST_CASE("grid route and convolution route agree for even p") {
    std::mt19937_64 seeds(404);
    for (std::int64_t N : {2, 4, 8}) {
        for (double p : {2.0, 4.0, 6.0}) {
            CoeffSequence seq = expsum::random_unit_sequence(N, seeds());
            auto [mx, mt] = exact_grid_for(N, p);
            double grid = lp_norm(seq, p, mx, mt);
            double conv = lp_norm_even_exact(seq, p);
            CHECK(grid == Catch::Approx(conv).epsilon(1e-9));
        }
    }
}

TEST_CASE("uniform sequence even norms match exact counts") {
    // ||K_N/sqrt(2N+1)||_{2b}^{2b} = S(N;b) / (2N+1)^b
    for (std::int64_t N : {1, 2, 3}) {
        for (std::int64_t b : {2, 3}) {
            CoeffSequence u = expsum::uniform_unit_sequence(N);
            double mass = std::pow(lp_norm_even_exact(u, 2.0 * double(b)), 2.0 * double(b));
            double S = counting::count_bruteforce(N, b).value_double();
            CHECK(mass == Catch::Approx(S / std::pow(double(2 * N + 1), double(b))).epsilon(1e-10));
        }
    }
}

TEST_CASE("lp norm is monotone in p on the probability space") {
    std::mt19937_64 seeds(77);
    for (int trial = 0; trial < 20; ++trial) {
        CoeffSequence seq = expsum::random_unit_sequence(5, seeds());
        double prev = 0.0;
        for (double p : {2.0, 4.0, 6.0, 8.0}) {
            auto [mx, mt] = exact_grid_for(5, p);
            double v = lp_norm(seq, p, mx, mt);
            CHECK(v >= prev - 1e-12);
            prev = v;
        }
    }
}

TEST_CASE("lp norm resolution guard and error estimate") {
    CoeffSequence seq = expsum::uniform_unit_sequence(4);
    CHECK_THROWS_AS(lp_norm(seq, 4.0, 16, 64), invariant_violation); // M_x < pN+1
    auto est = lp_norm_with_error(seq, 3.0, 64, 512);
    CHECK(est.value > 0.0);
    CHECK(est.error_estimate < 0.01 * est.value);
}

TEST_CASE("level profile basics") {
    CoeffSequence seq = expsum::random_unit_sequence(4, 2024);
    auto [mx, mt] = default_level_grid(4);
    LevelProfile prof = level_profile(seq, {0.0, 0.5, 1.0, 2.0, 100.0}, mx, mt);
    CHECK(prof.measures.front() == Catch::Approx(1.0)); // lambda = 0
    CHECK(prof.measures.back() == 0.0);                 // above the sup bound
    for (std::size_t i = 1; i < prof.measures.size(); ++i)
        CHECK(prof.measures[i] <= prof.measures[i - 1]);
    CHECK(prof.grid_mean_sq == Catch::Approx(1.0).margin(1e-9));
    // Chebyshev at every lambda
    for (std::size_t i = 0; i < prof.lambdas.size(); ++i)
        CHECK(prof.lambdas[i] * prof.lambdas[i] * prof.measures[i] <= 1.0 + 1e-6);
    // unit sequences are bounded by sqrt(2N+1)
    CHECK(prof.grid_sup <= 3.0 + 1e-9);
}

TEST_CASE("level profile is stable under grid refinement") {
    CoeffSequence seq = expsum::uniform_unit_sequence(8);
    std::vector<double> ladder{0.4, 0.6, 0.9, 1.35};
    LevelProfile coarse = level_profile(seq, ladder, 128, 8192);
    LevelProfile fine = level_profile(seq, ladder, 256, 16384);
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        CHECK(std::abs(fine.measures[i] - coarse.measures[i]) <= 0.02 * coarse.measures[i]);
    }
}

TEST_CASE("verify_thm2 slack at N=8") {
    CoeffSequence seq = expsum::uniform_unit_sequence(8);
    Thm2Report rep = verify_thm2(8, {64, 128}, seq);
    CHECK(rep.min_slack >= 0.125);
    CHECK(rep.C1.size() == 2);
    CHECK(rep.cells.size() == 24);
}

TEST_CASE("verify_cor1 small sweep") {
    Cor1Report rep = verify_cor1({8, 16}, {1, 2});
    REQUIRE(rep.per_n_max.size() == 2);
    CHECK(rep.per_n_max[0] > 0.0);
    CHECK(rep.per_n_max[1] > 0.0);
    CHECK(rep.drift < 8.0);
    // uniform rows always have a nonempty gated range at these N
    for (const auto& row : rep.rows)
        if (row.label == "uniform") CHECK(row.value > 0.0);
}

TEST_CASE("estimate_Kp at p=2 returns exactly 1") {
    OptimizerConfig cfg;
    cfg.random_starts = 1;
    StrichartzEstimate est = estimate_Kp(6, 2.0, cfg);
    CHECK(std::abs(est.lower_bound - 1.0) <= 1e-8);
    CHECK(est.converged);
}

TEST_CASE("estimate_Kp beats the uniform bound at N=1, p=4") {
    StrichartzEstimate est = estimate_Kp(1, 4.0);
    double S12 = counting::count_bruteforce(1, 2).value_double(); // 19
    double uniform_bound = std::pow(S12 / 9.0, 0.25);
    CHECK(est.lower_bound >= uniform_bound - 1e-9);
    CHECK(est.witness.l2_norm() == Catch::Approx(1.0).margin(1e-10));
    for (std::size_t i = 1; i < est.objective_trace.size(); ++i)
        CHECK(est.objective_trace[i] >= est.objective_trace[i - 1]);
}

TEST_CASE("estimate_Kp dominates the counting seed bound") {
    // K_{2b,N} >= S(N;b)^{1/2b} / sqrt(2N+1), attained by the uniform start
    for (std::int64_t N : {2, 4}) {
        for (std::int64_t b : {2, 3}) {
            OptimizerConfig cfg;
            cfg.random_starts = 1;
            cfg.max_iterations = 60;
            StrichartzEstimate est = estimate_Kp(N, 2.0 * double(b), cfg);
            double S = counting::count_bruteforce(N, b).value_double();
            double seed_bound = std::pow(S, 1.0 / (2.0 * double(b))) / std::sqrt(double(2 * N + 1));
            CHECK(est.lower_bound >= seed_bound - 1e-6);
        }
    }
}

TEST_CASE("estimate_Kp grid route works for odd p") {
    OptimizerConfig cfg;
    cfg.random_starts = 0;
    cfg.max_iterations = 25;
    cfg.grid_M_x = 32;
    cfg.grid_M_t = 512;
    StrichartzEstimate est = estimate_Kp(2, 3.0, cfg);
    CHECK(est.lower_bound >= 1.0 - 1e-9); // delta sequences already give 1
}

TEST_CASE("verify_hua on a short list") {
    HuaReport rep = verify_hua({4, 8, 12, 16});
    REQUIRE(rep.rows.size() == 4);
    CHECK(rep.rows[0].S == Catch::Approx(18666169.0)); // frozen from the exact counter
    CHECK(rep.fit.slope > 4.5);
    CHECK(rep.fit.slope < 6.5);
    CHECK(rep.gate_drift < 8.0);
    for (const auto& row : rep.rows) CHECK(row.gated_value > 0.0);
}
