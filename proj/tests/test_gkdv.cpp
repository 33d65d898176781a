#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "restrictlab/gkdv.hpp"

using namespace restrictlab;
using namespace restrictlab::gkdv;

namespace {

SpectralState small_smooth_data(std::size_t M, double amp, std::uint64_t seed = 5) {
    SobolevSpec spec;
    spec.s = 2.5;
    spec.seed = seed;
    spec.amplitude = amp;
    return make_hs_data(M, spec);
}

} // namespace

TEST_CASE("hs data is deterministic, real-symmetric, with finite norm") {
    SpectralState a = make_hs_data(64, {0.8, 42, 0.3});
    SpectralState b = make_hs_data(64, {0.8, 42, 0.3});
    for (std::size_t j = 0; j < a.M; ++j) CHECK(a.uhat[j] == b.uhat[j]);
    CHECK_NOTHROW(enforce_reality(a));
    double direct = 0.0;
    for (std::size_t j = 0; j < a.M; ++j)
        direct += std::pow(1.0 + std::abs(double(a.freq(j))), 1.6) * std::norm(a.uhat[j]);
    CHECK(hs_norm(a, 0.8) == Catch::Approx(std::sqrt(direct)));

    SpectralState zero = make_hs_data(64, {0.8, 42, 0.0});
    CHECK(hs_norm(zero, 0.8) == 0.0);
}

TEST_CASE("linear flow matches the exact Airy propagator") {
    SpectralState phi = small_smooth_data(256, 0.5);
    SolverConfig cfg;
    cfg.F = Nonlinearity::none();
    cfg.dt = 1e-4;
    cfg.T = 0.1;
    Trajectory traj = solve(phi, cfg);
    const SpectralState& last = traj.states.back();
    CHECK(last.time == Catch::Approx(0.1));
    for (std::size_t j = 0; j < last.M; ++j) {
        double n = double(last.freq(j));
        complexd expected = phi.uhat[j] * unit_phase(mul_mod1(n * n * n, 0.1 / two_pi));
        CHECK(std::abs(last.uhat[j] - expected) <= 1e-9 * std::max(1.0, std::abs(expected)));
    }
    CHECK(traj.momentum_drift <= 1e-10);
    CHECK(traj.mass_drift <= 1e-12);
}

TEST_CASE("constant data is a fixed point") {
    SpectralState phi = make_state(64);
    phi.uhat[0] = complexd{0.7, 0.0};
    SolverConfig cfg;
    cfg.F = Nonlinearity::power(2);
    cfg.dt = 1e-3;
    cfg.T = 0.05;
    Trajectory traj = solve(phi, cfg);
    for (std::size_t j = 0; j < 64; ++j)
        CHECK(std::abs(traj.states.back().uhat[j] - phi.uhat[j]) < 1e-13);
}

TEST_CASE("linear flow is an H^s isometry") {
    SpectralState phi = small_smooth_data(128, 0.4);
    SolverConfig cfg;
    cfg.F = Nonlinearity::none();
    cfg.dt = 1e-3;
    cfg.T = 0.2;
    Trajectory traj = solve(phi, cfg);
    for (double s : {0.0, 0.6, 1.5}) {
        double before = hs_norm(phi, s);
        double after = hs_norm(traj.states.back(), s);
        CHECK(after == Catch::Approx(before).epsilon(1e-12));
    }
}

TEST_CASE("rk4 self-convergence order is four") {
    // The integrating factor makes the transformed nonlinearity oscillate at
    // frequency n^3, so the asymptotic order-4 regime needs n^3 dt below ~1;
    // M = 32 keeps the band at 10 and the coarse step at n^3 dt = 0.4.
    SpectralState phi = small_smooth_data(32, 2.0);
    SolverConfig ref_cfg;
    ref_cfg.F = Nonlinearity::power(1);
    ref_cfg.T = 0.4;
    ref_cfg.dt = ref_cfg.T / 16384.0;
    Trajectory ref = solve(phi, ref_cfg);

    auto terminal_error = [&](double dt) {
        SolverConfig cfg = ref_cfg;
        cfg.dt = dt;
        Trajectory t = solve(phi, cfg);
        return l2_distance(t.states.back(), ref.states.back());
    };
    double e1 = terminal_error(ref_cfg.T / 1024.0);
    double e2 = terminal_error(ref_cfg.T / 2048.0);
    double order = std::log2(e1 / e2);
    CHECK(order > 3.5);
    CHECK(order < 4.5);
}

TEST_CASE("mass and momentum drift stay tiny for power nonlinearities") {
    for (int k : {1, 2, 3}) {
        SpectralState phi = small_smooth_data(128, 0.2, 11 + std::uint64_t(k));
        SolverConfig cfg;
        cfg.F = Nonlinearity::power(k);
        cfg.dt = 5e-5;
        cfg.T = 0.02;
        Trajectory traj = solve(phi, cfg);
        CHECK(traj.mass_drift <= 1e-12);
        CHECK(traj.momentum_drift <= 1e-9);
    }
}

TEST_CASE("reality is enforced after every step") {
    SpectralState phi = small_smooth_data(64, 0.4);
    SolverConfig cfg;
    cfg.F = Nonlinearity::power(2);
    cfg.dt = 1e-3;
    cfg.T = 0.01;
    Trajectory traj = solve(phi, cfg);
    const SpectralState& last = traj.states.back();
    for (std::int64_t n = 1; n <= last.band(); ++n)
        CHECK(last.uhat[last.slot(-n)] == std::conj(last.uhat[last.slot(n)]));
}

TEST_CASE("gauge transform basics") {
    SpectralState phi = small_smooth_data(128, 0.3);
    SolverConfig cfg;
    cfg.F = Nonlinearity::none();
    cfg.dt = 1e-3;
    cfg.T = 0.05;
    Trajectory traj = solve(phi, cfg);

    // F = 0: the drift vanishes, transform is the identity
    Trajectory gauged = gauge_transform(traj, Nonlinearity::none());
    for (std::size_t i = 0; i < traj.states.size(); ++i)
        CHECK(l2_distance(gauged.states[i], traj.states[i]) == 0.0);

    // constant field: shifting a constant changes nothing
    SpectralState c = make_state(64);
    c.uhat[0] = complexd{0.9, 0.0};
    Trajectory const_traj;
    const_traj.states = {c, c, c};
    const_traj.states[1].time = 0.1;
    const_traj.states[2].time = 0.2;
    Trajectory cg = gauge_transform(const_traj, Nonlinearity::power(2));
    for (const auto& st : cg.states) CHECK(std::abs(st.uhat[0] - complexd{0.9, 0.0}) < 1e-15);

    // round trip is the identity
    SolverConfig cfg2;
    cfg2.F = Nonlinearity::power(2);
    cfg2.mean_removed = true;
    cfg2.dt = 1e-3;
    cfg2.T = 0.05;
    Trajectory v = solve(phi, cfg2);
    Trajectory round = gauge_inverse(gauge_transform(v, cfg2.F), cfg2.F);
    for (std::size_t i = 0; i < v.states.size(); ++i)
        CHECK(l2_distance(round.states[i], v.states[i]) < 1e-9);
}

TEST_CASE("gauge equivalence for small data") {
    SpectralState phi = small_smooth_data(256, 0.05);
    SolverConfig cfg;
    cfg.dt = 2e-5;
    cfg.T = 0.01;
    for (int k : {2, 3}) {
        double disc = gauge_equivalence_check(phi, Nonlinearity::power(k), cfg);
        CHECK(disc < 1e-6);
    }
}

TEST_CASE("wellposedness probe reports bounded ratios") {
    SobolevSpec spec;
    spec.s = 0.6;
    spec.seed = 3;
    spec.amplitude = 0.2;
    SolverConfig cfg;
    cfg.F = Nonlinearity::power(3);
    cfg.dt = 2e-4;
    cfg.T = 0.02;
    ProbeReport rep = wellposedness_probe(128, spec, cfg, {1e-2, 1e-3});
    REQUIRE(rep.rows.size() == 2);
    for (const auto& row : rep.rows) {
        CHECK(row.ratio > 0.0);
        CHECK(row.ratio <= 10.0);
        CHECK(row.growth <= 2.0);
    }
    CHECK_THROWS_AS(wellposedness_probe(64, {0.4, 1, 0.1}, cfg, {1e-2}), invariant_violation);
}

TEST_CASE("blowup is signalled, not silently propagated") {
    SpectralState phi = small_smooth_data(64, 40.0);
    SolverConfig cfg;
    cfg.F = Nonlinearity::power(3);
    cfg.dt = 0.05;
    cfg.T = 2.0;
    cfg.blowup_threshold = 1e6;
    CHECK_THROWS_AS(solve(phi, cfg), BlowupError);
}

TEST_CASE("trajectory export round trips") {
    SpectralState phi = small_smooth_data(64, 0.4);
    SolverConfig cfg;
    cfg.F = Nonlinearity::power(2);
    cfg.dt = 1e-3;
    cfg.T = 0.01;
    Trajectory traj = solve(phi, cfg);

    std::stringstream bin(std::ios::in | std::ios::out | std::ios::binary);
    write_trajectory_binary(traj, bin);
    Trajectory back = read_trajectory_binary(bin);
    REQUIRE(back.states.size() == traj.states.size());
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        CHECK(back.states[i].time == traj.states[i].time);
        for (std::size_t j = 0; j < traj.states[i].M; ++j)
            CHECK(back.states[i].uhat[j] == traj.states[i].uhat[j]);
    }

    std::stringstream txt;
    write_trajectory_text(traj, txt);
    std::string header;
    std::getline(txt, header);
    CHECK(header == "# time mode_index re im");
    double time; long long mode; double re, im;
    txt >> time >> mode >> re >> im;
    CHECK(time == 0.0);
    CHECK(mode == 0);
    CHECK(re == Catch::Approx(phi.uhat[0].real()));

    std::stringstream bad("NOTAMAGIC________");
    CHECK_THROWS_AS(read_trajectory_binary(bad), invariant_violation);
}

TEST_CASE("general nonlinearity sin(u) runs and conserves") {
    SpectralState phi = small_smooth_data(128, 0.15);
    SolverConfig cfg;
    cfg.F = Nonlinearity::general([](double u) { return std::sin(u); });
    cfg.dt = 1e-4;
    cfg.T = 0.01;
    Trajectory traj = solve(phi, cfg);
    CHECK(traj.mass_drift <= 1e-12);
    CHECK(traj.momentum_drift <= 1e-8);
}
