#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "restrictlab/xsb.hpp"

using namespace restrictlab;
using namespace restrictlab::xsb;

namespace {

SpaceTimeField single_mode_field(std::int64_t n0, std::size_t j_slot, std::int64_t N_x,
                                 double T_w, std::size_t M_t, complexd amp = {1.0, 0.0}) {
    SpaceTimeField f = make_field(N_x, T_w, M_t);
    f.row(n0)[j_slot] = amp;
    return f;
}

} // namespace

TEST_CASE("xsb norm on single modes matches the closed form") {
    const double T_w = two_pi; // lambda lattice = integers
    const std::size_t M_t = 256;
    for (std::int64_t n0 : {0L, 1L, 2L, -3L}) {
        std::int64_t n3 = n0 * n0 * n0;
        std::size_t slot = n3 >= 0 ? std::size_t(n3) : M_t - std::size_t(-n3);
        SpaceTimeField f = single_mode_field(n0, slot, 4, T_w, M_t);
        // u = e^{i(n0 x + n0^3 t)}: the single active node sits on the curve
        double s = 0.7, b = 0.5;
        double expected = std::pow(1.0 + std::abs(double(n0)), s) * T_w *
                          std::sqrt(two_pi / T_w);
        CHECK(xsb_norm(f, s, b) == Catch::Approx(expected).epsilon(1e-12));
        // off-curve node picks up the <lambda - n^3> weight
        std::size_t off = slot + 5 < M_t / 2 ? slot + 5 : 2;
        SpaceTimeField g = single_mode_field(n0, off, 4, T_w, M_t);
        double lam = g.lambda(off);
        double w = std::sqrt(std::pow(1.0 + std::abs(lam - double(n3)), 1.0));
        CHECK(xsb_norm(g, 0.0, 0.5) == Catch::Approx(w * T_w * std::sqrt(two_pi / T_w)).epsilon(1e-12));
    }
}

TEST_CASE("xsb norm homogeneity and zero field") {
    SpaceTimeField zero = make_field(4, 1.5, 64);
    CHECK(xsb_norm(zero, 0.3, 0.5) == 0.0);
    CHECK(ys_norm(zero, 0.3) == 0.0);
    SpaceTimeField f = random_curve_field(4, 1.5, 64, 9);
    double base = xsb_norm(f, 0.4, 0.5);
    for (auto& row : f.rows)
        for (auto& v : row) v *= complexd{0.0, 2.5}; // |c| = 2.5
    CHECK(xsb_norm(f, 0.4, 0.5) == Catch::Approx(2.5 * base).epsilon(1e-12));
}

TEST_CASE("xsb norm at s=b=0 is the L2 norm (Parseval)") {
    SpaceTimeField f = random_curve_field(6, 2.0, 512, 21);
    double viaNorm = xsb_norm(f, 0.0, 0.0);
    double viaGrid = grid_lp_norm(f, 2.0, 64);
    CHECK(viaNorm == Catch::Approx(viaGrid).epsilon(1e-8));
}

TEST_CASE("ys norm dominates the X part and is homogeneous") {
    SpaceTimeField f = random_curve_field(5, 1.0, 128, 33);
    CHECK(ys_norm(f, 0.6) >= xsb_norm(f, 0.6, 0.5));
    double base = ys_norm(f, 0.6);
    for (auto& row : f.rows)
        for (auto& v : row) v *= 3.0;
    CHECK(ys_norm(f, 0.6) == Catch::Approx(3.0 * base).epsilon(1e-12));
}

TEST_CASE("dyadic blocks partition the coefficients exactly") {
    SpaceTimeField u = random_curve_field(12, 1.0, 64, 4);
    // space axis: u = P_1 u + sum of blocks over K = 2,4,8,16
    SpaceTimeField sum = DyadicProjector{DyadicProjector::Axis::space, 1.0}.cutoff(u);
    for (double K : {2.0, 4.0, 8.0, 16.0}) {
        SpaceTimeField blk = DyadicProjector{DyadicProjector::Axis::space, K}.block(u);
        for (std::size_t i = 0; i < u.rows.size(); ++i)
            for (std::size_t j = 0; j < u.M_t; ++j) sum.rows[i][j] += blk.rows[i][j];
    }
    for (std::size_t i = 0; i < u.rows.size(); ++i)
        for (std::size_t j = 0; j < u.M_t; ++j) CHECK(sum.rows[i][j] == u.rows[i][j]);
}

TEST_CASE("time-axis blocks partition as well") {
    SpaceTimeField u = random_curve_field(3, 1.0, 128, 5);
    double lam_max = std::abs(u.lambda(u.M_t / 2));
    double K_top = 1.0;
    while (K_top < lam_max) K_top *= 2.0;
    SpaceTimeField sum = DyadicProjector{DyadicProjector::Axis::time, 1.0}.cutoff(u);
    for (double K = 2.0; K <= K_top; K *= 2.0) {
        SpaceTimeField blk = DyadicProjector{DyadicProjector::Axis::time, K}.block(u);
        for (std::size_t i = 0; i < u.rows.size(); ++i)
            for (std::size_t j = 0; j < u.M_t; ++j) sum.rows[i][j] += blk.rows[i][j];
    }
    for (std::size_t i = 0; i < u.rows.size(); ++i)
        for (std::size_t j = 0; j < u.M_t; ++j) CHECK(sum.rows[i][j] == u.rows[i][j]);
}

TEST_CASE("plateau bump") {
    CHECK(psi_plateau(0.0) == 1.0);
    CHECK(psi_plateau(0.99) == 1.0);
    CHECK(psi_plateau(-0.5) == 1.0);
    CHECK(psi_plateau(2.1) == 0.0);
    CHECK(psi_plateau(1.5) > 0.0);
    CHECK(psi_plateau(1.5) < 1.0);
    CHECK(window_bump(7.9, 0.2, 8.0) == Catch::Approx(psi_plateau(-0.5)));
}

TEST_CASE("linear estimate ratios are delta-stable") {
    gkdv::SobolevSpec spec;
    spec.s = 0.6;
    spec.seed = 12;
    spec.amplitude = 0.5;
    gkdv::SpectralState phi = gkdv::make_hs_data(32, spec);
    LinearEstimateReport rep = linear_estimate_check(phi, 0.6, {0.2, 0.1, 0.05});
    CHECK(rep.drift <= 4.0);
    CHECK(rep.delta_and_ratio.size() == 3);
    for (const auto& [d, r] : rep.delta_and_ratio) CHECK(r > 0.0);

    // homogeneity: ratios invariant under phi -> 2 phi
    gkdv::SpectralState phi2 = phi;
    for (auto& v : phi2.uhat) v *= 2.0;
    LinearEstimateReport rep2 = linear_estimate_check(phi2, 0.6, {0.2, 0.1, 0.05});
    for (std::size_t i = 0; i < rep.delta_and_ratio.size(); ++i)
        CHECK(rep2.delta_and_ratio[i].second ==
              Catch::Approx(rep.delta_and_ratio[i].second).epsilon(1e-10));

    // and under spatial translation (phase twist of the data)
    gkdv::SpectralState phi3 = phi;
    for (std::size_t j = 0; j < phi3.M; ++j)
        phi3.uhat[j] *= unit_phase(0.37 * double(phi3.freq(j)) / two_pi);
    LinearEstimateReport rep3 = linear_estimate_check(phi3, 0.6, {0.2, 0.1, 0.05});
    for (std::size_t i = 0; i < rep.delta_and_ratio.size(); ++i)
        CHECK(rep3.delta_and_ratio[i].second ==
              Catch::Approx(rep.delta_and_ratio[i].second).epsilon(1e-10));

    gkdv::SpectralState zero = gkdv::make_state(32);
    CHECK_THROWS_AS(linear_estimate_check(zero, 0.6, {0.1}), invariant_violation);
}

TEST_CASE("nonlinear scaling: constant fields give zero w") {
    gkdv::SpectralState c = gkdv::make_state(32);
    c.uhat[0] = complexd{0.8, 0.0};
    TimeSampledField u = solver_window_samples(c, gkdv::Nonlinearity::power(3), true, 0.1, 0.8, 4096);
    TimeSampledField w = nonlinear_w_samples(u, gkdv::Nonlinearity::power(3));
    double biggest = 0.0;
    for (const auto& col : w.columns)
        for (const auto& v : col) biggest = std::max(biggest, std::abs(v));
    CHECK(biggest < 1e-13);
}

TEST_CASE("nonlinear scaling fits a positive theta for k=3") {
    gkdv::SobolevSpec spec;
    spec.s = 0.6;
    spec.seed = 4;
    spec.amplitude = 0.3;
    gkdv::SpectralState phi = gkdv::make_hs_data(32, spec);
    NonlinearScalingReport rep =
        nonlinear_scaling_check(phi, gkdv::Nonlinearity::power(3), 0.6, {0.2, 0.1, 0.05});
    CHECK(rep.theta > 0.0);
    for (double v : rep.normalized) CHECK(v > 0.0);
}

TEST_CASE("embedding ratios stay bounded across resolutions") {
    for (Embedding e : {Embedding::emb1, Embedding::emb2, Embedding::emb3}) {
        EmbeddingReport rep = embedding_check(e, 77);
        CHECK(rep.ratios.size() == 3);
        CHECK(rep.drift <= 4.0);
        // amplitude invariance of the first rung ratio
    }
}

TEST_CASE("telescoping is exact") {
    SpaceTimeField u = random_curve_field(12, 1.0, 64, 21);
    // linear F: every increment cancels structurally
    CHECK(lp_telescope_check(u, [](double x) { return 2.0 * x; }, 1.0, 16.0) <= 1e-12);
    // cubic F on a generic field
    CHECK(lp_telescope_check(u, [](double x) { return x * x * x; }, 1.0, 16.0) <= 1e-10);
    // single-scale field: only one nonzero increment, still telescopes
    SpaceTimeField single = make_field(12, 1.0, 64);
    single.row(5)[3] = complexd{1.0, 0.0};
    single.row(-5)[61] = complexd{1.0, 0.0};
    CHECK(lp_telescope_check(single, [](double x) { return std::sin(x); }, 1.0, 16.0) <= 1e-10);
}
