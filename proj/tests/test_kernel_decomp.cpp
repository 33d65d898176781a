#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "restrictlab/kernel_decomp.hpp"
#include "restrictlab/quadrature.hpp"

using namespace restrictlab;
using namespace restrictlab::kernel_decomp;

namespace {

// Independent oracle: hat Phi(k) by direct quadrature of Phi against the
// character, integrating interval by interval over the bump supports.
complexd phi_fourier_direct(const PhiFunction& phi, std::int64_t k) {
    complexd total{0.0, 0.0};
    for (const auto& fr : phi.farey().fractions) {
        double a_over_q = double(fr.a) / double(fr.q);
        double inv_q2 = 1.0 / (double(fr.q) * double(fr.q));
        double lo = a_over_q + BumpProfile::support_lo * inv_q2;
        double hi = a_over_q + BumpProfile::support_hi * inv_q2;
        double cycles = std::abs(double(k)) * (hi - lo);
        total += quadrature::integrate_panels(
            [&](double t) { return phi.eval(t) * unit_phase(-double(k) * t); }, lo, hi, cycles);
    }
    return total;
}

} // namespace

TEST_CASE("bump profile shape") {
    BumpProfile prof;
    CHECK(prof.eval(0.004) == 0.0);
    CHECK(prof.eval(0.011) == 0.0);
    CHECK(prof.eval(0.0075) == Catch::Approx(std::exp(-1.0)));
    CHECK(prof.eval(0.006) > 0.0);
    // transform at 0 is the integral of the bump, positive
    CHECK(prof.fourier(0.0).real() > 0.0);
    CHECK(std::abs(prof.fourier(0.0).imag()) < 1e-15);
}

TEST_CASE("phi evaluates per spec examples") {
    PhiFunction phi(2);
    CHECK(phi.eval(0.0) == 0.0);
    // mid-support of one bump equals the bump peak, multiplicity one
    for (const auto& fr : {arith::Rational{1, 3}, arith::Rational{2, 7}}) {
        double t = double(fr.a) / double(fr.q) + 0.0075 / (double(fr.q) * double(fr.q));
        CHECK(phi.eval(t) == Catch::Approx(std::exp(-1.0)).epsilon(1e-9));
    }
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 5000; ++i) CHECK(phi.eval(unif(rng)) >= 0.0);
}

TEST_CASE("phi support wraps for Q = 1") {
    PhiFunction phi(1);
    // the 1/1 bump periodizes onto [1/200, 1/100]
    CHECK(phi.eval(0.0075) == Catch::Approx(std::exp(-1.0)).epsilon(1e-9));
    // and the 1/2 bump sits just right of one half
    double t_half = 0.5 + 0.0075 / 4.0;
    CHECK(phi.eval(t_half) == Catch::Approx(std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("support disjointness verified exactly up to Q = 64") {
    for (std::int64_t Q : {1, 2, 5, 16, 64}) CHECK_NOTHROW(PhiFunction(Q));
}

TEST_CASE("phi fourier agrees with direct quadrature oracle at Q=4") {
    PhiFunction phi(4);
    for (std::int64_t k = -50; k <= 50; ++k) {
        complexd closed = phi_fourier(phi, k);
        complexd direct = phi_fourier_direct(phi, k);
        CHECK(std::abs(closed - direct) < 1e-8);
    }
    CHECK(std::abs(phi_fourier(phi, 17) - std::conj(phi_fourier(phi, -17))) < 1e-14);
    CHECK(phi_fourier_zero(phi) > 0.0);
    CHECK(std::abs(phi_fourier(phi, 0).real() - phi_fourier_zero(phi)) < 1e-12);
}

TEST_CASE("phi hat zero is nearly Q-independent") {
    double lo = 1e300, hi = 0.0;
    for (std::int64_t Q : {4, 8, 16, 32}) {
        double v = phi_fourier_zero(PhiFunction(Q));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK((hi - lo) / hi < 0.20);
}

TEST_CASE("decomposition basics at N=4") {
    KernelDecomposition dec(4, 16);
    // exact zero on the curve
    for (std::int64_t n = -4; n <= 4; ++n) CHECK(dec.khat2(n, n * n * n) == complexd{0.0, 0.0});
    CHECK(std::abs(dec.khat2(1, 5)) > 0.0);
    // table route equals the per-call Ramanujan formula
    PhiFunction phi(16);
    for (std::int64_t k : {1, 2, 7, 32, 100, 128}) {
        CHECK(std::abs(dec.phi_hat(k) - phi_fourier(phi, k)) < 1e-10);
    }
    // K1 + K2 reproduces the kernel pointwise
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        double x = unif(rng), t = unif(rng);
        complexd sum = dec.k1(x, t) + dec.k2(x, t);
        complexd direct = expsum::eval_kernel(4, x, t);
        CHECK(std::abs(sum - direct) < 1e-10 * 9.0);
    }
    CHECK_THROWS_AS(KernelDecomposition(4, 8), invariant_violation);   // Q < N^2
    CHECK_THROWS_AS(KernelDecomposition(4, 100), invariant_violation); // Q > N^3
}

TEST_CASE("k2 ratio is exact and positive") {
    KernelDecomposition dec(4, 16);
    CHECK(dec.ratio2() > 0.0);
    CHECK(dec.argmax_k() >= 1);
    CHECK(dec.argmax_k() <= 2 * 64);
}

TEST_CASE("verify_prop1 on small N") {
    auto rep = verify_prop1({4, 8}, [](std::int64_t N) { return N * N; });
    REQUIRE(rep.rows.size() == 2);
    for (const auto& row : rep.rows) {
        CHECK(row.ratio1 > 0.0);
        CHECK(row.ratio2 > 0.0);
        CHECK(row.phi_hat0 > 0.0);
    }
    CHECK(rep.drift1 < 4.0);
    CHECK(rep.drift2 < 4.0);

    auto single = verify_prop1({4}, [](std::int64_t N) { return N * N; });
    CHECK(single.rows.size() == 1);
    CHECK(single.drift1 == 1.0);
}

TEST_CASE("sup grid k1 sees the major arcs") {
    KernelDecomposition dec(4, 16);
    double sup = sup_grid_k1(dec);
    CHECK(sup > 0.0);
    // |K1| <= sup |K_N| * max Phi / hat Phi(0)
    double cap = 9.0 * std::exp(-1.0) / dec.phi_hat0();
    CHECK(sup <= cap * (1.0 + 1e-9));
}
