#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "restrictlab/common.hpp"
#include "restrictlab/counting.hpp"
#include "restrictlab/fft.hpp"
#include "restrictlab/gkdv.hpp"
#include "restrictlab/parallel.hpp"

namespace restrictlab::xsb {

/// Space-time data on T x [0, T_w), band-limited to |n| <= N_x in x and
/// discretized by M_t samples in t. The time integrals of the continuous
/// theory become lattice sums over lambda_j = 2 pi j / T_w with spacing
/// 2 pi / T_w, and hat u(n, lambda_j) = T_w * C(n, j) where C are the
/// Fourier series coefficients of the doubly periodic field. Stored per
/// spatial mode as time-DFT coefficient rows in FFT slot order.
struct SpaceTimeField {
    std::int64_t N_x = 0;
    double T_w = 1.0;
    std::size_t M_t = 0;
    std::vector<std::vector<complexd>> rows; // index n + N_x, each length M_t

    std::int64_t slot_freq(std::size_t j) const {
        return j <= M_t / 2 ? std::int64_t(j) : std::int64_t(j) - std::int64_t(M_t);
    }
    double lambda(std::size_t j) const { return two_pi * double(slot_freq(j)) / T_w; }
    const std::vector<complexd>& row(std::int64_t n) const {
        return rows[std::size_t(n + N_x)];
    }
    std::vector<complexd>& row(std::int64_t n) { return rows[std::size_t(n + N_x)]; }
};

inline SpaceTimeField make_field(std::int64_t N_x, double T_w, std::size_t M_t) {
    require(N_x >= 0, "xsb.band", "N_x must be nonnegative");
    require(T_w > 0.0, "xsb.window", "window length must be positive");
    require(is_pow2(M_t) && M_t >= 8, "xsb.time_grid", "M_t must be a power of two >= 8");
    SpaceTimeField f;
    f.N_x = N_x;
    f.T_w = T_w;
    f.M_t = M_t;
    f.rows.assign(std::size_t(2 * N_x + 1), std::vector<complexd>(M_t, complexd{0.0, 0.0}));
    return f;
}

/// Same field held as per-time-sample spatial coefficient columns.
struct TimeSampledField {
    std::int64_t N_x = 0;
    double T_w = 1.0;
    std::size_t M_t = 0;
    std::vector<std::vector<complexd>> columns; // index k, each length 2 N_x + 1

    double time_at(std::size_t k) const { return T_w * double(k) / double(M_t); }
};

inline TimeSampledField make_samples(std::int64_t N_x, double T_w, std::size_t M_t) {
    require(is_pow2(M_t) && M_t >= 8, "xsb.time_grid", "M_t must be a power of two >= 8");
    TimeSampledField f;
    f.N_x = N_x;
    f.T_w = T_w;
    f.M_t = M_t;
    f.columns.assign(M_t, std::vector<complexd>(std::size_t(2 * N_x + 1), complexd{0.0, 0.0}));
    return f;
}

inline SpaceTimeField to_spectrum(const TimeSampledField& samples, unsigned threads = 0) {
    SpaceTimeField f = make_field(samples.N_x, samples.T_w, samples.M_t);
    const std::size_t modes = std::size_t(2 * samples.N_x + 1);
    parallel_chunks(modes, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            std::vector<complexd>& row = f.rows[i];
            for (std::size_t k = 0; k < samples.M_t; ++k) row[k] = samples.columns[k][i];
            fft_forward(row);
            for (auto& v : row) v /= double(samples.M_t);
        }
    }, threads, 1);
    return f;
}

inline TimeSampledField to_time_samples(const SpaceTimeField& field, unsigned threads = 0) {
    TimeSampledField s = make_samples(field.N_x, field.T_w, field.M_t);
    const std::size_t modes = std::size_t(2 * field.N_x + 1);
    std::vector<std::vector<complexd>> rows(modes);
    parallel_chunks(modes, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            rows[i] = field.rows[i];
            fft_inverse(rows[i]);
        }
    }, threads, 1);
    for (std::size_t k = 0; k < field.M_t; ++k)
        for (std::size_t i = 0; i < modes; ++i) s.columns[k][i] = rows[i][k];
    return s;
}

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

inline double bracket(double x) { return 1.0 + std::abs(x); }

/// X_{s,b} norm on the lattice: the double sum of
/// <n>^{2s} <lambda - n^3>^{2b} |hat u|^2 with d lambda -> spacing.
inline double xsb_norm(const SpaceTimeField& f, double s, double b) {
    const double spacing = two_pi / f.T_w;
    const double tb = 2.0 * b;
    std::vector<double> per_mode(f.rows.size(), 0.0);
    for (std::int64_t n = -f.N_x; n <= f.N_x; ++n) {
        const auto& row = f.row(n);
        const double n3 = double(n) * double(n) * double(n);
        double acc = 0.0;
        for (std::size_t j = 0; j < f.M_t; ++j) {
            double br = bracket(f.lambda(j) - n3);
            double w = tb == 1.0 ? br : (tb == -1.0 ? 1.0 / br : std::pow(br, tb));
            acc += w * std::norm(f.T_w * row[j]);
        }
        per_mode[std::size_t(n + f.N_x)] = std::pow(bracket(double(n)), 2.0 * s) * acc * spacing;
    }
    return std::sqrt(pairwise_sum(per_mode));
}

/// The l^1-in-lambda correction of the Y_s norm:
/// ( sum_n <n>^{2s} ( sum_j |hat u| spacing )^2 )^{1/2}.
inline double ys_correction(const SpaceTimeField& f, double s) {
    const double spacing = two_pi / f.T_w;
    std::vector<double> per_mode(f.rows.size(), 0.0);
    for (std::int64_t n = -f.N_x; n <= f.N_x; ++n) {
        const auto& row = f.row(n);
        double l1 = 0.0;
        for (std::size_t j = 0; j < f.M_t; ++j) l1 += std::abs(f.T_w * row[j]) * spacing;
        per_mode[std::size_t(n + f.N_x)] = std::pow(bracket(double(n)), 2.0 * s) * l1 * l1;
    }
    return std::sqrt(pairwise_sum(per_mode));
}

inline double ys_norm(const SpaceTimeField& f, double s) {
    return xsb_norm(f, s, 0.5) + ys_correction(f, s);
}

/// Left side of the nonlinear estimate: ||w||_{s,-1/2} plus the
/// <lambda - n^3>^{-1}-weighted l^1 correction.
inline double nonlinear_lhs(const SpaceTimeField& w, double s) {
    const double spacing = two_pi / w.T_w;
    std::vector<double> per_mode(w.rows.size(), 0.0);
    for (std::int64_t n = -w.N_x; n <= w.N_x; ++n) {
        const auto& row = w.row(n);
        const double n3 = double(n) * double(n) * double(n);
        double l1 = 0.0;
        for (std::size_t j = 0; j < w.M_t; ++j)
            l1 += std::abs(w.T_w * row[j]) / bracket(w.lambda(j) - n3) * spacing;
        per_mode[std::size_t(n + w.N_x)] = std::pow(bracket(double(n)), 2.0 * s) * l1 * l1;
    }
    return xsb_norm(w, s, -0.5) + std::sqrt(pairwise_sum(per_mode));
}

// ---------------------------------------------------------------------------
// Grid L^p norms (for the embeddings)
// ---------------------------------------------------------------------------

/// Synthesizes |u| on an M_x x M_t grid and returns the L^p norm with cell
/// measure (2pi/M_x)(T_w/M_t). p = infinity via p <= 0.
inline double grid_lp_norm(const SpaceTimeField& f, double p, std::size_t M_x,
                           unsigned threads = 0) {
    TimeSampledField samples = to_time_samples(f, threads);
    const double cell = (two_pi / double(M_x)) * (f.T_w / double(f.M_t));
    std::vector<double> partial(chunk_count(f.M_t, 16), 0.0);
    parallel_chunks(f.M_t, [&](std::size_t chunk, std::size_t lo, std::size_t hi) {
        double acc = 0.0;
        for (std::size_t k = lo; k < hi; ++k) {
            std::vector<complexd> grid = synthesize_modes(samples.columns[k], M_x);
            for (const auto& v : grid)
                acc = p > 0.0 ? acc + std::pow(std::abs(v), p) * cell
                              : std::max(acc, std::abs(v));
        }
        partial[chunk] = acc;
    }, threads, 16);
    if (p > 0.0) return std::pow(pairwise_sum(partial), 1.0 / p);
    double m = 0.0;
    for (double v : partial) m = std::max(m, v);
    return m;
}

/// Mixed L^q_t L^r_x norm.
inline double grid_mixed_norm(const SpaceTimeField& f, double q, double r, std::size_t M_x,
                              unsigned threads = 0) {
    TimeSampledField samples = to_time_samples(f, threads);
    const double dx = two_pi / double(M_x);
    const double dt = f.T_w / double(f.M_t);
    std::vector<double> partial(chunk_count(f.M_t, 16), 0.0);
    parallel_chunks(f.M_t, [&](std::size_t chunk, std::size_t lo, std::size_t hi) {
        double acc = 0.0;
        for (std::size_t k = lo; k < hi; ++k) {
            std::vector<complexd> grid = synthesize_modes(samples.columns[k], M_x);
            double xr = 0.0;
            for (const auto& v : grid) xr += std::pow(std::abs(v), r) * dx;
            acc += std::pow(std::pow(xr, 1.0 / r), q) * dt;
        }
        partial[chunk] = acc;
    }, threads, 16);
    return std::pow(pairwise_sum(partial), 1.0 / q);
}

// ---------------------------------------------------------------------------
// Sharp dyadic projectors
// ---------------------------------------------------------------------------

/// Sharp Fourier cutoffs: P_K keeps |n| <= K (space axis), Q_L keeps
/// |lambda| <= L (time axis); the Littlewood-Paley blocks are differences of
/// consecutive dyadic cutoffs, an exact partition of the coefficients.
struct DyadicProjector {
    enum class Axis { space, time };
    Axis axis = Axis::space;
    double K = 1.0;

    SpaceTimeField cutoff(const SpaceTimeField& f) const {
        SpaceTimeField out = f;
        if (axis == Axis::space) {
            for (std::int64_t n = -f.N_x; n <= f.N_x; ++n)
                if (std::abs(double(n)) > K)
                    std::fill(out.row(n).begin(), out.row(n).end(), complexd{0.0, 0.0});
        } else {
            for (auto& row : out.rows)
                for (std::size_t j = 0; j < f.M_t; ++j)
                    if (std::abs(f.lambda(j)) > K) row[j] = complexd{0.0, 0.0};
        }
        return out;
    }

    /// P_K - P_{K/2} (or Q_L - Q_{L/2}).
    SpaceTimeField block(const SpaceTimeField& f) const {
        SpaceTimeField hi = cutoff(f);
        DyadicProjector half{axis, K / 2.0};
        SpaceTimeField lo = half.cutoff(f);
        for (std::size_t i = 0; i < hi.rows.size(); ++i)
            for (std::size_t j = 0; j < f.M_t; ++j) hi.rows[i][j] -= lo.rows[i][j];
        return hi;
    }
};

// ---------------------------------------------------------------------------
// Window bump and the truncated linear flow
// ---------------------------------------------------------------------------

/// C-infinity plateau: 1 on |t| <= 1, 0 outside |t| <= 2.
inline double psi_plateau(double t) {
    auto f = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
    double a = std::abs(t);
    if (a <= 1.0) return 1.0;
    if (a >= 2.0) return 0.0;
    double x = 2.0 - a; // ramps 0 -> 1 as a goes 2 -> 1
    return f(x) / (f(x) + f(1.0 - x));
}

/// psi_delta on the periodic window: the bump is centered at t = 0 and its
/// negative-time tail wraps to the top of the window.
inline double window_bump(double t, double delta, double T_w) {
    t = std::fmod(t, T_w);
    if (t < 0.0) t += T_w;
    if (t > T_w / 2.0) t -= T_w;
    return psi_plateau(t / delta);
}

/// L u = psi_delta(t) e^{-t d_x^3} phi on the window lattice.
inline SpaceTimeField truncated_linear_flow(const gkdv::SpectralState& phi, double delta,
                                            double T_w, std::size_t M_t, unsigned threads = 0) {
    require(2.0 * delta <= T_w / 2.0, "xsb.window", "bump support must fit inside the window");
    const std::int64_t N_x = phi.band();
    TimeSampledField samples = make_samples(N_x, T_w, M_t);
    parallel_chunks(M_t, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) {
            double t_grid = samples.time_at(k);
            double t = t_grid > T_w / 2.0 ? t_grid - T_w : t_grid; // wrapped signed time
            double cut = psi_plateau(t / delta);
            auto& col = samples.columns[k];
            if (cut == 0.0) continue;
            for (std::int64_t n = -N_x; n <= N_x; ++n) {
                double n3 = double(n) * double(n) * double(n);
                col[std::size_t(n + N_x)] =
                    cut * phi.coeff(n) * unit_phase(mul_mod1(n3, t / two_pi));
            }
        }
    }, threads, 64);
    return to_spectrum(samples, threads);
}

struct LinearEstimateReport {
    double s = 0.0;
    double phi_hs = 0.0;
    std::vector<std::pair<double, double>> delta_and_ratio;
    double drift = 1.0;
};

/// Lemma-style check: ||L u||_{Y_s} / ||phi||_{H^s} should not depend on the
/// truncation scale; asserts max/min <= 4 over the delta ladder.
inline LinearEstimateReport linear_estimate_check(const gkdv::SpectralState& phi, double s,
                                                  const std::vector<double>& delta_list,
                                                  unsigned threads = 0) {
    require(s > 0.5, "xsb.regularity", "linear estimate check needs s > 1/2");
    LinearEstimateReport rep;
    rep.s = s;
    rep.phi_hs = gkdv::hs_norm(phi, s);
    require(rep.phi_hs > 0.0, "xsb.zero_data", "phi must be nonzero");
    double delta_max = *std::max_element(delta_list.begin(), delta_list.end());
    const double T_w = 8.0 * delta_max;
    const std::int64_t N_x = phi.band();
    std::size_t M_t = next_pow2(std::size_t(64.0 * double(N_x * N_x * N_x) * T_w / two_pi) + 1);
    M_t = std::min(M_t, std::size_t(1) << 20);
    M_t = std::max(M_t, std::size_t(1024));
    for (double delta : delta_list) {
        SpaceTimeField Lu = truncated_linear_flow(phi, delta, T_w, M_t, threads);
        rep.delta_and_ratio.emplace_back(delta, ys_norm(Lu, s) / rep.phi_hs);
    }
    double lo = 1e300, hi = 0.0;
    for (const auto& [d, r] : rep.delta_and_ratio) { lo = std::min(lo, r); hi = std::max(hi, r); }
    rep.drift = hi / lo;
    require(rep.drift <= 4.0, "xsb.linear_estimate_drift",
            "||Lu||_{Y_s}/||phi||_{H^s} drifted by " + std::to_string(rep.drift));
    return rep;
}

// ---------------------------------------------------------------------------
// Solver windows and the nonlinear delta-scaling
// ---------------------------------------------------------------------------

/// Runs the solver forward to +2 delta and backward to -2 delta, samples the
/// trajectory on the window lattice, and applies psi_delta. The returned
/// field is the truncated representative of the solution near t = 0.
inline TimeSampledField solver_window_samples(const gkdv::SpectralState& phi,
                                              const gkdv::Nonlinearity& F, bool mean_removed,
                                              double delta, double T_w, std::size_t M_t) {
    require(2.0 * delta < T_w / 2.0, "xsb.window", "bump support must fit inside the window");
    const std::int64_t N_x = phi.band();
    TimeSampledField samples = make_samples(N_x, T_w, M_t);
    const double dt = T_w / double(M_t);
    const std::size_t steps_half = std::size_t(std::ceil(2.0 * delta / dt)) + 1;

    gkdv::SolverConfig cfg;
    cfg.F = F;
    cfg.mean_removed = mean_removed;
    cfg.dt = dt;
    cfg.store_every = 1;
    cfg.T = double(steps_half) * dt;

    auto put = [&](const gkdv::SpectralState& st, std::size_t col, double signed_t) {
        double cut = psi_plateau(signed_t / delta);
        auto& c = samples.columns[col];
        for (std::int64_t n = -N_x; n <= N_x; ++n)
            c[std::size_t(n + N_x)] = cut * st.coeff(n);
    };

    gkdv::Trajectory fwd = gkdv::solve(phi, cfg);
    for (std::size_t i = 0; i < fwd.states.size(); ++i) {
        double t = fwd.states[i].time;
        if (t > 2.0 * delta + dt) break;
        std::size_t col = std::size_t(std::llround(t / dt));
        if (col < M_t) put(fwd.states[i], col, t);
    }
    cfg.T = -cfg.T;
    gkdv::Trajectory bwd = gkdv::solve(phi, cfg);
    for (std::size_t i = 1; i < bwd.states.size(); ++i) {
        double t = bwd.states[i].time; // negative
        if (t < -(2.0 * delta + dt)) break;
        std::size_t col = M_t - std::size_t(std::llround(-t / dt));
        if (col < M_t) put(bwd.states[i], col, t);
    }
    return samples;
}

/// w = (F(u) - mean F(u)) * u_x column by column, alias-free on a grid that
/// resolves the (k+1)-fold product band; output band 4 N_x.
inline TimeSampledField nonlinear_w_samples(const TimeSampledField& u,
                                            const gkdv::Nonlinearity& F, unsigned threads = 0) {
    const std::int64_t N_out = 4 * u.N_x;
    const std::size_t M_x = next_pow2(std::size_t(2 * (N_out + u.N_x) + 2));
    TimeSampledField w = make_samples(N_out, u.T_w, u.M_t);
    parallel_chunks(u.M_t, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) {
            const auto& col = u.columns[k];
            std::vector<complexd> u_grid = synthesize_modes(col, M_x);
            std::vector<complexd> ux_coeff(col.size());
            for (std::int64_t n = -u.N_x; n <= u.N_x; ++n)
                ux_coeff[std::size_t(n + u.N_x)] =
                    complexd{0.0, double(n)} * col[std::size_t(n + u.N_x)];
            std::vector<complexd> ux_grid = synthesize_modes(ux_coeff, M_x);
            double mean = 0.0;
            std::vector<double> fu(M_x);
            for (std::size_t g = 0; g < M_x; ++g) {
                fu[g] = F.eval(u_grid[g].real());
                mean += fu[g];
            }
            mean /= double(M_x);
            std::vector<complexd> prod(M_x);
            for (std::size_t g = 0; g < M_x; ++g)
                prod[g] = (fu[g] - mean) * ux_grid[g].real();
            fft_plan(M_x).forward(prod.data());
            auto& out = w.columns[k];
            for (std::int64_t n = -N_out; n <= N_out; ++n) {
                std::size_t g = n >= 0 ? std::size_t(n) : M_x - std::size_t(-n);
                out[std::size_t(n + N_out)] = prod[g] / double(M_x);
            }
        }
    }, threads, 64);
    return w;
}

struct NonlinearScalingReport {
    double s = 0.0;
    std::vector<double> deltas;
    std::vector<double> lhs;        // nonlinear LHS per delta
    std::vector<double> u_ys;       // ||u_rep||_{Y_s} per delta
    std::vector<double> normalized; // lhs / u_ys^{exponent}
    double theta = 0.0;             // fitted slope of log(normalized) vs log(delta)
};

/// Prop-style delta-scaling: solves from phi, truncates at each delta,
/// assembles w, and fits theta in LHS / ||u||^{k+1} ~ delta^theta.
inline NonlinearScalingReport nonlinear_scaling_check(const gkdv::SpectralState& phi,
                                                      const gkdv::Nonlinearity& F,
                                                      double s, std::vector<double> delta_list,
                                                      unsigned threads = 0) {
    require(s > 0.5, "xsb.regularity", "nonlinear scaling check needs s > 1/2");
    require(delta_list.size() >= 2, "xsb.scaling_points", "need at least two deltas");
    std::sort(delta_list.begin(), delta_list.end());
    NonlinearScalingReport rep;
    rep.s = s;
    const double delta_max = delta_list.back();
    const double T_w = 8.0 * delta_max;
    const std::int64_t N_x = phi.band();
    std::size_t M_t = next_pow2(std::size_t(64.0 * double(N_x * N_x * N_x) * T_w / two_pi) + 1);
    M_t = std::min(M_t, std::size_t(1) << 17);
    M_t = std::max(M_t, std::size_t(4096));
    const int exponent = F.kind == gkdv::Nonlinearity::Kind::power ? F.k + 1 : 4;

    for (double delta : delta_list) {
        TimeSampledField u = solver_window_samples(phi, F, true, delta, T_w, M_t);
        SpaceTimeField u_spec = to_spectrum(u, threads);
        TimeSampledField w = nonlinear_w_samples(u, F, threads);
        SpaceTimeField w_spec = to_spectrum(w, threads);
        double lhs = nonlinear_lhs(w_spec, s);
        double uy = ys_norm(u_spec, s);
        rep.deltas.push_back(delta);
        rep.lhs.push_back(lhs);
        rep.u_ys.push_back(uy);
        rep.normalized.push_back(lhs / std::pow(uy, double(exponent)));
    }
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < rep.deltas.size(); ++i) {
        require(rep.normalized[i] > 0.0, "xsb.scaling_degenerate",
                "nonlinear LHS vanished; fit would be degenerate");
        pts.emplace_back(rep.deltas[i], rep.normalized[i]);
    }
    rep.theta = counting::scaling_fit(pts).slope;
    return rep;
}

// ---------------------------------------------------------------------------
// Embeddings
// ---------------------------------------------------------------------------

enum class Embedding { emb1, emb2, emb3 };

struct EmbeddingReport {
    Embedding which;
    std::vector<double> ratios; // one per resolution rung
    double drift = 1.0;
};

/// Random field with spectrum concentrated near the cubic curve:
/// C(n, j) = g <n>^{-0.8} <lambda_j - n^3>^{-0.9} for seeded Gaussian g.
inline SpaceTimeField random_curve_field(std::int64_t N_x, double T_w, std::size_t M_t,
                                         std::uint64_t seed) {
    SpaceTimeField f = make_field(N_x, T_w, M_t);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::int64_t n = -N_x; n <= N_x; ++n) {
        double n3 = double(n) * double(n) * double(n);
        auto& row = f.row(n);
        for (std::size_t j = 0; j < M_t; ++j) {
            complexd g{gauss(rng), gauss(rng)};
            row[j] = g * std::pow(bracket(double(n)), -0.8) *
                     std::pow(bracket(f.lambda(j) - n3), -0.9);
        }
    }
    return f;
}

/// Ratios ||u||_{L^p side} / ||u||_{X side} over a resolution ladder;
/// asserts the drift stays under a factor 4.
inline EmbeddingReport embedding_check(Embedding which, std::uint64_t seed = 1,
                                       unsigned threads = 0) {
    EmbeddingReport rep;
    rep.which = which;
    const double T_w = 2.0;
    const std::vector<std::pair<std::int64_t, std::size_t>> ladder = {
        {6, 1 << 12}, {9, 1 << 13}, {12, 1 << 14}};
    for (const auto& [N_x, M_t] : ladder) {
        SpaceTimeField u = random_curve_field(N_x, T_w, M_t, seed);
        const std::size_t M_x = next_pow2(std::size_t(4 * N_x));
        double num = 0.0, den = 1.0;
        switch (which) {
            case Embedding::emb1: // X_{0,1/3} into L^4
                num = grid_lp_norm(u, 4.0, M_x, threads);
                den = xsb_norm(u, 0.0, 1.0 / 3.0);
                break;
            case Embedding::emb2: // X_{1/4,1/2} into L^8, 8 < 6/(1-2a) = 12
                num = grid_lp_norm(u, 8.0, M_x, threads);
                den = xsb_norm(u, 0.25, 0.5);
                break;
            case Embedding::emb3: // X_{1/4,1/4} into L^3_t L^3_x, 3 < 1/a = 4
                num = grid_mixed_norm(u, 3.0, 3.0, M_x, threads);
                den = xsb_norm(u, 0.25, 0.25);
                break;
        }
        rep.ratios.push_back(num / den);
    }
    double lo = 1e300, hi = 0.0;
    for (double r : rep.ratios) { lo = std::min(lo, r); hi = std::max(hi, r); }
    rep.drift = hi / lo;
    require(rep.drift <= 4.0, "xsb.embedding_drift",
            "embedding ratio drifted by " + std::to_string(rep.drift));
    return rep;
}

// ---------------------------------------------------------------------------
// Littlewood-Paley telescoping of F(u)
// ---------------------------------------------------------------------------

/// sup over the grid of | sum_{K in [K_min, K_max]} (F(P_K u) - F(P_{K/2} u))
/// + F(P_{K_min/2} u) - F(P_{K_max} u) |; the sum telescopes exactly, so the
/// defect is pure roundoff.
inline double lp_telescope_check(const SpaceTimeField& u, const std::function<double(double)>& F,
                                 double K_min, double K_max, unsigned threads = 0) {
    require(K_min > 0.0 && K_max >= K_min, "xsb.telescope_range", "need 0 < K_min <= K_max");
    const std::size_t M_x = next_pow2(std::size_t(4 * u.N_x + 4));
    std::vector<double> scales;
    for (double K = K_min; K <= K_max * (1.0 + 1e-12); K *= 2.0) scales.push_back(K);

    // grid values of P_K u for every needed cutoff (including K_min/2)
    std::vector<TimeSampledField> cuts;
    std::vector<double> cut_scales{K_min / 2.0};
    for (double K : scales) cut_scales.push_back(K);
    for (double K : cut_scales)
        cuts.push_back(to_time_samples(DyadicProjector{DyadicProjector::Axis::space, K}.cutoff(u),
                                       threads));

    double defect = 0.0;
    for (std::size_t k = 0; k < u.M_t; ++k) {
        std::vector<std::vector<complexd>> grids(cuts.size());
        for (std::size_t c = 0; c < cuts.size(); ++c)
            grids[c] = synthesize_modes(cuts[c].columns[k], M_x);
        for (std::size_t g = 0; g < M_x; ++g) {
            double sum = 0.0;
            for (std::size_t c = 1; c < cuts.size(); ++c)
                sum += F(grids[c][g].real()) - F(grids[c - 1][g].real());
            double direct = F(grids.back()[g].real()) - F(grids.front()[g].real());
            defect = std::max(defect, std::abs(sum - direct));
        }
    }
    return defect;
}

} // namespace restrictlab::xsb
