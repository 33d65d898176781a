#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <istream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "restrictlab/common.hpp"
#include "restrictlab/fft.hpp"

namespace restrictlab::gkdv {

/// Periodic gKdV on x in [0, 2pi): u_t + u_xxx + F(u) u_x = 0, integrated
/// pseudospectrally. States hold Fourier coefficients uhat(n) in FFT slot
/// order (slot j holds n = j for j <= M/2, else n = j - M); the dealiased
/// band is |n| <= M/3 and everything above it stays identically zero.

struct SpectralState {
    std::size_t M = 0;
    std::vector<complexd> uhat;
    double time = 0.0;

    std::int64_t band() const { return std::int64_t(M) / 3; }
    std::int64_t freq(std::size_t slot) const {
        return slot <= M / 2 ? std::int64_t(slot) : std::int64_t(slot) - std::int64_t(M);
    }
    std::size_t slot(std::int64_t n) const {
        return n >= 0 ? std::size_t(n) : M - std::size_t(-n);
    }
    complexd coeff(std::int64_t n) const {
        return std::llabs(n) <= std::int64_t(M / 2) ? uhat[slot(n)] : complexd{0.0, 0.0};
    }
};

inline SpectralState make_state(std::size_t M) {
    require(is_pow2(M) && M >= 8, "gkdv.modes", "M must be a power of two >= 8");
    SpectralState st;
    st.M = M;
    st.uhat.assign(M, complexd{0.0, 0.0});
    return st;
}

/// Zeroes everything above the 2/3 band.
inline void apply_band_limit(SpectralState& st) {
    const std::int64_t band = st.band();
    for (std::size_t j = 0; j < st.M; ++j)
        if (std::llabs(st.freq(j)) > band) st.uhat[j] = complexd{0.0, 0.0};
}

/// Asserts uhat(-n) = conj(uhat(n)) to roundoff, then re-symmetrizes exactly.
inline void enforce_reality(SpectralState& st, double tol = 1e-11) {
    const std::int64_t band = st.band();
    double scale = 0.0;
    for (const auto& v : st.uhat) scale = std::max(scale, std::abs(v));
    require(std::abs(st.uhat[0].imag()) <= tol * std::max(1.0, scale), "gkdv.reality",
            "zero mode developed an imaginary part");
    st.uhat[0] = complexd{st.uhat[0].real(), 0.0};
    for (std::int64_t n = 1; n <= band; ++n) {
        complexd a = st.uhat[st.slot(n)], b = st.uhat[st.slot(-n)];
        require(std::abs(a - std::conj(b)) <= tol * std::max(1.0, scale), "gkdv.reality",
                "reality symmetry broken at mode " + std::to_string(n));
        complexd avg = 0.5 * (a + std::conj(b));
        st.uhat[st.slot(n)] = avg;
        st.uhat[st.slot(-n)] = std::conj(avg);
    }
}

/// Nonlinearity F in F(u) u_x: a power u^k, a general C^5 function, or zero.
struct Nonlinearity {
    enum class Kind { zero, power, general };
    Kind kind = Kind::zero;
    int k = 1;
    std::function<double(double)> func;

    static Nonlinearity none() { return {}; }
    static Nonlinearity power(int k) {
        require(k >= 1, "gkdv.power", "power nonlinearity needs k >= 1");
        Nonlinearity f;
        f.kind = Kind::power;
        f.k = k;
        return f;
    }
    static Nonlinearity general(std::function<double(double)> fn) {
        Nonlinearity f;
        f.kind = Kind::general;
        f.func = std::move(fn);
        return f;
    }

    double eval(double u) const {
        switch (kind) {
            case Kind::zero: return 0.0;
            case Kind::power: {
                double r = 1.0;
                for (int i = 0; i < k; ++i) r *= u;
                return r;
            }
            case Kind::general: return func(u);
        }
        return 0.0;
    }
    bool is_zero() const { return kind == Kind::zero; }
};

struct SolverConfig {
    Nonlinearity F;
    double dt = 1e-4;
    double T = 0.1;
    bool mean_removed = false;  // solve with F(u) replaced by F(u) - mean F(u)
    std::size_t store_every = 10;
    double blowup_threshold = 1e12;
};

class BlowupError : public std::runtime_error {
public:
    explicit BlowupError(double t)
        : std::runtime_error("solution blew up at t = " + std::to_string(t)), time_(t) {}
    double time() const { return time_; }
private:
    double time_;
};

/// H^s data with |n|^{-s-1/2-0.01} amplitudes and seeded uniform phases;
/// hat phi(0) = amplitude, reality-symmetric, band-limited.
struct SobolevSpec {
    double s = 1.0;
    std::uint64_t seed = 1;
    double amplitude = 1.0;
};

inline double hs_norm(const SpectralState& st, double s) {
    double acc = 0.0;
    for (std::size_t j = 0; j < st.M; ++j) {
        double n = double(std::llabs(st.freq(j)));
        acc += std::pow(1.0 + n, 2.0 * s) * std::norm(st.uhat[j]);
    }
    return std::sqrt(acc);
}

inline SpectralState make_hs_data(std::size_t M, const SobolevSpec& spec) {
    SpectralState st = make_state(M);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> angle(0.0, two_pi);
    st.uhat[0] = complexd{spec.amplitude, 0.0};
    for (std::int64_t n = 1; n <= st.band(); ++n) {
        double mag = spec.amplitude * std::pow(double(n), -spec.s - 0.51);
        double th = angle(rng);
        complexd v = mag * complexd{std::cos(th), std::sin(th)};
        st.uhat[st.slot(n)] = v;
        st.uhat[st.slot(-n)] = std::conj(v);
    }
    return st;
}

/// Spatial mean of u (the n = 0 coefficient).
inline double mass(const SpectralState& st) { return st.uhat[0].real(); }

/// (1/2pi) integral of u^2 = sum |uhat|^2.
inline double momentum(const SpectralState& st) {
    double acc = 0.0;
    for (const auto& v : st.uhat) acc += std::norm(v);
    return acc;
}

namespace detail {

/// Nonlinear term hat of F(u) u_x, evaluated alias-free on a 2M grid and
/// truncated back to the band. The continuum flux is an exact x-derivative,
/// so its mean vanishes; the zero mode is set to zero accordingly. When
/// mean_removed is set, F(u) has its grid mean subtracted first.
inline std::vector<complexd> nonlinear_hat(const SpectralState& st, const Nonlinearity& F,
                                           bool mean_removed) {
    const std::size_t M = st.M, G = 2 * M;
    std::vector<complexd> u_grid(G, complexd{0.0, 0.0});
    std::vector<complexd> ux_grid(G, complexd{0.0, 0.0});
    for (std::size_t j = 0; j < M; ++j) {
        std::int64_t n = st.freq(j);
        if (std::llabs(n) > st.band()) continue;
        std::size_t g = n >= 0 ? std::size_t(n) : G - std::size_t(-n);
        u_grid[g] = st.uhat[j];
        ux_grid[g] = complexd{0.0, double(n)} * st.uhat[j];
    }
    fft_inverse(u_grid);
    fft_inverse(ux_grid);
    double mean_F = 0.0;
    std::vector<complexd> prod(G);
    for (std::size_t g = 0; g < G; ++g) {
        double fu = F.eval(u_grid[g].real());
        prod[g] = fu; // imaginary parts of u_grid are roundoff; F uses Re u
        mean_F += fu;
    }
    mean_F /= double(G);
    for (std::size_t g = 0; g < G; ++g) {
        double fu = prod[g].real() - (mean_removed ? mean_F : 0.0);
        prod[g] = fu * ux_grid[g].real();
    }
    fft_forward(prod);
    std::vector<complexd> out(M, complexd{0.0, 0.0});
    const std::int64_t band = st.band();
    for (std::int64_t n = -band; n <= band; ++n) {
        std::size_t g = n >= 0 ? std::size_t(n) : G - std::size_t(-n);
        std::size_t s = n >= 0 ? std::size_t(n) : M - std::size_t(-n);
        out[s] = prod[g] / double(G);
    }
    out[0] = complexd{0.0, 0.0}; // flux of a derivative has no mean
    return out;
}

} // namespace detail

/// One integrating-factor RK4 step: the Airy phase e^{i n^3 dt} is applied
/// exactly, the nonlinear flux explicitly.
inline void step(SpectralState& st, const SolverConfig& cfg) {
    const std::size_t M = st.M;
    const double h = cfg.dt;
    std::vector<complexd> E1(M), E2(M);
    for (std::size_t j = 0; j < M; ++j) {
        double n = double(st.freq(j));
        E1[j] = unit_phase(mul_mod1(n * n * n, 0.5 * h / two_pi));
        E2[j] = unit_phase(mul_mod1(n * n * n, h / two_pi));
    }
    auto N = [&](const SpectralState& s) { return detail::nonlinear_hat(s, cfg.F, cfg.mean_removed); };

    SpectralState stage = st;
    const std::vector<complexd> u0 = st.uhat;

    std::vector<complexd> N1, N2, N3, N4;
    if (cfg.F.is_zero()) {
        for (std::size_t j = 0; j < M; ++j) st.uhat[j] = E2[j] * u0[j];
    } else {
        N1 = N(st);
        for (std::size_t j = 0; j < M; ++j) stage.uhat[j] = E1[j] * (u0[j] - 0.5 * h * N1[j]);
        N2 = N(stage);
        for (std::size_t j = 0; j < M; ++j) stage.uhat[j] = E1[j] * u0[j] - 0.5 * h * N2[j];
        N3 = N(stage);
        for (std::size_t j = 0; j < M; ++j) stage.uhat[j] = E2[j] * u0[j] - h * E1[j] * N3[j];
        N4 = N(stage);
        for (std::size_t j = 0; j < M; ++j)
            st.uhat[j] = E2[j] * u0[j] -
                         (h / 6.0) * (E2[j] * N1[j] + 2.0 * E1[j] * (N2[j] + N3[j]) + N4[j]);
    }
    st.time += h;

    double worst = 0.0;
    for (const auto& v : st.uhat) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw BlowupError(st.time);
        worst = std::max(worst, std::abs(v));
    }
    if (worst > cfg.blowup_threshold) throw BlowupError(st.time);
    apply_band_limit(st);
    enforce_reality(st);
}

struct Trajectory {
    std::vector<SpectralState> states; // stored cadence, includes t=0 and t=T
    double mass_drift = 0.0;           // max |mass(t) - mass(0)|
    double momentum_drift = 0.0;       // max |momentum(t) - momentum(0)|
};

inline Trajectory solve(const SpectralState& phi, const SolverConfig& cfg) {
    require(cfg.dt > 0.0, "gkdv.dt", "dt must be positive");
    require(cfg.T != 0.0, "gkdv.horizon", "T must be nonzero");
    require(cfg.store_every >= 1, "gkdv.cadence", "store_every must be >= 1");
    SpectralState st = phi;
    apply_band_limit(st);
    enforce_reality(st);
    SolverConfig stepcfg = cfg;
    const double direction = cfg.T > 0.0 ? 1.0 : -1.0;
    stepcfg.dt = direction * cfg.dt;
    const std::size_t steps = std::size_t(std::llround(std::abs(cfg.T) / cfg.dt));
    require(double(steps) * cfg.dt == std::abs(cfg.T) ||
                std::abs(double(steps) * cfg.dt - std::abs(cfg.T)) < 1e-12 * std::abs(cfg.T),
            "gkdv.horizon", "T must be an integer multiple of dt");

    Trajectory traj;
    traj.states.push_back(st);
    const double m0 = mass(st), p0 = momentum(st);
    for (std::size_t i = 1; i <= steps; ++i) {
        step(st, stepcfg);
        traj.mass_drift = std::max(traj.mass_drift, std::abs(mass(st) - m0));
        traj.momentum_drift = std::max(traj.momentum_drift, std::abs(momentum(st) - p0));
        if (i % cfg.store_every == 0 || i == steps) traj.states.push_back(st);
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Gauge transform between the original and mean-removed flows
// ---------------------------------------------------------------------------

/// Accumulated drift D(t_k) = int_0^{t_k} mean(F(v(tau))) d tau by trapezoid
/// on the stored cadence.
inline std::vector<double> gauge_drift(const Trajectory& traj, const Nonlinearity& F) {
    std::vector<double> mean_f(traj.states.size());
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const SpectralState& st = traj.states[i];
        const std::size_t G = 2 * st.M;
        std::vector<complexd> grid(G, complexd{0.0, 0.0});
        for (std::size_t j = 0; j < st.M; ++j) {
            std::int64_t n = st.freq(j);
            std::size_t g = n >= 0 ? std::size_t(n) : G - std::size_t(-n);
            grid[g] = st.uhat[j];
        }
        fft_inverse(grid);
        double acc = 0.0;
        for (const auto& v : grid) acc += F.eval(v.real());
        mean_f[i] = acc / double(G);
    }
    std::vector<double> drift(traj.states.size(), 0.0);
    for (std::size_t i = 1; i < traj.states.size(); ++i) {
        double dt = traj.states[i].time - traj.states[i - 1].time;
        drift[i] = drift[i - 1] + 0.5 * dt * (mean_f[i] + mean_f[i - 1]);
    }
    return drift;
}

/// u(x,t) = v(x - D(t), t): multiplies mode n by e^{-i n D(t)}.
inline Trajectory gauge_transform(const Trajectory& v_traj, const Nonlinearity& F) {
    Trajectory out = v_traj;
    std::vector<double> drift = gauge_drift(v_traj, F);
    for (std::size_t i = 0; i < out.states.size(); ++i) {
        SpectralState& st = out.states[i];
        for (std::size_t j = 0; j < st.M; ++j) {
            double n = double(st.freq(j));
            st.uhat[j] *= unit_phase(-n * drift[i] / two_pi);
        }
    }
    return out;
}

/// The stated inverse v(x,t) = u(x + D'(t), t) with D' accumulated from u.
inline Trajectory gauge_inverse(const Trajectory& u_traj, const Nonlinearity& F) {
    Trajectory out = u_traj;
    std::vector<double> drift = gauge_drift(u_traj, F);
    for (std::size_t i = 0; i < out.states.size(); ++i) {
        SpectralState& st = out.states[i];
        for (std::size_t j = 0; j < st.M; ++j) {
            double n = double(st.freq(j));
            st.uhat[j] *= unit_phase(n * drift[i] / two_pi);
        }
    }
    return out;
}

inline double l2_distance(const SpectralState& a, const SpectralState& b) {
    require(a.M == b.M, "gkdv.state_mismatch", "states must share M");
    double acc = 0.0;
    for (std::size_t j = 0; j < a.M; ++j) acc += std::norm(a.uhat[j] - b.uhat[j]);
    return std::sqrt(acc);
}

/// Solves the mean-removed flow, gauges it, and solves the original flow
/// directly; returns the sup over stored times of the L^2 discrepancy.
inline double gauge_equivalence_check(const SpectralState& phi, const Nonlinearity& F,
                                      const SolverConfig& cfg) {
    SolverConfig mean_cfg = cfg;
    mean_cfg.F = F;
    mean_cfg.mean_removed = true;
    Trajectory v = solve(phi, mean_cfg);
    Trajectory gauged = gauge_transform(v, F);

    SolverConfig direct_cfg = cfg;
    direct_cfg.F = F;
    direct_cfg.mean_removed = false;
    Trajectory direct = solve(phi, direct_cfg);

    require(gauged.states.size() == direct.states.size(), "gkdv.cadence",
            "matched runs stored different cadences");
    double worst = 0.0;
    for (std::size_t i = 0; i < gauged.states.size(); ++i)
        worst = std::max(worst, l2_distance(gauged.states[i], direct.states[i]));
    return worst;
}

// ---------------------------------------------------------------------------
// Well-posedness probes
// ---------------------------------------------------------------------------

struct ProbeRow {
    double delta = 0.0;
    double ratio = 0.0;       // sup_t ||u - u_pert||_{H^s} / delta
    double growth = 0.0;      // sup_t ||u(t)||_{H^s} / ||phi||_{H^s}
};

struct ProbeReport {
    double s = 0.0;
    double T = 0.0;
    double phi_hs = 0.0;
    std::vector<ProbeRow> rows;
};

/// Data-continuity probe: solves from phi and phi + delta * (unit H^s bump)
/// for each delta and reports the sup-in-time H^s ratio.
inline ProbeReport wellposedness_probe(std::size_t M, const SobolevSpec& spec,
                                       SolverConfig cfg, const std::vector<double>& delta_list) {
    require(spec.s > 0.5, "gkdv.probe_regularity", "well-posedness probes need s > 1/2");
    ProbeReport rep;
    rep.s = spec.s;
    rep.T = cfg.T;
    SpectralState phi = make_hs_data(M, spec);
    rep.phi_hs = hs_norm(phi, spec.s);

    SobolevSpec pert_spec = spec;
    pert_spec.seed = spec.seed + 7777;
    SpectralState bump = make_hs_data(M, pert_spec);
    double bump_norm = hs_norm(bump, spec.s);
    for (auto& v : bump.uhat) v /= bump_norm;

    Trajectory base = solve(phi, cfg);
    for (double delta : delta_list) {
        ProbeRow row;
        row.delta = delta;
        if (delta == 0.0) {
            rep.rows.push_back(row);
            continue;
        }
        SpectralState phi2 = phi;
        for (std::size_t j = 0; j < M; ++j) phi2.uhat[j] += delta * bump.uhat[j];
        Trajectory pert = solve(phi2, cfg);
        double worst = 0.0, growth = 0.0;
        for (std::size_t i = 0; i < base.states.size(); ++i) {
            SpectralState diff = base.states[i];
            for (std::size_t j = 0; j < M; ++j) diff.uhat[j] -= pert.states[i].uhat[j];
            worst = std::max(worst, hs_norm(diff, spec.s));
            growth = std::max(growth, hs_norm(base.states[i], spec.s));
        }
        row.ratio = worst / delta;
        row.growth = growth / rep.phi_hs;
        rep.rows.push_back(row);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Trajectory export: columnar text and the GKDV0001 binary block
// ---------------------------------------------------------------------------

inline void write_trajectory_text(const Trajectory& traj, std::ostream& os) {
    os << "# time mode_index re im\n";
    char buf[96];
    for (const auto& st : traj.states) {
        for (std::size_t j = 0; j < st.M; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g %lld %.17g %.17g\n", st.time,
                          (long long)st.freq(j), st.uhat[j].real(), st.uhat[j].imag());
            os << buf;
        }
    }
}

inline constexpr char trajectory_magic[8] = {'G', 'K', 'D', 'V', '0', '0', '0', '1'};

/// Header: 8-byte magic, u32 version, u32 reserved (16 bytes total), then
/// little-endian u64 M, u64 state count; per state one f64 time and M
/// complex coefficients as (re, im) f64 pairs in slot order.
inline void write_trajectory_binary(const Trajectory& traj, std::ostream& os) {
    os.write(trajectory_magic, 8);
    std::uint32_t version = 1, reserved = 0;
    os.write(reinterpret_cast<const char*>(&version), 4);
    os.write(reinterpret_cast<const char*>(&reserved), 4);
    std::uint64_t M = traj.states.empty() ? 0 : traj.states.front().M;
    std::uint64_t count = traj.states.size();
    os.write(reinterpret_cast<const char*>(&M), 8);
    os.write(reinterpret_cast<const char*>(&count), 8);
    for (const auto& st : traj.states) {
        os.write(reinterpret_cast<const char*>(&st.time), 8);
        for (const auto& v : st.uhat) {
            double re = v.real(), im = v.imag();
            os.write(reinterpret_cast<const char*>(&re), 8);
            os.write(reinterpret_cast<const char*>(&im), 8);
        }
    }
}

inline Trajectory read_trajectory_binary(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    require(is.good() && std::memcmp(magic, trajectory_magic, 8) == 0, "gkdv.bad_magic",
            "not a GKDV0001 trajectory block");
    std::uint32_t version = 0, reserved = 0;
    is.read(reinterpret_cast<char*>(&version), 4);
    is.read(reinterpret_cast<char*>(&reserved), 4);
    require(version == 1, "gkdv.bad_version", "unsupported trajectory version");
    std::uint64_t M = 0, count = 0;
    is.read(reinterpret_cast<char*>(&M), 8);
    is.read(reinterpret_cast<char*>(&count), 8);
    Trajectory traj;
    for (std::uint64_t i = 0; i < count; ++i) {
        SpectralState st;
        st.M = std::size_t(M);
        st.uhat.resize(st.M);
        is.read(reinterpret_cast<char*>(&st.time), 8);
        for (auto& v : st.uhat) {
            double re = 0, im = 0;
            is.read(reinterpret_cast<char*>(&re), 8);
            is.read(reinterpret_cast<char*>(&im), 8);
            v = complexd{re, im};
        }
        require(is.good(), "gkdv.truncated", "trajectory block ended early");
        traj.states.push_back(std::move(st));
    }
    return traj;
}

} // namespace restrictlab::gkdv
