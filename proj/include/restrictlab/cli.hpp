#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "restrictlab/common.hpp"
#include "restrictlab/config.hpp"
#include "restrictlab/counting.hpp"
#include "restrictlab/expsum.hpp"
#include "restrictlab/gkdv.hpp"
#include "restrictlab/kernel_decomp.hpp"
#include "restrictlab/levelset.hpp"
#include "restrictlab/report.hpp"
#include "restrictlab/xsb.hpp"

namespace restrictlab::cli {

using report::ResultRecord;

namespace detail {

inline std::string join_i64(const std::vector<std::int64_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

inline std::string join_f(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + report::format_double(v[i]);
    return s;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

inline gkdv::Nonlinearity parse_nonlinearity(const std::string& name) {
    if (name == "none") return gkdv::Nonlinearity::none();
    if (name == "sin") return gkdv::Nonlinearity::general([](double u) { return std::sin(u); });
    if (name.size() >= 2 && name[0] == 'k') {
        int k = std::stoi(name.substr(1));
        return gkdv::Nonlinearity::power(k);
    }
    throw invariant_violation("cli.nonlinearity",
                              "unknown nonlinearity '" + name + "' (use none, sin, or k<INT>)");
}

// ---------------------------------------------------------------------------
// Subcommand handlers
// ---------------------------------------------------------------------------

struct CountArgs {
    std::vector<std::int64_t> N{1, 2, 3, 4};
    std::int64_t b = 2;
    std::string method = "mim";
    bool fit = false;
    unsigned threads = 0;
};

inline ResultRecord run_count(const CountArgs& a) {
    Timer timer;
    ResultRecord rec;
    rec.experiment = "count";
    rec.param("N", join_i64(a.N));
    rec.param("b", a.b);
    rec.param("method", a.method);
    rec.table_header = {"N", "b", "method", "S", "diagonal_ratio", "omega_min_ratio"};
    std::vector<std::pair<double, double>> pts;
    for (std::int64_t N : a.N) {
        std::vector<counting::CountResult> results;
        if (a.method == "brute" || a.method == "both")
            results.push_back(counting::count_bruteforce(N, a.b));
        if (a.method == "mim" || a.method == "both") {
            counting::CountConfig cc;
            cc.threads = a.threads;
            results.push_back(counting::count_meet_in_middle(N, a.b, cc));
        }
        require(!results.empty(), "cli.count_method", "method must be mim, brute, or both");
        if (results.size() == 2)
            require(results[0].value == results[1].value, "counting.oracle_equivalence",
                    "brute force and meet-in-the-middle disagree");
        for (const auto& res : results) {
            auto lb = counting::verify_lower_bound(res);
            rec.table_rows.push_back({std::to_string(N), std::to_string(a.b),
                                      res.method == counting::CountMethod::brute ? "brute" : "mim",
                                      res.value_string(), report::format_double(lb.diagonal_ratio),
                                      report::format_double(lb.omega_min_ratio)});
        }
        pts.emplace_back(double(N), results.back().value_double());
    }
    if (a.fit && pts.size() >= 4) {
        auto fit = counting::scaling_fit(pts);
        rec.scalar("slope", fit.slope);
        rec.scalar("intercept", fit.intercept);
        rec.scalar("max_residual", fit.max_residual);
    }
    rec.elapsed_seconds = timer.seconds();
    return rec;
}

struct WeylArgs {
    std::vector<std::int64_t> N{8, 16, 32};
    std::uint64_t trials = 2000;
    std::uint64_t seed = 1234;
};

inline ResultRecord run_weyl(const WeylArgs& a) {
    Timer timer;
    ResultRecord rec;
    rec.experiment = "weyl";
    rec.seed = a.seed;
    rec.param("N", join_i64(a.N));
    rec.param("trials", std::int64_t(a.trials));
    rec.table_header = {"N", "trials", "admitted", "max_ratio", "mean_ratio", "argmax_q"};
    double lo = 1e300, hi = 0.0;
    for (std::int64_t N : a.N) {
        auto rep = expsum::weyl_bound_report(N, a.trials, a.seed);
        rec.table_rows.push_back({std::to_string(N), std::to_string(rep.trials),
                                  std::to_string(rep.admitted), report::format_double(rep.max_ratio),
                                  report::format_double(rep.mean_ratio),
                                  std::to_string(rep.argmax_q)});
        lo = std::min(lo, rep.max_ratio);
        hi = std::max(hi, rep.max_ratio);
    }
    if (a.N.size() >= 2) rec.scalar("max_ratio_drift", hi / lo);
    rec.elapsed_seconds = timer.seconds();
    return rec;
}

struct FareyArgs {
    std::int64_t Q = 8;
    std::int64_t max_rows = 16;
};

inline ResultRecord run_farey(const FareyArgs& a) {
    Timer timer;
    ResultRecord rec;
    rec.experiment = "farey";
    rec.param("Q", a.Q);
    arith::FareySystem sys = arith::farey_system(a.Q);
    rec.scalar("count", std::int64_t(sys.fractions.size()));
    std::int64_t phi_sum = 0;
    for (std::int64_t q = a.Q; q <= 5 * a.Q; ++q) phi_sum += arith::euler_phi(q);
    rec.scalar("phi_sum", phi_sum);
    rec.table_header = {"a", "q"};
    for (std::size_t i = 0; i < sys.fractions.size() && std::int64_t(i) < a.max_rows; ++i)
        rec.table_rows.push_back({std::to_string(sys.fractions[i].a),
                                  std::to_string(sys.fractions[i].q)});
    rec.elapsed_seconds = timer.seconds();
    return rec;
}

struct DecomposeArgs {
    std::vector<std::int64_t> N{8, 16, 32};
    double q_exponent = 2.0;
    unsigned threads = 0;
};

inline ResultRecord run_decompose(const DecomposeArgs& a) {
    Timer timer;
    ResultRecord rec;
    rec.experiment = "decompose";
    rec.param("N", join_i64(a.N));
    rec.param("q_exponent", a.q_exponent);
    auto q_rule = [&](std::int64_t N) {
        double q = std::pow(double(N), a.q_exponent);
        std::int64_t Q = std::int64_t(q);
        Q = std::max(Q, N * N);
        Q = std::min(Q, N * N * N);
        return Q;
    };
    auto rep = kernel_decomp::verify_prop1(a.N, q_rule, a.threads);
    rec.table_header = {"N", "Q", "phi_hat0", "sup_k1", "ratio1", "ratio2", "argmax_k"};
    for (const auto& row : rep.rows)
        rec.table_rows.push_back({std::to_string(row.N), std::to_string(row.Q),
                                  report::format_double(row.phi_hat0),
                                  report::format_double(row.sup_k1),
                                  report::format_double(row.ratio1),
                                  report::format_double(row.ratio2), std::to_string(row.argmax_k)});
    rec.scalar("ratio1_drift", rep.drift1);
    rec.scalar("ratio2_drift", rep.drift2);
    rec.elapsed_seconds = timer.seconds();
    return rec;
}

struct LevelsetArgs {
    std::vector<std::int64_t> N{8, 16, 32};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    double gate = levelset::cor1_gate_constant;
    bool thm2 = false;
    unsigned threads = 0;
};

inline std::vector<ResultRecord> run_levelset(const LevelsetArgs& a) {
    Timer timer;
    std::vector<ResultRecord> out;
    ResultRecord rec;
    rec.experiment = "levelset";
    rec.param("N", join_i64(a.N));
    rec.param("gate_constant", a.gate);
    auto rep = levelset::verify_cor1(a.N, a.seeds, a.gate, a.threads);
    rec.table_header = {"N", "sequence", "gate", "grid_sup", "value"};
    for (const auto& row : rep.rows)
        rec.table_rows.push_back({std::to_string(row.N), row.label,
                                  report::format_double(row.gate),
                                  report::format_double(row.grid_sup),
                                  report::format_double(row.value)});
    rec.scalar("drift", rep.drift);
    rec.elapsed_seconds = timer.seconds();
    out.push_back(rec);

    if (a.thm2) {
        for (std::int64_t N : a.N) {
            Timer t2;
            ResultRecord r2;
            r2.experiment = "levelset_thm2";
            r2.param("N", N);
            std::vector<std::int64_t> Q_grid{N * N, 2 * N * N};
            auto rep2 = levelset::verify_thm2(N, Q_grid, expsum::uniform_unit_sequence(N), a.threads);
            r2.table_header = {"lambda", "Q", "measure", "lhs", "rhs"};
            for (const auto& c : rep2.cells)
                r2.table_rows.push_back({report::format_double(c.lambda), std::to_string(c.Q),
                                         report::format_double(c.measure),
                                         report::format_double(c.lhs),
                                         report::format_double(c.rhs)});
            r2.scalar("min_slack", rep2.min_slack);
            r2.elapsed_seconds = t2.seconds();
            out.push_back(r2);
        }
    }
    return out;
}

struct StrichartzArgs {
    std::vector<std::int64_t> N{4, 8, 16, 32};
    double p = 10.0;
    int max_iterations = 500;
    int random_starts = 2;
    double tol = 1e-6;
    std::uint64_t seed = 20240901;
    bool fit = false;
    unsigned threads = 0;
};

inline ResultRecord run_strichartz(const StrichartzArgs& a) {
    Timer timer;
    ResultRecord rec;
    rec.experiment = "strichartz";
    rec.seed = a.seed;
    rec.param("N", join_i64(a.N));
    rec.param("p", a.p);
    rec.param("max_iterations", std::int64_t(a.max_iterations));
    rec.param("random_starts", std::int64_t(a.random_starts));
    rec.table_header = {"N", "p", "lower_bound", "iterations", "converged"};
    std::vector<std::pair<double, double>> pts;
    for (std::int64_t N : a.N) {
        levelset::OptimizerConfig cfg;
        cfg.max_iterations = a.max_iterations;
        cfg.random_starts = a.random_starts;
        cfg.relative_tolerance = a.tol;
        cfg.seed = a.seed;
        cfg.threads = a.threads;
        auto est = levelset::estimate_Kp(N, a.p, cfg);
        rec.table_rows.push_back({std::to_string(N), report::format_double(a.p),
                                  report::format_double(est.lower_bound),
                                  std::to_string(est.iterations),
                                  est.converged ? "true" : "false"});
        pts.emplace_back(double(N), est.lower_bound);
    }
    if (a.fit && pts.size() >= 4) rec.scalar("slope", counting::scaling_fit(pts).slope);
    rec.elapsed_seconds = timer.seconds();
    return rec;
}

struct HuaArgs {
    std::vector<std::int64_t> N{4, 8, 12, 16, 24, 32, 40};
    unsigned threads = 0;
};

inline ResultRecord run_hua(const HuaArgs& a) {
    Timer timer;
    ResultRecord rec;
    rec.experiment = "hua";
    rec.param("N", join_i64(a.N));
    auto rep = levelset::verify_hua(a.N, a.threads);
    rec.table_header = {"N", "S", "gate", "gated_value"};
    for (const auto& row : rep.rows)
        rec.table_rows.push_back({std::to_string(row.N), row.S_exact,
                                  report::format_double(row.gate),
                                  report::format_double(row.gated_value)});
    if (rep.rows.size() >= 4) {
        rec.scalar("slope", rep.fit.slope);
        rec.scalar("max_residual", rep.fit.max_residual);
    }
    rec.scalar("gate_drift", rep.gate_drift);
    rec.elapsed_seconds = timer.seconds();
    return rec;
}

struct SolveArgs {
    std::uint64_t M = 256;
    std::string nonlinearity = "k1";
    bool mean_removed = false;
    double amplitude = 0.2;
    double s = 2.5;
    std::uint64_t seed = 1;
    double dt = 1e-4;
    double T = 0.1;
    std::uint64_t store_every = 10;
    std::string trajectory_path;
};

inline ResultRecord run_solve(const SolveArgs& a) {
    Timer timer;
    ResultRecord rec;
    rec.experiment = "solve";
    rec.seed = a.seed;
    rec.param("M", std::int64_t(a.M));
    rec.param("nonlinearity", a.nonlinearity);
    rec.param("mean_removed", a.mean_removed ? "true" : "false");
    rec.param("amplitude", a.amplitude);
    rec.param("s", a.s);
    rec.param("dt", a.dt);
    rec.param("T", a.T);
    gkdv::SobolevSpec spec{a.s, a.seed, a.amplitude};
    gkdv::SpectralState phi = gkdv::make_hs_data(a.M, spec);
    gkdv::SolverConfig cfg;
    cfg.F = parse_nonlinearity(a.nonlinearity);
    cfg.mean_removed = a.mean_removed;
    cfg.dt = a.dt;
    cfg.T = a.T;
    cfg.store_every = a.store_every;
    rec.scalar("phi_hs", gkdv::hs_norm(phi, a.s));
    try {
        gkdv::Trajectory traj = gkdv::solve(phi, cfg);
        rec.scalar("mass_drift", traj.mass_drift);
        rec.scalar("momentum_drift", traj.momentum_drift);
        rec.scalar("final_hs", gkdv::hs_norm(traj.states.back(), a.s));
        rec.scalar("stored_states", std::int64_t(traj.states.size()));
        if (!a.trajectory_path.empty()) {
            bool text = a.trajectory_path.size() > 4 &&
                        a.trajectory_path.substr(a.trajectory_path.size() - 4) == ".txt";
            std::ofstream os(a.trajectory_path, std::ios::binary);
            require(os.good(), "cli.trajectory_io", "cannot open " + a.trajectory_path);
            if (text) gkdv::write_trajectory_text(traj, os);
            else gkdv::write_trajectory_binary(traj, os);
            rec.scalar("trajectory_file", a.trajectory_path);
        }
    } catch (const gkdv::BlowupError& e) {
        rec.scalar("blowup_time", e.time());
    }
    rec.elapsed_seconds = timer.seconds();
    return rec;
}

struct GaugeArgs {
    std::uint64_t M = 256;
    int k = 2;
    double amplitude = 0.05;
    double s = 2.5;
    std::uint64_t seed = 5;
    double dt = 2e-5;
    double T = 0.01;
};

inline ResultRecord run_gauge(const GaugeArgs& a) {
    Timer timer;
    ResultRecord rec;
    rec.experiment = "gauge";
    rec.seed = a.seed;
    rec.param("M", std::int64_t(a.M));
    rec.param("k", std::int64_t(a.k));
    rec.param("amplitude", a.amplitude);
    rec.param("dt", a.dt);
    rec.param("T", a.T);
    gkdv::SpectralState phi = gkdv::make_hs_data(a.M, {a.s, a.seed, a.amplitude});
    gkdv::SolverConfig cfg;
    cfg.dt = a.dt;
    cfg.T = a.T;
    gkdv::Nonlinearity F = gkdv::Nonlinearity::power(a.k);
    rec.scalar("discrepancy", gkdv::gauge_equivalence_check(phi, F, cfg));

    gkdv::SolverConfig mean_cfg = cfg;
    mean_cfg.F = F;
    mean_cfg.mean_removed = true;
    gkdv::Trajectory v = gkdv::solve(phi, mean_cfg);
    gkdv::Trajectory round = gkdv::gauge_inverse(gkdv::gauge_transform(v, F), F);
    double rt = 0.0;
    for (std::size_t i = 0; i < v.states.size(); ++i)
        rt = std::max(rt, gkdv::l2_distance(round.states[i], v.states[i]));
    rec.scalar("roundtrip_error", rt);
    rec.elapsed_seconds = timer.seconds();
    return rec;
}

struct XsbArgs {
    std::string mode = "linear"; // linear | nonlinear | embedding | telescope
    double s = 0.6;
    std::vector<double> deltas{0.2, 0.1, 0.05, 0.025};
    std::uint64_t M = 32;
    double amplitude = 0.3;
    std::string nonlinearity = "k3";
    std::uint64_t seed = 4;
    int embedding = 1;
    unsigned threads = 0;
};

inline ResultRecord run_xsb(const XsbArgs& a) {
    Timer timer;
    ResultRecord rec;
    rec.experiment = "xsb";
    rec.seed = a.seed;
    rec.param("mode", a.mode);
    rec.param("s", a.s);
    if (a.mode == "linear") {
        gkdv::SpectralState phi = gkdv::make_hs_data(a.M, {a.s, a.seed, a.amplitude});
        auto rep = xsb::linear_estimate_check(phi, a.s, a.deltas, a.threads);
        rec.table_header = {"delta", "ratio"};
        for (const auto& [d, r] : rep.delta_and_ratio)
            rec.table_rows.push_back({report::format_double(d), report::format_double(r)});
        rec.scalar("drift", rep.drift);
    } else if (a.mode == "nonlinear") {
        gkdv::SpectralState phi = gkdv::make_hs_data(a.M, {a.s, a.seed, a.amplitude});
        auto rep = xsb::nonlinear_scaling_check(phi, parse_nonlinearity(a.nonlinearity), a.s,
                                                a.deltas, a.threads);
        rec.table_header = {"delta", "lhs", "u_ys", "normalized"};
        for (std::size_t i = 0; i < rep.deltas.size(); ++i)
            rec.table_rows.push_back({report::format_double(rep.deltas[i]),
                                      report::format_double(rep.lhs[i]),
                                      report::format_double(rep.u_ys[i]),
                                      report::format_double(rep.normalized[i])});
        rec.scalar("theta", rep.theta);
        require(rep.theta > 0.0, "xsb.theta_positive", "fitted theta must be positive");
    } else if (a.mode == "embedding") {
        require(a.embedding >= 1 && a.embedding <= 3, "cli.embedding", "embedding must be 1..3");
        auto which = a.embedding == 1   ? xsb::Embedding::emb1
                     : a.embedding == 2 ? xsb::Embedding::emb2
                                        : xsb::Embedding::emb3;
        auto rep = xsb::embedding_check(which, a.seed, a.threads);
        rec.table_header = {"rung", "ratio"};
        for (std::size_t i = 0; i < rep.ratios.size(); ++i)
            rec.table_rows.push_back({std::to_string(i), report::format_double(rep.ratios[i])});
        rec.scalar("drift", rep.drift);
    } else if (a.mode == "telescope") {
        xsb::SpaceTimeField u = xsb::random_curve_field(12, 1.0, 64, a.seed);
        double defect = xsb::lp_telescope_check(
            u, [](double x) { return x * x * x; }, 1.0, 16.0, a.threads);
        rec.scalar("defect", defect);
        require(defect <= 1e-10, "xsb.telescope_defect", "telescoping defect exceeded 1e-10");
    } else {
        throw invariant_violation("cli.xsb_mode",
                                  "mode must be linear, nonlinear, embedding, or telescope");
    }
    rec.elapsed_seconds = timer.seconds();
    return rec;
}

inline std::vector<ResultRecord> run_all(unsigned threads) {
    std::vector<ResultRecord> out;
    {
        CountArgs a;
        a.N = {2, 3, 4, 6, 8};
        a.b = 3;
        a.fit = true;
        a.threads = threads;
        out.push_back(run_count(a));
    }
    {
        WeylArgs a;
        a.N = {8, 16};
        a.trials = 500;
        out.push_back(run_weyl(a));
    }
    out.push_back(run_farey(FareyArgs{}));
    {
        DecomposeArgs a;
        a.N = {4, 8};
        a.threads = threads;
        out.push_back(run_decompose(a));
    }
    {
        LevelsetArgs a;
        a.N = {8};
        a.seeds = {1, 2};
        a.threads = threads;
        auto recs = run_levelset(a);
        out.insert(out.end(), recs.begin(), recs.end());
    }
    {
        StrichartzArgs a;
        a.N = {2, 4};
        a.p = 4.0;
        a.max_iterations = 40;
        a.random_starts = 1;
        a.threads = threads;
        out.push_back(run_strichartz(a));
    }
    {
        HuaArgs a;
        a.N = {4, 8, 12, 16};
        a.threads = threads;
        out.push_back(run_hua(a));
    }
    {
        SolveArgs a;
        a.M = 128;
        a.T = 0.01;
        out.push_back(run_solve(a));
    }
    {
        GaugeArgs a;
        a.M = 128;
        a.T = 0.005;
        out.push_back(run_gauge(a));
    }
    {
        XsbArgs a;
        a.deltas = {0.2, 0.1};
        a.threads = threads;
        out.push_back(run_xsb(a));
    }
    return out;
}

/// Injects config-file values as defaults: for every key in the section that
/// was not given on the command line, appends "--key value" tokens.
inline std::vector<std::string> merge_config(const std::vector<std::string>& args,
                                             const std::string& subcommand,
                                             const config::ConfigMap& cfg) {
    std::vector<std::string> merged = args;
    auto it = cfg.find(subcommand);
    if (it == cfg.end()) return merged;
    for (const auto& [key, value] : it->second) {
        std::string flag = "--" + key;
        bool present = false;
        for (const auto& tok : args)
            if (tok == flag || tok.rfind(flag + "=", 0) == 0) present = true;
        if (!present) {
            merged.push_back(flag);
            if (value != "true") merged.push_back(value);
        }
    }
    return merged;
}

} // namespace detail

/// Batch entry point. Exit codes: 0 success, 1 usage error, 2 violated
/// module invariant.
inline int run(std::vector<std::string> args) {
    using namespace detail;

    // config handling happens before CLI11 so that flags override the file
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
            args.erase(args.begin() + long(i), args.begin() + long(i) + 2);
            break;
        }
    }
    config::ConfigMap cfg;
    try {
        if (!config_path.empty()) cfg = config::load_config(config_path);
        if (!args.empty() && !args[0].empty() && args[0][0] != '-')
            args = merge_config(args, args[0], cfg);
    } catch (const invariant_violation& e) {
        std::cerr << "invariant violated: " << e.what() << "\n";
        return 2;
    }

    CLI::App app{"restrictlab: exponential-sum, counting, and KdV experiments"};
    app.require_subcommand(1);

    std::string out_path;
    std::string format = "json";
    bool plot = false;
    unsigned threads = 0;
    app.add_option("--out", out_path, "output file (default restrictlab_out.<format>)");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--plot", plot, "emit a companion plot script (csv only)");
    app.add_option("--threads", threads, "worker threads (0 = RESTRICTLAB_THREADS or hardware)");

    CountArgs count_args;
    auto* c_count = app.add_subcommand("count", "exact solution counts S(N;b)");
    c_count->add_option("--N", count_args.N, "N values")->delimiter(',');
    c_count->add_option("--b", count_args.b, "tuple length");
    c_count->add_option("--method", count_args.method, "mim | brute | both")
        ->check(CLI::IsMember({"mim", "brute", "both"}));
    c_count->add_flag("--fit", count_args.fit, "fit log S against log N");

    WeylArgs weyl_args;
    auto* c_weyl = app.add_subcommand("weyl", "empirical Weyl-sum ratios");
    c_weyl->add_option("--N", weyl_args.N, "N values")->delimiter(',');
    c_weyl->add_option("--trials", weyl_args.trials, "random phases per N");
    c_weyl->add_option("--seed", weyl_args.seed, "rng seed");

    FareyArgs farey_args;
    auto* c_farey = app.add_subcommand("farey", "Farey system for Q <= q <= 5Q");
    c_farey->add_option("--Q", farey_args.Q, "scale Q");
    c_farey->add_option("--max-rows", farey_args.max_rows, "fractions to list");

    DecomposeArgs dec_args;
    auto* c_dec = app.add_subcommand("decompose", "kernel split ratios (K1, K2)");
    c_dec->add_option("--N", dec_args.N, "N values")->delimiter(',');
    c_dec->add_option("--q-exponent", dec_args.q_exponent, "Q = N^e clamped to [N^2, N^3]");

    LevelsetArgs lvl_args;
    auto* c_lvl = app.add_subcommand("levelset", "gated level-set decay of extremal fields");
    c_lvl->add_option("--N", lvl_args.N, "N values")->delimiter(',');
    c_lvl->add_option("--seeds", lvl_args.seeds, "random sequence seeds")->delimiter(',');
    c_lvl->add_option("--gate", lvl_args.gate, "gate constant g in g N^{3/8}");
    c_lvl->add_flag("--thm2", lvl_args.thm2, "also evaluate the two-term slack inequality");

    StrichartzArgs str_args;
    auto* c_str = app.add_subcommand("strichartz", "lower bounds for K_{p,N}");
    c_str->add_option("--N", str_args.N, "N values")->delimiter(',');
    c_str->add_option("--p", str_args.p, "exponent p >= 2");
    c_str->add_option("--max-iterations", str_args.max_iterations, "ascent iterations");
    c_str->add_option("--random-starts", str_args.random_starts, "extra random starts");
    c_str->add_option("--tol", str_args.tol, "relative gain stop");
    c_str->add_option("--seed", str_args.seed, "rng seed");
    c_str->add_flag("--fit", str_args.fit, "fit log K against log N");

    HuaArgs hua_args;
    auto* c_hua = app.add_subcommand("hua", "S(N;5) scaling and kernel level sets");
    c_hua->add_option("--N", hua_args.N, "N values")->delimiter(',');

    SolveArgs solve_args;
    auto* c_solve = app.add_subcommand("solve", "pseudospectral gKdV run");
    c_solve->add_option("--M", solve_args.M, "modes (power of two)");
    c_solve->add_option("--nonlinearity", solve_args.nonlinearity, "none | sin | k<INT>");
    c_solve->add_flag("--mean-removed", solve_args.mean_removed, "subtract the mean of F(u)");
    c_solve->add_option("--amplitude", solve_args.amplitude, "data amplitude");
    c_solve->add_option("--s", solve_args.s, "data regularity");
    c_solve->add_option("--seed", solve_args.seed, "data seed");
    c_solve->add_option("--dt", solve_args.dt, "time step");
    c_solve->add_option("--T", solve_args.T, "horizon");
    c_solve->add_option("--store-every", solve_args.store_every, "state cadence");
    c_solve->add_option("--trajectory", solve_args.trajectory_path,
                        "write the trajectory (.txt = text, else GKDV0001 binary)");

    GaugeArgs gauge_args;
    auto* c_gauge = app.add_subcommand("gauge", "gauge equivalence and round-trip checks");
    c_gauge->add_option("--M", gauge_args.M, "modes");
    c_gauge->add_option("--k", gauge_args.k, "power nonlinearity");
    c_gauge->add_option("--amplitude", gauge_args.amplitude, "data amplitude");
    c_gauge->add_option("--dt", gauge_args.dt, "time step");
    c_gauge->add_option("--T", gauge_args.T, "horizon");
    c_gauge->add_option("--seed", gauge_args.seed, "data seed");

    XsbArgs xsb_args;
    auto* c_xsb = app.add_subcommand("xsb", "Bourgain-space diagnostics");
    c_xsb->add_option("--mode", xsb_args.mode, "linear | nonlinear | embedding | telescope");
    c_xsb->add_option("--s", xsb_args.s, "regularity");
    c_xsb->add_option("--deltas", xsb_args.deltas, "delta ladder")->delimiter(',');
    c_xsb->add_option("--M", xsb_args.M, "solver modes");
    c_xsb->add_option("--amplitude", xsb_args.amplitude, "data amplitude");
    c_xsb->add_option("--nonlinearity", xsb_args.nonlinearity, "sin or k<INT>");
    c_xsb->add_option("--seed", xsb_args.seed, "seed");
    c_xsb->add_option("--embedding", xsb_args.embedding, "which embedding (1..3)");

    auto* c_all = app.add_subcommand("all", "a quick battery of every experiment");

    std::vector<const char*> argv;
    argv.push_back("restrictlab");
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    count_args.threads = threads;
    dec_args.threads = threads;
    lvl_args.threads = threads;
    str_args.threads = threads;
    hua_args.threads = threads;
    xsb_args.threads = threads;

    try {
        std::vector<ResultRecord> records;
        if (c_count->parsed()) records.push_back(run_count(count_args));
        else if (c_weyl->parsed()) records.push_back(run_weyl(weyl_args));
        else if (c_farey->parsed()) records.push_back(run_farey(farey_args));
        else if (c_dec->parsed()) records.push_back(run_decompose(dec_args));
        else if (c_lvl->parsed()) records = run_levelset(lvl_args);
        else if (c_str->parsed()) records.push_back(run_strichartz(str_args));
        else if (c_hua->parsed()) records.push_back(run_hua(hua_args));
        else if (c_solve->parsed()) records.push_back(run_solve(solve_args));
        else if (c_gauge->parsed()) records.push_back(run_gauge(gauge_args));
        else if (c_xsb->parsed()) records.push_back(run_xsb(xsb_args));
        else if (c_all->parsed()) records = run_all(threads);

        if (out_path.empty()) out_path = "restrictlab_out." + format;
        auto paths = report::emit(records, format, out_path, plot);
        for (const auto& rec : records) {
            std::cout << rec.experiment;
            for (const auto& [k, v] : rec.scalars) std::cout << "  " << k << "=" << v;
            std::cout << "  (" << report::format_double(rec.elapsed_seconds) << " s)\n";
        }
        std::cout << "wrote " << paths.data;
        if (!paths.plot.empty()) std::cout << " and " << paths.plot;
        std::cout << "\n";
        return 0;
    } catch (const invariant_violation& e) {
        std::cerr << "invariant violated: " << e.what() << "\n";
        return 2;
    } catch (const gkdv::BlowupError& e) {
        std::cerr << "blowup: " << e.what() << "\n";
        return 2;
    }
}

inline int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(std::move(args));
}

} // namespace restrictlab::cli
