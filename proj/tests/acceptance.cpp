// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.
//
// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Everything runs at desk scale (wire dimensions <= 3) with fixed seeds.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "chancomp/classical.hpp"
#include "chancomp/convert.hpp"
#include "chancomp/json_io.hpp"
#include "chancomp/norms.hpp"
#include "chancomp/sdp_builder.hpp"

using namespace chancomp;
using channels::ChoiMap;
using linalg::CMatrix;
using linalg::SystemDims;

namespace {

std::string g_cli;
int g_failures = 0;

void report(int num, const char* what, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", num, what,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

CMatrix random_hermitian(Rng& rng, int n) {
    CMatrix g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = linalg::cplx(rng.gaussian(), rng.gaussian());
    return (g + g.adjoint()) * 0.5;
}

CMatrix ket_proj(int d, int k) {
    CMatrix m(d, d);
    m(k, k) = 1;
    return m;
}

games::Povm z_meas() {
    return games::Povm{{ket_proj(2, 0), ket_proj(2, 1)}, SystemDims::single("C", 2)};
}
games::Povm x_meas() {
    CMatrix plus(2, 2), minus(2, 2);
    plus(0, 0) = plus(0, 1) = plus(1, 0) = plus(1, 1) = 0.5;
    minus(0, 0) = minus(1, 1) = 0.5;
    minus(0, 1) = minus(1, 0) = -0.5;
    return games::Povm{{plus, minus}, SystemDims::single("C", 2)};
}

// --------------------------------------------------------------------------
// criterion 1: solver certification on 200 programs with analytic optima
// --------------------------------------------------------------------------
void criterion1() {
    Rng rng(1001);
    int count = 0;
    double worst = 0.0;
    auto track = [&](double got, double want) {
        worst = std::max(worst, std::abs(got - want));
        ++count;
    };
    // 70 lambda_max problems
    for (int rep = 0; rep < 70; ++rep) {
        const int n = 2 + rep % 6;
        std::vector<double> c(static_cast<size_t>(n) * n);
        CMatrix h = random_hermitian(rng, n);
        CMatrix re(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double v = 0.5 * (h(i, j).real() + h(j, i).real());
                c[static_cast<size_t>(i) * n + j] = v;
                re(i, j) = v;
            }
        conic::ConicProblem p;
        p.maximize = true;
        p.blocks = {{conic::BlockKind::Psd, n}};
        p.c = conic::svec_pack(c, n);
        p.b = {1.0};
        for (int i = 0; i < n; ++i) p.a.push_back({0, conic::svec_index(n, i, i), 1.0});
        auto sol = conic::solve(p, 1e-7);
        track(sol.status == conic::SolveStatus::Optimal ? sol.primal_value : 1e9,
              linalg::herm_eig(re).eigenvalues.back());
    }
    // 70 simplex LPs
    for (int rep = 0; rep < 70; ++rep) {
        const int n = 3 + rep % 8;
        conic::ConicProblem p;
        p.blocks = {{conic::BlockKind::Nonneg, n}};
        p.c.resize(n);
        double mn = 1e9;
        for (auto& v : p.c) {
            v = rng.gaussian();
            mn = std::min(mn, v);
        }
        p.b = {1.0};
        for (int i = 0; i < n; ++i) p.a.push_back({0, i, 1.0});
        auto sol = conic::solve(p, 1e-7);
        track(sol.status == conic::SolveStatus::Optimal ? sol.primal_value : 1e9, mn);
    }
    // 60 trace-norm programs
    for (int rep = 0; rep < 60; ++rep) {
        const int n = 2 + rep % 3;
        CMatrix x(n, n);
        std::vector<double> xr(static_cast<size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                xr[static_cast<size_t>(i) * n + j] = rng.gaussian();
                x(i, j) = xr[static_cast<size_t>(i) * n + j];
            }
        const int nn = 2 * n;
        conic::ConicProblem p;
        p.blocks = {{conic::BlockKind::Psd, nn}};
        p.c.assign(conic::svec_dim(nn), 0.0);
        for (int i = 0; i < nn; ++i) p.c[conic::svec_index(nn, i, i)] = 0.5;
        int row = 0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                p.a.push_back({row, conic::svec_index(nn, n + a, b), 1.0 / std::sqrt(2.0)});
                p.b.push_back(-xr[static_cast<size_t>(b) * n + a]);
                ++row;
            }
        auto sol = conic::solve(p, 1e-7);
        track(sol.status == conic::SolveStatus::Optimal ? sol.primal_value : 1e9,
              linalg::trace_norm(x));
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d programs, worst |value - oracle| = %.2e", count,
                  worst);
    report(1, "solver certification against analytic optima at 1e-6", worst <= 1e-6, buf);
}

// --------------------------------------------------------------------------
// criterion 2: conditional min-entropy duality
// --------------------------------------------------------------------------
void criterion2() {
    Rng rng(2002);
    double worst_gap = 0.0;
    const int dims_mix[4][2] = {{2, 2}, {2, 3}, {3, 2}, {3, 3}};
    for (int rep = 0; rep < 100; ++rep) {
        const int da = dims_mix[rep % 4][0], db = dims_mix[rep % 4][1];
        SystemDims dims({{"A0", da}, {"A1", db}});
        CMatrix g(da * db, da * db);
        for (int i = 0; i < da * db; ++i)
            for (int j = 0; j < da * db; ++j)
                g(i, j) = linalg::cplx(rng.gaussian(), rng.gaussian());
        CMatrix rho = g * g.adjoint();
        rho = rho * (1.0 / rho.trace().real());
        auto r = norms::dual_diamond_norm_full(rho, dims, {"A0"});
        worst_gap = std::max(worst_gap, r.hi - r.lo);
    }
    // pinned closed forms
    CMatrix v = linalg::vec_doubleket(CMatrix::identity(2));
    SystemDims d22({{"A0", 2}, {"A1", 2}});
    const double hmin_me = norms::dual_diamond_norm_full(v * v.adjoint() * 0.5, d22,
                                                         {"A0"})
                               .hmin;
    Rng rng2(2003);
    CMatrix sig = channels::random_density_matrix(2, 2, rng2);
    CMatrix tau = channels::random_density_matrix(2, 2, rng2);
    const double hmin_prod =
        norms::dual_diamond_norm_full(linalg::kron(sig, tau), d22, {"A0"}).hmin;
    const double want_prod = -std::log2(linalg::op_norm(tau));
    const bool pass = worst_gap <= 1e-6 && std::abs(hmin_me + 1.0) <= 1e-6 &&
                      std::abs(hmin_prod - want_prod) <= 1e-6;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "worst primal/dual gap %.2e, hmin(bell) %+.8f, hmin(product) err %.2e",
                  worst_gap, hmin_me, std::abs(hmin_prod - want_prod));
    report(2, "min-entropy primal and dual programs agree at 1e-6", pass, buf);
}

// --------------------------------------------------------------------------
// criterion 3: guessing-game form of the min-entropy norm
// --------------------------------------------------------------------------
void criterion3() {
    Rng rng(3003);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        int da = 2, dr = 2;
        if (rep % 10 == 8) da = 3;
        if (rep % 10 == 9) dr = 3;
        SystemDims ar({{"A", da}, {"R", dr}});
        CMatrix rho = channels::random_density_matrix(da * dr, rng.uniform_int(1, da * dr),
                                                      rng);
        games::Ensemble e = games::pauli_ensemble(rho, ar, "R");
        const double lhs = norms::dual_diamond_norm(rho, ar, {"A"});
        const double rhs = dr * games::psucc_opt(e);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "100 states, worst deviation %.2e", worst);
    report(3, "min-entropy norm equals the rescaled guessing probability at 1e-5",
           worst <= 1e-5, buf);
}

// --------------------------------------------------------------------------
// criterion 4: Bell guessing game reproduces the diamond distance
// --------------------------------------------------------------------------
void criterion4() {
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        ChoiMap p1 = channels::random_channel(2, 2, 2 + rep % 2, 4000 + 2 * rep);
        ChoiMap p2 = channels::random_channel(2, 2, 2 + (rep / 2) % 2, 4001 + 2 * rep);
        auto r = games::verify_coro_psuc(p1, p2);
        worst = std::max(worst, r.gap);
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "50 channel pairs, worst gap %.2e", worst);
    report(4, "Bell-measurement game ratio matches the halved diamond distance at 1e-5",
           worst <= 1e-5, buf);
}

// --------------------------------------------------------------------------
// criterion 5: characterization theorems, forward direction plus witnesses
// --------------------------------------------------------------------------
void criterion5() {
    struct VariantPlan {
        convert::Variant v;
        const char* name;
    };
    const VariantPlan plans[3] = {{convert::Variant::Post, "post"},
                                  {convert::Variant::Pre, "pre"},
                                  {convert::Variant::Partial, "partial"}};
    bool pass = true;
    std::string detail;
    for (const auto& plan : plans) {
        int total_violations = 0;
        double worst_witness_deficit = -1e9;  // max over instances of (delta/2 - violation)
        for (int inst = 0; inst < 30; ++inst) {
            ChoiMap phi1, phi2;
            std::vector<std::string> fixed;
            const std::uint64_t s = 5000 + 100 * inst;
            if (plan.v == convert::Variant::Post) {
                phi1 = channels::random_channel(2, 2, 2, s);
                phi2 = channels::random_channel(2, 2, 2, s + 1, "A0", "B1");
            } else if (plan.v == convert::Variant::Pre) {
                phi1 = channels::random_channel(2, 2, 2, s + 2);
                phi2 = channels::random_channel(2, 2, 2, s + 3, "B0", "A1");
            } else {
                phi1 = channels::random_channel(4, 4, 2, s + 4);
                phi1.in_dims = SystemDims({{"a0", 2}, {"B0", 2}});
                phi1.out_dims = SystemDims({{"a1", 2}, {"B1", 2}});
                phi2 = channels::random_channel(4, 4, 2, s + 5);
                phi2.in_dims = SystemDims({{"c0", 2}, {"B0", 2}});
                phi2.out_dims = SystemDims({{"c1", 2}, {"B1", 2}});
                fixed = {"B0", "B1"};
            }
            auto witness_run =
                convert::verify_rand_chans(phi1, phi2, plan.v, fixed, 0.0, 1, s + 7);
            const double delta = witness_run.delta;
            if (delta > 1e-3)
                worst_witness_deficit = std::max(
                    worst_witness_deficit, 0.5 * delta - witness_run.max_violation);
            auto sweep = convert::verify_rand_chans(phi1, phi2, plan.v, fixed,
                                                    delta + 1e-4, 200, s + 8);
            total_violations += static_cast<int>(sweep.violations.size());
            std::fprintf(stderr, "  [criterion5:%s] instance %d delta=%.4f violations=%zu\n",
                         plan.name, inst, delta, sweep.violations.size());
        }
        const bool vpass = total_violations == 0 && worst_witness_deficit <= 1e-5;
        pass = pass && vpass;
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s: %d violations, witness deficit %.2e; ",
                      plan.name, total_violations, worst_witness_deficit);
        detail += buf;
    }
    report(5, "randomization characterization: clean sweeps and dual witnesses", pass,
           detail);
}

// --------------------------------------------------------------------------
// criterion 6: conversion sanity
// --------------------------------------------------------------------------
void criterion6() {
    double worst_post = 0.0, worst_pre = 0.0, worst_bound = -1e9, worst_tri = -1e9;
    for (int rep = 0; rep < 50; ++rep) {
        const std::uint64_t s = 6000 + 10 * rep;
        ChoiMap phi = channels::random_channel(2, 2, 2, s);
        ChoiMap lam_post = channels::random_channel(2, 2, 2, s + 1, "A1", "B1");
        worst_post =
            std::max(worst_post, convert::delta_post(phi, channels::compose(lam_post, phi))
                                     .delta);
        ChoiMap lam_pre = channels::random_channel(2, 2, 2, s + 2, "B0", "A0");
        worst_pre =
            std::max(worst_pre, convert::delta_pre(phi, channels::compose(phi, lam_pre))
                                    .delta);
        // identity processing upper bound
        ChoiMap other = channels::random_channel(2, 2, 2, s + 3);
        const double dn = norms::diamond_norm(
            ChoiMap{phi.choi - other.choi, phi.out_dims, phi.in_dims});
        ChoiMap other_out = channels::random_channel(2, 2, 2, s + 3, "A0", "B1");
        const double dpost = convert::delta_post(phi, other_out).delta;
        worst_bound = std::max(worst_bound, dpost - dn);
    }
    for (int rep = 0; rep < 30; ++rep) {
        const std::uint64_t s = 6600 + 10 * rep;
        ChoiMap a = channels::random_channel(2, 2, 2, s);
        ChoiMap b = channels::random_channel(2, 2, 2, s + 1);
        ChoiMap c = channels::random_channel(2, 2, 2, s + 2);
        const double ab = convert::delta_symmetric(a, b, convert::Variant::Post);
        const double bc = convert::delta_symmetric(b, c, convert::Variant::Post);
        const double ac = convert::delta_symmetric(a, c, convert::Variant::Post);
        worst_tri = std::max(worst_tri, ac - ab - bc);
    }
    const bool pass = worst_post <= 1e-6 && worst_pre <= 1e-6 && worst_bound <= 1e-6 &&
                      worst_tri <= 1e-6;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "self-simulation post %.2e pre %.2e, bound slack %.2e, triangle slack %.2e",
                  worst_post, worst_pre, worst_bound, worst_tri);
    report(6, "conversion distances: exactness, diamond bound, pseudometric", pass, buf);
}

// --------------------------------------------------------------------------
// criterion 7: measurement simulability
// --------------------------------------------------------------------------
void criterion7() {
    games::MeasurementSet zset = {z_meas()};
    games::MeasurementSet xset = {x_meas()};
    // convex postprocessing of z is simulable for free
    games::Povm mixed;
    mixed.dims = SystemDims::single("C", 2);
    mixed.effects = {ket_proj(2, 0) * 0.8 + ket_proj(2, 1) * 0.2,
                     ket_proj(2, 0) * 0.2 + ket_proj(2, 1) * 0.8};
    const double dfree = convert::delta_meas_sim(zset, {mixed}).delta;

    const double dzx = convert::delta_meas_sim(zset, xset).delta;
    auto witness = games::verify_sc_simul(zset, xset, 0.0, 10, 700);
    auto clean = games::verify_sc_simul(zset, xset, dzx + 1e-4, 500, 701);
    const bool pass = dfree <= 1e-6 && dzx > 0.0 && witness.max_violation >= 0.49 &&
                      clean.violations.empty();
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "postprocessed delta %.2e, z/x delta %.4f, witness gap %.4f, "
                  "clean sweep violations %zu",
                  dfree, dzx, witness.max_violation, clean.violations.size());
    report(7, "measurement simulability program and its game characterization", pass, buf);
}

// --------------------------------------------------------------------------
// criterion 8: Le Cam programs
// --------------------------------------------------------------------------
void criterion8() {
    classical::Experiment dirac{{{1.0, 0.0}, {0.0, 1.0}}};
    classical::Experiment uniform{{{0.5, 0.5}, {0.5, 0.5}}};
    const double d0 = classical::lecam_deficiency(dirac, uniform).delta;
    const double d1 = classical::lecam_deficiency(uniform, dirac).delta;

    Rng rng(8008);
    bool gains_ok = true;
    for (int rep = 0; rep < 50; ++rep) {
        classical::Experiment p, q;
        for (int i = 0; i < 2; ++i) p.distributions.push_back(rng.dirichlet(3));
        for (int i = 0; i < 2; ++i) q.distributions.push_back(rng.dirichlet(3));
        const double eps = classical::lecam_deficiency(p, q).delta;
        std::vector<std::vector<double>> g(2, std::vector<double>(3, 0.0));
        for (auto& row : g)
            for (auto& v : row) v = rng.uniform();
        auto rep2 = classical::gain_check(p, q, eps + 1e-9, g, rng.dirichlet(2));
        gains_ok = gains_ok && rep2.satisfied;
    }
    const bool pass = std::abs(d0) <= 1e-8 && std::abs(d1 - 1.0) <= 1e-8 && gains_ok;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "deficiencies %.2e and %.8f, 50 gain checks %s", d0, d1,
                  gains_ok ? "hold" : "violated");
    report(8, "Le Cam deficiencies and the randomization criterion", pass, buf);
}

// --------------------------------------------------------------------------
// criterion 9: CLI determinism
// --------------------------------------------------------------------------
std::pair<int, std::string> run_cli(const std::string& args) {
    const std::string cmd = g_cli + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, ""};
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, n);
    const int st = pclose(pipe);
    return {WEXITSTATUS(st), out};
}

void criterion9() {
    if (g_cli.empty()) {
        report(9, "CLI determinism", false, "no --cli path given");
        return;
    }
    // fixtures
    run_cli("gen-random --kind channel --seed 91 --out acc_p1.json");
    run_cli("gen-random --kind channel --seed 92 --out acc_p2.json");
    {
        auto phi1 = io::load_choimap("acc_p1.json");
        ChoiMap pre_target = channels::random_channel(2, 2, 2, 93, "B0", "A1");
        io::save_choimap("acc_pre2.json", pre_target);
        ChoiMap bi1 = channels::random_channel(4, 4, 2, 94);
        bi1.in_dims = SystemDims({{"a0", 2}, {"B0", 2}});
        bi1.out_dims = SystemDims({{"a1", 2}, {"B1", 2}});
        io::save_choimap("acc_bi1.json", bi1);
        ChoiMap bi2 = channels::random_channel(4, 4, 2, 95);
        bi2.in_dims = SystemDims({{"c0", 2}, {"B0", 2}});
        bi2.out_dims = SystemDims({{"c1", 2}, {"B1", 2}});
        io::save_choimap("acc_bi2.json", bi2);
        // 4-wire state for the comb norms
        Rng r9(96);
        CMatrix rho = channels::random_density_matrix(16, 8, r9);
        channels::Labeled st{rho,
                             SystemDims({{"b0", 2}, {"a1", 2}, {"b1", 2}, {"a0", 2}})};
        io::save_state("acc_rho4.json", st);
        CMatrix rho2 = channels::random_density_matrix(4, 3, r9);
        io::save_state("acc_rho2.json",
                       {rho2, SystemDims({{"A0", 2}, {"A1", 2}})});
        games::Ensemble e;
        e.dims = SystemDims::single("C", 2);
        e.items = {{0.5, ket_proj(2, 0)}, {0.5, ket_proj(2, 1)}};
        io::save_ensemble("acc_ens.json", e);
        io::save_povm("acc_povm.json", x_meas());
        io::save_measset("acc_mz.json", {z_meas()});
        io::save_measset("acc_mx.json", {x_meas()});
        io::save_experiment("acc_expp.json", {{{1.0, 0.0}, {0.0, 1.0}}});
        io::save_experiment("acc_expq.json", {{{0.5, 0.5}, {0.5, 0.5}}});
        (void)phi1;
    }
    const std::vector<std::string> cmds = {
        "norm-diamond --phi1 acc_p1.json --phi2 acc_p2.json",
        "norm-hmin --state acc_rho2.json --condition-on A0",
        "norm-hmin2 --state acc_rho4.json --a0 a0 --a1 a1 --b0 b0 --b1 b1",
        "norm-f --state acc_rho4.json --variant nosignaling --a0 a0 --a1 a1 --b0 b0 --b1 b1",
        "delta-post --phi1 acc_p1.json --phi2 acc_p2.json",
        "delta-pre --phi1 acc_p1.json --phi2 acc_pre2.json",
        "delta-partial --phi1 acc_bi1.json --phi2 acc_bi2.json --fixed-b B0,B1",
        "delta-meas --mset acc_mz.json --nset acc_mx.json",
        "delta-lecam --p acc_expp.json --q acc_expq.json",
        "psucc --ensemble acc_ens.json --povm acc_povm.json",
        "psucc-q --ensemble acc_ens.json --povm acc_povm.json",
        "verify-randchans --phi1 acc_p1.json --phi2 acc_p2.json --variant post "
        "--epsilon 0.01 --samples 2 --seed 97",
        "verify-psuc --phi1 acc_p1.json --phi2 acc_p2.json",
        "verify-scsimul --mset acc_mz.json --nset acc_mx.json --epsilon 0 --samples 3 "
        "--seed 98",
        "gen-random --kind ensemble --dim 2 --items 3 --seed 99 --out acc_gen.json",
    };
    int mismatches = 0, errors = 0;
    for (const auto& c : cmds) {
        auto a = run_cli(c);
        auto b = run_cli(c);
        if (a.first != 0 || b.first != 0) ++errors;
        if (a.second != b.second) ++mismatches;
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%zu subcommands, %d mismatches, %d errors",
                  cmds.size(), mismatches, errors);
    report(9, "byte-identical CLI reruns for every subcommand", mismatches == 0 && errors == 0,
           buf);
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i)
        if (std::strcmp(argv[i], "--cli") == 0) g_cli = argv[i + 1];

    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();

    std::printf("%s: %d of 9 criteria passed\n",
                g_failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED", 9 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
