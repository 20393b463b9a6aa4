// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.
//
// Command-line front end: loads JSON objects, dispatches the computations and
// emits machine-readable JSON (or a plain table). Exit codes: 0 success,
// 2 input validation error, 3 solver failure, 64 unknown subcommand.

#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chancomp/classical.hpp"
#include "chancomp/convert.hpp"
#include "chancomp/json_io.hpp"
#include "chancomp/norms.hpp"

using namespace chancomp;
using chancomp::channels::ChoiMap;
using chancomp::linalg::CMatrix;
using chancomp::linalg::SystemDims;

namespace {

struct Common {
    double tol = 1e-7;
    std::uint64_t seed = 0;
    std::string format = "json";
    int jobs = 1;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--tol", c.tol, "solver tolerance")->check(CLI::Range(1e-10, 1e-4));
    sub->add_option("--seed", c.seed, "sampling seed");
    sub->add_option("--format", c.format, "json or table")
        ->check(CLI::IsMember({"json", "table"}));
    sub->add_option("--jobs", c.jobs, "parallel workers for verification sweeps")
        ->check(CLI::Range(1, 64));
}

using Fields = std::vector<std::pair<std::string, std::string>>;

std::string jstr(const std::string& s) { return "\"" + s + "\""; }

std::string render_residuals(const conic::Residuals& r) {
    std::ostringstream os;
    os << "{\"primal\":" << io::format_double(r.primal)
       << ",\"dual\":" << io::format_double(r.dual)
       << ",\"gap\":" << io::format_double(r.gap) << "}";
    return os.str();
}

void emit(const Common& c, Fields fields, const conic::Residuals& res, int iters) {
    fields.emplace_back("tol", io::format_double(c.tol));
    fields.emplace_back("residuals", render_residuals(res));
    fields.emplace_back("solver_iters", std::to_string(iters));
    fields.emplace_back("seed", std::to_string(c.seed));
    if (c.format == "json") {
        std::ostringstream os;
        os << "{";
        for (size_t i = 0; i < fields.size(); ++i) {
            if (i) os << ",";
            os << jstr(fields[i].first) << ":" << fields[i].second;
        }
        os << "}";
        std::cout << os.str() << "\n";
    } else {
        for (const auto& [k, v] : fields) std::cout << k << "\t" << v << "\n";
    }
}

std::vector<std::string> split_labels(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : csv) {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string render_violations(const std::vector<games::ViolationSample>& vs, bool with_seed) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < vs.size(); ++i) {
        if (i) os << ",";
        os << "{\"sample\":" << vs[i].sample;
        if (with_seed) os << ",\"seed\":" << vs[i].seed;
        os << ",\"lhs\":" << io::format_double(vs[i].lhs)
           << ",\"rhs\":" << io::format_double(vs[i].rhs)
           << ",\"gap\":" << io::format_double(vs[i].gap) << "}";
    }
    os << "]";
    return os.str();
}

ChoiMap load_channel_checked(const std::string& path) {
    ChoiMap phi = io::load_choimap(path);
    if (!phi.is_channel(1e-6))
        throw std::invalid_argument(path + ": Choi matrix is not a channel");
    return phi;
}

convert::Variant parse_variant(const std::string& v) {
    if (v == "post") return convert::Variant::Post;
    if (v == "pre") return convert::Variant::Pre;
    if (v == "partial") return convert::Variant::Partial;
    throw std::invalid_argument("unknown variant: " + v);
}

}  // namespace

int main(int argc, char** argv) {
    const std::set<std::string> known = {
        "norm-diamond", "norm-hmin",  "norm-hmin2",      "norm-f",
        "delta-post",   "delta-pre",  "delta-partial",   "delta-meas",
        "delta-lecam",  "psucc",      "psucc-q",         "verify-randchans",
        "verify-psuc",  "verify-scsimul", "gen-random"};
    if (argc >= 2 && argv[1][0] != '-' && known.find(argv[1]) == known.end()) {
        std::cerr << "unknown subcommand: " << argv[1] << "\n";
        return 64;
    }

    CLI::App app{"one-shot comparison quantities for quantum channels"};
    app.require_subcommand(1);

    // shared option storage per subcommand
    struct {
        Common c;
        std::string phi1, phi2, state, mset, nset, p, q, ensemble, povm;
        std::string condition_on, variant = "post", fixed_b, ppt_cut;
        std::string a0 = "a0", a1 = "a1", b0 = "b0", b1 = "b1";
        std::string kind, out, out_optimizer;
        double epsilon = 0.0;
        int samples = 100;
        bool symmetric = false;
        int din = 2, dout = 2, env = 2, dim = 2, rank = 0, outcomes = 2, items = 2, k = 2,
            points = 2, count = 1;
    } o;

    auto* sc_nd = app.add_subcommand("norm-diamond", "diamond norm of a channel difference");
    sc_nd->add_option("--phi1", o.phi1)->required();
    sc_nd->add_option("--phi2", o.phi2)->required();
    add_common(sc_nd, o.c);

    auto* sc_hmin = app.add_subcommand("norm-hmin", "conditional min-entropy norm");
    sc_hmin->add_option("--state", o.state)->required();
    sc_hmin->add_option("--condition-on", o.condition_on)->required();
    add_common(sc_hmin, o.c);

    auto* sc_hmin2 = app.add_subcommand("norm-hmin2", "conditional 2-min-entropy norm");
    sc_hmin2->add_option("--state", o.state)->required();
    sc_hmin2->add_option("--a0", o.a0);
    sc_hmin2->add_option("--a1", o.a1);
    sc_hmin2->add_option("--b0", o.b0);
    sc_hmin2->add_option("--b1", o.b1);
    add_common(sc_hmin2, o.c);

    auto* sc_f = app.add_subcommand("norm-f", "restricted-superchannel norm");
    sc_f->add_option("--state", o.state)->required();
    sc_f->add_option("--variant", o.variant)
        ->check(CLI::IsMember({"post", "pre", "partial", "fullcomb", "nosignaling",
                               "pptcomb", "locc"}));
    sc_f->add_option("--a0", o.a0);
    sc_f->add_option("--a1", o.a1);
    sc_f->add_option("--b0", o.b0);
    sc_f->add_option("--b1", o.b1);
    sc_f->add_option("--ppt-cut", o.ppt_cut);
    add_common(sc_f, o.c);

    auto* sc_dpost = app.add_subcommand("delta-post", "postprocessing conversion distance");
    sc_dpost->add_option("--phi1", o.phi1)->required();
    sc_dpost->add_option("--phi2", o.phi2)->required();
    sc_dpost->add_option("--out-optimizer", o.out_optimizer);
    add_common(sc_dpost, o.c);

    auto* sc_dpre = app.add_subcommand("delta-pre", "preprocessing conversion distance");
    sc_dpre->add_option("--phi1", o.phi1)->required();
    sc_dpre->add_option("--phi2", o.phi2)->required();
    sc_dpre->add_option("--out-optimizer", o.out_optimizer);
    add_common(sc_dpre, o.c);

    auto* sc_dpart = app.add_subcommand("delta-partial", "partial-superchannel distance");
    sc_dpart->add_option("--phi1", o.phi1)->required();
    sc_dpart->add_option("--phi2", o.phi2)->required();
    sc_dpart->add_option("--fixed-b", o.fixed_b)->required();
    sc_dpart->add_option("--out-optimizer", o.out_optimizer);
    add_common(sc_dpart, o.c);

    auto* sc_dmeas = app.add_subcommand("delta-meas", "measurement simulability distance");
    sc_dmeas->add_option("--mset", o.mset)->required();
    sc_dmeas->add_option("--nset", o.nset)->required();
    add_common(sc_dmeas, o.c);

    auto* sc_lecam = app.add_subcommand("delta-lecam", "Le Cam deficiency");
    sc_lecam->add_option("--p", o.p)->required();
    sc_lecam->add_option("--q", o.q)->required();
    sc_lecam->add_flag("--symmetric", o.symmetric);
    add_common(sc_lecam, o.c);

    auto* sc_ps = app.add_subcommand("psucc", "guessing-game success probability");
    sc_ps->add_option("--ensemble", o.ensemble)->required();
    sc_ps->add_option("--povm", o.povm);
    add_common(sc_ps, o.c);

    auto* sc_psq = app.add_subcommand("psucc-q", "post-processed success probability");
    sc_psq->add_option("--ensemble", o.ensemble)->required();
    sc_psq->add_option("--povm", o.povm)->required();
    add_common(sc_psq, o.c);

    auto* sc_vrc = app.add_subcommand("verify-randchans", "min-entropy characterization sweep");
    sc_vrc->add_option("--phi1", o.phi1)->required();
    sc_vrc->add_option("--phi2", o.phi2)->required();
    sc_vrc->add_option("--variant", o.variant)
        ->check(CLI::IsMember({"post", "pre", "partial"}));
    sc_vrc->add_option("--fixed-b", o.fixed_b);
    sc_vrc->add_option("--epsilon", o.epsilon);
    sc_vrc->add_option("--samples", o.samples);
    add_common(sc_vrc, o.c);

    auto* sc_vp = app.add_subcommand("verify-psuc", "Bell guessing-game check");
    sc_vp->add_option("--phi1", o.phi1)->required();
    sc_vp->add_option("--phi2", o.phi2)->required();
    add_common(sc_vp, o.c);

    auto* sc_vs = app.add_subcommand("verify-scsimul", "simulability inequality sweep");
    sc_vs->add_option("--mset", o.mset)->required();
    sc_vs->add_option("--nset", o.nset)->required();
    sc_vs->add_option("--epsilon", o.epsilon);
    sc_vs->add_option("--samples", o.samples);
    add_common(sc_vs, o.c);

    auto* sc_gen = app.add_subcommand("gen-random", "generate random objects");
    sc_gen->add_option("--kind", o.kind)
        ->required()
        ->check(CLI::IsMember({"channel", "state", "povm", "ensemble", "experiment",
                               "measset"}));
    sc_gen->add_option("--out", o.out)->required();
    sc_gen->add_option("--din", o.din);
    sc_gen->add_option("--dout", o.dout);
    sc_gen->add_option("--env", o.env);
    sc_gen->add_option("--dim", o.dim);
    sc_gen->add_option("--rank", o.rank);
    sc_gen->add_option("--outcomes", o.outcomes);
    sc_gen->add_option("--items", o.items);
    sc_gen->add_option("--k", o.k);
    sc_gen->add_option("--points", o.points);
    sc_gen->add_option("--count", o.count);
    add_common(sc_gen, o.c);

    try {
        app.parse(argc, argv);

        conic::Residuals zero_res;
        if (sc_nd->parsed()) {
            ChoiMap p1 = load_channel_checked(o.phi1), p2 = load_channel_checked(o.phi2);
            if (!(p1.in_dims == p2.in_dims) || !(p1.out_dims == p2.out_dims))
                throw std::invalid_argument("norm-diamond: channels must share wires");
            auto r = norms::diamond_norm_full(
                ChoiMap{p1.choi - p2.choi, p1.out_dims, p1.in_dims}, o.c.tol);
            emit(o.c,
                 {{"value", io::format_double(r.value)},
                  {"lo", io::format_double(r.lo)},
                  {"hi", io::format_double(r.hi)}},
                 r.residuals, r.iterations);
        } else if (sc_hmin->parsed()) {
            auto st = io::load_state(o.state);
            auto r = norms::dual_diamond_norm_full(st.mat, st.dims,
                                                   split_labels(o.condition_on), o.c.tol);
            emit(o.c,
                 {{"value", io::format_double(r.value)},
                  {"hmin", io::format_double(r.hmin)},
                  {"lo", io::format_double(r.lo)},
                  {"hi", io::format_double(r.hi)}},
                 r.residuals, r.iterations);
        } else if (sc_hmin2->parsed()) {
            auto st = io::load_state(o.state);
            norms::FSpec w;
            w.a0 = o.a0;
            w.a1 = o.a1;
            w.b0 = o.b0;
            w.b1 = o.b1;
            auto r = norms::two_diamond_dual_norm_full(st.mat, st.dims, w, o.c.tol);
            emit(o.c,
                 {{"value", io::format_double(r.value)},
                  {"hmin2", io::format_double(-std::log2(std::max(r.value, 1e-300)))},
                  {"lo", io::format_double(r.lo)},
                  {"hi", io::format_double(r.hi)}},
                 r.residuals, r.iterations);
        } else if (sc_f->parsed()) {
            if (o.variant == "locc")
                throw std::invalid_argument(
                    "LOCC-restricted superchannels have no tractable characterization; "
                    "use --variant pptcomb for a certified upper bound");
            auto st = io::load_state(o.state);
            norms::FSpec f;
            f.a0 = o.a0;
            f.a1 = o.a1;
            f.b0 = o.b0;
            f.b1 = o.b1;
            if (o.variant == "post") f.variant = norms::FVariant::Post;
            else if (o.variant == "pre") f.variant = norms::FVariant::Pre;
            else if (o.variant == "partial") f.variant = norms::FVariant::Partial;
            else if (o.variant == "fullcomb") f.variant = norms::FVariant::FullComb;
            else if (o.variant == "nosignaling") f.variant = norms::FVariant::NoSignaling;
            else f.variant = norms::FVariant::PptComb;
            f.ppt_cut = split_labels(o.ppt_cut);
            auto r = norms::f_norm_full(st.mat, st.dims, f, o.c.tol);
            emit(o.c,
                 {{"value", io::format_double(r.value)},
                  {"hmin_f", io::format_double(-std::log2(std::max(r.value, 1e-300)))},
                  {"lo", io::format_double(r.lo)},
                  {"hi", io::format_double(r.hi)}},
                 r.residuals, r.iterations);
        } else if (sc_dpost->parsed() || sc_dpre->parsed() || sc_dpart->parsed()) {
            ChoiMap p1 = load_channel_checked(o.phi1), p2 = load_channel_checked(o.phi2);
            convert::ConversionResult r;
            if (sc_dpost->parsed())
                r = convert::delta_post(p1, p2, o.c.tol);
            else if (sc_dpre->parsed())
                r = convert::delta_pre(p1, p2, o.c.tol);
            else
                r = convert::delta_partial(p1, p2, split_labels(o.fixed_b), o.c.tol);
            std::string opt_ref = "null";
            if (!o.out_optimizer.empty()) {
                if (sc_dpart->parsed())
                    io::save_state(o.out_optimizer,
                                   {r.optimizer_comb.choi, r.optimizer_comb.dims});
                else
                    io::save_choimap(o.out_optimizer, r.optimizer_channel);
                opt_ref = jstr(o.out_optimizer);
            }
            emit(o.c,
                 {{"delta", io::format_double(r.delta)},
                  {"recheck", io::format_double(r.recheck)},
                  {"optimizer_ref", opt_ref}},
                 r.residuals, r.iterations);
        } else if (sc_dmeas->parsed()) {
            auto ms = io::load_measset(o.mset);
            auto ns = io::load_measset(o.nset);
            auto r = convert::delta_meas_sim(ms, ns, o.c.tol);
            emit(o.c,
                 {{"delta", io::format_double(r.delta)},
                  {"recheck", io::format_double(r.recheck)}},
                 r.residuals, r.iterations);
        } else if (sc_lecam->parsed()) {
            auto p = io::load_experiment(o.p);
            auto q = io::load_experiment(o.q);
            if (o.symmetric) {
                auto fwd = classical::lecam_deficiency(p, q, o.c.tol);
                auto bwd = classical::lecam_deficiency(q, p, o.c.tol);
                emit(o.c, {{"delta", io::format_double(std::max(fwd.delta, bwd.delta))}},
                     fwd.residuals, fwd.iterations + bwd.iterations);
            } else {
                auto r = classical::lecam_deficiency(p, q, o.c.tol);
                emit(o.c, {{"delta", io::format_double(r.delta)}}, r.residuals,
                     r.iterations);
            }
        } else if (sc_ps->parsed()) {
            auto e = io::load_ensemble(o.ensemble);
            if (o.povm.empty()) {
                const double v = games::psucc_opt(e, o.c.tol);
                emit(o.c, {{"value", io::format_double(v)}, {"optimal", "true"}}, zero_res,
                     0);
            } else {
                auto m = io::load_povm(o.povm);
                emit(o.c, {{"value", io::format_double(games::psucc(e, m))}}, zero_res, 0);
            }
        } else if (sc_psq->parsed()) {
            auto e = io::load_ensemble(o.ensemble);
            auto m = io::load_povm(o.povm);
            emit(o.c, {{"value", io::format_double(games::psucc_q(e, m))}}, zero_res, 0);
        } else if (sc_vrc->parsed()) {
            ChoiMap p1 = load_channel_checked(o.phi1), p2 = load_channel_checked(o.phi2);
            auto rep = convert::verify_rand_chans(p1, p2, parse_variant(o.variant),
                                                  split_labels(o.fixed_b), o.epsilon,
                                                  o.samples, o.c.seed, o.c.tol, o.c.jobs);
            emit(o.c,
                 {{"delta", io::format_double(rep.delta)},
                  {"epsilon", io::format_double(rep.epsilon)},
                  {"n_samples", std::to_string(rep.n_samples)},
                  {"max_violation", io::format_double(rep.max_violation)},
                  {"violations", render_violations(rep.violations, false)},
                  {"worst", render_violations(rep.worst, true)}},
                 zero_res, 0);
        } else if (sc_vp->parsed()) {
            ChoiMap p1 = load_channel_checked(o.phi1), p2 = load_channel_checked(o.phi2);
            auto rep = games::verify_coro_psuc(p1, p2, o.c.tol);
            emit(o.c,
                 {{"sdp_value", io::format_double(rep.sdp_value)},
                  {"game_value", io::format_double(rep.game_value)},
                  {"gap", io::format_double(rep.gap)}},
                 zero_res, 0);
        } else if (sc_vs->parsed()) {
            auto ms = io::load_measset(o.mset);
            auto ns = io::load_measset(o.nset);
            auto rep = games::verify_sc_simul(ms, ns, o.epsilon, o.samples, o.c.seed,
                                              o.c.tol, o.c.jobs);
            emit(o.c,
                 {{"epsilon", io::format_double(rep.epsilon)},
                  {"n_samples", std::to_string(rep.n_samples)},
                  {"max_violation", io::format_double(rep.max_violation)},
                  {"violations", render_violations(rep.violations, false)},
                  {"worst", render_violations(rep.worst, true)}},
                 zero_res, 0);
        } else if (sc_gen->parsed()) {
            Rng rng(o.c.seed);
            if (o.kind == "channel") {
                io::save_choimap(o.out,
                                 channels::random_channel(o.din, o.dout, o.env, o.c.seed));
            } else if (o.kind == "state") {
                const int rank = o.rank > 0 ? o.rank : o.dim;
                channels::Labeled st;
                st.mat = channels::random_density_matrix(o.dim, rank, rng);
                st.dims = SystemDims::single("A0", o.dim);
                io::save_state(o.out, st);
            } else if (o.kind == "povm" || o.kind == "measset") {
                auto random_povm = [&]() {
                    // normalize random PSD effects against their sum
                    std::vector<CMatrix> gs;
                    CMatrix sum(o.dim, o.dim);
                    for (int i = 0; i < o.outcomes; ++i) {
                        CMatrix g = channels::random_density_matrix(o.dim, o.dim, rng);
                        gs.push_back(g);
                        sum += g;
                    }
                    CMatrix s_inv = linalg::herm_inv_sqrt_pinv(sum);
                    games::Povm p;
                    p.dims = SystemDims::single("C", o.dim);
                    for (auto& g : gs) {
                        CMatrix eff = s_inv * g * s_inv;
                        p.effects.push_back((eff + eff.adjoint()) * 0.5);
                    }
                    return p;
                };
                if (o.kind == "povm") {
                    io::save_povm(o.out, random_povm());
                } else {
                    games::MeasurementSet ms;
                    for (int i = 0; i < o.count; ++i) ms.push_back(random_povm());
                    io::save_measset(o.out, ms);
                }
            } else if (o.kind == "ensemble") {
                games::Ensemble e;
                e.dims = SystemDims::single("A", o.dim);
                auto priors = rng.dirichlet(o.items);
                for (int i = 0; i < o.items; ++i) {
                    const int rank = o.rank > 0 ? o.rank : ((i % 2) ? 1 : o.dim);
                    e.items.push_back(
                        {priors[i], channels::random_density_matrix(o.dim, rank, rng)});
                }
                io::save_ensemble(o.out, e);
            } else {
                classical::Experiment e;
                for (int i = 0; i < o.k; ++i) e.distributions.push_back(rng.dirichlet(o.points));
                io::save_experiment(o.out, e);
            }
            emit(o.c, {{"written", jstr(o.out)}, {"kind", jstr(o.kind)}}, zero_res, 0);
        }
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    }
}
