// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chancomp/norms.hpp"
#include "test_util.hpp"

using namespace chancomp::norms;
using namespace chancomp::channels;
using namespace chancomp::linalg;
using chancomp::Rng;
using testutil::max_abs_diff;
using testutil::random_density;
using testutil::random_hermitian;

namespace {

ChoiMap difference(const ChoiMap& a, const ChoiMap& b) {
    return ChoiMap{a.choi - b.choi, a.out_dims, a.in_dims};
}

CMatrix maxent_state(int d) {
    CMatrix v = vec_doubleket(CMatrix::identity(d));
    return v * v.adjoint() * (1.0 / d);
}

CMatrix ket_proj(int d, int k) {
    CMatrix m(d, d);
    m(k, k) = 1;
    return m;
}

}  // namespace

TEST_CASE("diamond norm") {
    Rng rng(1);
    SUBCASE("identical channels give zero") {
        ChoiMap phi = random_channel(2, 2, 2, 17);
        CHECK(diamond_norm(difference(phi, phi)) < 1e-7);
    }
    SUBCASE("replacement channels reproduce the trace distance") {
        for (int rep = 0; rep < 4; ++rep) {
            CMatrix sig = random_density(rng, 2), tau = random_density(rng, 2);
            ChoiMap d = difference(replacement_channel(sig, 2), replacement_channel(tau, 2));
            CHECK(diamond_norm(d) == doctest::Approx(trace_norm(sig - tau)).epsilon(1e-6));
        }
    }
    SUBCASE("identity vs depolarizing against a stabilized grid oracle") {
        const double lambda = 0.35;
        ChoiMap d = difference(identity_channel(2), depolarizing(2, lambda));
        const double sdp = diamond_norm(d);
        // oracle: max over pure inputs on system (x) ancilla of the Helstrom
        // trace norm; includes the maximally entangled input
        ChoiMap ext = tensor(relabeled(d, {"B1"}, {"A0"}), identity_channel(2, "R", "R1"));
        double best = 0.0;
        Rng orng(7);
        for (int k = 0; k < 300; ++k) {
            CMatrix phi = (k == 0) ? maxent_state(2) : haar_pure_state(4, orng);
            best = std::max(best, trace_norm(apply(ext, phi)));
        }
        CHECK(sdp >= best - 1e-7);
        CHECK(sdp == doctest::Approx(best).epsilon(1e-3));
    }
    SUBCASE("both formulations agree on random channel differences") {
        for (std::uint64_t s = 60; s < 64; ++s) {
            ChoiMap p1 = random_channel(2, 2, 2, s), p2 = random_channel(2, 2, 2, s + 100);
            auto r = diamond_norm_full(difference(p1, p2));
            CHECK(r.hi - r.lo <= 1e-6 * (1.0 + r.value));
        }
    }
    SUBCASE("contraction under postprocessing") {
        ChoiMap p1 = random_channel(2, 2, 2, 31), p2 = random_channel(2, 2, 2, 32);
        ChoiMap lam = random_channel(2, 2, 2, 33, "A1", "A2");
        ChoiMap d = difference(p1, p2);
        ChoiMap ld = difference(compose(lam, p1), compose(lam, p2));
        CHECK(diamond_norm(ld) <= diamond_norm(d) + 1e-6);
    }
    SUBCASE("rejects non-difference inputs") {
        ChoiMap phi = random_channel(2, 2, 2, 40);
        CHECK_THROWS(diamond_norm(phi));
    }
}

TEST_CASE("dual diamond norm / conditional min-entropy") {
    Rng rng(2);
    SystemDims dims({{"A0", 2}, {"A1", 2}});

    SUBCASE("product state gives the operator norm of the unconditioned factor") {
        CMatrix sig = random_density(rng, 2), tau = random_density(rng, 2);
        CMatrix rho = kron(sig, tau);
        auto r = dual_diamond_norm_full(rho, dims, {"A0"});
        CHECK(r.value == doctest::Approx(op_norm(tau)).epsilon(1e-6));
        CHECK(r.hmin == doctest::Approx(-std::log2(op_norm(tau))).epsilon(1e-6));
    }
    SUBCASE("maximally entangled qubit state") {
        auto r = dual_diamond_norm_full(maxent_state(2), dims, {"A0"});
        CHECK(r.value == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(r.hmin == doctest::Approx(-1.0).epsilon(1e-6));
    }
    SUBCASE("perfectly distinguishable qc ensemble state") {
        // rho_E for the ensemble {1/2, |0><0|; 1/2, |1><1|}, classical flag second
        CMatrix rho = kron(ket_proj(2, 0), ket_proj(2, 0)) * 0.5 +
                      kron(ket_proj(2, 1), ket_proj(2, 1)) * 0.5;
        SystemDims ar({{"A", 2}, {"R", 2}});
        CHECK(dual_diamond_norm(rho, ar, {"A"}) == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("primal and dual formulations agree on random PSD inputs") {
        for (int rep = 0; rep < 5; ++rep) {
            CMatrix rho = testutil::random_psd(rng, 4);
            auto r = dual_diamond_norm_full(rho, dims, {"A0"});
            CHECK(r.hi - r.lo < 1e-6 * (1.0 + r.value));
        }
    }
    SUBCASE("positively homogeneous and convex") {
        CMatrix r1 = testutil::random_psd(rng, 4), r2 = testutil::random_psd(rng, 4);
        const double v1 = dual_diamond_norm(r1, dims, {"A0"});
        const double v2 = dual_diamond_norm(r2, dims, {"A0"});
        CHECK(dual_diamond_norm(r1 * 2.5, dims, {"A0"}) ==
              doctest::Approx(2.5 * v1).epsilon(1e-6));
        CMatrix mix = r1 * 0.3 + r2 * 0.7;
        CHECK(dual_diamond_norm(mix, dims, {"A0"}) <= 0.3 * v1 + 0.7 * v2 + 1e-6);
    }
    SUBCASE("empty conditioning reduces to the operator norm") {
        CMatrix rho = testutil::random_psd(rng, 4);
        CHECK(dual_diamond_norm(rho, dims, {}) == doctest::Approx(op_norm(rho)).epsilon(1e-6));
    }
}

TEST_CASE("two-diamond norm over combs") {
    Rng rng(3);
    FSpec wires;
    wires.a0 = "a0";
    wires.a1 = "a1";
    wires.b0 = "b0";
    wires.b1 = "b1";

    SUBCASE("dual-section elements are normalized to one") {
        // sigma * C_gamma (x) I_{b1} with trivial ancilla
        CMatrix sigma = random_density(rng, 2);
        ChoiMap gamma = random_channel(2, 2, 2, 5, "a0", "a1");
        Labeled sc = link_product({sigma, SystemDims::single("b0", 2)},
                                  {gamma.choi, gamma.joint_dims()});
        Labeled full = link_product(sc, {CMatrix::identity(2), SystemDims::single("b1", 2)});
        auto val = two_diamond_dual_norm(full.mat, full.dims, wires);
        CHECK(val == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("dual-section elements with an ancilla are normalized to one") {
        // sigma on b0 (x) R, gamma in C(a0 R, a1), contracted over R
        CMatrix sigma = testutil::random_density(rng, 4);
        ChoiMap gamma = random_channel(4, 2, 2, 6, "in", "a1");
        gamma.in_dims = SystemDims({{"a0", 2}, {"Rw", 2}});
        Labeled sc = link_product({sigma, SystemDims({{"b0", 2}, {"Rw", 2}})},
                                  {gamma.choi, gamma.joint_dims()});
        Labeled full = link_product(sc, {CMatrix::identity(2), SystemDims::single("b1", 2)});
        auto val = two_diamond_dual_norm(full.mat, full.dims, wires);
        CHECK(val == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("trivial middle wires reduce to the unconditioned norm") {
        SystemDims dims({{"b1", 2}, {"a0", 2}, {"b0", 1}, {"a1", 1}});
        CMatrix rho = testutil::random_psd(rng, 4);
        const double v2d = two_diamond_dual_norm(rho, dims, wires);
        CHECK(v2d == doctest::Approx(op_norm(rho)).epsilon(1e-6));
    }
    SUBCASE("norm chain against the plain dual diamond norm") {
        SystemDims dims({{"b0", 2}, {"a1", 2}, {"b1", 2}, {"a0", 2}});
        for (int rep = 0; rep < 2; ++rep) {
            CMatrix rho = testutil::random_psd(rng, 16);
            const double v2 = two_diamond_dual_norm(rho, dims, wires);
            const double vfull = dual_diamond_norm(rho, dims, {"b0", "a1"});
            CHECK(v2 <= vfull + 1e-6 * (1.0 + vfull));
        }
    }
}

TEST_CASE("f_norm variants") {
    Rng rng(4);
    FSpec wires;
    wires.a0 = "a0";
    wires.a1 = "a1";
    wires.b0 = "b0";
    wires.b1 = "b1";
    SystemDims dims({{"b0", 2}, {"a1", 2}, {"b1", 2}, {"a0", 2}});

    SUBCASE("post variant matches the reduction to the dual diamond norm") {
        for (int rep = 0; rep < 3; ++rep) {
            CMatrix rho = testutil::random_psd(rng, 16);
            FSpec post = wires;
            post.variant = FVariant::Post;
            const double direct = f_norm(rho, dims, post);
            // reduction: contract the fixed input pair with the identity link
            CMatrix v = vec_doubleket(CMatrix::identity(2));
            Labeled psi{v * v.adjoint(), SystemDims({{"a0", 2}, {"b0", 2}})};
            Labeled linked = link_product({rho, dims}, psi);
            const double reduced =
                dual_diamond_norm(linked.mat, linked.dims, {"a1"});
            CHECK(direct == doctest::Approx(reduced).epsilon(1e-6));
        }
    }
    SUBCASE("pre variant matches its reduction") {
        CMatrix rho = testutil::random_psd(rng, 16);
        FSpec pre = wires;
        pre.variant = FVariant::Pre;
        const double direct = f_norm(rho, dims, pre);
        CMatrix v = vec_doubleket(CMatrix::identity(2));
        Labeled psi{v * v.adjoint(), SystemDims({{"a1", 2}, {"b1", 2}})};
        Labeled linked = link_product({rho, dims}, psi);
        CHECK(direct ==
              doctest::Approx(dual_diamond_norm(linked.mat, linked.dims, {"b0"}))
                  .epsilon(1e-6));
    }
    SUBCASE("full comb alias") {
        CMatrix rho = testutil::random_psd(rng, 16);
        FSpec fc = wires;
        fc.variant = FVariant::FullComb;
        CHECK(f_norm(rho, dims, fc) == two_diamond_dual_norm(rho, dims, wires));
    }
    SUBCASE("no-signaling and ppt constraint sets shrink the value") {
        CMatrix rho = testutil::random_psd(rng, 16);
        FSpec fc = wires, ns = wires, ppt = wires;
        fc.variant = FVariant::FullComb;
        ns.variant = FVariant::NoSignaling;
        ppt.variant = FVariant::PptComb;
        ppt.ppt_cut = {"b1", "a0"};
        const double vfc = f_norm(rho, dims, fc);
        CHECK(f_norm(rho, dims, ns) <= vfc + 1e-6 * (1.0 + vfc));
        CHECK(f_norm(rho, dims, ppt) <= vfc + 1e-6 * (1.0 + vfc));
    }
    SUBCASE("norm chain") {
        CMatrix rho = testutil::random_psd(rng, 16);
        FSpec ns = wires;
        ns.variant = FVariant::NoSignaling;
        const double vns = f_norm(rho, dims, ns);
        const double v2 = two_diamond_dual_norm(rho, dims, wires);
        const double vd = dual_diamond_norm(rho, dims, {"b0", "a1"});
        CHECK(vns <= v2 + 1e-6 * (1.0 + v2));
        CHECK(v2 <= vd + 1e-6 * (1.0 + vd));
    }
    SUBCASE("post-variant monotone under morphisms into the target space") {
        CMatrix rho = testutil::random_psd(rng, 16);
        FSpec post = wires;
        post.variant = FVariant::Post;
        const double before = f_norm(rho, dims, post);
        // morphism channel b1x -> b1; contracting its output wire acts by the
        // transpose map on rho, mapping the b1 pairing slot to b1x
        for (std::uint64_t seed : {71, 72, 73}) {
            ChoiMap lam = random_channel(2, 2, 2, seed, "b1x", "b1");
            Labeled moved = link_product({rho, dims}, {lam.choi, lam.joint_dims()});
            FSpec post2 = post;
            post2.b1 = "b1x";
            CHECK(f_norm(moved.mat, moved.dims, post2) <= before + 1e-6 * (1.0 + before));
        }
    }
}

TEST_CASE("dualnorm decomposition") {
    Rng rng(6);
    SystemDims dims({{"A0", 2}, {"A1", 2}});

    auto check_reconstruction = [&](const CMatrix& rho, double expect_norm) {
        auto dec = dualnorm_decompose(rho, dims, {"A0"});
        CHECK(dec.norm_value == doctest::Approx(expect_norm).epsilon(1e-5));
        CHECK(std::abs((dec.v * dec.v.adjoint()).trace().real() - 1.0) < 1e-6);
        CHECK(op_norm(dec.g) == doctest::Approx(expect_norm).epsilon(1e-5));
        // rho = (V . V (x) id)(G)
        CMatrix vi = kron(dec.v, CMatrix::identity(2));
        CHECK(max_abs_diff(vi * dec.g * vi.adjoint(), rho) < 1e-6);
    };

    SUBCASE("full-rank product input") {
        CMatrix sig = random_density(rng, 2);
        sig = sig * 0.8 + CMatrix::identity(2) * 0.1;  // keep it full rank
        CMatrix tau = random_density(rng, 2);
        check_reconstruction(kron(sig, tau), op_norm(tau));
    }
    SUBCASE("maximally entangled input") { check_reconstruction(maxent_state(2), 2.0); }
    SUBCASE("rank-deficient input") {
        CMatrix tau = random_density(rng, 2);
        CMatrix rho = kron(ket_proj(2, 0), tau);
        auto dec = dualnorm_decompose(rho, dims, {"A0"}, 1e-9);
        // V is supported on |0>
        CHECK(std::abs(dec.v(1, 1)) < 1e-4);
        CMatrix vi = kron(dec.v, CMatrix::identity(2));
        CHECK(max_abs_diff(vi * dec.g * vi.adjoint(), rho) < 1e-6);
    }
    SUBCASE("random reconstruction") {
        CMatrix rho = testutil::random_psd(rng, 4);
        auto dec = dualnorm_decompose(rho, dims, {"A0"});
        CMatrix vi = kron(dec.v, CMatrix::identity(2));
        CHECK(max_abs_diff(vi * dec.g * vi.adjoint(), rho) < 1e-6 * (1.0 + rho.max_abs()));
    }
}
