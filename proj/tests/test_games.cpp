// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chancomp/games.hpp"
#include "chancomp/norms.hpp"
#include "test_util.hpp"

using namespace chancomp::games;
using namespace chancomp::channels;
using namespace chancomp::linalg;
using chancomp::Rng;
using testutil::max_abs_diff;
using testutil::random_density;

namespace {

CMatrix ket_proj(int d, int k) {
    CMatrix m(d, d);
    m(k, k) = 1;
    return m;
}

CMatrix plus_proj() {
    CMatrix m(2, 2);
    m(0, 0) = m(0, 1) = m(1, 0) = m(1, 1) = 0.5;
    return m;
}

CMatrix minus_proj() {
    CMatrix m(2, 2);
    m(0, 0) = m(1, 1) = 0.5;
    m(0, 1) = m(1, 0) = -0.5;
    return m;
}

Povm z_measurement() {
    return Povm{{ket_proj(2, 0), ket_proj(2, 1)}, SystemDims::single("C", 2)};
}

Povm x_measurement() {
    return Povm{{plus_proj(), minus_proj()}, SystemDims::single("C", 2)};
}

Ensemble two_state_ensemble(const CMatrix& a, const CMatrix& b, double pa = 0.5) {
    Ensemble e;
    e.dims = SystemDims::single("C", a.rows());
    e.items = {{pa, a}, {1.0 - pa, b}};
    return e;
}

double helstrom(const Ensemble& e) {
    return 0.5 * (1.0 + trace_norm(e.items[0].state * e.items[0].prob -
                                   e.items[1].state * e.items[1].prob));
}

}  // namespace

TEST_CASE("psucc") {
    SUBCASE("orthogonal states with their projective measurement") {
        Ensemble e = two_state_ensemble(ket_proj(2, 0), ket_proj(2, 1));
        CHECK(psucc(e, z_measurement()) == doctest::Approx(1.0));
    }
    SUBCASE("uniform povm on any ensemble guesses at chance") {
        Ensemble e = two_state_ensemble(ket_proj(2, 0), plus_proj());
        Povm uniform{{CMatrix::identity(2) * 0.5, CMatrix::identity(2) * 0.5},
                     SystemDims::single("C", 2)};
        CHECK(psucc(e, uniform) == doctest::Approx(0.5));
    }
    SUBCASE("random instance against the index-loop oracle") {
        Rng rng(4);
        Ensemble e;
        e.dims = SystemDims::single("C", 3);
        auto priors = rng.dirichlet(3);
        for (int i = 0; i < 3; ++i) e.items.push_back({priors[i], random_density(rng, 3)});
        // random POVM from a random channel's adjoint acting on flags
        ChoiMap beta = random_channel(3, 3, 2, 9);
        Povm m;
        m.dims = SystemDims::single("C", 3);
        for (int i = 0; i < 3; ++i) m.effects.push_back(apply_adjoint(beta, ket_proj(3, i)));
        double oracle = 0.0;
        for (int i = 0; i < 3; ++i)
            oracle += e.items[i].prob * (e.items[i].state * m.effects[i]).trace().real();
        CHECK(psucc(e, m) == doctest::Approx(oracle));
    }
    SUBCASE("count mismatch is an error") {
        Ensemble e = two_state_ensemble(ket_proj(2, 0), ket_proj(2, 1));
        Povm single{{CMatrix::identity(2)}, SystemDims::single("C", 2)};
        CHECK_THROWS(psucc(e, single));
    }
}

TEST_CASE("psucc_opt") {
    SUBCASE("perfectly distinguishable pair") {
        Ensemble e = two_state_ensemble(ket_proj(2, 0), ket_proj(2, 1));
        CHECK(psucc_opt(e) == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("zero against plus reaches the Helstrom value") {
        Ensemble e = two_state_ensemble(ket_proj(2, 0), plus_proj());
        CHECK(psucc_opt(e) == doctest::Approx(0.5 + std::sqrt(2.0) / 4.0).epsilon(1e-6));
    }
    SUBCASE("matches the two-state closed form on random pairs") {
        Rng rng(11);
        for (int rep = 0; rep < 3; ++rep) {
            Ensemble e = two_state_ensemble(random_density(rng, 2), random_density(rng, 2),
                                            0.3 + 0.4 * rng.uniform());
            CHECK(psucc_opt(e) == doctest::Approx(helstrom(e)).epsilon(1e-6));
        }
    }
    SUBCASE("dominates any fixed measurement") {
        Rng rng(12);
        Ensemble e = two_state_ensemble(random_density(rng, 2), random_density(rng, 2));
        CHECK(psucc_opt(e) >= psucc(e, z_measurement()) - 1e-8);
        CHECK(psucc_opt(e) >= psucc(e, x_measurement()) - 1e-8);
    }
}

TEST_CASE("psucc_q") {
    Rng rng(21);
    SUBCASE("orthogonal ensemble with its fine-grained measurement") {
        Ensemble e = two_state_ensemble(ket_proj(2, 0), ket_proj(2, 1));
        CHECK(psucc_q(e, z_measurement()) == doctest::Approx(1.0));
    }
    SUBCASE("trivial measurement guesses the largest prior") {
        Ensemble e = two_state_ensemble(ket_proj(2, 0), plus_proj(), 0.7);
        Povm trivial{{CMatrix::identity(2)}, SystemDims::single("C", 2)};
        CHECK(psucc_q(e, trivial) == doctest::Approx(0.7));
    }
    SUBCASE("agrees with the min-entropy SDP of the measured state") {
        for (int rep = 0; rep < 3; ++rep) {
            Ensemble e;
            e.dims = SystemDims::single("C", 2);
            auto priors = rng.dirichlet(3);
            for (int i = 0; i < 3; ++i)
                e.items.push_back({priors[i], random_density(rng, 2)});
            Povm m = (rep % 2) ? z_measurement() : x_measurement();
            ChoiMap qc = qc_from_povm(m.effects, SystemDims::single("C", 2), "S");
            // (Phi_M (x) id)(rho_E) lives on S (x) flag R
            Ensemble measured;
            measured.dims = SystemDims::single("S", m.outcomes());
            for (const auto& it : e.items)
                measured.items.push_back({it.prob, apply(qc, it.state)});
            CMatrix rho = measured.qc_state();
            SystemDims sr({{"S", m.outcomes()}, {"R", e.size()}});
            const double sdp = chancomp::norms::dual_diamond_norm(rho, sr, {"S"});
            CHECK(psucc_q(e, m) == doctest::Approx(sdp).epsilon(1e-6));
        }
    }
    SUBCASE("invariant under outcome permutation and item relabeling") {
        Ensemble e = two_state_ensemble(random_density(rng, 2), random_density(rng, 2), 0.4);
        Povm m = x_measurement();
        const double v = psucc_q(e, m);
        std::swap(m.effects[0], m.effects[1]);
        CHECK(psucc_q(e, m) == doctest::Approx(v));
        std::swap(e.items[0], e.items[1]);
        CHECK(psucc_q(e, m) == doctest::Approx(v));
    }
}

TEST_CASE("pauli group and bell measurement") {
    SUBCASE("qubit group matches I, X, Z, XZ") {
        auto us = pauli_group(2);
        REQUIRE(us.size() == 4);
        CHECK(max_abs_diff(us[0], CMatrix::identity(2)) == 0.0);
        CMatrix x(2, 2), z(2, 2);
        x(0, 1) = x(1, 0) = 1;
        z(0, 0) = 1;
        z(1, 1) = -1;
        CHECK(max_abs_diff(us[1], z) < 1e-12);       // (a,b) = (0,1)
        CHECK(max_abs_diff(us[2], x) < 1e-12);       // (a,b) = (1,0)
        CHECK(max_abs_diff(us[3], x * z) < 1e-12);   // (a,b) = (1,1)
    }
    SUBCASE("twirl identity") {
        Rng rng(31);
        for (int d : {2, 3}) {
            CMatrix m = testutil::random_complex(rng, d, d);
            CMatrix acc(d, d);
            for (const auto& u : pauli_group(d)) acc += u * m * u.adjoint();
            CHECK(max_abs_diff(acc, CMatrix::identity(d) * (double(d) * m.trace())) < 1e-10);
        }
    }
    SUBCASE("bell effects are complete and projective for qubits") {
        Povm bell = bell_measurement(2);
        bell.validate(1e-12);
        CMatrix sum(4, 4);
        for (const auto& b : bell.effects) {
            sum += b;
            CHECK(max_abs_diff(b * b, b) < 1e-12);  // rank-one projectors
        }
        CHECK(max_abs_diff(sum, CMatrix::identity(4)) < 1e-12);
    }
}

TEST_CASE("pauli ensemble") {
    Rng rng(41);
    SystemDims ar({{"A", 2}, {"R", 2}});
    SUBCASE("product with a maximally mixed flag is invariant") {
        CMatrix rho = kron(random_density(rng, 2), CMatrix::identity(2) * 0.5);
        Ensemble e = pauli_ensemble(rho, ar, "R");
        REQUIRE(e.size() == 4);
        for (const auto& it : e.items) CHECK(max_abs_diff(it.state, rho) < 1e-12);
    }
    SUBCASE("min-entropy norm equals the rescaled optimal guessing probability") {
        for (int rep = 0; rep < 3; ++rep) {
            CMatrix rho = random_density(rng, 4);
            Ensemble e = pauli_ensemble(rho, ar, "R");
            const double lhs = chancomp::norms::dual_diamond_norm(rho, ar, {"A"});
            const double rhs = 2.0 * psucc_opt(e);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-5));
        }
    }
}

TEST_CASE("measurement-channel correspondence") {
    Rng rng(51);
    SUBCASE("identity channel maps to the bell measurement") {
        ChoiMap id = identity_channel(2, "A", "R");
        Povm m = meas_from_channel(id);
        Povm bell = bell_measurement(2);
        for (int x = 0; x < 4; ++x)
            CHECK(max_abs_diff(m.effects[x], bell.effects[x]) < 1e-10);
    }
    SUBCASE("round trips") {
        ChoiMap beta = random_channel(2, 2, 2, 61, "A", "R");
        Povm m = meas_from_channel(beta);
        m.validate(1e-8);
        ChoiMap back = channel_from_meas(m, 2, "A", "R");
        CHECK(max_abs_diff(back.choi, beta.choi) < 1e-9);

        Povm bell = bell_measurement(2);
        ChoiMap ch = channel_from_meas(bell, 2, "A", "R");
        CHECK(max_abs_diff(ch.choi, identity_channel(2, "A", "R").choi) < 1e-9);
        Povm again = meas_from_channel(ch);
        for (int x = 0; x < 4; ++x)
            CHECK(max_abs_diff(again.effects[x], bell.effects[x]) < 1e-9);
    }
    SUBCASE("guessing-game form of the pairing") {
        CMatrix rho = random_density(rng, 4);
        SystemDims ar({{"A", 2}, {"R", 2}});
        ChoiMap beta = random_channel(2, 2, 2, 62, "A", "R");
        Ensemble e = pauli_ensemble(rho, ar, "R");
        Povm m = meas_from_channel(beta);
        const double lhs = 0.5 * chancomp::channels::pairing(rho, ar, beta);
        CHECK(lhs == doctest::Approx(psucc(e, m)).epsilon(1e-9));
    }
}

TEST_CASE("bell guessing game reproduces the diamond distance") {
    SUBCASE("identical channels") {
        ChoiMap phi = random_channel(2, 2, 2, 71);
        auto rep = verify_coro_psuc(phi, phi);
        CHECK(std::abs(rep.sdp_value) < 1e-6);
        CHECK(std::abs(rep.game_value) < 1e-6);
    }
    SUBCASE("identity vs bit flip") {
        ChoiMap id = identity_channel(2);
        CMatrix x(2, 2);
        x(0, 1) = x(1, 0) = 1;
        ChoiMap flip = choi_of_kraus({x}, id.in_dims, id.out_dims);
        auto rep = verify_coro_psuc(id, flip);
        CHECK(rep.gap < 1e-5);
        CHECK(rep.sdp_value == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("random channel pairs") {
        for (std::uint64_t s = 0; s < 2; ++s) {
            ChoiMap p1 = random_channel(2, 2, 2, 100 + s);
            ChoiMap p2 = random_channel(2, 2, 2, 200 + s);
            auto rep = verify_coro_psuc(p1, p2);
            CHECK(rep.gap < 1e-5);
        }
    }
}

TEST_CASE("simulability sweep") {
    MeasurementSet zonly = {z_measurement()};
    MeasurementSet xonly = {x_measurement()};

    SUBCASE("incompatible bases give a designed witness at epsilon = 0") {
        auto rep = verify_sc_simul(zonly, xonly, 0.0, 20, 7);
        CHECK(rep.max_violation >= 0.49);
        REQUIRE(!rep.violations.empty());
        CHECK(rep.violations.front().lhs == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(rep.violations.front().rhs == doctest::Approx(0.5).epsilon(1e-9));
    }
    SUBCASE("exactly simulable family shows no violation") {
        // N = postprocessed mixture of the z measurement
        Povm n;
        n.dims = SystemDims::single("C", 2);
        n.effects = {ket_proj(2, 0) * 0.75 + ket_proj(2, 1) * 0.25,
                     ket_proj(2, 0) * 0.25 + ket_proj(2, 1) * 0.75};
        auto rep = verify_sc_simul(zonly, {n}, 0.0, 30, 11);
        CHECK(rep.max_violation <= 1e-9);
        CHECK(rep.violations.empty());
    }
    SUBCASE("report carries replayable worst seeds") {
        auto rep = verify_sc_simul(zonly, xonly, 0.0, 10, 13);
        REQUIRE(rep.worst.size() == 3);
        CHECK(rep.worst[0].gap >= rep.worst[1].gap);
    }
}
