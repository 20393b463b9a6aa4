// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_util.hpp"

using namespace chancomp::linalg;
using chancomp::Rng;
using testutil::max_abs_diff;
using testutil::random_complex;
using testutil::random_hermitian;
using testutil::random_psd;

namespace {

const cplx I1(0.0, 1.0);

CMatrix pauli_x() {
    CMatrix m(2, 2);
    m(0, 1) = 1;
    m(1, 0) = 1;
    return m;
}

CMatrix pauli_y() {
    CMatrix m(2, 2);
    m(0, 1) = -I1;
    m(1, 0) = I1;
    return m;
}

CMatrix ket_proj(int d, int k) {
    CMatrix m(d, d);
    m(k, k) = 1;
    return m;
}

// Normalized maximally entangled state on d x d.
CMatrix max_entangled(int d) {
    CMatrix v(d * d, 1);
    for (int i = 0; i < d; ++i) v(i * d + i, 0) = 1.0 / std::sqrt(double(d));
    return v * v.adjoint();
}

// Index-loop partial trace over the second factor of a (da*db) x (da*db) matrix.
CMatrix naive_trace_second(const CMatrix& x, int da, int db) {
    CMatrix r(da, da);
    for (int i = 0; i < da; ++i)
        for (int j = 0; j < da; ++j)
            for (int t = 0; t < db; ++t) r(i, j) += x(i * db + t, j * db + t);
    return r;
}

}  // namespace

TEST_CASE("kron basics") {
    CMatrix i2 = CMatrix::identity(2);
    CHECK(max_abs_diff(kron(i2, i2), CMatrix::identity(4)) == 0.0);

    CMatrix a = CMatrix::diag({1.0, 2.0});
    CMatrix b = CMatrix::diag({3.0, 4.0});
    CHECK(max_abs_diff(kron(a, b), CMatrix::diag({3.0, 4.0, 6.0, 8.0})) == 0.0);

    CMatrix p = kron(ket_proj(2, 0), ket_proj(2, 1));
    CHECK(p(1, 1) == cplx(1.0, 0.0));
    CHECK(std::abs(p.trace() - 1.0) < 1e-15);
}

TEST_CASE("partial_trace") {
    Rng rng(11);
    SystemDims ab({{"A", 3}, {"B", 2}});

    SUBCASE("product state") {
        CMatrix rho = random_psd(rng, 3), sigma = random_psd(rng, 2);
        CMatrix pt = partial_trace(kron(rho, sigma), ab, {"B"});
        CHECK(max_abs_diff(pt, rho * sigma.trace()) < 1e-12);
    }
    SUBCASE("maximally entangled marginal") {
        SystemDims dd({{"A", 2}, {"B", 2}});
        CMatrix psi = max_entangled(2);
        CMatrix pt = partial_trace(psi, dd, {"B"});
        CHECK(max_abs_diff(pt, CMatrix::identity(2) * 0.5) < 1e-14);
    }
    SUBCASE("random PSD vs index-loop oracle") {
        for (int rep = 0; rep < 5; ++rep) {
            CMatrix x = random_psd(rng, 6);
            CMatrix got = partial_trace(x, ab, {"B"});
            CHECK(max_abs_diff(got, naive_trace_second(x, 3, 2)) < 1e-12);
        }
    }
    SUBCASE("tracing the first factor") {
        CMatrix rho = random_psd(rng, 3), sigma = random_psd(rng, 2);
        CMatrix pt = partial_trace(kron(rho, sigma), ab, {"A"});
        CHECK(max_abs_diff(pt, sigma * rho.trace()) < 1e-12);
    }
    SUBCASE("unknown label") { CHECK_THROWS(partial_trace(CMatrix::identity(6), ab, {"C"})); }

    SUBCASE("kron/trace invariant on random pairs") {
        for (int rep = 0; rep < 5; ++rep) {
            CMatrix a = random_complex(rng, 3, 3), b = random_complex(rng, 2, 2);
            CMatrix pt = partial_trace(kron(a, b), ab, {"B"});
            CHECK(max_abs_diff(pt, a * b.trace()) < 1e-12);
        }
    }
}

TEST_CASE("partial_transpose") {
    Rng rng(7);
    SystemDims ab({{"A", 2}, {"B", 3}});

    SUBCASE("product") {
        CMatrix rho = random_hermitian(rng, 2), sigma = random_hermitian(rng, 3);
        CMatrix got = partial_transpose(kron(rho, sigma), ab, {"B"});
        CHECK(max_abs_diff(got, kron(rho, sigma.transpose())) < 1e-13);
    }
    SUBCASE("involution") {
        CMatrix x = random_complex(rng, 6, 6);
        CMatrix twice = partial_transpose(partial_transpose(x, ab, {"B"}), ab, {"B"});
        CHECK(max_abs_diff(twice, x) == 0.0);
    }
    SUBCASE("maximally entangled gives swap/2") {
        SystemDims dd({{"A", 2}, {"B", 2}});
        CMatrix got = partial_transpose(max_entangled(2), dd, {"B"});
        // direct 4x4 expectation: swap operator / 2
        CMatrix swap(4, 4);
        swap(0, 0) = swap(3, 3) = 1;
        swap(1, 2) = swap(2, 1) = 1;
        CHECK(max_abs_diff(got, swap * 0.5) < 1e-14);
        EigResult e = herm_eig(got);
        CHECK(e.eigenvalues.front() == doctest::Approx(-0.5));
        CHECK(e.eigenvalues.back() == doctest::Approx(0.5));
    }
}

TEST_CASE("permute_systems") {
    Rng rng(3);
    SystemDims ab({{"A", 2}, {"B", 3}});
    CMatrix rho = random_hermitian(rng, 2), sigma = random_hermitian(rng, 3);
    CMatrix x = kron(rho, sigma);

    CHECK(max_abs_diff(permute_systems(x, ab, {"A", "B"}), x) == 0.0);
    CMatrix swapped = permute_systems(x, ab, {"B", "A"});
    CHECK(max_abs_diff(swapped, kron(sigma, rho)) < 1e-13);
    SystemDims ba({{"B", 3}, {"A", 2}});
    CHECK(max_abs_diff(permute_systems(swapped, ba, {"A", "B"}), x) < 1e-13);

    SUBCASE("eigenvalues preserved") {
        SystemDims abc({{"A", 2}, {"B", 2}, {"C", 2}});
        CMatrix h = random_hermitian(rng, 8);
        CMatrix p = permute_systems(h, abc, {"C", "A", "B"});
        auto e1 = herm_eig(h).eigenvalues;
        auto e2 = herm_eig(p).eigenvalues;
        for (size_t i = 0; i < e1.size(); ++i) CHECK(e1[i] == doctest::Approx(e2[i]).epsilon(1e-10));
    }
    SUBCASE("bad permutation") { CHECK_THROWS(permute_systems(x, ab, {"A", "A"})); }
}

TEST_CASE("vec_doubleket") {
    CHECK(max_abs_diff(vec_doubleket(CMatrix::identity(2)),
                       CMatrix::col({1.0, 0.0, 0.0, 1.0})) == 0.0);

    CMatrix unit01(2, 2);
    unit01(0, 1) = 1;
    CHECK(max_abs_diff(vec_doubleket(unit01), CMatrix::col({0.0, 1.0, 0.0, 0.0})) == 0.0);

    Rng rng(5);
    SUBCASE("|W>> = (W x I)|I>> on random W") {
        for (int d : {2, 3}) {
            CMatrix w = random_complex(rng, d, d);
            CMatrix lhs = vec_doubleket(w);
            CMatrix rhs = kron(w, CMatrix::identity(d)) * vec_doubleket(CMatrix::identity(d));
            CHECK(max_abs_diff(lhs, rhs) < 1e-13);
        }
    }
    SUBCASE("(X x I)|I>> = (I x X^T)|I>>") {
        CMatrix x = random_complex(rng, 3, 3);
        CMatrix id = CMatrix::identity(3);
        CMatrix lhs = kron(x, id) * vec_doubleket(id);
        CMatrix rhs = kron(id, x.transpose()) * vec_doubleket(id);
        CHECK(max_abs_diff(lhs, rhs) < 1e-13);
    }
    SUBCASE("unvec round trip") {
        CMatrix w = random_complex(rng, 3, 3);
        CHECK(max_abs_diff(unvec_doubleket(vec_doubleket(w), 3, 3), w) == 0.0);
    }
}

TEST_CASE("herm_eig") {
    SUBCASE("diagonal sorted") {
        EigResult e = herm_eig(CMatrix::diag({3.0, -1.0, 2.0}));
        CHECK(e.eigenvalues[0] == doctest::Approx(-1.0));
        CHECK(e.eigenvalues[1] == doctest::Approx(2.0));
        CHECK(e.eigenvalues[2] == doctest::Approx(3.0));
    }
    SUBCASE("pauli x") {
        EigResult e = herm_eig(pauli_x());
        CHECK(e.eigenvalues[0] == doctest::Approx(-1.0));
        CHECK(e.eigenvalues[1] == doctest::Approx(1.0));
    }
    SUBCASE("pauli y") {
        EigResult e = herm_eig(pauli_y());
        CHECK(e.eigenvalues[0] == doctest::Approx(-1.0));
        CHECK(e.eigenvalues[1] == doctest::Approx(1.0));
    }
    SUBCASE("reconstruction and residuals on random Hermitian") {
        Rng rng(17);
        for (int n : {1, 2, 3, 5, 8, 12}) {
            CMatrix h = random_hermitian(rng, n);
            EigResult e = herm_eig(h);
            CMatrix rec(n, n);
            for (int k = 0; k < n; ++k)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        rec(i, j) += e.eigenvalues[k] * e.eigenvectors(i, k) *
                                     std::conj(e.eigenvectors(j, k));
            CHECK(max_abs_diff(rec, h) < 1e-9 * std::max(1.0, h.max_abs()));
            // residual ||Hv - lambda v||
            const double hnorm = op_norm(h);
            for (int k = 0; k < n; ++k) {
                CMatrix v(n, 1);
                for (int i = 0; i < n; ++i) v(i, 0) = e.eigenvectors(i, k);
                CMatrix r = h * v - v * e.eigenvalues[k];
                CHECK(r.frob_norm() <= 1e-9 * std::max(1.0, hnorm));
            }
            // orthonormality
            CMatrix gram = e.eigenvectors.adjoint() * e.eigenvectors;
            CHECK(max_abs_diff(gram, CMatrix::identity(n)) < 1e-10);
        }
    }
    SUBCASE("degenerate spectrum") {
        EigResult e = herm_eig(CMatrix::identity(5));
        for (double lam : e.eigenvalues) CHECK(lam == doctest::Approx(1.0));
    }
    SUBCASE("non-Hermitian rejected") {
        CMatrix m(2, 2);
        m(0, 1) = 1.0;
        CHECK_THROWS(herm_eig(m));
    }
}

TEST_CASE("norms and distances") {
    Rng rng(23);
    SUBCASE("rank one") {
        CMatrix v = random_complex(rng, 4, 1);
        v = v * (1.0 / v.frob_norm());
        CMatrix m = v * v.adjoint() * 2.5;
        CHECK(trace_norm(m) == doctest::Approx(2.5));
        CHECK(op_norm(m) == doctest::Approx(2.5));
    }
    SUBCASE("trace norm dominates op norm") {
        for (int rep = 0; rep < 10; ++rep) {
            CMatrix h = random_hermitian(rng, 5);
            CHECK(trace_norm(h) >= op_norm(h) - 1e-12);
        }
    }
    SUBCASE("fidelity basics") {
        CMatrix rho = testutil::random_density(rng, 3);
        CHECK(fidelity(rho, rho) == doctest::Approx(1.0));
        CHECK(purified_distance(rho, rho) == doctest::Approx(0.0));

        CHECK(fidelity(ket_proj(2, 0), ket_proj(2, 1)) == doctest::Approx(0.0));
        CHECK(purified_distance(ket_proj(2, 0), ket_proj(2, 1)) == doctest::Approx(1.0));

        CMatrix plus(2, 2);
        plus(0, 0) = plus(0, 1) = plus(1, 0) = plus(1, 1) = 0.5;
        CHECK(fidelity(ket_proj(2, 0), plus) == doctest::Approx(1.0 / std::sqrt(2.0)));
        CHECK(purified_distance(ket_proj(2, 0), plus) ==
              doctest::Approx(1.0 / std::sqrt(2.0)));
    }
    SUBCASE("fidelity rejects non-states") {
        CHECK_THROWS(fidelity(CMatrix::identity(2), ket_proj(2, 0)));
    }
    SUBCASE("general trace norm equals hermitian route") {
        CMatrix h = random_hermitian(rng, 4);
        CMatrix u = h + CMatrix::identity(4) * cplx(0, 0);  // hermitian path
        CHECK(trace_norm(u) == doctest::Approx(trace_norm(h)));
    }
}
