// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.
//
// Primal-dual path-following interior-point solver for dense conic programs
// over products of PSD (svec) and nonnegative blocks, with free variables
// handled by presolve elimination. The iteration is the homogeneous
// self-dual embedding with Nesterov-Todd scaling and a Mehrotra
// predictor-corrector step, in the style of the conelp algorithm of
// Andersen, Dahl and Vandenberghe.

#include "chancomp/conic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace chancomp::conic {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;

// --- small dense kernels (row-major storage) ---------------------------------

// Real symmetric eigendecomposition: Householder tridiagonalization followed
// by implicit QL with shifts. `a` is destroyed; eigenvectors come back as
// columns of `vec`, eigenvalues ascending in `val`.
void sym_eig(int n, std::vector<double>& a, std::vector<double>& val,
             std::vector<double>& vec) {
    val.assign(n, 0.0);
    vec.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) vec[static_cast<size_t>(i) * n + i] = 1.0;
    if (n == 0) return;
    if (n == 1) {
        val[0] = a[0];
        return;
    }
    std::vector<double> d(n), e(n, 0.0);

    auto A = [&](int i, int j) -> double& { return a[static_cast<size_t>(i) * n + j]; };
    auto V = [&](int i, int j) -> double& { return vec[static_cast<size_t>(i) * n + j]; };

    for (int k = 0; k + 2 < n; ++k) {
        double sigma2 = 0.0;
        for (int j = k + 1; j < n; ++j) sigma2 += A(j, k) * A(j, k);
        double sigma = std::sqrt(sigma2);
        if (sigma == 0.0) continue;
        if (A(k + 1, k) < 0.0) sigma = -sigma;
        std::vector<double> v(n, 0.0);
        for (int j = k + 1; j < n; ++j) v[j] = A(j, k);
        v[k + 1] += sigma;
        double vnorm2 = 0.0;
        for (int j = k + 1; j < n; ++j) vnorm2 += v[j] * v[j];
        if (vnorm2 == 0.0) continue;
        const double tau = 2.0 / vnorm2;

        std::vector<double> p(n, 0.0);
        for (int i = k; i < n; ++i) {
            double s = 0.0;
            for (int j = k + 1; j < n; ++j) s += A(i, j) * v[j];
            p[i] = tau * s;
        }
        double vtp = 0.0;
        for (int j = k + 1; j < n; ++j) vtp += v[j] * p[j];
        const double kap = 0.5 * tau * vtp;
        std::vector<double> w(n, 0.0);
        for (int i = k; i < n; ++i) w[i] = p[i] - kap * v[i];
        for (int i = k; i < n; ++i) {
            const double vi = (i >= k + 1) ? v[i] : 0.0;
            for (int j = k; j < n; ++j) {
                const double vj = (j >= k + 1) ? v[j] : 0.0;
                A(i, j) -= vi * w[j] + w[i] * vj;
            }
        }
        for (int i = 0; i < n; ++i) {
            double qv = 0.0;
            for (int j = k + 1; j < n; ++j) qv += V(i, j) * v[j];
            qv *= tau;
            for (int j = k + 1; j < n; ++j) V(i, j) -= qv * v[j];
        }
    }
    for (int i = 0; i < n; ++i) d[i] = A(i, i);
    for (int k = 0; k + 1 < n; ++k) e[k] = A(k + 1, k);

    const double eps = std::numeric_limits<double>::epsilon();
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (iter++ == 100) throw std::runtime_error("sym_eig: QL failed to converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, pshift = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= pshift;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - pshift;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    pshift = s * r;
                    d[i + 1] = g + pshift;
                    g = c * r - b;
                    for (int row = 0; row < n; ++row) {
                        const double qf = V(row, i + 1);
                        V(row, i + 1) = s * V(row, i) + c * qf;
                        V(row, i) = c * V(row, i) - s * qf;
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= pshift;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return d[i] < d[j]; });
    std::vector<double> vv = vec;
    for (int c = 0; c < n; ++c) {
        val[c] = d[order[c]];
        for (int r = 0; r < n; ++r)
            vec[static_cast<size_t>(r) * n + c] = vv[static_cast<size_t>(r) * n + order[c]];
    }
}

bool cholesky_inplace(int n, std::vector<double>& a) {
    for (int j = 0; j < n; ++j) {
        double diag = a[static_cast<size_t>(j) * n + j];
        const double* rj = &a[static_cast<size_t>(j) * n];
        for (int k = 0; k < j; ++k) diag -= rj[k] * rj[k];
        if (diag <= 0.0 || !std::isfinite(diag)) return false;
        diag = std::sqrt(diag);
        a[static_cast<size_t>(j) * n + j] = diag;
        for (int i = j + 1; i < n; ++i) {
            double v = a[static_cast<size_t>(i) * n + j];
            const double* ri = &a[static_cast<size_t>(i) * n];
            for (int k = 0; k < j; ++k) v -= ri[k] * rj[k];
            a[static_cast<size_t>(i) * n + j] = v / diag;
        }
    }
    return true;
}

void chol_fwd(int n, const std::vector<double>& L, double* x) {
    for (int i = 0; i < n; ++i) {
        double v = x[i];
        const double* row = &L[static_cast<size_t>(i) * n];
        for (int k = 0; k < i; ++k) v -= row[k] * x[k];
        x[i] = v / row[i];
    }
}

void chol_bwd(int n, const std::vector<double>& L, double* x) {
    for (int i = n - 1; i >= 0; --i) {
        double v = x[i];
        for (int k = i + 1; k < n; ++k) v -= L[static_cast<size_t>(k) * n + i] * x[k];
        x[i] = v / L[static_cast<size_t>(i) * n + i];
    }
}

void matmul(int n, const std::vector<double>& a, const std::vector<double>& b,
            std::vector<double>& c) {
    c.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const double aik = a[static_cast<size_t>(i) * n + k];
            if (aik == 0.0) continue;
            const double* brow = &b[static_cast<size_t>(k) * n];
            double* crow = &c[static_cast<size_t>(i) * n];
            for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
}

void spectral(int n, const std::vector<double>& val, const std::vector<double>& vec,
              double (*f)(double), std::vector<double>& out) {
    out.assign(static_cast<size_t>(n) * n, 0.0);
    for (int k = 0; k < n; ++k) {
        const double fv = f(val[k]);
        if (fv == 0.0) continue;
        for (int i = 0; i < n; ++i) {
            const double vik = vec[static_cast<size_t>(i) * n + k] * fv;
            if (vik == 0.0) continue;
            for (int j = 0; j < n; ++j)
                out[static_cast<size_t>(i) * n + j] += vik * vec[static_cast<size_t>(j) * n + k];
        }
    }
}

double fsqrt(double v) { return std::sqrt(std::max(v, 0.0)); }
double finvsqrt(double v) { return 1.0 / std::sqrt(std::max(v, 1e-300)); }

void symmetrize(int n, std::vector<double>& m) {
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double avg =
                0.5 * (m[static_cast<size_t>(i) * n + j] + m[static_cast<size_t>(j) * n + i]);
            m[static_cast<size_t>(i) * n + j] = avg;
            m[static_cast<size_t>(j) * n + i] = avg;
        }
}

// --- cone layout --------------------------------------------------------------

struct BlockInfo {
    BlockKind kind;
    int n;
    int offset;
    int scalars;
};

void svec_to_mat(int n, const double* v, std::vector<double>& m) {
    m.assign(static_cast<size_t>(n) * n, 0.0);
    int idx = 0;
    for (int q = 0; q < n; ++q)
        for (int p = q; p < n; ++p, ++idx) {
            if (p == q) {
                m[static_cast<size_t>(p) * n + p] = v[idx];
            } else {
                const double w = v[idx] / kSqrt2;
                m[static_cast<size_t>(p) * n + q] = w;
                m[static_cast<size_t>(q) * n + p] = w;
            }
        }
}

void mat_to_svec(int n, const std::vector<double>& m, double* v) {
    int idx = 0;
    for (int q = 0; q < n; ++q)
        for (int p = q; p < n; ++p, ++idx)
            v[idx] = (p == q) ? m[static_cast<size_t>(p) * n + p]
                              : kSqrt2 * 0.5 *
                                    (m[static_cast<size_t>(p) * n + q] +
                                     m[static_cast<size_t>(q) * n + p]);
}

struct PsdScale {
    std::vector<double> R, Rinv, T, Tinv;
    std::vector<double> lambda;
};

struct Scaling {
    std::vector<PsdScale> psd;
    std::vector<std::vector<double>> nn_d, nn_lambda;
};

}  // namespace

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        default: return "numerical_failure";
    }
}

std::vector<double> svec_pack(const std::vector<double>& sym, int n) {
    std::vector<double> v(svec_dim(n));
    mat_to_svec(n, sym, v.data());
    return v;
}

std::vector<double> svec_unpack(const std::vector<double>& v, int n) {
    std::vector<double> m;
    svec_to_mat(n, v.data(), m);
    return m;
}

linalg::CMatrix embed_hermitian(const linalg::CMatrix& h) {
    if (!h.is_hermitian(1e-10))
        throw std::invalid_argument("embed_hermitian: input not Hermitian");
    const int n = h.rows();
    linalg::CMatrix e(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double re = h(i, j).real(), im = h(i, j).imag();
            e(i, j) = re;
            e(n + i, n + j) = re;
            e(n + i, j) = im;
            e(i, n + j) = -im;
        }
    return e;
}

void dump_problem(const ConicProblem& p, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("dump_problem: cannot open " + path);
    std::fprintf(f, "conicproblem-v1 %s %d %d %zu\n", p.maximize ? "max" : "min", p.num_vars(),
                 p.num_rows(), p.blocks.size());
    for (size_t i = 0; i < p.blocks.size(); ++i) {
        const char* k = p.blocks[i].kind == BlockKind::Psd
                            ? "psd"
                            : (p.blocks[i].kind == BlockKind::Nonneg ? "nonneg" : "free");
        std::fprintf(f, "block %zu %s %d\n", i, k, p.blocks[i].n);
    }
    for (size_t j = 0; j < p.c.size(); ++j)
        if (p.c[j] != 0.0) std::fprintf(f, "c %zu %.17g\n", j, p.c[j]);
    for (const auto& t : p.a) std::fprintf(f, "a %d %d %.17g\n", t.row, t.col, t.val);
    for (size_t i = 0; i < p.b.size(); ++i)
        if (p.b[i] != 0.0) std::fprintf(f, "b %zu %.17g\n", i, p.b[i]);
    std::fclose(f);
}

// =============================================================================
// interior-point core on the G-form
// =============================================================================

namespace {

struct Core {
    const GForm& f;
    SolveOptions opts;
    int p, m, q;
    std::vector<BlockInfo> blocks;
    int degree = 0;

    struct Entry {
        int pp, qq;
        double v;
    };
    std::vector<std::vector<std::pair<int, std::vector<Entry>>>> psd_cols;
    std::vector<int> psd_block_ids, nn_block_ids;

    std::vector<double> cvec, bvec, hvec;
    double nb = 1.0, nh = 1.0, nc = 1.0;

    std::vector<double> x, y, s, z;
    double tau = 1.0, kappa = 1.0;

    Scaling sc;
    std::vector<double> H, L1, V, S2;
    double deltaH = 0.0, deltaS = 0.0;

    explicit Core(const GForm& gf, const SolveOptions& o) : f(gf), opts(o) {
        p = f.nvar;
        m = static_cast<int>(f.b.size());
        int off = 0;
        for (const auto& cs : f.cones) {
            BlockInfo bi{cs.kind, cs.n, off, cs.scalar_count()};
            blocks.push_back(bi);
            off += bi.scalars;
            degree += cs.n;
        }
        q = off;
        if (static_cast<int>(f.h.size()) != q || static_cast<int>(f.grows.size()) != q)
            throw std::invalid_argument("solve_gform: G/h size mismatch with cones");
        if (static_cast<int>(f.arows.size()) != m)
            throw std::invalid_argument("solve_gform: A/b size mismatch");
        if (static_cast<int>(f.c.size()) != p)
            throw std::invalid_argument("solve_gform: objective size mismatch");

        cvec = f.c;
        bvec = f.b;
        hvec = f.h;

        for (size_t bix = 0; bix < blocks.size(); ++bix) {
            if (blocks[bix].kind == BlockKind::Psd)
                psd_block_ids.push_back(static_cast<int>(bix));
            else
                nn_block_ids.push_back(static_cast<int>(bix));
        }
        psd_cols.assign(blocks.size(), {});
        std::vector<std::map<int, std::vector<Entry>>> tmp(blocks.size());
        size_t bix = 0;
        for (int r = 0; r < q; ++r) {
            while (r >= blocks[bix].offset + blocks[bix].scalars) ++bix;
            if (blocks[bix].kind != BlockKind::Psd) continue;
            const int local = r - blocks[bix].offset;
            int Q = 0, rem = local;
            const int n = blocks[bix].n;
            while (rem >= n - Q) {
                rem -= n - Q;
                ++Q;
            }
            const int P = Q + rem;
            for (const auto& [cix, v] : f.grows[r].e) tmp[bix][cix].push_back({P, Q, v});
        }
        for (size_t bb = 0; bb < blocks.size(); ++bb)
            for (auto& [cix, es] : tmp[bb]) psd_cols[bb].emplace_back(cix, std::move(es));

        auto inf_norm = [](const std::vector<double>& v) {
            double s0 = 0.0;
            for (double t : v) s0 = std::max(s0, std::abs(t));
            return s0;
        };
        nb = 1.0 + std::sqrt(std::inner_product(bvec.begin(), bvec.end(), bvec.begin(), 0.0));
        nh = 1.0 + std::sqrt(std::inner_product(hvec.begin(), hvec.end(), hvec.begin(), 0.0));
        nc = 1.0 + std::sqrt(std::inner_product(cvec.begin(), cvec.end(), cvec.begin(), 0.0));

        const double eta =
            std::sqrt(std::max({1.0, inf_norm(cvec), inf_norm(bvec), inf_norm(hvec)}));
        x.assign(p, 0.0);
        y.assign(m, 0.0);
        s.assign(q, 0.0);
        z.assign(q, 0.0);
        for (const auto& bi : blocks) cone_e(bi, &s[bi.offset], eta);
        z = s;
        tau = 1.0;
        kappa = eta * eta;
    }

    static void cone_e(const BlockInfo& bi, double* dst, double scale) {
        if (bi.kind == BlockKind::Nonneg) {
            for (int i = 0; i < bi.n; ++i) dst[i] = scale;
        } else {
            int idx = 0;
            for (int qq = 0; qq < bi.n; ++qq)
                for (int pp = qq; pp < bi.n; ++pp, ++idx) dst[idx] = (pp == qq) ? scale : 0.0;
        }
    }

    void a_mul(const std::vector<double>& v, std::vector<double>& out) const {
        out.assign(m, 0.0);
        for (int r = 0; r < m; ++r) {
            double sum = 0.0;
            for (const auto& [cix, val] : f.arows[r].e) sum += val * v[cix];
            out[r] = sum;
        }
    }
    void at_mul(const std::vector<double>& v, std::vector<double>& out) const {
        out.assign(p, 0.0);
        for (int r = 0; r < m; ++r) {
            const double vr = v[r];
            if (vr == 0.0) continue;
            for (const auto& [cix, val] : f.arows[r].e) out[cix] += val * vr;
        }
    }
    void g_mul(const std::vector<double>& v, std::vector<double>& out) const {
        out.assign(q, 0.0);
        for (int r = 0; r < q; ++r) {
            double sum = 0.0;
            for (const auto& [cix, val] : f.grows[r].e) sum += val * v[cix];
            out[r] = sum;
        }
    }
    void gt_mul(const std::vector<double>& v, std::vector<double>& out) const {
        out.assign(p, 0.0);
        for (int r = 0; r < q; ++r) {
            const double vr = v[r];
            if (vr == 0.0) continue;
            for (const auto& [cix, val] : f.grows[r].e) out[cix] += val * vr;
        }
    }

    static double dot(const std::vector<double>& a, const std::vector<double>& b) {
        return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
    }
    static double nrm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

    bool compute_scaling() {
        sc.psd.assign(blocks.size(), {});
        sc.nn_d.assign(blocks.size(), {});
        sc.nn_lambda.assign(blocks.size(), {});
        for (size_t bix = 0; bix < blocks.size(); ++bix) {
            const auto& bi = blocks[bix];
            if (bi.kind == BlockKind::Nonneg) {
                auto& d = sc.nn_d[bix];
                auto& lam = sc.nn_lambda[bix];
                d.resize(bi.n);
                lam.resize(bi.n);
                for (int i = 0; i < bi.n; ++i) {
                    const double si = s[bi.offset + i], zi = z[bi.offset + i];
                    if (si <= 0.0 || zi <= 0.0) return false;
                    d[i] = std::sqrt(si / zi);
                    lam[i] = std::sqrt(si * zi);
                }
            } else {
                const int n = bi.n;
                std::vector<double> S, Z;
                svec_to_mat(n, &s[bi.offset], S);
                svec_to_mat(n, &z[bi.offset], Z);
                std::vector<double> val, vec, tmp = S;
                sym_eig(n, tmp, val, vec);
                if (val.front() <= 0.0) return false;
                std::vector<double> sh;
                spectral(n, val, vec, &fsqrt, sh);
                std::vector<double> t1, M;
                matmul(n, sh, Z, t1);
                matmul(n, t1, sh, M);
                symmetrize(n, M);
                tmp = M;
                sym_eig(n, tmp, val, vec);
                if (val.front() <= 0.0) return false;
                std::vector<double> mih;
                spectral(n, val, vec, &finvsqrt, mih);
                std::vector<double> T;
                matmul(n, sh, mih, t1);
                matmul(n, t1, sh, T);
                symmetrize(n, T);
                tmp = T;
                sym_eig(n, tmp, val, vec);
                if (val.front() <= 0.0) return false;
                std::vector<double> th, thi;
                spectral(n, val, vec, &fsqrt, th);
                spectral(n, val, vec, &finvsqrt, thi);
                std::vector<double> lm;
                matmul(n, th, Z, t1);
                matmul(n, t1, th, lm);
                symmetrize(n, lm);
                tmp = lm;
                std::vector<double> qv;
                sym_eig(n, tmp, val, qv);
                if (val.front() <= 0.0) return false;
                PsdScale ps;
                ps.lambda = val;
                matmul(n, th, qv, ps.R);
                std::vector<double> qt(static_cast<size_t>(n) * n);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        qt[static_cast<size_t>(i) * n + j] = qv[static_cast<size_t>(j) * n + i];
                matmul(n, qt, thi, ps.Rinv);
                ps.T = T;
                std::vector<double> rit(static_cast<size_t>(n) * n);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        rit[static_cast<size_t>(i) * n + j] =
                            ps.Rinv[static_cast<size_t>(j) * n + i];
                matmul(n, rit, ps.Rinv, ps.Tinv);
                symmetrize(n, ps.Tinv);
                sc.psd[bix] = std::move(ps);
            }
        }
        return true;
    }

    void congruence(const BlockInfo& bi, const std::vector<double>& M, const double* u,
                    double* out) const {
        const int n = bi.n;
        std::vector<double> U, t1, t2;
        svec_to_mat(n, u, U);
        matmul(n, M, U, t1);
        matmul(n, t1, M, t2);
        mat_to_svec(n, t2, out);
    }

    void apply_W2inv(const std::vector<double>& u, std::vector<double>& out) const {
        out.assign(q, 0.0);
        for (size_t bix = 0; bix < blocks.size(); ++bix) {
            const auto& bi = blocks[bix];
            if (bi.kind == BlockKind::Nonneg) {
                for (int i = 0; i < bi.n; ++i) {
                    const double d = sc.nn_d[bix][i];
                    out[bi.offset + i] = u[bi.offset + i] / (d * d);
                }
            } else {
                congruence(bi, sc.psd[bix].Tinv, &u[bi.offset], &out[bi.offset]);
            }
        }
    }
    void apply_W2(const std::vector<double>& u, std::vector<double>& out) const {
        out.assign(q, 0.0);
        for (size_t bix = 0; bix < blocks.size(); ++bix) {
            const auto& bi = blocks[bix];
            if (bi.kind == BlockKind::Nonneg) {
                for (int i = 0; i < bi.n; ++i) {
                    const double d = sc.nn_d[bix][i];
                    out[bi.offset + i] = u[bi.offset + i] * d * d;
                }
            } else {
                congruence(bi, sc.psd[bix].T, &u[bi.offset], &out[bi.offset]);
            }
        }
    }

    enum class WOp { W, Wt, WinvT };
    void apply_Wop(WOp op, const std::vector<double>& u, std::vector<double>& out) const {
        out.assign(q, 0.0);
        for (size_t bix = 0; bix < blocks.size(); ++bix) {
            const auto& bi = blocks[bix];
            if (bi.kind == BlockKind::Nonneg) {
                for (int i = 0; i < bi.n; ++i) {
                    const double d = sc.nn_d[bix][i];
                    out[bi.offset + i] =
                        (op == WOp::WinvT) ? u[bi.offset + i] / d : u[bi.offset + i] * d;
                }
            } else {
                const int n = bi.n;
                const auto& ps = sc.psd[bix];
                std::vector<double> U, t1, t2;
                std::vector<double> left(static_cast<size_t>(n) * n),
                    right(static_cast<size_t>(n) * n);
                svec_to_mat(n, &u[bi.offset], U);
                const std::vector<double>* base = (op == WOp::WinvT) ? &ps.Rinv : &ps.R;
                const bool transpose_left = (op == WOp::W);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        const double direct = (*base)[static_cast<size_t>(i) * n + j];
                        const double trans = (*base)[static_cast<size_t>(j) * n + i];
                        left[static_cast<size_t>(i) * n + j] = transpose_left ? trans : direct;
                        right[static_cast<size_t>(i) * n + j] = transpose_left ? direct : trans;
                    }
                matmul(n, left, U, t1);
                matmul(n, t1, right, t2);
                mat_to_svec(n, t2, &out[bi.offset]);
            }
        }
    }

    bool factor() {
        H.assign(static_cast<size_t>(p) * p, 0.0);
        for (int bid : nn_block_ids) {
            const auto& bi = blocks[bid];
            for (int i = 0; i < bi.n; ++i) {
                const int r = bi.offset + i;
                const double d = sc.nn_d[bid][i];
                const double w = 1.0 / (d * d);
                const auto& row = f.grows[r].e;
                for (size_t a1 = 0; a1 < row.size(); ++a1)
                    for (size_t a2 = 0; a2 <= a1; ++a2) {
                        const int j1 = row[a1].first, j2 = row[a2].first;
                        const double v = row[a1].second * row[a2].second * w;
                        if (j1 >= j2)
                            H[static_cast<size_t>(j1) * p + j2] += v;
                        else
                            H[static_cast<size_t>(j2) * p + j1] += v;
                    }
            }
        }
        std::vector<double> Mj;
        for (int bid : psd_block_ids) {
            const auto& bi = blocks[bid];
            const int n = bi.n;
            const auto& cols = psd_cols[bid];
            const auto& Tinv = sc.psd[bid].Tinv;
            for (size_t jj = 0; jj < cols.size(); ++jj) {
                const int cj = cols[jj].first;
                Mj.assign(static_cast<size_t>(n) * n, 0.0);
                for (const auto& en : cols[jj].second) {
                    if (en.pp == en.qq) {
                        const double v = en.v;
                        const double* tp = &Tinv[static_cast<size_t>(en.pp) * n];
                        for (int i = 0; i < n; ++i) {
                            const double f1 = v * tp[i];
                            if (f1 == 0.0) continue;
                            double* mrow = &Mj[static_cast<size_t>(i) * n];
                            for (int j2 = 0; j2 < n; ++j2) mrow[j2] += f1 * tp[j2];
                        }
                    } else {
                        const double v = en.v / kSqrt2;
                        const double* tp = &Tinv[static_cast<size_t>(en.pp) * n];
                        const double* tq = &Tinv[static_cast<size_t>(en.qq) * n];
                        for (int i = 0; i < n; ++i) {
                            const double f1 = v * tp[i], f2 = v * tq[i];
                            double* mrow = &Mj[static_cast<size_t>(i) * n];
                            for (int j2 = 0; j2 < n; ++j2)
                                mrow[j2] += f1 * tq[j2] + f2 * tp[j2];
                        }
                    }
                }
                for (size_t ii = 0; ii <= jj; ++ii) {
                    const int ci = cols[ii].first;
                    double acc = 0.0;
                    for (const auto& en : cols[ii].second) {
                        const double mv = Mj[static_cast<size_t>(en.pp) * n + en.qq];
                        acc += (en.pp == en.qq) ? en.v * mv : kSqrt2 * en.v * mv;
                    }
                    if (cj >= ci)
                        H[static_cast<size_t>(cj) * p + ci] += acc;
                    else
                        H[static_cast<size_t>(ci) * p + cj] += acc;
                }
            }
        }
        for (int i = 0; i < p; ++i)
            for (int j = i + 1; j < p; ++j)
                H[static_cast<size_t>(i) * p + j] = H[static_cast<size_t>(j) * p + i];

        double hmax = 0.0;
        for (int i = 0; i < p; ++i) hmax = std::max(hmax, H[static_cast<size_t>(i) * p + i]);
        deltaH = 1e-12 * (1.0 + hmax);
        L1 = H;
        for (int i = 0; i < p; ++i) L1[static_cast<size_t>(i) * p + i] += deltaH;
        if (!cholesky_inplace(p, L1)) {
            deltaH = 1e-8 * (1.0 + hmax);
            L1 = H;
            for (int i = 0; i < p; ++i) L1[static_cast<size_t>(i) * p + i] += deltaH;
            if (!cholesky_inplace(p, L1)) return false;
        }
        V.assign(static_cast<size_t>(p) * m, 0.0);
        std::vector<double> col(p);
        for (int r = 0; r < m; ++r) {
            std::fill(col.begin(), col.end(), 0.0);
            for (const auto& [cix, v] : f.arows[r].e) col[cix] = v;
            chol_fwd(p, L1, col.data());
            for (int i = 0; i < p; ++i) V[static_cast<size_t>(i) * m + r] = col[i];
        }
        if (m > 0) {
            S2.assign(static_cast<size_t>(m) * m, 0.0);
            for (int r1 = 0; r1 < m; ++r1)
                for (int r2 = 0; r2 <= r1; ++r2) {
                    double acc = 0.0;
                    for (int i = 0; i < p; ++i)
                        acc += V[static_cast<size_t>(i) * m + r1] *
                               V[static_cast<size_t>(i) * m + r2];
                    S2[static_cast<size_t>(r1) * m + r2] = acc;
                    S2[static_cast<size_t>(r2) * m + r1] = acc;
                }
            double smax = 0.0;
            for (int i = 0; i < m; ++i)
                smax = std::max(smax, S2[static_cast<size_t>(i) * m + i]);
            deltaS = 1e-12 * (1.0 + smax);
            for (int i = 0; i < m; ++i) S2[static_cast<size_t>(i) * m + i] += deltaS;
            if (!cholesky_inplace(m, S2)) return false;
        }
        return true;
    }

    void raw_kkt(const std::vector<double>& bx, const std::vector<double>& by,
                 const std::vector<double>& bz, std::vector<double>& ux,
                 std::vector<double>& uy, std::vector<double>& uz) const {
        std::vector<double> t, r1;
        apply_W2inv(bz, t);
        gt_mul(t, r1);
        for (int i = 0; i < p; ++i) r1[i] += bx[i];
        std::vector<double> u = r1;
        chol_fwd(p, L1, u.data());
        uy.assign(m, 0.0);
        if (m > 0) {
            for (int r = 0; r < m; ++r) {
                double acc = 0.0;
                for (int i = 0; i < p; ++i) acc += V[static_cast<size_t>(i) * m + r] * u[i];
                uy[r] = acc - by[r];
            }
            chol_fwd(m, S2, uy.data());
            chol_bwd(m, S2, uy.data());
        }
        std::vector<double> aty;
        at_mul(uy, aty);
        ux = r1;
        for (int i = 0; i < p; ++i) ux[i] -= aty[i];
        chol_fwd(p, L1, ux.data());
        chol_bwd(p, L1, ux.data());
        std::vector<double> gx;
        g_mul(ux, gx);
        for (int i = 0; i < q; ++i) gx[i] -= bz[i];
        apply_W2inv(gx, uz);
    }

    void kkt_solve(const std::vector<double>& bx, const std::vector<double>& by,
                   const std::vector<double>& bz, std::vector<double>& ux,
                   std::vector<double>& uy, std::vector<double>& uz) const {
        raw_kkt(bx, by, bz, ux, uy, uz);
        const double rhs_scale =
            std::max({1.0, nrm2(bx), nrm2(by), nrm2(bz)});
        double prev = std::numeric_limits<double>::infinity();
        std::vector<double> sx = ux, sy = uy, sz_ = uz;
        for (int round = 0; round < 6; ++round) {
            std::vector<double> e1, e2, e3, t1, t2;
            at_mul(uy, e1);
            gt_mul(uz, t1);
            for (int i = 0; i < p; ++i) e1[i] = bx[i] - (e1[i] + t1[i]);
            a_mul(ux, e2);
            for (int i = 0; i < m; ++i) e2[i] = by[i] - e2[i];
            g_mul(ux, e3);
            apply_W2(uz, t2);
            for (int i = 0; i < q; ++i) e3[i] = bz[i] - (e3[i] - t2[i]);
            const double rnorm =
                std::sqrt(dot(e1, e1) + dot(e2, e2) + dot(e3, e3)) / rhs_scale;
            if (rnorm < prev) {
                sx = ux;
                sy = uy;
                sz_ = uz;
            }
            if (rnorm <= 1e-13 || rnorm >= 0.5 * prev) break;
            prev = rnorm;
            std::vector<double> cx, cy, cz;
            raw_kkt(e1, e2, e3, cx, cy, cz);
            for (int i = 0; i < p; ++i) ux[i] += cx[i];
            for (int i = 0; i < m; ++i) uy[i] += cy[i];
            for (int i = 0; i < q; ++i) uz[i] += cz[i];
        }
        ux = std::move(sx);
        uy = std::move(sy);
        uz = std::move(sz_);
    }

    void lambda_div(const std::vector<double>& d, std::vector<double>& out) const {
        out.assign(q, 0.0);
        for (size_t bix = 0; bix < blocks.size(); ++bix) {
            const auto& bi = blocks[bix];
            if (bi.kind == BlockKind::Nonneg) {
                for (int i = 0; i < bi.n; ++i)
                    out[bi.offset + i] = d[bi.offset + i] / sc.nn_lambda[bix][i];
            } else {
                const int n = bi.n;
                std::vector<double> D;
                svec_to_mat(n, &d[bi.offset], D);
                const auto& lam = sc.psd[bix].lambda;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        D[static_cast<size_t>(i) * n + j] *= 2.0 / (lam[i] + lam[j]);
                mat_to_svec(n, D, &out[bi.offset]);
            }
        }
    }

    void complementarity_rhs(double sigmamu, const std::vector<double>* ds_a,
                             const std::vector<double>* dz_a, std::vector<double>& out) const {
        out.assign(q, 0.0);
        std::vector<double> wds, wdz;
        if (ds_a) {
            apply_Wop(WOp::WinvT, *ds_a, wds);
            apply_Wop(WOp::W, *dz_a, wdz);
        }
        for (size_t bix = 0; bix < blocks.size(); ++bix) {
            const auto& bi = blocks[bix];
            if (bi.kind == BlockKind::Nonneg) {
                for (int i = 0; i < bi.n; ++i) {
                    const double lam = sc.nn_lambda[bix][i];
                    double v = -lam * lam + sigmamu;
                    if (ds_a) v -= wds[bi.offset + i] * wdz[bi.offset + i];
                    out[bi.offset + i] = v;
                }
            } else {
                const int n = bi.n;
                const auto& lam = sc.psd[bix].lambda;
                std::vector<double> M(static_cast<size_t>(n) * n, 0.0);
                for (int i = 0; i < n; ++i)
                    M[static_cast<size_t>(i) * n + i] = -lam[i] * lam[i] + sigmamu;
                if (ds_a) {
                    std::vector<double> Ds, Dz, t1;
                    svec_to_mat(n, &wds[bi.offset], Ds);
                    svec_to_mat(n, &wdz[bi.offset], Dz);
                    matmul(n, Ds, Dz, t1);
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            M[static_cast<size_t>(i) * n + j] -=
                                0.5 * (t1[static_cast<size_t>(i) * n + j] +
                                       t1[static_cast<size_t>(j) * n + i]);
                }
                mat_to_svec(n, M, &out[bi.offset]);
            }
        }
    }

    double max_step(const std::vector<double>& dir_s, const std::vector<double>& dir_z,
                    double dtau, double dkappa) const {
        double amax = std::numeric_limits<double>::infinity();
        std::vector<double> ws, wz;
        apply_Wop(WOp::WinvT, dir_s, ws);
        apply_Wop(WOp::W, dir_z, wz);
        for (size_t bix = 0; bix < blocks.size(); ++bix) {
            const auto& bi = blocks[bix];
            if (bi.kind == BlockKind::Nonneg) {
                for (int i = 0; i < bi.n; ++i) {
                    const double lam = sc.nn_lambda[bix][i];
                    if (ws[bi.offset + i] < 0.0) amax = std::min(amax, -lam / ws[bi.offset + i]);
                    if (wz[bi.offset + i] < 0.0) amax = std::min(amax, -lam / wz[bi.offset + i]);
                }
            } else {
                const int n = bi.n;
                const auto& lam = sc.psd[bix].lambda;
                for (const std::vector<double>* wv : {&ws, &wz}) {
                    std::vector<double> M;
                    svec_to_mat(n, wv->data() + bi.offset, M);
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            M[static_cast<size_t>(i) * n + j] /= std::sqrt(lam[i] * lam[j]);
                    std::vector<double> val, vec;
                    sym_eig(n, M, val, vec);
                    if (val.front() < 0.0) amax = std::min(amax, -1.0 / val.front());
                }
            }
        }
        if (dtau < 0.0) amax = std::min(amax, -tau / dtau);
        if (dkappa < 0.0) amax = std::min(amax, -kappa / dkappa);
        return amax;
    }

    GSolution run() {
        GSolution out;
        std::vector<double> r1(p), r2(m), r3(q);
        std::vector<double> t1, t2;
        double mu = (dot(s, z) + tau * kappa) / (degree + 1);

        // best iterate by worst normalized residual, for endgame rescue
        struct Snapshot {
            std::vector<double> x, y, s, z;
            double tau = 1.0, kappa = 1.0;
            double metric = std::numeric_limits<double>::infinity();
        } best;

        int iter = 0;
        bool converged = false;
        for (; iter < opts.max_iters; ++iter) {
            at_mul(y, r1);
            gt_mul(z, t1);
            for (int i = 0; i < p; ++i) r1[i] += t1[i] + cvec[i] * tau;
            a_mul(x, r2);
            for (int i = 0; i < m; ++i) r2[i] -= bvec[i] * tau;
            g_mul(x, r3);
            for (int i = 0; i < q; ++i) r3[i] += s[i] - hvec[i] * tau;
            const double r4 = dot(cvec, x) + dot(bvec, y) + dot(hvec, z) + kappa;

            const double pcost = dot(cvec, x) / tau;
            const double dcost = -(dot(bvec, y) + dot(hvec, z)) / tau;
            const double pres = std::max(nrm2(r2) / nb, nrm2(r3) / nh) / tau;
            const double dres = nrm2(r1) / (nc * tau);
            const double gaprel = std::abs(pcost - dcost) / (1.0 + std::abs(pcost));
            mu = (dot(s, z) + tau * kappa) / (degree + 1);

            if (opts.iter_probe) opts.iter_probe(opts.probe_ctx, iter, pcost, dcost, mu);

            const double metric = std::max({pres, dres, gaprel});
            if (metric < best.metric) {
                best.metric = metric;
                best.x = x;
                best.y = y;
                best.s = s;
                best.z = z;
                best.tau = tau;
                best.kappa = kappa;
            }
            if (pres <= opts.tol && dres <= opts.tol && gaprel <= opts.tol) {
                out.status = SolveStatus::Optimal;
                converged = true;
                break;
            }
            // ill-conditioned endgame: residuals exploding while essentially
            // converged; fall back to the best iterate below
            if (metric > 1e3 * best.metric && best.metric < 1e-3) break;
            const double byhz = dot(bvec, y) + dot(hvec, z);
            if (byhz < 0.0) {
                at_mul(y, t1);
                gt_mul(z, t2);
                for (int i = 0; i < p; ++i) t1[i] += t2[i];
                if (nrm2(t1) <= opts.tol * (-byhz)) {
                    out.status = SolveStatus::Infeasible;
                    converged = true;
                    break;
                }
            }
            const double cx = dot(cvec, x);
            if (cx < 0.0) {
                a_mul(x, t1);
                g_mul(x, t2);
                for (int i = 0; i < q; ++i) t2[i] += s[i];
                const double res = std::sqrt(dot(t1, t1) + dot(t2, t2));
                if (res <= opts.tol * (-cx)) {
                    out.status = SolveStatus::Unbounded;
                    converged = true;
                    break;
                }
            }

            if (!compute_scaling() || !factor()) {
                out.status = SolveStatus::NumericalFailure;
                converged = true;
                break;
            }

            std::vector<double> wx, wy, wz_;
            {
                std::vector<double> bx(p), by(m), bz(q);
                for (int i = 0; i < p; ++i) bx[i] = -cvec[i];
                by = bvec;
                bz = hvec;
                kkt_solve(bx, by, bz, wx, wy, wz_);
            }
            const double wobj = dot(cvec, wx) + dot(bvec, wy) + dot(hvec, wz_);

            auto direction = [&](const std::vector<double>& dsrhs, double dkrhs,
                                 std::vector<double>& dx, std::vector<double>& dy,
                                 std::vector<double>& dz, std::vector<double>& ds,
                                 double& dtau, double& dkappa) {
                std::vector<double> lam_ds;
                lambda_div(dsrhs, lam_ds);
                std::vector<double> wlam;
                apply_Wop(WOp::Wt, lam_ds, wlam);
                std::vector<double> bx(p), by(m), bz(q);
                for (int i = 0; i < p; ++i) bx[i] = -r1[i];
                for (int i = 0; i < m; ++i) by[i] = -r2[i];
                for (int i = 0; i < q; ++i) bz[i] = -r3[i] - wlam[i];
                std::vector<double> vx, vy, vz;
                kkt_solve(bx, by, bz, vx, vy, vz);
                const double vobj = dot(cvec, vx) + dot(bvec, vy) + dot(hvec, vz);
                const double den = wobj - kappa / tau;
                dtau = (-r4 - dkrhs / tau - vobj) / den;
                dx = vx;
                dy = vy;
                dz = vz;
                for (int i = 0; i < p; ++i) dx[i] += dtau * wx[i];
                for (int i = 0; i < m; ++i) dy[i] += dtau * wy[i];
                for (int i = 0; i < q; ++i) dz[i] += dtau * wz_[i];
                std::vector<double> w2dz;
                apply_W2(dz, w2dz);
                ds.assign(q, 0.0);
                for (int i = 0; i < q; ++i) ds[i] = wlam[i] - w2dz[i];
                dkappa = (dkrhs - kappa * dtau) / tau;
            };

            std::vector<double> ds_rhs;
            complementarity_rhs(0.0, nullptr, nullptr, ds_rhs);
            std::vector<double> dxa, dya, dza, dsa;
            double dtaua, dkappaa;
            direction(ds_rhs, -tau * kappa, dxa, dya, dza, dsa, dtaua, dkappaa);

            double amax = max_step(dsa, dza, dtaua, dkappaa);
            const double alpha_aff = std::min(1.0, amax);
            double trial = 0.0;
            for (int i = 0; i < q; ++i)
                trial += (s[i] + alpha_aff * dsa[i]) * (z[i] + alpha_aff * dza[i]);
            trial += (tau + alpha_aff * dtaua) * (kappa + alpha_aff * dkappaa);
            const double mu_aff = trial / (degree + 1);
            double sigma = std::min(1.0, std::max(0.0, mu_aff / mu));
            sigma = sigma * sigma * sigma;

            complementarity_rhs(sigma * mu, &dsa, &dza, ds_rhs);
            std::vector<double> dx, dy, dz, ds;
            double dtau, dkappa;
            direction(ds_rhs, -tau * kappa - dtaua * dkappaa + sigma * mu, dx, dy, dz, ds,
                      dtau, dkappa);

            amax = max_step(ds, dz, dtau, dkappa);
            const double alpha = std::min(1.0, 0.99 * amax);
            if (!(alpha > 1e-10) || !std::isfinite(alpha)) {
                out.status = SolveStatus::NumericalFailure;
                converged = true;
                break;
            }
            for (int i = 0; i < p; ++i) x[i] += alpha * dx[i];
            for (int i = 0; i < m; ++i) y[i] += alpha * dy[i];
            for (int i = 0; i < q; ++i) {
                s[i] += alpha * ds[i];
                z[i] += alpha * dz[i];
            }
            tau += alpha * dtau;
            kappa += alpha * dkappa;
            if (!(tau > 0.0) || !std::isfinite(tau)) {
                out.status = SolveStatus::NumericalFailure;
                converged = true;
                break;
            }
        }
        if (!converged) {
            out.status = SolveStatus::NumericalFailure;
            // rescue: accept the best iterate if it meets the tolerance
            if (best.metric <= opts.tol) {
                x = best.x;
                y = best.y;
                s = best.s;
                z = best.z;
                tau = best.tau;
                kappa = best.kappa;
                out.status = SolveStatus::Optimal;
            }
        }
        out.iterations = iter;

        if (out.status == SolveStatus::Optimal) {
            out.x.assign(p, 0.0);
            out.y.assign(m, 0.0);
            out.z.assign(q, 0.0);
            out.s.assign(q, 0.0);
            for (int i = 0; i < p; ++i) out.x[i] = x[i] / tau;
            for (int i = 0; i < m; ++i) out.y[i] = y[i] / tau;
            for (int i = 0; i < q; ++i) {
                out.z[i] = z[i] / tau;
                out.s[i] = s[i] / tau;
            }
            out.primal_value = dot(cvec, out.x);
            out.dual_value = -(dot(bvec, out.y) + dot(hvec, out.z));
            std::vector<double> rr;
            a_mul(out.x, rr);
            for (int i = 0; i < m; ++i) rr[i] -= bvec[i];
            double presf = nrm2(rr) / nb;
            g_mul(out.x, rr);
            for (int i = 0; i < q; ++i) rr[i] += out.s[i] - hvec[i];
            presf = std::max(presf, nrm2(rr) / nh);
            at_mul(out.y, rr);
            gt_mul(out.z, t1);
            for (int i = 0; i < p; ++i) rr[i] += t1[i] + cvec[i];
            out.residuals.primal = presf;
            out.residuals.dual = nrm2(rr) / nc;
            out.residuals.gap = std::abs(out.primal_value - out.dual_value) /
                                (1.0 + std::abs(out.primal_value));
        } else if (out.status == SolveStatus::Infeasible ||
                   out.status == SolveStatus::Unbounded) {
            out.x = x;
            out.y = y;
            out.z = z;
            out.s = s;
            out.primal_value = out.dual_value =
                (out.status == SolveStatus::Infeasible)
                    ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
        }
        return out;
    }
};

}  // namespace

namespace {

// Greedy pivoted Cholesky on the Gram matrix of the equality rows; returns the
// (sorted) indices of a maximal numerically independent subset. Pivot
// tolerance 1e-9 relative to the largest diagonal.
std::vector<int> select_independent_rows(const std::vector<SparseRow>& rows) {
    const int mr = static_cast<int>(rows.size());
    std::vector<int> selected;
    if (mr == 0) return selected;
    std::vector<std::vector<std::pair<int, double>>> sorted(mr);
    for (int i = 0; i < mr; ++i) {
        sorted[i] = rows[i].e;
        std::sort(sorted[i].begin(), sorted[i].end());
        // coalesce duplicate columns
        size_t w = 0;
        for (size_t r = 0; r < sorted[i].size(); ++r) {
            if (w > 0 && sorted[i][w - 1].first == sorted[i][r].first)
                sorted[i][w - 1].second += sorted[i][r].second;
            else
                sorted[i][w++] = sorted[i][r];
        }
        sorted[i].resize(w);
    }
    auto sdot = [&](int i, int j) {
        double acc = 0.0;
        size_t a = 0, bb = 0;
        while (a < sorted[i].size() && bb < sorted[j].size()) {
            if (sorted[i][a].first < sorted[j][bb].first)
                ++a;
            else if (sorted[i][a].first > sorted[j][bb].first)
                ++bb;
            else
                acc += sorted[i][a++].second * sorted[j][bb++].second;
        }
        return acc;
    };
    std::vector<double> gram(static_cast<size_t>(mr) * mr, 0.0);
    for (int i = 0; i < mr; ++i)
        for (int j = 0; j <= i; ++j) {
            const double acc = sdot(i, j);
            gram[static_cast<size_t>(i) * mr + j] = acc;
            gram[static_cast<size_t>(j) * mr + i] = acc;
        }
    std::vector<double> diag(mr);
    double maxdiag = 1e-300;
    for (int i = 0; i < mr; ++i) {
        diag[i] = gram[static_cast<size_t>(i) * mr + i];
        maxdiag = std::max(maxdiag, diag[i]);
    }
    const double tol_rank = 1e-9 * maxdiag;
    std::vector<std::vector<double>> lrows(mr);
    std::vector<bool> used(mr, false);
    for (int step = 0; step < mr; ++step) {
        int piv = -1;
        double bestd = tol_rank;
        for (int i = 0; i < mr; ++i)
            if (!used[i] && diag[i] > bestd) {
                bestd = diag[i];
                piv = i;
            }
        if (piv < 0) break;
        used[piv] = true;
        const double lpp = std::sqrt(diag[piv]);
        const size_t depth = lrows[piv].size();
        for (int i = 0; i < mr; ++i) {
            if (used[i]) continue;
            double v = gram[static_cast<size_t>(i) * mr + piv];
            for (size_t k2 = 0; k2 < depth; ++k2) v -= lrows[i][k2] * lrows[piv][k2];
            const double lip = v / lpp;
            lrows[i].push_back(lip);
            diag[i] -= lip * lip;
        }
        lrows[piv].push_back(lpp);
        selected.push_back(piv);
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

}  // namespace

GSolution solve_gform(const GForm& f, const SolveOptions& opts) {
    if (opts.tol < 1e-10 || opts.tol > 1e-4)
        throw std::invalid_argument("solve_gform: tol outside [1e-10, 1e-4]");
    GForm work = f;
    double sense = 1.0;
    if (f.maximize) {
        sense = -1.0;
        for (auto& v : work.c) v = -v;
        work.maximize = false;
    }
    // presolve: keep a maximal independent subset of the equality rows
    const int m_orig = static_cast<int>(work.b.size());
    std::vector<int> kept = select_independent_rows(work.arows);
    const bool reduced = static_cast<int>(kept.size()) < m_orig;
    GForm run = work;
    if (reduced) {
        run.arows.clear();
        run.b.clear();
        for (int r : kept) {
            run.arows.push_back(work.arows[r]);
            run.b.push_back(work.b[r]);
        }
    }
    Core core(run, opts);
    GSolution sol = core.run();
    if (sol.status == SolveStatus::Optimal && reduced) {
        // expand multipliers and verify the dropped rows were consistent
        std::vector<double> yfull(m_orig, 0.0);
        for (size_t i = 0; i < kept.size(); ++i) yfull[kept[i]] = sol.y[i];
        sol.y = std::move(yfull);
        double rnorm = 0.0, bnorm = 0.0;
        for (int r = 0; r < m_orig; ++r) {
            double ax = 0.0;
            for (const auto& [cix, v] : work.arows[r].e) ax += v * sol.x[cix];
            rnorm += (ax - work.b[r]) * (ax - work.b[r]);
            bnorm += work.b[r] * work.b[r];
        }
        const double pres_full = std::sqrt(rnorm) / (1.0 + std::sqrt(bnorm));
        sol.residuals.primal = std::max(sol.residuals.primal, pres_full);
        if (pres_full > 50 * opts.tol) sol.status = SolveStatus::Infeasible;
    }
    if (sol.status == SolveStatus::Optimal) {
        const double pv = sense * sol.primal_value + f.obj_offset;
        const double dv = sense * sol.dual_value + f.obj_offset;
        sol.primal_value = pv;
        sol.dual_value = dv;
    } else if (f.maximize) {
        if (sol.status == SolveStatus::Unbounded)
            sol.primal_value = sol.dual_value = std::numeric_limits<double>::infinity();
        else if (sol.status == SolveStatus::Infeasible)
            sol.primal_value = sol.dual_value = -std::numeric_limits<double>::infinity();
    }
    return sol;
}

// =============================================================================
// public standard-form wrapper
// =============================================================================

namespace {

struct Elimination {
    int var;
    int row;
    double pivot;
    std::vector<std::pair<int, double>> row_rest;
    double rhs;
};

}  // namespace

ConicSolution solve(const ConicProblem& prob, double tol) {
    const int nvar = prob.num_vars();
    const int mrow = prob.num_rows();
    if (static_cast<int>(prob.c.size()) != nvar)
        throw std::invalid_argument("solve: objective length mismatch");
    for (const auto& t : prob.a)
        if (t.row < 0 || t.row >= mrow || t.col < 0 || t.col >= nvar)
            throw std::invalid_argument("solve: triplet out of range");

    std::vector<bool> is_free(nvar, false);
    {
        int off = 0;
        for (const auto& blk : prob.blocks) {
            const int sc = blk.scalar_count();
            if (blk.kind == BlockKind::Free)
                for (int i = 0; i < sc; ++i) is_free[off + i] = true;
            off += sc;
        }
    }

    std::vector<std::map<int, double>> rows(mrow);
    for (const auto& t : prob.a) rows[t.row][t.col] += t.val;
    std::vector<double> b = prob.b;
    std::vector<double> c = prob.c;
    if (prob.maximize)
        for (auto& v : c) v = -v;
    double offset = 0.0;

    std::vector<bool> row_active(mrow, true), var_active(nvar, true);
    std::vector<Elimination> elims;

    for (int v = 0; v < nvar; ++v) {
        if (!is_free[v]) continue;
        int pivot_row = -1;
        double best = 1e-12;
        for (int r = 0; r < mrow; ++r) {
            if (!row_active[r]) continue;
            auto it = rows[r].find(v);
            if (it != rows[r].end() && std::abs(it->second) > best) {
                best = std::abs(it->second);
                pivot_row = r;
            }
        }
        if (pivot_row < 0) {
            if (std::abs(c[v]) > 1e-12) {
                ConicSolution out;
                out.status = SolveStatus::Unbounded;
                out.primal_value = out.dual_value =
                    prob.maximize ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
                return out;
            }
            var_active[v] = false;
            continue;
        }
        Elimination el;
        el.var = v;
        el.row = pivot_row;
        el.pivot = rows[pivot_row][v];
        el.rhs = b[pivot_row];
        for (const auto& [col, val] : rows[pivot_row])
            if (col != v) el.row_rest.emplace_back(col, val);
        for (int r = 0; r < mrow; ++r) {
            if (!row_active[r] || r == pivot_row) continue;
            auto it = rows[r].find(v);
            if (it == rows[r].end()) continue;
            const double factor = it->second / el.pivot;
            rows[r].erase(it);
            for (const auto& [col, val] : el.row_rest) {
                rows[r][col] -= factor * val;
                if (std::abs(rows[r][col]) < 1e-300) rows[r].erase(col);
            }
            b[r] -= factor * el.rhs;
        }
        if (c[v] != 0.0) {
            const double factor = c[v] / el.pivot;
            for (const auto& [col, val] : el.row_rest) c[col] -= factor * val;
            offset += factor * el.rhs;
            c[v] = 0.0;
        }
        row_active[pivot_row] = false;
        var_active[v] = false;
        elims.push_back(std::move(el));
    }

    std::vector<int> new_index(nvar, -1);
    int nv2 = 0;
    for (int v = 0; v < nvar; ++v)
        if (var_active[v] && !is_free[v]) new_index[v] = nv2++;

    GForm gf;
    gf.nvar = nv2;
    gf.obj_offset = offset;
    gf.c.assign(nv2, 0.0);
    for (int v = 0; v < nvar; ++v)
        if (new_index[v] >= 0) gf.c[new_index[v]] = c[v];
    std::vector<int> kept_rows;
    for (int r = 0; r < mrow; ++r) {
        if (!row_active[r]) continue;
        SparseRow sr;
        for (const auto& [col, val] : rows[r])
            if (new_index[col] >= 0) sr.add(new_index[col], val);
        gf.arows.push_back(std::move(sr));
        gf.b.push_back(b[r]);
        kept_rows.push_back(r);
    }

    {
        int off = 0;
        for (const auto& blk : prob.blocks) {
            const int sc = blk.scalar_count();
            if (blk.kind != BlockKind::Free) {
                gf.cones.push_back({blk.kind, blk.n});
                for (int i = 0; i < sc; ++i) {
                    SparseRow sr;
                    sr.add(new_index[off + i], -1.0);
                    gf.grows.push_back(std::move(sr));
                    gf.h.push_back(0.0);
                }
            }
            off += sc;
        }
    }

    SolveOptions opts;
    opts.tol = tol;
    GSolution gs = solve_gform(gf, opts);

    ConicSolution out;
    out.status = gs.status;
    out.iterations = gs.iterations;
    if (gs.status == SolveStatus::Unbounded) {
        out.primal_value = out.dual_value = prob.maximize
                                                ? std::numeric_limits<double>::infinity()
                                                : -std::numeric_limits<double>::infinity();
        return out;
    }
    if (gs.status == SolveStatus::Infeasible) {
        out.primal_value = out.dual_value = prob.maximize
                                                ? -std::numeric_limits<double>::infinity()
                                                : std::numeric_limits<double>::infinity();
        return out;
    }
    if (gs.status != SolveStatus::Optimal) return out;

    out.x.assign(nvar, 0.0);
    for (int v = 0; v < nvar; ++v)
        if (new_index[v] >= 0) out.x[v] = gs.x[new_index[v]];
    for (auto it = elims.rbegin(); it != elims.rend(); ++it) {
        double val = it->rhs;
        for (const auto& [col, v2] : it->row_rest) val -= v2 * out.x[col];
        out.x[it->var] = val / it->pivot;
    }
    out.y.assign(mrow, 0.0);
    for (size_t i = 0; i < kept_rows.size(); ++i) out.y[kept_rows[i]] = -gs.y[i];
    const double csign = prob.maximize ? -1.0 : 1.0;
    if (!elims.empty()) {
        // Multipliers of the consumed pivot rows come from dual stationarity on
        // the eliminated columns of the original data: one linear equation per
        // eliminated variable, coupled through the pivot rows.
        const int k = static_cast<int>(elims.size());
        std::vector<int> pivot_of_row(mrow, -1);
        for (int i = 0; i < k; ++i) pivot_of_row[elims[i].row] = i;
        std::vector<double> M(static_cast<size_t>(k) * k, 0.0), rhs(k, 0.0);
        for (int i = 0; i < k; ++i) rhs[i] = csign * prob.c[elims[i].var];
        for (const auto& t : prob.a) {
            for (int i = 0; i < k; ++i) {
                if (t.col != elims[i].var) continue;
                const int j = pivot_of_row[t.row];
                if (j >= 0)
                    M[static_cast<size_t>(i) * k + j] += t.val;
                else
                    rhs[i] -= t.val * out.y[t.row];
            }
        }
        // dense Gaussian elimination with partial pivoting
        std::vector<double> sol_y(k, 0.0);
        std::vector<int> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        for (int col = 0; col < k; ++col) {
            int piv = col;
            for (int r2 = col + 1; r2 < k; ++r2)
                if (std::abs(M[static_cast<size_t>(r2) * k + col]) >
                    std::abs(M[static_cast<size_t>(piv) * k + col]))
                    piv = r2;
            if (piv != col) {
                for (int c2 = 0; c2 < k; ++c2)
                    std::swap(M[static_cast<size_t>(piv) * k + c2],
                              M[static_cast<size_t>(col) * k + c2]);
                std::swap(rhs[piv], rhs[col]);
            }
            const double d = M[static_cast<size_t>(col) * k + col];
            for (int r2 = col + 1; r2 < k; ++r2) {
                const double factor = M[static_cast<size_t>(r2) * k + col] / d;
                if (factor == 0.0) continue;
                for (int c2 = col; c2 < k; ++c2)
                    M[static_cast<size_t>(r2) * k + c2] -=
                        factor * M[static_cast<size_t>(col) * k + c2];
                rhs[r2] -= factor * rhs[col];
            }
        }
        for (int r2 = k - 1; r2 >= 0; --r2) {
            double v = rhs[r2];
            for (int c2 = r2 + 1; c2 < k; ++c2)
                v -= M[static_cast<size_t>(r2) * k + c2] * sol_y[c2];
            sol_y[r2] = v / M[static_cast<size_t>(r2) * k + r2];
        }
        for (int i = 0; i < k; ++i) out.y[elims[i].row] = sol_y[i];
    }
    out.s.assign(nvar, 0.0);
    for (int v = 0; v < nvar; ++v) out.s[v] = csign * prob.c[v];
    for (const auto& t : prob.a) out.s[t.col] -= t.val * out.y[t.row];

    double pval = 0.0;
    for (int v = 0; v < nvar; ++v) pval += prob.c[v] * out.x[v];
    double dval = 0.0;
    for (int r = 0; r < mrow; ++r) dval += prob.b[r] * out.y[r];
    out.primal_value = pval;
    out.dual_value = prob.maximize ? -dval : dval;

    std::vector<double> ares(mrow, 0.0);
    for (const auto& t : prob.a) ares[t.row] += t.val * out.x[t.col];
    double prnorm = 0.0, bnorm = 0.0;
    for (int r = 0; r < mrow; ++r) {
        prnorm += (ares[r] - prob.b[r]) * (ares[r] - prob.b[r]);
        bnorm += prob.b[r] * prob.b[r];
    }
    out.residuals.primal = std::sqrt(prnorm) / (1.0 + std::sqrt(bnorm));
    out.residuals.dual = gs.residuals.dual;
    out.residuals.gap =
        std::abs(out.primal_value - out.dual_value) / (1.0 + std::abs(out.primal_value));
    if (out.residuals.primal > 20 * tol) out.status = SolveStatus::Infeasible;
    return out;
}

}  // namespace chancomp::conic
