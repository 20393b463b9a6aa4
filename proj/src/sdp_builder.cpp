// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.

#include "chancomp/sdp_builder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chancomp::conic {

using linalg::CMatrix;
using linalg::cplx;

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kDropTol = 1e-13;

// Hermitian basis element for coordinate b of an n x n variable.
CMatrix herm_basis(int n, int b) {
    CMatrix m(n, n);
    int idx = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            if (i == j) {
                if (idx == b) {
                    m(i, i) = 1.0;
                    return m;
                }
                ++idx;
            } else {
                if (idx == b) {
                    m(i, j) = 1.0;
                    m(j, i) = 1.0;
                    return m;
                }
                ++idx;
                if (idx == b) {
                    m(i, j) = cplx(0.0, 1.0);
                    m(j, i) = cplx(0.0, -1.0);
                    return m;
                }
                ++idx;
            }
        }
    throw std::out_of_range("herm_basis: coordinate out of range");
}

}  // namespace

int herm_coord_count(int n) { return n * n; }

HermSdp::Result solve_retrying(const HermSdp& sdp, double tol, int max_iters) {
    double t = tol;
    HermSdp::Result r = sdp.solve(t, max_iters);
    while (r.status == SolveStatus::NumericalFailure && t < 1e-4) {
        t = std::min(t * 10.0, 1e-4);
        r = sdp.solve(t, max_iters);
    }
    return r;
}

std::vector<double> herm_coords_from_matrix(const CMatrix& x) {
    const int n = x.rows();
    std::vector<double> w;
    w.reserve(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            if (i == j) {
                w.push_back(x(i, i).real());
            } else {
                w.push_back(x(i, j).real());
                w.push_back(x(i, j).imag());
            }
        }
    return w;
}

CMatrix herm_matrix_from_coords(const std::vector<double>& w, int n) {
    CMatrix x(n, n);
    size_t idx = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            if (i == j) {
                x(i, i) = w[idx++];
            } else {
                const double re = w[idx++];
                const double im = w[idx++];
                x(i, j) = cplx(re, im);
                x(j, i) = cplx(re, -im);
            }
        }
    return x;
}

int HermSdp::add_herm_var(int dim) {
    const int id = static_cast<int>(vars_.size());
    VarInfo vi{gf_.nvar, dim};
    vars_.push_back(vi);
    gf_.nvar += herm_coord_count(dim);
    gf_.c.resize(gf_.nvar, 0.0);
    // own PSD slack: X >= 0
    Expr e(dim);
    e.add(id, [](const CMatrix& x) { return x; });
    scatter_psd_rows(e);
    cons_.pop_back();  // the own slack is not an addressable constraint
    return id;
}

int HermSdp::add_scalar_var() {
    const int id = static_cast<int>(scalar_cols_.size());
    scalar_cols_.push_back(gf_.nvar);
    gf_.nvar += 1;
    gf_.c.resize(gf_.nvar, 0.0);
    SparseRow r;
    r.add(scalar_cols_[id], -1.0);
    gf_.grows.push_back(std::move(r));
    gf_.h.push_back(0.0);
    gf_.cones.push_back({BlockKind::Nonneg, 1});
    zoff_ += 1;
    return id;
}

void HermSdp::add_equality(const Expr& e) {
    const int t = e.dim;
    // row index of the (i, j, re/im) functional within this constraint block
    const int base = static_cast<int>(gf_.b.size());
    int nrows = 0;
    for (int i = 0; i < t; ++i)
        for (int j = i; j < t; ++j) nrows += (i == j) ? 1 : 2;
    gf_.arows.resize(base + nrows);
    gf_.b.resize(base + nrows, 0.0);

    auto scatter = [&](const CMatrix& img, int col, double sign) {
        int r = base;
        for (int i = 0; i < t; ++i)
            for (int j = i; j < t; ++j) {
                if (i == j) {
                    const double v = sign * img(i, i).real();
                    if (std::abs(v) > kDropTol) gf_.arows[r].add(col, v);
                    ++r;
                } else {
                    const double vre = sign * img(i, j).real();
                    const double vim = sign * img(i, j).imag();
                    if (std::abs(vre) > kDropTol) gf_.arows[r].add(col, vre);
                    ++r;
                    if (std::abs(vim) > kDropTol) gf_.arows[r].add(col, vim);
                    ++r;
                }
            }
    };

    for (const auto& term : e.terms) {
        const auto& vi = vars_[term.var];
        for (int b = 0; b < herm_coord_count(vi.dim); ++b) {
            CMatrix img = term.op(herm_basis(vi.dim, b));
            if (img.rows() != t || img.cols() != t)
                throw std::invalid_argument("HermSdp: term image dimension mismatch");
            scatter(img, vi.offset + b, 1.0);
        }
    }
    for (const auto& st : e.sterms) scatter(st.coef, scalar_cols_[st.scalar], 1.0);
    {
        int r = base;
        for (int i = 0; i < t; ++i)
            for (int j = i; j < t; ++j) {
                if (i == j) {
                    gf_.b[r++] = -e.constant(i, i).real();
                } else {
                    gf_.b[r++] = -e.constant(i, j).real();
                    gf_.b[r++] = -e.constant(i, j).imag();
                }
            }
    }
}

void HermSdp::scatter_psd_rows(const Expr& e) {
    const int t = e.dim;
    const int nn = 2 * t;
    const int base = static_cast<int>(gf_.h.size());
    const int nrows = nn * (nn + 1) / 2;
    gf_.grows.resize(base + nrows);
    gf_.h.resize(base + nrows, 0.0);

    auto coord = [&](int P, int Q) { return base + svec_index(nn, P, Q); };
    // scatter -scale*E(img) into G (or +scale*E(K) into h for the constant)
    auto scatter = [&](const CMatrix& img, int col, bool into_h) {
        for (int a = 0; a < t; ++a)
            for (int b2 = a; b2 < t; ++b2) {
                const double re = img(a, b2).real();
                const double im = img(a, b2).imag();
                if (a == b2) {
                    if (std::abs(re) > kDropTol) {
                        if (into_h) {
                            gf_.h[coord(a, a)] += re;
                            gf_.h[coord(t + a, t + a)] += re;
                        } else {
                            gf_.grows[coord(a, a)].add(col, -re);
                            gf_.grows[coord(t + a, t + a)].add(col, -re);
                        }
                    }
                } else {
                    if (std::abs(re) > kDropTol) {
                        const double v = kSqrt2 * re;
                        if (into_h) {
                            gf_.h[coord(b2, a)] += v;
                            gf_.h[coord(t + b2, t + a)] += v;
                        } else {
                            gf_.grows[coord(b2, a)].add(col, -v);
                            gf_.grows[coord(t + b2, t + a)].add(col, -v);
                        }
                    }
                    if (std::abs(im) > kDropTol) {
                        const double v = kSqrt2 * im;
                        if (into_h) {
                            gf_.h[coord(t + a, b2)] += v;
                            gf_.h[coord(t + b2, a)] -= v;
                        } else {
                            gf_.grows[coord(t + a, b2)].add(col, -v);
                            gf_.grows[coord(t + b2, a)].add(col, v);
                        }
                    }
                }
            }
    };

    for (const auto& term : e.terms) {
        const auto& vi = vars_[term.var];
        for (int b = 0; b < herm_coord_count(vi.dim); ++b) {
            CMatrix img = term.op(herm_basis(vi.dim, b));
            if (img.rows() != t || img.cols() != t)
                throw std::invalid_argument("HermSdp: term image dimension mismatch");
            scatter(img, vi.offset + b, false);
        }
    }
    for (const auto& st : e.sterms) scatter(st.coef, scalar_cols_[st.scalar], false);
    scatter(e.constant, -1, true);

    gf_.cones.push_back({BlockKind::Psd, nn});
    cons_.push_back({zoff_, t});
    zoff_ += nrows;
}

int HermSdp::add_psd_constraint(const Expr& e) {
    scatter_psd_rows(e);
    return static_cast<int>(cons_.size()) - 1;
}

void HermSdp::add_objective_term(int var, const CMatrix& f) {
    const auto& vi = vars_[var];
    if (f.rows() != vi.dim || f.cols() != vi.dim)
        throw std::invalid_argument("HermSdp: objective functional dimension mismatch");
    for (int b = 0; b < herm_coord_count(vi.dim); ++b) {
        const CMatrix h = herm_basis(vi.dim, b);
        // Re Tr[f H_b]
        cplx tr = 0.0;
        for (int i = 0; i < vi.dim; ++i)
            for (int j = 0; j < vi.dim; ++j) tr += f(i, j) * h(j, i);
        const double v = tr.real();
        if (std::abs(v) > kDropTol) gf_.c[vi.offset + b] += v;
    }
}

void HermSdp::add_objective_scalar(int scalar, double coef) {
    gf_.c[scalar_cols_[scalar]] += coef;
}

HermSdp::Result HermSdp::solve(double tol, int max_iters) const {
    SolveOptions opts;
    opts.tol = tol;
    opts.max_iters = max_iters;
    GSolution gs = solve_gform(gf_, opts);
    Result r;
    r.status = gs.status;
    r.primal_value = gs.primal_value;
    r.dual_value = gs.dual_value;
    r.value = 0.5 * (gs.primal_value + gs.dual_value);
    r.residuals = gs.residuals;
    r.iterations = gs.iterations;
    r.x = std::move(gs.x);
    r.z = std::move(gs.z);
    for (const auto& v : vars_) r.vars.push_back({v.offset, v.dim});
    r.scalar_cols = scalar_cols_;
    for (const auto& c : cons_) r.cons.push_back({c.zoffset, c.dim});
    return r;
}

CMatrix HermSdp::Result::var_value(int id) const {
    const auto& vi = vars[id];
    std::vector<double> w(x.begin() + vi.offset, x.begin() + vi.offset + vi.dim * vi.dim);
    return herm_matrix_from_coords(w, vi.dim);
}

double HermSdp::Result::scalar_value(int id) const { return x[scalar_cols[id]]; }

CMatrix HermSdp::Result::psd_dual(int cid) const {
    const auto& ci = cons[cid];
    const int t = ci.dim;
    const int nn = 2 * t;
    std::vector<double> zsv(z.begin() + ci.zoffset, z.begin() + ci.zoffset + nn * (nn + 1) / 2);
    std::vector<double> Z = svec_unpack(zsv, nn);
    CMatrix omega(t, t);
    for (int i = 0; i < t; ++i)
        for (int j = 0; j < t; ++j) {
            const double re = 0.5 * (Z[static_cast<size_t>(i) * nn + j] +
                                     Z[static_cast<size_t>(t + i) * nn + (t + j)]);
            const double im = 0.5 * (Z[static_cast<size_t>(t + i) * nn + j] -
                                     Z[static_cast<size_t>(t + j) * nn + i]);
            omega(i, j) = cplx(re, im);
        }
    return (omega + omega.adjoint()) * 0.5;
}

}  // namespace chancomp::conic
