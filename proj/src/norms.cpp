// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.

#include "chancomp/norms.hpp"

#include <cmath>
#include <stdexcept>

#include "chancomp/sdp_builder.hpp"

namespace chancomp::norms {

using channels::Labeled;
using channels::link_product;
using conic::HermSdp;
using conic::SolveStatus;
using linalg::cplx;
using linalg::kron;
using linalg::partial_trace;
using linalg::partial_transpose;
using linalg::permute_systems;
using linalg::vec_doubleket;

namespace {

void require_optimal(const HermSdp::Result& r, const char* what) {
    if (r.status != SolveStatus::Optimal)
        throw std::runtime_error(std::string(what) +
                                 ": solver failure (" + conic::to_string(r.status) + ")");
}

void require_agreement(double a, double b, double tol, const char* what) {
    const double margin = std::max(1e-5, 200.0 * tol) * (1.0 + std::abs(a));
    if (std::abs(a - b) > margin)
        throw std::runtime_error(std::string(what) + ": formulations disagree beyond margin");
}

// op: X on `part` -> permute(X (x) I_rest) on `full` (label order of `full`)
HermSdp::LinOp kron_identity_op(const SystemDims& part, const SystemDims& full) {
    SystemDims rest = full;
    for (const auto& [l, d] : part.sys) rest = rest.without({l});
    return [part, rest, full](const CMatrix& x) {
        Labeled r = link_product({x, part},
                                 {CMatrix::identity(rest.total_dim()), rest});
        return permute_systems(r.mat, r.dims, full.labels());
    };
}

CMatrix identity_on(const SystemDims& d) { return CMatrix::identity(d.total_dim()); }

}  // namespace

CMatrix xspace_transform(const Labeled& m, const SystemDims& target) {
    return permute_systems(m.mat, m.dims, target.labels()).conjugate();
}

CMatrix pairing_functional(const ChoiMap& phi) {
    SystemDims target = phi.in_dims.concat(phi.out_dims);
    return xspace_transform({phi.choi, phi.joint_dims()}, target);
}

// ---------------------------------------------------------------------------
// diamond norm
// ---------------------------------------------------------------------------

DiamondResult diamond_norm_full(const ChoiMap& delta, double tol) {
    if (!delta.choi.is_hermitian(1e-8))
        throw std::invalid_argument("diamond_norm: Choi matrix not Hermitian");
    {
        CMatrix tr_out = partial_trace(delta.choi, delta.joint_dims(),
                                       delta.out_dims.labels());
        if (tr_out.max_abs() > 1e-6 * std::max(1.0, delta.choi.max_abs()))
            throw std::invalid_argument(
                "diamond_norm: input is not a difference of equally-normalized maps");
    }
    const SystemDims xdims = delta.in_dims.concat(delta.out_dims);
    // normalize the data scale so near-zero differences stay well conditioned
    const double scale = delta.choi.max_abs();
    if (scale <= 1e-7) {
        // numerically indistinguishable maps: certify through the Choi trace
        // norm, which encloses the diamond norm within a dimension factor
        const double tn = linalg::trace_norm((delta.choi + delta.choi.adjoint()) * 0.5);
        DiamondResult r;
        r.value = tn;
        r.lo = tn / std::max(1, delta.d_in());
        r.hi = tn;
        r.primal_x = CMatrix(xdims.total_dim(), xdims.total_dim());
        r.x_dims = xdims;
        return r;
    }
    double factor = 1.0;
    CMatrix work = delta.choi;
    if (scale < 1e-3 || scale > 1e3) {
        factor = scale;
        work = delta.choi * (1.0 / scale);
    }
    const ChoiMap work_map{(work + work.adjoint()) * 0.5, delta.out_dims, delta.in_dims};
    const CMatrix f = pairing_functional(work_map);

    // primal: 2 max <X, delta>  s.t.  0 <= X <= sigma (x) I, Tr sigma = 1
    HermSdp primal;
    const int vx = primal.add_herm_var(xdims.total_dim());
    const int vs = primal.add_herm_var(delta.d_in());
    {
        HermSdp::Expr upper(xdims.total_dim());
        upper.add(vs, kron_identity_op(delta.in_dims, xdims));
        upper.add(vx, [](const CMatrix& m) { return -m; });
        primal.add_psd_constraint(upper);
        HermSdp::Expr trace_one(1);
        trace_one.add(vs, [](const CMatrix& m) {
            CMatrix t(1, 1);
            t(0, 0) = m.trace();
            return t;
        });
        CMatrix minus_one(1, 1);
        minus_one(0, 0) = -1.0;
        trace_one.add_const(minus_one);
        primal.add_equality(trace_one);
    }
    primal.add_objective_term(vx, f * 2.0);
    primal.set_maximize(true);
    HermSdp::Result rp = conic::solve_retrying(primal, tol);
    require_optimal(rp, "diamond_norm(primal)");

    // dual: 2 min mu  s.t.  Z >= F, Z >= 0, Tr_out Z <= mu I
    HermSdp dual;
    const int vz = dual.add_herm_var(xdims.total_dim());
    const int vmu = dual.add_scalar_var();
    {
        HermSdp::Expr lower(xdims.total_dim());
        lower.add(vz, [](const CMatrix& m) { return m; });
        lower.add_const(-f);
        dual.add_psd_constraint(lower);
        HermSdp::Expr cap(delta.d_in());
        const auto out_labels = delta.out_dims.labels();
        const SystemDims xd = xdims;
        cap.add(vz, [xd, out_labels](const CMatrix& m) {
            return -partial_trace(m, xd, out_labels);
        });
        cap.add_scalar(vmu, identity_on(delta.in_dims));
        dual.add_psd_constraint(cap);
    }
    dual.add_objective_scalar(vmu, 2.0);
    HermSdp::Result rd = conic::solve_retrying(dual, tol);
    require_optimal(rd, "diamond_norm(dual)");

    require_agreement(rp.value, rd.value, tol, "diamond_norm");
    DiamondResult res;
    res.value = factor * 0.5 * (rp.value + rd.value);
    res.lo = factor *
             std::min({rp.primal_value, rp.dual_value, rd.primal_value, rd.dual_value});
    res.hi = factor *
             std::max({rp.primal_value, rp.dual_value, rd.primal_value, rd.dual_value});
    res.primal_x = rp.var_value(vx);
    res.x_dims = xdims;
    res.residuals = rd.residuals;
    res.iterations = rp.iterations + rd.iterations;
    return res;
}

double diamond_norm(const ChoiMap& delta, double tol) {
    return diamond_norm_full(delta, tol).value;
}

// ---------------------------------------------------------------------------
// conditional min-entropy norm
// ---------------------------------------------------------------------------

DualDiamondResult dual_diamond_norm_full(const CMatrix& rho, const SystemDims& dims,
                                         const std::vector<std::string>& condition_on,
                                         double tol) {
    if (rho.rows() != dims.total_dim())
        throw std::invalid_argument("dual_diamond_norm: dims mismatch");
    if (!rho.is_hermitian(1e-8) || !rho.is_psd(1e-7))
        throw std::invalid_argument("dual_diamond_norm: rho must be PSD");
    SystemDims cond;
    for (const auto& l : condition_on) cond.sys.push_back({l, dims.dim_of(l)});
    cond.validate();
    SystemDims rest = dims.without(condition_on);
    const int dc = cond.total_dim();

    // primal: min Tr X s.t. X (x) I - rho >= 0
    HermSdp primal;
    const int vx = primal.add_herm_var(dc);
    {
        HermSdp::Expr dom(dims.total_dim());
        if (cond.count() == 0) {
            const int dtot = dims.total_dim();
            dom.add(vx, [dtot](const CMatrix& m) {
                return CMatrix::identity(dtot) * m(0, 0);
            });
        } else {
            dom.add(vx, kron_identity_op(cond, dims));
        }
        dom.add_const(-rho);
        primal.add_psd_constraint(dom);
    }
    primal.add_objective_term(vx, CMatrix::identity(dc));
    HermSdp::Result rp = conic::solve_retrying(primal, tol);
    require_optimal(rp, "dual_diamond_norm(primal)");

    // dual: max <rho, alpha> over channels alpha in C(cond, rest)
    HermSdp dual;
    SystemDims choi_dims = rest.concat(cond);
    const int vc = dual.add_herm_var(dims.total_dim());
    {
        HermSdp::Expr tp(dc);
        const auto rest_labels = rest.labels();
        tp.add(vc, [choi_dims, rest_labels](const CMatrix& m) {
            return -partial_trace(m, choi_dims, rest_labels);
        });
        tp.add_const(CMatrix::identity(dc));
        dual.add_equality(tp);
    }
    dual.add_objective_term(vc, xspace_transform({rho, dims}, choi_dims));
    dual.set_maximize(true);
    HermSdp::Result rd = conic::solve_retrying(dual, tol);
    require_optimal(rd, "dual_diamond_norm(dual)");

    require_agreement(rp.value, rd.value, tol, "dual_diamond_norm");
    DualDiamondResult res;
    res.value = 0.5 * (rp.value + rd.value);
    res.hmin = -std::log2(std::max(res.value, 1e-300));
    res.lo = std::min({rp.primal_value, rp.dual_value, rd.primal_value, rd.dual_value});
    res.hi = std::max({rp.primal_value, rp.dual_value, rd.primal_value, rd.dual_value});
    res.primal_x = rp.var_value(vx);
    res.residuals = rp.residuals;
    res.iterations = rp.iterations + rd.iterations;
    return res;
}

double dual_diamond_norm(const CMatrix& rho, const SystemDims& dims,
                         const std::vector<std::string>& condition_on, double tol) {
    return dual_diamond_norm_full(rho, dims, condition_on, tol).value;
}

double hmin(const CMatrix& rho, const SystemDims& dims,
            const std::vector<std::string>& condition_on, double tol) {
    return dual_diamond_norm_full(rho, dims, condition_on, tol).hmin;
}

// ---------------------------------------------------------------------------
// restricted-superchannel norms
// ---------------------------------------------------------------------------

void add_comb_constraints(HermSdp& sdp, int vc, int vc2, const SystemDims& theta_dims,
                          const std::string& a0, const std::string& a1,
                          const std::string& b0, const std::string& b1) {
    (void)a1;
    SystemDims c2_dims({{a0, theta_dims.dim_of(a0)}, {b0, theta_dims.dim_of(b0)}});
    SystemDims t_dims = theta_dims.without({b1});
    {
        HermSdp::Expr e1(t_dims.total_dim());
        const SystemDims td = theta_dims;
        e1.add(vc, [td, b1](const CMatrix& m) { return partial_trace(m, td, {b1}); });
        HermSdp::LinOp embed = kron_identity_op(c2_dims, t_dims);
        e1.add(vc2, [embed](const CMatrix& m) { return -embed(m); });
        sdp.add_equality(e1);
    }
    {
        const int db0 = theta_dims.dim_of(b0);
        HermSdp::Expr e2(db0);
        const SystemDims cd = c2_dims;
        e2.add(vc2, [cd, a0](const CMatrix& m) { return -partial_trace(m, cd, {a0}); });
        e2.add_const(CMatrix::identity(db0));
        sdp.add_equality(e2);
    }
}

namespace {

FNormResult solve_single(HermSdp& sdp, double tol, const char* what) {
    HermSdp::Result r = conic::solve_retrying(sdp, tol);
    require_optimal(r, what);
    FNormResult res;
    res.value = r.value;
    res.lo = std::min(r.primal_value, r.dual_value);
    res.hi = std::max(r.primal_value, r.dual_value);
    res.residuals = r.residuals;
    res.iterations = r.iterations;
    return res;
}

}  // namespace

FNormResult f_norm_full(const CMatrix& rho, const SystemDims& dims, const FSpec& f,
                        double tol) {
    if (rho.rows() != dims.total_dim())
        throw std::invalid_argument("f_norm: dims mismatch");
    if (!rho.is_hermitian(1e-8) || !rho.is_psd(1e-7))
        throw std::invalid_argument("f_norm: rho must be PSD");

    if (f.variant == FVariant::Post || f.variant == FVariant::Pre) {
        // the fixed wire pair is contracted with an identity link; the free
        // side is a channel variable
        const bool post = (f.variant == FVariant::Post);
        const std::string fixed_a = post ? f.a0 : f.a1;
        const std::string fixed_b = post ? f.b0 : f.b1;
        const std::string free_in = post ? f.a1 : f.b0;
        const std::string free_out = post ? f.b1 : f.a0;
        const int dfix = dims.dim_of(fixed_a);
        if (dims.dim_of(fixed_b) != dfix)
            throw std::invalid_argument("f_norm: fixed wires must have equal dimension");
        CMatrix v = vec_doubleket(CMatrix::identity(dfix));
        Labeled psi{v * v.adjoint(), SystemDims({{fixed_a, dfix}, {fixed_b, dfix}})};
        Labeled linked = link_product({rho, dims}, psi);

        const int din = dims.dim_of(free_in), dout = dims.dim_of(free_out);
        SystemDims choi_dims({{free_out, dout}, {free_in, din}});
        HermSdp sdp;
        const int vc = sdp.add_herm_var(dout * din);
        {
            HermSdp::Expr tp(din);
            const auto out_label = free_out;
            tp.add(vc, [choi_dims, out_label](const CMatrix& m) {
                return -partial_trace(m, choi_dims, {out_label});
            });
            tp.add_const(CMatrix::identity(din));
            sdp.add_equality(tp);
        }
        sdp.add_objective_term(vc, xspace_transform(linked, choi_dims));
        sdp.set_maximize(true);
        return solve_single(sdp, tol, "f_norm(post/pre)");
    }

    // comb-type variants: variable C on (b1, a0, b0, a1)
    SystemDims theta_dims({{f.b1, dims.dim_of(f.b1)},
                           {f.a0, dims.dim_of(f.a0)},
                           {f.b0, dims.dim_of(f.b0)},
                           {f.a1, dims.dim_of(f.a1)}});
    if (dims.count() != 4)
        throw std::invalid_argument("f_norm: rho must live on exactly the four wires");

    HermSdp sdp;
    const int vc = sdp.add_herm_var(theta_dims.total_dim());
    const int vc2 = sdp.add_herm_var(dims.dim_of(f.a0) * dims.dim_of(f.b0));
    add_comb_constraints(sdp, vc, vc2, theta_dims, f.a0, f.a1, f.b0, f.b1);

    if (f.variant == FVariant::NoSignaling) {
        // reversed reading: Tr_{a0} C = I_{b0} (x) D, Tr_{b1} D = I_{a1}
        SystemDims d_dims({{f.b1, dims.dim_of(f.b1)}, {f.a1, dims.dim_of(f.a1)}});
        const int vd = sdp.add_herm_var(d_dims.total_dim());
        SystemDims t_dims = theta_dims.without({f.a0});
        {
            HermSdp::Expr e3(t_dims.total_dim());
            const auto a0 = f.a0;
            const SystemDims td = theta_dims;
            e3.add(vc, [td, a0](const CMatrix& m) { return partial_trace(m, td, {a0}); });
            HermSdp::LinOp embed = kron_identity_op(d_dims, t_dims);
            e3.add(vd, [embed](const CMatrix& m) { return -embed(m); });
            sdp.add_equality(e3);
        }
        {
            const int da1 = dims.dim_of(f.a1);
            HermSdp::Expr e4(da1);
            const auto b1 = f.b1;
            const SystemDims dd = d_dims;
            e4.add(vd, [dd, b1](const CMatrix& m) { return -partial_trace(m, dd, {b1}); });
            e4.add_const(CMatrix::identity(da1));
            sdp.add_equality(e4);
        }
    } else if (f.variant == FVariant::PptComb) {
        if (f.ppt_cut.empty())
            throw std::invalid_argument("f_norm: PptComb requires a bipartition");
        HermSdp::Expr ppt(theta_dims.total_dim());
        const auto cut = f.ppt_cut;
        const SystemDims td = theta_dims;
        ppt.add(vc, [td, cut](const CMatrix& m) { return partial_transpose(m, td, cut); });
        sdp.add_psd_constraint(ppt);
    }

    sdp.add_objective_term(vc, xspace_transform({rho, dims}, theta_dims));
    sdp.set_maximize(true);
    return solve_single(sdp, tol, "f_norm(comb)");
}

double f_norm(const CMatrix& rho, const SystemDims& dims, const FSpec& f, double tol) {
    return f_norm_full(rho, dims, f, tol).value;
}

double hmin_f(const CMatrix& rho, const SystemDims& dims, const FSpec& f, double tol) {
    return -std::log2(std::max(f_norm(rho, dims, f, tol), 1e-300));
}

FNormResult two_diamond_dual_norm_full(const CMatrix& rho, const SystemDims& dims,
                                       const FSpec& wires, double tol) {
    FSpec f = wires;
    f.variant = FVariant::FullComb;
    return f_norm_full(rho, dims, f, tol);
}

double two_diamond_dual_norm(const CMatrix& rho, const SystemDims& dims, const FSpec& wires,
                             double tol) {
    return two_diamond_dual_norm_full(rho, dims, wires, tol).value;
}

double hmin2(const CMatrix& rho, const SystemDims& dims, const FSpec& wires, double tol) {
    return -std::log2(std::max(two_diamond_dual_norm(rho, dims, wires, tol), 1e-300));
}

// ---------------------------------------------------------------------------
// dualnorm decomposition
// ---------------------------------------------------------------------------

DualnormDecomposition dualnorm_decompose(const CMatrix& rho, const SystemDims& dims,
                                         const std::vector<std::string>& condition_on,
                                         double tol) {
    if (rho.max_abs() == 0.0)
        throw std::invalid_argument("dualnorm_decompose: rho must be nonzero");
    DualDiamondResult dd = dual_diamond_norm_full(rho, dims, condition_on, tol);
    const double nu = dd.value;
    SystemDims cond;
    for (const auto& l : condition_on) cond.sys.push_back({l, dims.dim_of(l)});
    SystemDims rest = dims.without(condition_on);
    const int dc = cond.total_dim();

    CMatrix x = dd.primal_x;
    // V = (X/nu)^{1/2}; support projector at relative threshold 1e-9
    CMatrix v = linalg::herm_sqrt(x * (1.0 / nu));
    CMatrix xpinv_h = linalg::herm_inv_sqrt_pinv(x, 1e-9);
    linalg::EigResult ex = linalg::herm_eig(x);
    CMatrix proj(dc, dc);
    const double cut = 1e-9 * std::max(1.0, std::abs(ex.eigenvalues.back()));
    for (int k = 0; k < dc; ++k) {
        if (ex.eigenvalues[k] <= cut) continue;
        for (int i = 0; i < dc; ++i)
            for (int j = 0; j < dc; ++j)
                proj(i, j) += ex.eigenvectors(i, k) * std::conj(ex.eigenvectors(j, k));
    }

    HermSdp::LinOp embed = kron_identity_op(cond, dims);
    CMatrix m = embed(xpinv_h);
    CMatrix g = m * rho * m * nu;
    // support completion: pad the orthocomplement so G stays a faithful witness
    CMatrix pad = embed((CMatrix::identity(dc) - proj) * (nu / dc));
    g += pad;
    g = (g + g.adjoint()) * 0.5;

    DualnormDecomposition out;
    out.v = v;
    out.g = g;
    out.norm_value = nu;
    return out;
}

}  // namespace chancomp::norms
