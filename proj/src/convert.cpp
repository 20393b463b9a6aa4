// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.

#include "chancomp/convert.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "chancomp/sdp_builder.hpp"

namespace chancomp::convert {

using channels::Labeled;
using channels::link_product;
using conic::HermSdp;
using conic::SolveStatus;
using games::ViolationSample;
using linalg::CMatrix;
using linalg::kron;
using linalg::partial_trace;
using linalg::permute_systems;
using norms::xspace_transform;

namespace {

void require_optimal(const HermSdp::Result& r, const char* what) {
    if (r.status != SolveStatus::Optimal)
        throw std::runtime_error(std::string(what) + ": solver failure (" +
                                 conic::to_string(r.status) + ")");
}

CMatrix clip_psd(const CMatrix& m) {
    linalg::EigResult e = linalg::herm_eig((m + m.adjoint()) * 0.5, 1e-5);
    const int n = m.rows();
    CMatrix out(n, n);
    for (int k = 0; k < n; ++k) {
        if (e.eigenvalues[k] <= 0.0) continue;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                out(i, j) += e.eigenvalues[k] * e.eigenvectors(i, k) *
                             std::conj(e.eigenvectors(j, k));
    }
    return out;
}

// Shared tail of the conversion programs: Z >= xs(phi2 - processed phi1),
// Z >= 0, Tr_out Z <= mu I, minimize 2 mu. `difference` must evaluate to the
// X-space image of D = (processed phi1) - phi2; the block is oriented so that
// the PSD dual of S1 maximizes the pairing against the target, which is the
// distinguisher the characterization theorems quantify over.
struct DualTail {
    int vz = -1, vmu = -1, s1 = -1;
};

DualTail add_diamond_dual_tail(HermSdp& sdp, const SystemDims& xdims,
                               const std::vector<std::string>& out_labels,
                               HermSdp::Expr difference) {
    DualTail t;
    t.vz = sdp.add_herm_var(xdims.total_dim());
    t.vmu = sdp.add_scalar_var();
    HermSdp::Expr s1(xdims.total_dim());
    s1.add(t.vz, [](const CMatrix& m) { return m; });
    for (auto& term : difference.terms) s1.add(term.var, term.op);
    for (auto& st : difference.sterms) s1.add_scalar(st.scalar, st.coef);
    s1.add_const(difference.constant);
    t.s1 = sdp.add_psd_constraint(s1);

    SystemDims in_dims = xdims.without(out_labels);
    HermSdp::Expr s2(in_dims.total_dim());
    const SystemDims xd = xdims;
    s2.add(t.vz, [xd, out_labels](const CMatrix& m) {
        return -partial_trace(m, xd, out_labels);
    });
    s2.add_scalar(t.vmu, CMatrix::identity(in_dims.total_dim()));
    sdp.add_psd_constraint(s2);
    sdp.add_objective_scalar(t.vmu, 2.0);
    return t;
}

// Normalized dual-optimal witness of the S1 block.
CMatrix extract_witness(const HermSdp::Result& r, int s1, const SystemDims& xdims,
                        const std::vector<std::string>& cond, double tol) {
    CMatrix omega = clip_psd(r.psd_dual(s1));
    if (omega.max_abs() < 1e-12)
        omega = CMatrix::identity(xdims.total_dim()) * (1.0 / xdims.total_dim());
    const double nrm = norms::dual_diamond_norm(omega, xdims, cond, tol);
    return omega * (1.0 / nrm);
}

// fresh non-colliding labels for the source channel's free wires
std::string fresh(const std::string& base) { return base + "#s"; }

ChoiMap relabel_all(const ChoiMap& phi, const std::string& suffix) {
    ChoiMap r = phi;
    for (auto& [l, d] : r.out_dims.sys) l += suffix;
    for (auto& [l, d] : r.in_dims.sys) l += suffix;
    return r;
}

}  // namespace

ConversionResult delta_post(const ChoiMap& phi1, const ChoiMap& phi2, double tol) {
    if (!(phi1.in_dims == phi2.in_dims))
        throw std::invalid_argument("delta_post: channels must share input wires");
    // keep phi1's output wires distinct from phi2's
    ChoiMap src = phi1;
    for (auto& [l, d] : src.out_dims.sys)
        if (phi2.out_dims.has(l) || phi2.in_dims.has(l)) l = fresh(l);
    const SystemDims xdims = phi2.in_dims.concat(phi2.out_dims);
    const SystemDims lam_dims = phi2.out_dims.concat(src.out_dims);

    HermSdp sdp;
    const int vl = sdp.add_herm_var(lam_dims.total_dim());
    {
        HermSdp::Expr tp(src.d_out());
        const auto out2 = phi2.out_dims.labels();
        const SystemDims ld = lam_dims;
        tp.add(vl, [ld, out2](const CMatrix& m) { return -partial_trace(m, ld, out2); });
        tp.add_const(CMatrix::identity(src.d_out()));
        sdp.add_equality(tp);
    }
    HermSdp::Expr diff(xdims.total_dim());
    {
        const Labeled c1{src.choi, src.joint_dims()};
        const SystemDims ld = lam_dims;
        const SystemDims xd = xdims;
        diff.add(vl, [c1, ld, xd](const CMatrix& m) {
            return xspace_transform(link_product({m, ld}, c1), xd);
        });
        diff.add_const(-norms::pairing_functional(phi2));
    }
    DualTail t = add_diamond_dual_tail(sdp, xdims, phi2.out_dims.labels(), std::move(diff));

    HermSdp::Result r = conic::solve_retrying(sdp, tol);
    require_optimal(r, "delta_post");

    ConversionResult res;
    res.delta = r.value;
    res.optimizer_channel = ChoiMap{r.var_value(vl), phi2.out_dims, phi1.out_dims};
    res.witness = extract_witness(r, t.s1, xdims, phi2.in_dims.labels(), tol);
    res.witness_dims = xdims;
    res.residuals = r.residuals;
    res.iterations = r.iterations;
    {
        ChoiMap lam{res.optimizer_channel.choi, phi2.out_dims, src.out_dims};
        ChoiMap processed = channels::compose(lam, src);
        ChoiMap d{processed.choi - phi2.choi, phi2.out_dims, phi2.in_dims};
        res.recheck = norms::diamond_norm(d, tol);
    }
    return res;
}

ConversionResult delta_pre(const ChoiMap& phi1, const ChoiMap& phi2, double tol) {
    if (!(phi1.out_dims == phi2.out_dims))
        throw std::invalid_argument("delta_pre: channels must share output wires");
    ChoiMap src = phi1;
    for (auto& [l, d] : src.in_dims.sys)
        if (phi2.in_dims.has(l) || phi2.out_dims.has(l)) l = fresh(l);
    const SystemDims xdims = phi2.in_dims.concat(phi2.out_dims);
    const SystemDims lam_dims = src.in_dims.concat(phi2.in_dims);  // out (x) in of Lambda

    HermSdp sdp;
    const int vl = sdp.add_herm_var(lam_dims.total_dim());
    {
        HermSdp::Expr tp(phi2.d_in());
        const auto out_l = src.in_dims.labels();
        const SystemDims ld = lam_dims;
        tp.add(vl, [ld, out_l](const CMatrix& m) { return -partial_trace(m, ld, out_l); });
        tp.add_const(CMatrix::identity(phi2.d_in()));
        sdp.add_equality(tp);
    }
    HermSdp::Expr diff(xdims.total_dim());
    {
        const Labeled c1{src.choi, src.joint_dims()};
        const SystemDims ld = lam_dims;
        const SystemDims xd = xdims;
        diff.add(vl, [c1, ld, xd](const CMatrix& m) {
            return xspace_transform(link_product({m, ld}, c1), xd);
        });
        diff.add_const(-norms::pairing_functional(phi2));
    }
    DualTail t = add_diamond_dual_tail(sdp, xdims, phi2.out_dims.labels(), std::move(diff));

    HermSdp::Result r = conic::solve_retrying(sdp, tol);
    require_optimal(r, "delta_pre");

    ConversionResult res;
    res.delta = r.value;
    res.optimizer_channel = ChoiMap{r.var_value(vl), phi1.in_dims, phi2.in_dims};
    res.witness = extract_witness(r, t.s1, xdims, phi2.in_dims.labels(), tol);
    res.witness_dims = xdims;
    res.residuals = r.residuals;
    res.iterations = r.iterations;
    {
        ChoiMap lam{res.optimizer_channel.choi, src.in_dims, phi2.in_dims};
        ChoiMap processed = channels::compose(src, lam);
        ChoiMap d{processed.choi - phi2.choi, phi2.out_dims, phi2.in_dims};
        res.recheck = norms::diamond_norm(d, tol);
    }
    return res;
}

namespace {

struct PartialWires {
    std::string a_in, a_out;  // non-fixed wires of the channel
};

PartialWires split_wires(const ChoiMap& phi, const std::vector<std::string>& fixed_b) {
    std::vector<std::string> in_free, out_free;
    for (const auto& [l, d] : phi.in_dims.sys)
        if (std::find(fixed_b.begin(), fixed_b.end(), l) == fixed_b.end())
            in_free.push_back(l);
    for (const auto& [l, d] : phi.out_dims.sys)
        if (std::find(fixed_b.begin(), fixed_b.end(), l) == fixed_b.end())
            out_free.push_back(l);
    if (in_free.size() != 1 || out_free.size() != 1)
        throw std::invalid_argument(
            "delta_partial: exactly one non-fixed input and output wire per channel");
    return {in_free[0], out_free[0]};
}

}  // namespace

ConversionResult delta_partial(const ChoiMap& phi1, const ChoiMap& phi2,
                               const std::vector<std::string>& fixed_b, double tol) {
    for (const auto& b : fixed_b) {
        const bool in1 = phi1.in_dims.has(b), out1 = phi1.out_dims.has(b);
        const bool in2 = phi2.in_dims.has(b), out2 = phi2.out_dims.has(b);
        if (in1 != in2 || out1 != out2 || (!in1 && !out1))
            throw std::invalid_argument("delta_partial: fixed wire missing from a channel");
        const int d1 = in1 ? phi1.in_dims.dim_of(b) : phi1.out_dims.dim_of(b);
        const int d2 = in2 ? phi2.in_dims.dim_of(b) : phi2.out_dims.dim_of(b);
        if (d1 != d2)
            throw std::invalid_argument("delta_partial: fixed wire dimension mismatch");
    }
    PartialWires w2 = split_wires(phi2, fixed_b);
    // relabel all free wires of phi1 away from phi2's labels
    ChoiMap src = phi1;
    PartialWires w1s = split_wires(src, fixed_b);
    for (auto& [l, d] : src.in_dims.sys)
        if (l == w1s.a_in) l = fresh(l);
    for (auto& [l, d] : src.out_dims.sys)
        if (l == w1s.a_out) l = fresh(l);
    PartialWires w1 = split_wires(src, fixed_b);
    if (phi2.in_dims.has(w1.a_in) || phi2.out_dims.has(w1.a_out))
        throw std::invalid_argument("delta_partial: label collision after relabeling");

    const std::string a0 = w1.a_in, a1 = w1.a_out, b0 = w2.a_in, b1 = w2.a_out;
    SystemDims theta_dims({{b1, phi2.out_dims.dim_of(b1)},
                           {a0, src.in_dims.dim_of(a0)},
                           {b0, phi2.in_dims.dim_of(b0)},
                           {a1, src.out_dims.dim_of(a1)}});
    const SystemDims xdims = phi2.in_dims.concat(phi2.out_dims);

    HermSdp sdp;
    const int vc = sdp.add_herm_var(theta_dims.total_dim());
    const int vc2 = sdp.add_herm_var(theta_dims.dim_of(a0) * theta_dims.dim_of(b0));
    norms::add_comb_constraints(sdp, vc, vc2, theta_dims, a0, a1, b0, b1);

    HermSdp::Expr diff(xdims.total_dim());
    {
        const Labeled c1{src.choi, src.joint_dims()};
        const SystemDims td = theta_dims;
        const SystemDims xd = xdims;
        diff.add(vc, [c1, td, xd](const CMatrix& m) {
            return xspace_transform(link_product({m, td}, c1), xd);
        });
        diff.add_const(-norms::pairing_functional(phi2));
    }
    DualTail t = add_diamond_dual_tail(sdp, xdims, phi2.out_dims.labels(), std::move(diff));

    HermSdp::Result r = conic::solve_retrying(sdp, tol);
    require_optimal(r, "delta_partial");

    ConversionResult res;
    res.delta = r.value;
    res.optimizer_comb.choi = r.var_value(vc);
    res.optimizer_comb.dims = theta_dims;
    res.optimizer_comb.a0 = a0;
    res.optimizer_comb.a1 = a1;
    res.optimizer_comb.b0 = b0;
    res.optimizer_comb.b1 = b1;
    res.witness = extract_witness(r, t.s1, xdims, phi2.in_dims.labels(), tol);
    res.witness_dims = xdims;
    res.residuals = r.residuals;
    res.iterations = r.iterations;
    {
        Labeled processed =
            link_product({res.optimizer_comb.choi, theta_dims}, {src.choi, src.joint_dims()});
        CMatrix pm = permute_systems(processed.mat, processed.dims,
                                     phi2.out_dims.concat(phi2.in_dims).labels());
        ChoiMap d{pm - phi2.choi, phi2.out_dims, phi2.in_dims};
        res.recheck = norms::diamond_norm(d, tol);
    }
    return res;
}

ConversionResult delta_meas_sim(const MeasurementSet& mset, const MeasurementSet& nset,
                                double tol) {
    games::validate_measurement_set(mset);
    games::validate_measurement_set(nset);
    if (mset.front().dims.total_dim() != nset.front().dims.total_dim())
        throw std::invalid_argument("delta_meas_sim: families act on different spaces");
    const int k = static_cast<int>(mset.size());
    const int l = mset.front().outcomes();
    const int m = static_cast<int>(nset.size());
    const int n = nset.front().outcomes();
    const int dc = mset.front().dims.total_dim();

    // channel representations: C_M on (a1, a0, C), C_N on (b1, b0, C)
    SystemDims m_joint({{"a1", l}, {"a0", k}, {"C", dc}});
    CMatrix cm(l * k * dc, l * k * dc);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < l; ++j)
            for (int p = 0; p < dc; ++p)
                for (int q = 0; q < dc; ++q)
                    cm((j * k + i) * dc + p, (j * k + i) * dc + q) =
                        mset[i].effects[j](q, p);
    SystemDims n_joint({{"b1", n}, {"b0", m}, {"C", dc}});
    CMatrix cn(n * m * dc, n * m * dc);
    for (int y = 0; y < m; ++y)
        for (int x = 0; x < n; ++x)
            for (int p = 0; p < dc; ++p)
                for (int q = 0; q < dc; ++q)
                    cn((x * m + y) * dc + p, (x * m + y) * dc + q) =
                        nset[y].effects[x](q, p);

    SystemDims theta_dims({{"b1", n}, {"a0", k}, {"b0", m}, {"a1", l}});
    SystemDims xdims({{"b0", m}, {"C", dc}, {"b1", n}});

    HermSdp sdp;
    auto pidx = [&](int x, int i, int y, int j) { return ((x * k + i) * m + y) * l + j; };
    std::vector<int> pvars(static_cast<size_t>(n) * k * m * l);
    for (auto& v : pvars) v = sdp.add_scalar_var();

    // comb basis elements linked through Phi_M, in the X-space
    std::vector<CMatrix> fmats(pvars.size());
    for (int x = 0; x < n; ++x)
        for (int i = 0; i < k; ++i)
            for (int y = 0; y < m; ++y)
                for (int j = 0; j < l; ++j) {
                    CMatrix basis(theta_dims.total_dim(), theta_dims.total_dim());
                    const int row = ((x * k + i) * m + y) * l + j;
                    basis(row, row) = 1.0;
                    Labeled lk = link_product({basis, theta_dims}, {cm, m_joint});
                    fmats[pidx(x, i, y, j)] = xspace_transform(lk, xdims);
                }

    // channel normalization: sum_{x,i} p(x,i|y,j) = 1
    for (int y = 0; y < m; ++y)
        for (int j = 0; j < l; ++j) {
            HermSdp::Expr e(1);
            CMatrix one(1, 1), minus(1, 1);
            one(0, 0) = 1.0;
            minus(0, 0) = -1.0;
            for (int x = 0; x < n; ++x)
                for (int i = 0; i < k; ++i) e.add_scalar(pvars[pidx(x, i, y, j)], one);
            e.add_const(minus);
            sdp.add_equality(e);
        }
    // classical comb condition: sum_x p(x,i|y,j) independent of j
    for (int i = 0; i < k; ++i)
        for (int y = 0; y < m; ++y)
            for (int j = 1; j < l; ++j) {
                HermSdp::Expr e(1);
                CMatrix one(1, 1), minus(1, 1);
                one(0, 0) = 1.0;
                minus(0, 0) = -1.0;
                for (int x = 0; x < n; ++x) {
                    e.add_scalar(pvars[pidx(x, i, y, j)], one);
                    e.add_scalar(pvars[pidx(x, i, y, 0)], minus);
                }
                sdp.add_equality(e);
            }

    HermSdp::Expr diff(xdims.total_dim());
    for (size_t t2 = 0; t2 < pvars.size(); ++t2) diff.add_scalar(pvars[t2], fmats[t2]);
    diff.add_const(-xspace_transform({cn, n_joint}, xdims));
    DualTail t = add_diamond_dual_tail(sdp, xdims, {"b1"}, std::move(diff));

    HermSdp::Result r = conic::solve_retrying(sdp, tol);
    require_optimal(r, "delta_meas_sim");

    ConversionResult res;
    res.delta = r.value;
    res.optimizer_condprob.resize(pvars.size());
    CMatrix cp(theta_dims.total_dim(), theta_dims.total_dim());
    for (int x = 0; x < n; ++x)
        for (int i = 0; i < k; ++i)
            for (int y = 0; y < m; ++y)
                for (int j = 0; j < l; ++j) {
                    const double v = std::max(0.0, r.scalar_value(pvars[pidx(x, i, y, j)]));
                    res.optimizer_condprob[pidx(x, i, y, j)] = v;
                    const int row = ((x * k + i) * m + y) * l + j;
                    cp(row, row) = v;
                }
    res.optimizer_comb =
        SuperchannelChoi{cp, theta_dims, "a0", "a1", "b0", "b1", false, {}};
    res.witness = extract_witness(r, t.s1, xdims, {"b0", "C"}, tol);
    res.witness_dims = xdims;
    res.residuals = r.residuals;
    res.iterations = r.iterations;
    {
        Labeled processed = link_product({cp, theta_dims}, {cm, m_joint});
        CMatrix pm = permute_systems(processed.mat, processed.dims, n_joint.labels());
        SystemDims out2 = SystemDims::single("b1", n);
        SystemDims in2({{"b0", m}, {"C", dc}});
        ChoiMap d{pm - cn, out2, in2};
        res.recheck = norms::diamond_norm(d, tol);
    }
    return res;
}

double delta_symmetric(const ChoiMap& a, const ChoiMap& b, Variant v,
                       const std::vector<std::string>& fixed_b, double tol) {
    switch (v) {
        case Variant::Post:
            return std::max(delta_post(a, b, tol).delta, delta_post(b, a, tol).delta);
        case Variant::Pre:
            return std::max(delta_pre(a, b, tol).delta, delta_pre(b, a, tol).delta);
        default:
            return std::max(delta_partial(a, b, fixed_b, tol).delta,
                            delta_partial(b, a, fixed_b, tol).delta);
    }
}

// ---------------------------------------------------------------------------
// sampled verification of the min-entropy characterization
// ---------------------------------------------------------------------------

RandChansReport verify_rand_chans(const ChoiMap& phi1, const ChoiMap& phi2, Variant v,
                                  const std::vector<std::string>& fixed_b, double epsilon,
                                  int n_samples, std::uint64_t seed, double tol, int jobs) {
    if (epsilon < 0.0) throw std::invalid_argument("verify_rand_chans: epsilon < 0");

    ConversionResult conv;
    switch (v) {
        case Variant::Post: conv = delta_post(phi1, phi2, tol); break;
        case Variant::Pre: conv = delta_pre(phi1, phi2, tol); break;
        default: conv = delta_partial(phi1, phi2, fixed_b, tol); break;
    }

    // The sample space is the conversion witness space (phi2 input wires then
    // output wires), with phi2's free wires replaced by fresh reference wires
    // (same dimensions, independent labels). The fixed wires keep their names
    // and are connected in the link products below.
    const SystemDims xdims = conv.witness_dims;
    SystemDims sdims = xdims;
    std::vector<std::string> r_labels, rho_cond;
    if (v == Variant::Post) {
        for (auto& [l, d] : sdims.sys)
            if (phi2.out_dims.has(l)) l = l + "#r";
        rho_cond = phi2.in_dims.labels();
    } else if (v == Variant::Pre) {
        for (auto& [l, d] : sdims.sys)
            if (phi2.in_dims.has(l)) {
                l = l + "#r";
                rho_cond.push_back(l);
            }
    } else {
        PartialWires w2 = split_wires(phi2, fixed_b);
        for (auto& [l, d] : sdims.sys) {
            if (l == w2.a_in) {
                l = l + "#r";
                rho_cond.push_back(l);
            } else if (l == w2.a_out) {
                l = l + "#r";
            } else if (phi2.in_dims.has(l)) {
                rho_cond.push_back(l);  // fixed input wire
            }
        }
    }
    const int dtot = sdims.total_dim();

    // relabel phi1's free wires away from the sample labels
    ChoiMap src1 = phi1;
    const ChoiMap& src2 = phi2;
    if (v == Variant::Post) {
        for (auto& [l, d] : src1.out_dims.sys)
            if (sdims.has(l) || phi2.out_dims.has(l)) l = fresh(l);
    } else if (v == Variant::Pre) {
        for (auto& [l, d] : src1.in_dims.sys)
            if (sdims.has(l) || phi2.in_dims.has(l)) l = fresh(l);
    } else {
        PartialWires w1 = split_wires(src1, fixed_b);
        for (auto& [l, d] : src1.in_dims.sys)
            if (l == w1.a_in) l = fresh(l);
        for (auto& [l, d] : src1.out_dims.sys)
            if (l == w1.a_out) l = fresh(l);
    }

    auto condition_gap = [&](const CMatrix& rho) -> std::pair<double, double> {
        double lhs = 0.0, rhs_norm = 0.0;
        if (v == Variant::Post) {
            // contract the shared input wires: the channels act directly
            Labeled x2 = link_product({rho, sdims}, {src2.choi, src2.joint_dims()});
            lhs = norms::dual_diamond_norm(clip_psd(x2.mat), x2.dims,
                                           src2.out_dims.labels(), tol);
            Labeled x1 = link_product({rho, sdims}, {src1.choi, src1.joint_dims()});
            rhs_norm = norms::dual_diamond_norm(clip_psd(x1.mat), x1.dims,
                                                src1.out_dims.labels(), tol);
        } else if (v == Variant::Pre) {
            // contract the shared output wires: the transpose maps act
            Labeled x2 = link_product({rho, sdims}, {src2.choi, src2.joint_dims()});
            lhs = norms::dual_diamond_norm(clip_psd(x2.mat), x2.dims, rho_cond, tol);
            Labeled x1 = link_product({rho, sdims}, {src1.choi, src1.joint_dims()});
            rhs_norm = norms::dual_diamond_norm(clip_psd(x1.mat), x1.dims, rho_cond, tol);
        } else {
            PartialWires w1 = split_wires(src1, fixed_b);
            PartialWires w2 = split_wires(src2, fixed_b);
            std::string r0, r1;
            for (const auto& [l, d] : sdims.sys) {
                if (l == w2.a_in + "#r") r0 = l;
                if (l == w2.a_out + "#r") r1 = l;
            }
            Labeled x2 = link_product({rho, sdims}, {src2.choi, src2.joint_dims()});
            Labeled x1 = link_product({rho, sdims}, {src1.choi, src1.joint_dims()});
            norms::FSpec f2;
            f2.variant = norms::FVariant::FullComb;
            f2.a0 = w2.a_in;
            f2.a1 = w2.a_out;
            f2.b0 = r0;
            f2.b1 = r1;
            norms::FSpec f1 = f2;
            f1.a0 = w1.a_in;
            f1.a1 = w1.a_out;
            lhs = norms::f_norm(clip_psd(x2.mat), x2.dims, f2, tol);
            rhs_norm = norms::f_norm(clip_psd(x1.mat), x1.dims, f1, tol);
        }
        const double rho_norm = norms::dual_diamond_norm(rho, sdims, rho_cond, tol);
        return {lhs, rhs_norm + 0.5 * epsilon * rho_norm};
    };

    RandChansReport rep;
    rep.variant = v;
    rep.epsilon = epsilon;
    rep.delta = conv.delta;
    rep.n_samples = n_samples;
    rep.max_violation = -std::numeric_limits<double>::infinity();

    std::vector<ViolationSample> all(n_samples);
    auto eval_one = [&](int kk) {
        const std::uint64_t skey = Rng::mix(seed, static_cast<std::uint64_t>(kk));
        CMatrix rho(dtot, dtot);
        if (kk == 0) {
            rho = conv.witness;
        } else {
            Rng rng(skey);
            if (kk % 2 == 1) {
                rho = channels::random_density_matrix(dtot, rng.uniform_int(1, dtot), rng);
            } else {
                // near-optimal: witness (normalized to a state) mixed with noise
                CMatrix w = conv.witness * (1.0 / conv.witness.trace().real());
                CMatrix noise =
                    channels::random_density_matrix(dtot, rng.uniform_int(1, dtot), rng);
                const double t2 = 0.05 + 0.3 * rng.uniform();
                rho = w * (1.0 - t2) + noise * t2;
            }
        }
        auto [lhs, rhs] = condition_gap(rho);
        ViolationSample vs;
        vs.sample = kk;
        vs.seed = skey;
        vs.lhs = lhs;
        vs.rhs = rhs;
        vs.gap = lhs - rhs;
        all[kk] = vs;
    };

    if (jobs <= 1) {
        for (int kk = 0; kk < n_samples; ++kk) eval_one(kk);
    } else {
        std::atomic_int next{0};
        std::vector<std::thread> pool;
        for (int t2 = 0; t2 < jobs; ++t2)
            pool.emplace_back([&]() {
                for (;;) {
                    const int kk = next.fetch_add(1);
                    if (kk >= n_samples) return;
                    eval_one(kk);
                }
            });
        for (auto& th : pool) th.join();
    }

    std::vector<ViolationSample> sorted = all;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const ViolationSample& a, const ViolationSample& b) {
                         return a.gap > b.gap;
                     });
    for (const auto& vs : all) {
        rep.max_violation = std::max(rep.max_violation, vs.gap);
        if (vs.gap > 1e-9) rep.violations.push_back(vs);
    }
    for (size_t i = 0; i < sorted.size() && i < 3; ++i) rep.worst.push_back(sorted[i]);
    return rep;
}

// ---------------------------------------------------------------------------
// preprocessing range programs
// ---------------------------------------------------------------------------

double pre_range_inner(const ChoiMap& phi1, const ChoiMap& phi2, const CMatrix& xi,
                       const SystemDims& xi_dims, const std::string& r_label, double tol) {
    if (!(phi1.out_dims == phi2.out_dims))
        throw std::invalid_argument("pre_range_inner: channels must share output wires");
    for (const auto& l : phi2.in_dims.labels())
        if (!xi_dims.has(l))
            throw std::invalid_argument("pre_range_inner: xi must carry phi2's input wires");
    const int dr = xi_dims.dim_of(r_label);
    if (xi.rows() != xi_dims.total_dim())
        throw std::invalid_argument("pre_range_inner: xi dimension mismatch");

    ChoiMap src = phi1;
    for (auto& [l, d] : src.in_dims.sys)
        if (xi_dims.has(l)) l = fresh(l);

    // K = (Phi2 (x) id)(xi) on (out, R)
    Labeled kfix = link_product({xi, xi_dims}, {phi2.choi, phi2.joint_dims()});
    SystemDims target = kfix.dims;  // (R, out...) order from the link
    CMatrix kmat = kfix.mat;

    SystemDims sig_dims = src.in_dims.concat(SystemDims::single(r_label, dr));

    HermSdp sdp;
    const int vsig = sdp.add_herm_var(sig_dims.total_dim());
    const int vp = sdp.add_herm_var(target.total_dim());
    const int vq = sdp.add_herm_var(target.total_dim());
    {
        // P - Q = (Phi1 (x) id)(sigma) - K
        HermSdp::Expr e(target.total_dim());
        e.add(vp, [](const CMatrix& m) { return m; });
        e.add(vq, [](const CMatrix& m) { return -m; });
        const Labeled c1{src.choi, src.joint_dims()};
        const SystemDims sd = sig_dims;
        const SystemDims tg = target;
        e.add(vsig, [c1, sd, tg](const CMatrix& m) {
            Labeled r = link_product({m, sd}, c1);
            return -permute_systems(r.mat, r.dims, tg.labels());
        });
        e.add_const(kmat);
        sdp.add_equality(e);
    }
    {
        // sigma_R = xi_R
        HermSdp::Expr e(dr);
        const SystemDims sd = sig_dims;
        const auto traced = src.in_dims.labels();
        e.add(vsig, [sd, traced](const CMatrix& m) { return -partial_trace(m, sd, traced); });
        e.add_const(partial_trace(xi, xi_dims, phi2.in_dims.labels()));
        sdp.add_equality(e);
    }
    sdp.add_objective_term(vp, CMatrix::identity(target.total_dim()));
    sdp.add_objective_term(vq, CMatrix::identity(target.total_dim()));
    HermSdp::Result r = conic::solve_retrying(sdp, tol);
    require_optimal(r, "pre_range_inner");
    return r.value;
}

double hausdorff_pre_metric(const CMatrix& x, const CMatrix& y, const SystemDims& dims,
                            const std::vector<std::string>& r_labels) {
    std::vector<std::string> traced;
    for (const auto& [l, d] : dims.sys)
        if (std::find(r_labels.begin(), r_labels.end(), l) == r_labels.end())
            traced.push_back(l);
    CMatrix xr = partial_trace(x, dims, traced);
    CMatrix yr = partial_trace(y, dims, traced);
    return linalg::trace_norm(x - y) + 2.0 * linalg::purified_distance(xr, yr);
}

}  // namespace chancomp::convert
