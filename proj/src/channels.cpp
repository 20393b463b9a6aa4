// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.

#include "chancomp/channels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chancomp::channels {

using linalg::cplx;
using linalg::EigResult;
using linalg::herm_eig;
using linalg::kron;
using linalg::partial_trace;
using linalg::partial_transpose;
using linalg::permute_systems;
using linalg::vec_doubleket;

bool ChoiMap::is_cp(double tol) const {
    EigResult e = herm_eig(choi, 1e-8);
    return e.eigenvalues.empty() || e.eigenvalues.front() >= -tol;
}

bool ChoiMap::is_tp(double tol) const {
    CMatrix tr = partial_trace(choi, joint_dims(), out_dims.labels());
    return (tr - CMatrix::identity(d_in())).max_abs() <= tol;
}

ChoiMap choi_of_kraus(const std::vector<CMatrix>& kraus, const SystemDims& in_dims,
                      const SystemDims& out_dims) {
    const int din = in_dims.total_dim();
    const int dout = out_dims.total_dim();
    if (kraus.empty()) throw std::invalid_argument("choi_of_kraus: empty Kraus list");
    CMatrix c(dout * din, dout * din);
    for (const auto& k : kraus) {
        if (k.rows() != dout || k.cols() != din)
            throw std::invalid_argument("choi_of_kraus: Kraus operator shape mismatch");
        CMatrix v = vec_doubleket(CMatrix::identity(din));
        CMatrix kv = kron(k, CMatrix::identity(din)) * v;  // |K>> on out (x) in
        c += kv * kv.adjoint();
    }
    return ChoiMap{c, out_dims, in_dims};
}

CMatrix apply(const ChoiMap& phi, const CMatrix& x) {
    const int din = phi.d_in();
    if (x.rows() != din || x.cols() != din)
        throw std::invalid_argument("apply: input dimension mismatch");
    // Phi(x) = Tr_in[ C (I_out (x) x^T) ]
    CMatrix m = phi.choi * kron(CMatrix::identity(phi.d_out()), x.transpose());
    SystemDims grouped({{"_out", phi.d_out()}, {"_in", din}});
    return partial_trace(m, grouped, {"_in"});
}

std::vector<CMatrix> kraus_of_choi(const ChoiMap& phi, double rank_tol) {
    EigResult e = herm_eig(phi.choi, 1e-8);
    const double scale = std::max(1.0, std::abs(e.eigenvalues.back()));
    std::vector<CMatrix> ks;
    const int dout = phi.d_out(), din = phi.d_in();
    for (size_t k = 0; k < e.eigenvalues.size(); ++k) {
        if (e.eigenvalues[k] <= rank_tol * scale) continue;
        const double w = std::sqrt(e.eigenvalues[k]);
        CMatrix v(dout * din, 1);
        for (int i = 0; i < dout * din; ++i) v(i, 0) = w * e.eigenvectors(i, static_cast<int>(k));
        ks.push_back(linalg::unvec_doubleket(v, dout, din));
    }
    return ks;
}

CMatrix apply_adjoint(const ChoiMap& phi, const CMatrix& y) {
    const auto ks = kraus_of_choi(phi);
    CMatrix out(phi.d_in(), phi.d_in());
    for (const auto& k : ks) out += k.adjoint() * y * k;
    return out;
}

Labeled link_product(const Labeled& x, const Labeled& y) {
    // shared labels, in x's order
    std::vector<std::string> shared, only_x, only_y;
    for (const auto& [l, d] : x.dims.sys) {
        if (y.dims.has(l)) {
            if (y.dims.dim_of(l) != d)
                throw std::invalid_argument("link_product: dimension mismatch on label " + l);
            shared.push_back(l);
        } else {
            only_x.push_back(l);
        }
    }
    for (const auto& [l, d] : y.dims.sys)
        if (!x.dims.has(l)) only_y.push_back(l);

    // reorder x to (A, B) and y to (B, C) with a common shared order
    std::vector<std::string> xorder = only_x;
    xorder.insert(xorder.end(), shared.begin(), shared.end());
    std::vector<std::string> yorder = shared;
    yorder.insert(yorder.end(), only_y.begin(), only_y.end());
    CMatrix xp = permute_systems(x.mat, x.dims, xorder);
    CMatrix yp = permute_systems(y.mat, y.dims, yorder);
    SystemDims xd = x.dims.reordered(xorder);
    SystemDims yd = y.dims.reordered(yorder);

    CMatrix ypt = shared.empty() ? yp : partial_transpose(yp, yd, shared);

    int da = 1, db = 1, dc = 1;
    for (const auto& l : only_x) da *= x.dims.dim_of(l);
    for (const auto& l : shared) db *= x.dims.dim_of(l);
    for (const auto& l : only_y) dc *= y.dims.dim_of(l);

    CMatrix big = kron(xp, CMatrix::identity(dc)) * kron(CMatrix::identity(da), ypt);
    SystemDims grouped({{"_a", da}, {"_b", db}, {"_c", dc}});
    CMatrix res = partial_trace(big, grouped, {"_b"});

    SystemDims rd;
    for (const auto& l : only_x) rd.sys.push_back({l, x.dims.dim_of(l)});
    for (const auto& l : only_y) rd.sys.push_back({l, y.dims.dim_of(l)});
    return Labeled{res, rd};
}

double pairing(const CMatrix& x, const SystemDims& xdims, const ChoiMap& phi) {
    Labeled res = link_product({x, xdims}, {phi.choi, phi.joint_dims()});
    if (res.mat.rows() != 1)
        throw std::invalid_argument("pairing: labels do not fully contract");
    return res.mat(0, 0).real();
}

ChoiMap compose(const ChoiMap& later, const ChoiMap& first) {
    Labeled res = link_product({later.choi, later.joint_dims()},
                               {first.choi, first.joint_dims()});
    SystemDims target = later.out_dims.concat(first.in_dims);
    CMatrix m = permute_systems(res.mat, res.dims, target.labels());
    return ChoiMap{m, later.out_dims, first.in_dims};
}

ChoiMap tensor(const ChoiMap& a, const ChoiMap& b) {
    Labeled res = link_product({a.choi, a.joint_dims()}, {b.choi, b.joint_dims()});
    SystemDims out = a.out_dims.concat(b.out_dims);
    SystemDims in = a.in_dims.concat(b.in_dims);
    CMatrix m = permute_systems(res.mat, res.dims, out.concat(in).labels());
    return ChoiMap{m, out, in};
}

// --- superchannels ------------------------------------------------------------

bool is_comb(const SuperchannelChoi& theta, double tol) {
    const CMatrix& c = theta.choi;
    if (!c.is_hermitian(1e-8)) return false;
    EigResult e = herm_eig(c, 1e-8);
    const double scale = std::max(1.0, std::abs(e.eigenvalues.back()));
    if (e.eigenvalues.front() < -tol * scale) return false;

    const SystemDims& dims = theta.dims;
    const int da1 = dims.dim_of(theta.a1);
    // T = Tr_{b1} C on (a0, b0, a1); candidate C2 by averaging over a1
    CMatrix t = partial_trace(c, dims, {theta.b1});
    SystemDims tdims = dims.without({theta.b1});
    CMatrix c2 = partial_trace(t, tdims, {theta.a1}) * (1.0 / da1);
    SystemDims c2dims = tdims.without({theta.a1});
    // residual of T = I_{a1} (x) C2
    Labeled rhs = link_product({c2, c2dims},
                               {CMatrix::identity(da1), SystemDims::single(theta.a1, da1)});
    CMatrix rhsm = permute_systems(rhs.mat, rhs.dims, tdims.labels());
    if ((t - rhsm).max_abs() > tol * std::max(1.0, t.max_abs())) return false;
    // Tr_{a0} C2 = I_{b0}
    CMatrix tr2 = partial_trace(c2, c2dims, {theta.a0});
    const int db0 = dims.dim_of(theta.b0);
    return (tr2 - CMatrix::identity(db0)).max_abs() <= tol * std::max(1.0, c2.max_abs());
}

SuperchannelChoi superchannel_from_pre_post(const ChoiMap& pre, const ChoiMap& post,
                                            const std::string& anc, const std::string& a0,
                                            const std::string& a1, const std::string& b0,
                                            const std::string& b1) {
    // pre: b0 -> anc (x) a0 ; post: anc (x) a1 -> b1
    if (!pre.out_dims.has(anc) || !pre.out_dims.has(a0) || !pre.in_dims.has(b0))
        throw std::invalid_argument("superchannel_from_pre_post: bad pre labels");
    if (!post.in_dims.has(anc) || !post.in_dims.has(a1) || !post.out_dims.has(b1))
        throw std::invalid_argument("superchannel_from_pre_post: bad post labels");
    Labeled res = link_product({pre.choi, pre.joint_dims()}, {post.choi, post.joint_dims()});
    SuperchannelChoi sc;
    sc.a0 = a0;
    sc.a1 = a1;
    sc.b0 = b0;
    sc.b1 = b1;
    sc.dims = res.dims.reordered({b1, a0, b0, a1});
    sc.choi = permute_systems(res.mat, res.dims, {b1, a0, b0, a1});
    return sc;
}

ChoiMap apply_superchannel(const SuperchannelChoi& theta, const ChoiMap& phi) {
    Labeled res = link_product({theta.choi, theta.dims}, {phi.choi, phi.joint_dims()});
    // remaining labels are (b1, b0)
    const int db1 = theta.dims.dim_of(theta.b1);
    const int db0 = theta.dims.dim_of(theta.b0);
    CMatrix m = permute_systems(res.mat, res.dims, {theta.b1, theta.b0});
    return ChoiMap{m, SystemDims::single(theta.b1, db1), SystemDims::single(theta.b0, db0)};
}

double pairing_superchannel(const CMatrix& rho, const SystemDims& rho_dims,
                            const SuperchannelChoi& theta) {
    Labeled res = link_product({rho, rho_dims}, {theta.choi, theta.dims});
    if (res.mat.rows() != 1)
        throw std::invalid_argument("pairing_superchannel: labels do not fully contract");
    return res.mat(0, 0).real();
}

// --- constructors ---------------------------------------------------------------

ChoiMap identity_channel(int d, const std::string& in, const std::string& out) {
    CMatrix v = vec_doubleket(CMatrix::identity(d));
    return ChoiMap{v * v.adjoint(), SystemDims::single(out, d), SystemDims::single(in, d)};
}

ChoiMap replacement_channel(const CMatrix& sigma, int d_in, const std::string& in,
                            const std::string& out) {
    if (sigma.rows() != sigma.cols())
        throw std::invalid_argument("replacement_channel: state not square");
    return ChoiMap{kron(sigma, CMatrix::identity(d_in)),
                   SystemDims::single(out, sigma.rows()), SystemDims::single(in, d_in)};
}

ChoiMap depolarizing(int d, double lambda, const std::string& in, const std::string& out) {
    ChoiMap id = identity_channel(d, in, out);
    ChoiMap rep = replacement_channel(CMatrix::identity(d) * (1.0 / d), d, in, out);
    return ChoiMap{id.choi * lambda + rep.choi * (1.0 - lambda), id.out_dims, id.in_dims};
}

ChoiMap qc_from_povm(const std::vector<CMatrix>& effects, const SystemDims& in_dims,
                     const std::string& out) {
    const int d = in_dims.total_dim();
    const int k = static_cast<int>(effects.size());
    if (k == 0) throw std::invalid_argument("qc_from_povm: empty POVM");
    CMatrix sum(d, d);
    for (const auto& m : effects) {
        if (m.rows() != d || m.cols() != d)
            throw std::invalid_argument("qc_from_povm: effect dimension mismatch");
        if (!m.is_hermitian(1e-8) || !m.is_psd(1e-8))
            throw std::invalid_argument("qc_from_povm: effect not PSD");
        sum += m;
    }
    if ((sum - CMatrix::identity(d)).max_abs() > 1e-8)
        throw std::invalid_argument("qc_from_povm: effects do not sum to identity");
    CMatrix c(k * d, k * d);
    for (int x = 0; x < k; ++x)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) c(x * d + i, x * d + j) = effects[x](j, i);
    return ChoiMap{c, SystemDims::single(out, k), in_dims};
}

ChoiMap cc_from_condprob(const std::vector<std::vector<double>>& p, const std::string& in,
                         const std::string& out) {
    const int n = static_cast<int>(p.size());
    if (n == 0) throw std::invalid_argument("cc_from_condprob: empty matrix");
    const int l = static_cast<int>(p[0].size());
    for (const auto& row : p)
        if (static_cast<int>(row.size()) != l)
            throw std::invalid_argument("cc_from_condprob: ragged matrix");
    for (int j = 0; j < l; ++j) {
        double col = 0.0;
        for (int x = 0; x < n; ++x) {
            if (p[x][j] < -1e-12)
                throw std::invalid_argument("cc_from_condprob: negative probability");
            col += p[x][j];
        }
        if (std::abs(col - 1.0) > 1e-9)
            throw std::invalid_argument("cc_from_condprob: columns must sum to one");
    }
    CMatrix c(n * l, n * l);
    for (int x = 0; x < n; ++x)
        for (int j = 0; j < l; ++j) c(x * l + j, x * l + j) = p[x][j];
    return ChoiMap{c, SystemDims::single(out, n), SystemDims::single(in, l)};
}

namespace {

CMatrix gaussian_matrix(int rows, int cols, Rng& rng) {
    CMatrix g(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) g(i, j) = cplx(rng.gaussian(), rng.gaussian());
    return g;
}

// Orthonormalize columns by modified Gram-Schmidt with one reorthogonalization
// pass; positive normalization fixes the Haar representative.
CMatrix orthonormal_columns(CMatrix g) {
    const int rows = g.rows(), cols = g.cols();
    for (int c = 0; c < cols; ++c) {
        for (int pass = 0; pass < 2; ++pass) {
            for (int prev = 0; prev < c; ++prev) {
                cplx ip = 0.0;
                for (int r = 0; r < rows; ++r) ip += std::conj(g(r, prev)) * g(r, c);
                for (int r = 0; r < rows; ++r) g(r, c) -= ip * g(r, prev);
            }
        }
        double nrm = 0.0;
        for (int r = 0; r < rows; ++r) nrm += std::norm(g(r, c));
        nrm = std::sqrt(nrm);
        if (nrm < 1e-12) throw std::runtime_error("orthonormal_columns: rank deficient draw");
        for (int r = 0; r < rows; ++r) g(r, c) = g(r, c) * (1.0 / nrm);
    }
    return g;
}

}  // namespace

ChoiMap random_channel(int d_in, int d_out, int env_dim, std::uint64_t seed,
                       const std::string& in, const std::string& out) {
    if (d_out * env_dim < d_in)
        throw std::invalid_argument("random_channel: environment too small for an isometry");
    Rng rng(seed);
    CMatrix v = orthonormal_columns(gaussian_matrix(d_out * env_dim, d_in, rng));
    std::vector<CMatrix> kraus;
    for (int e = 0; e < env_dim; ++e) {
        CMatrix k(d_out, d_in);
        for (int o = 0; o < d_out; ++o)
            for (int i = 0; i < d_in; ++i) k(o, i) = v(o * env_dim + e, i);
        kraus.push_back(std::move(k));
    }
    return choi_of_kraus(kraus, SystemDims::single(in, d_in), SystemDims::single(out, d_out));
}

CMatrix haar_pure_state(int d, Rng& rng) {
    CMatrix v = gaussian_matrix(d, 1, rng);
    double nrm = v.frob_norm();
    v = v * (1.0 / nrm);
    return v * v.adjoint();
}

CMatrix random_density_matrix(int d, int rank, Rng& rng) {
    CMatrix g = gaussian_matrix(d, rank, rng);
    CMatrix rho = g * g.adjoint();
    return rho * (1.0 / rho.trace().real());
}

ChoiMap relabeled(const ChoiMap& phi, const std::vector<std::string>& out_labels,
                  const std::vector<std::string>& in_labels) {
    if (out_labels.size() != phi.out_dims.count() || in_labels.size() != phi.in_dims.count())
        throw std::invalid_argument("relabeled: label count mismatch");
    ChoiMap r = phi;
    for (size_t i = 0; i < out_labels.size(); ++i) r.out_dims.sys[i].first = out_labels[i];
    for (size_t i = 0; i < in_labels.size(); ++i) r.in_dims.sys[i].first = in_labels[i];
    r.out_dims.validate();
    r.in_dims.validate();
    r.joint_dims().validate();
    return r;
}

}  // namespace chancomp::channels
