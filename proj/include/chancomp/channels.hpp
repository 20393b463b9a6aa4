// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chancomp/linalg.hpp"
#include "chancomp/rng.hpp"

namespace chancomp::channels {

using linalg::CMatrix;
using linalg::SystemDims;

// A matrix tagged with its tensor factor labels; the currency of link products.
struct Labeled {
    CMatrix mat;
    SystemDims dims;
};

// A linear map between operator spaces stored as its Choi matrix on
// output (x) input.
struct ChoiMap {
    CMatrix choi;
    SystemDims out_dims, in_dims;

    SystemDims joint_dims() const { return out_dims.concat(in_dims); }
    int d_in() const { return in_dims.total_dim(); }
    int d_out() const { return out_dims.total_dim(); }

    bool is_cp(double tol = 1e-9) const;
    bool is_tp(double tol = 1e-8) const;
    bool is_channel(double tol = 1e-8) const { return is_cp(tol) && is_tp(tol); }
};

ChoiMap choi_of_kraus(const std::vector<CMatrix>& kraus, const SystemDims& in_dims,
                      const SystemDims& out_dims);
// Choi matrix of x -> f(x) evaluated on matrix units.
template <typename F>
ChoiMap choi_of_apply(F&& f, const SystemDims& in_dims, const SystemDims& out_dims);

CMatrix apply(const ChoiMap& phi, const CMatrix& x);
CMatrix apply_adjoint(const ChoiMap& phi, const CMatrix& y);
std::vector<CMatrix> kraus_of_choi(const ChoiMap& phi, double rank_tol = 1e-12);

// X * Y = Tr_B[(X (x) I_C)(I_A (x) Y^{T_B})] over the shared labels B; with no
// shared labels this is the tensor product.
Labeled link_product(const Labeled& x, const Labeled& y);

// <X, phi> = X * C_phi for X on in (x) out of phi (labels must match).
double pairing(const CMatrix& x, const SystemDims& xdims, const ChoiMap& phi);

// later o first, via the link product of the Choi matrices.
ChoiMap compose(const ChoiMap& later, const ChoiMap& first);
ChoiMap tensor(const ChoiMap& a, const ChoiMap& b);

// ---------------------------------------------------------------------------
// superchannels (2-combs)
// ---------------------------------------------------------------------------

// Choi matrix of a transformation of channels C(a0, a1) -> C(b0, b1), stored
// on (b1, a0, b0, a1) in this factor order.
struct SuperchannelChoi {
    CMatrix choi;
    SystemDims dims;  // four factors, order (b1, a0, b0, a1)
    std::string a0, a1, b0, b1;
    bool no_signaling = false;
    std::vector<std::string> ppt_cut;  // labels transposed in the PPT variant
};

// 2-comb test: there is C2 with Tr_{b1}[C] = I_{a1} (x) C2 and Tr_{a0}[C2] = I_{b0}.
bool is_comb(const SuperchannelChoi& theta, double tol = 1e-8);

// C_pre * C_post over the ancilla label; pre in C(b0, anc a0), post in C(anc a1, b1).
SuperchannelChoi superchannel_from_pre_post(const ChoiMap& pre, const ChoiMap& post,
                                            const std::string& anc, const std::string& a0,
                                            const std::string& a1, const std::string& b0,
                                            const std::string& b1);

// Theta applied to a channel with wire labels (a1, a0).
ChoiMap apply_superchannel(const SuperchannelChoi& theta, const ChoiMap& phi);

double pairing_superchannel(const CMatrix& rho, const SystemDims& rho_dims,
                            const SuperchannelChoi& theta);

// ---------------------------------------------------------------------------
// constructors
// ---------------------------------------------------------------------------

ChoiMap identity_channel(int d, const std::string& in = "A0", const std::string& out = "A1");
ChoiMap replacement_channel(const CMatrix& sigma, int d_in, const std::string& in = "A0",
                            const std::string& out = "A1");
ChoiMap depolarizing(int d, double lambda, const std::string& in = "A0",
                     const std::string& out = "A1");
// quantum-to-classical channel of a POVM: sigma -> sum_i Tr[sigma M_i] |i><i|
ChoiMap qc_from_povm(const std::vector<CMatrix>& effects, const SystemDims& in_dims,
                     const std::string& out = "A1");
// classical-to-classical channel of the column-stochastic matrix p(x|j)
ChoiMap cc_from_condprob(const std::vector<std::vector<double>>& p,
                         const std::string& in = "A0", const std::string& out = "A1");
// Haar-random isometry into system (x) environment, environment traced out.
ChoiMap random_channel(int d_in, int d_out, int env_dim, std::uint64_t seed,
                       const std::string& in = "A0", const std::string& out = "A1");

// Random state helpers used by the verification samplers.
CMatrix haar_pure_state(int d, Rng& rng);
CMatrix random_density_matrix(int d, int rank, Rng& rng);

// relabel a channel's wires (dimensions preserved)
ChoiMap relabeled(const ChoiMap& phi, const std::vector<std::string>& out_labels,
                  const std::vector<std::string>& in_labels);

template <typename F>
ChoiMap choi_of_apply(F&& f, const SystemDims& in_dims, const SystemDims& out_dims) {
    const int din = in_dims.total_dim();
    const int dout = out_dims.total_dim();
    CMatrix c(dout * din, dout * din);
    for (int i = 0; i < din; ++i)
        for (int j = 0; j < din; ++j) {
            CMatrix unit(din, din);
            unit(i, j) = 1.0;
            CMatrix img = f(unit);
            for (int a = 0; a < dout; ++a)
                for (int b = 0; b < dout; ++b) c(a * din + i, b * din + j) = img(a, b);
        }
    return ChoiMap{c, out_dims, in_dims};
}

}  // namespace chancomp::channels
