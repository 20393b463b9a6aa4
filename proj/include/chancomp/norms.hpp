// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.

#pragma once

#include <string>
#include <vector>

#include "chancomp/channels.hpp"
#include "chancomp/conic.hpp"
#include "chancomp/linalg.hpp"
#include "chancomp/sdp_builder.hpp"

namespace chancomp::norms {

using channels::ChoiMap;
using linalg::CMatrix;
using linalg::SystemDims;

// Functional of the duality pairing: <X, phi> = Re Tr[F X] for Hermitian X on
// the in (x) out space of phi.
CMatrix pairing_functional(const ChoiMap& phi);

// Building block for comb-constrained programs: given a Hermitian variable vc
// on theta_dims = (b1, a0, b0, a1) and an auxiliary variable vc2 on (a0, b0),
// adds Tr_{b1} C = I_{a1} (x) C2 and Tr_{a0} C2 = I_{b0}.
void add_comb_constraints(conic::HermSdp& sdp, int vc, int vc2,
                          const SystemDims& theta_dims, const std::string& a0,
                          const std::string& a1, const std::string& b0,
                          const std::string& b1);
// Same transform for a Hermitian matrix given on some labeled space, mapped to
// the target label order: <X, M> = X * M = Re Tr[xspace(M) X].
CMatrix xspace_transform(const channels::Labeled& m, const SystemDims& target);

// ---------------------------------------------------------------------------
// diamond norm (distinguishability norm for differences of channels)
// ---------------------------------------------------------------------------

struct DiamondResult {
    double value = 0.0;  // midpoint of the two formulations
    double lo = 0.0, hi = 0.0;
    CMatrix primal_x;  // maximizer of the primal form, on in (x) out
    SystemDims x_dims;
    conic::Residuals residuals;
    int iterations = 0;
};

// Both the maximization over 0 <= X <= sigma (x) I and the minimization over
// (mu, Z) are solved; the two values must agree within the certification
// margin or a solver-failure error is raised. The input must be a difference
// of equally-normalized CP maps (its Choi matrix has vanishing output trace).
DiamondResult diamond_norm_full(const ChoiMap& delta, double tol = 1e-7);
double diamond_norm(const ChoiMap& delta, double tol = 1e-7);

// ---------------------------------------------------------------------------
// conditional min-entropy norm
// ---------------------------------------------------------------------------

struct DualDiamondResult {
    double value = 0.0;
    double hmin = 0.0;  // -log2(value)
    double lo = 0.0, hi = 0.0;
    CMatrix primal_x;  // optimal X of the min form, on the conditioned factors
    conic::Residuals residuals;
    int iterations = 0;
};

// min { Tr X : X >= 0 on the conditioned factors, rho <= X (x) I } and the
// dual maximization of <rho, alpha> over channel Choi matrices; certified
// agreement, midpoint returned.
DualDiamondResult dual_diamond_norm_full(const CMatrix& rho, const SystemDims& dims,
                                         const std::vector<std::string>& condition_on,
                                         double tol = 1e-7);
double dual_diamond_norm(const CMatrix& rho, const SystemDims& dims,
                         const std::vector<std::string>& condition_on, double tol = 1e-7);
double hmin(const CMatrix& rho, const SystemDims& dims,
            const std::vector<std::string>& condition_on, double tol = 1e-7);

// ---------------------------------------------------------------------------
// restricted-superchannel norms
// ---------------------------------------------------------------------------

enum class FVariant { Post, Pre, Partial, FullComb, NoSignaling, PptComb };

// Wire labels of the optimization: the superchannel maps channels with wires
// a0 -> a1 into channels with wires b0 -> b1; rho lives on all four factors
// (Post/Pre variants contract the fixed pair upstream of the program).
//
// PptComb is a convex relaxation: its value upper-bounds the value over
// LOCC-restricted superchannels, which have no tractable characterization and
// are deliberately not offered.
struct FSpec {
    FVariant variant = FVariant::FullComb;
    std::string a0, a1, b0, b1;
    std::vector<std::string> ppt_cut;  // PptComb: labels transposed
};

struct FNormResult {
    double value = 0.0;
    double lo = 0.0, hi = 0.0;
    conic::Residuals residuals;
    int iterations = 0;
};

FNormResult f_norm_full(const CMatrix& rho, const SystemDims& dims, const FSpec& f,
                        double tol = 1e-7);
double f_norm(const CMatrix& rho, const SystemDims& dims, const FSpec& f, double tol = 1e-7);
double hmin_f(const CMatrix& rho, const SystemDims& dims, const FSpec& f, double tol = 1e-7);

// 2-comb norm: f_norm with the FullComb constraint set.
FNormResult two_diamond_dual_norm_full(const CMatrix& rho, const SystemDims& dims,
                                       const FSpec& wires, double tol = 1e-7);
double two_diamond_dual_norm(const CMatrix& rho, const SystemDims& dims, const FSpec& wires,
                             double tol = 1e-7);
double hmin2(const CMatrix& rho, const SystemDims& dims, const FSpec& wires,
             double tol = 1e-7);

// ---------------------------------------------------------------------------
// operator-factor decomposition of the min-entropy norm
// ---------------------------------------------------------------------------

struct DualnormDecomposition {
    CMatrix v;  // Tr[V V*] = 1, on the conditioned factors
    CMatrix g;  // PSD with op_norm(g) = dual_diamond_norm(rho)
    double norm_value = 0.0;
};

// rho = (V . V* (x) id)(G) built from the optimal primal X; the off-support
// block of G is padded with (value/d) I so the factorization stays PSD.
DualnormDecomposition dualnorm_decompose(const CMatrix& rho, const SystemDims& dims,
                                         const std::vector<std::string>& condition_on,
                                         double tol = 1e-7);

}  // namespace chancomp::norms
