// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.

#pragma once

#include <functional>
#include <vector>

#include "chancomp/conic.hpp"
#include "chancomp/linalg.hpp"

namespace chancomp::conic {

// Compiles Hermitian-variable semidefinite programs to the interior-point
// core. A Hermitian matrix variable of complex dimension n is carried by its
// n^2 real coordinates; positive semidefiniteness is imposed through the real
// 2n x 2n embedding [[Re X, -Im X], [Im X, Re X]] as a PSD slack block, so the
// cone kernel stays real. The factor-2 trace duplication of the embedding is
// compensated when objectives and duals are mapped back.
class HermSdp {
public:
    using LinOp = std::function<linalg::CMatrix(const linalg::CMatrix&)>;

    struct Term {
        int var;
        LinOp op;  // maps the variable space to the expression space
    };
    struct ScalarTerm {
        int scalar;
        linalg::CMatrix coef;
    };
    // sum_v op_v(X_v) + sum_j x_j * coef_j + constant, a Hermitian expression
    struct Expr {
        int dim = 0;
        std::vector<Term> terms;
        std::vector<ScalarTerm> sterms;
        linalg::CMatrix constant;

        explicit Expr(int d) : dim(d), constant(d, d) {}
        Expr& add(int var, LinOp op) {
            terms.push_back({var, std::move(op)});
            return *this;
        }
        Expr& add_scalar(int scalar, linalg::CMatrix coef) {
            sterms.push_back({scalar, std::move(coef)});
            return *this;
        }
        Expr& add_const(const linalg::CMatrix& k) {
            constant += k;
            return *this;
        }
    };

    // Hermitian n x n variable, PSD by construction.
    int add_herm_var(int dim);
    int add_scalar_var();  // nonnegative scalar

    void add_equality(const Expr& e);          // e == 0
    int add_psd_constraint(const Expr& e);     // e >= 0, returns id for dual extraction
    void add_objective_term(int var, const linalg::CMatrix& f);  // + Re Tr[f X_var]
    void add_objective_scalar(int scalar, double coef);
    void add_objective_offset(double v) { gf_.obj_offset += v; }
    void set_maximize(bool m) { gf_.maximize = m; }

    struct Result {
        SolveStatus status = SolveStatus::NumericalFailure;
        double value = 0.0;  // midpoint of the certified primal/dual pair
        double primal_value = 0.0, dual_value = 0.0;
        Residuals residuals;
        int iterations = 0;

        linalg::CMatrix var_value(int id) const;
        double scalar_value(int id) const;
        // Hermitian dual multiplier of a PSD constraint (pairing convention
        // <dual, expr> with the Hilbert-Schmidt real inner product).
        linalg::CMatrix psd_dual(int constraint_id) const;

        // internal layout shared with the builder
        std::vector<double> x, z;
        struct VarInfo {
            int offset, dim;
        };
        std::vector<VarInfo> vars;
        std::vector<int> scalar_cols;
        struct ConInfo {
            int zoffset, dim;  // dim = complex dimension of the constrained expression
        };
        std::vector<ConInfo> cons;
    };

    Result solve(double tol = 1e-7, int max_iters = 200) const;

    int num_rows() const { return static_cast<int>(gf_.b.size()); }
    int num_cols() const { return gf_.nvar; }

private:
    struct VarInfo {
        int offset, dim;
    };
    struct ConInfo {
        int zoffset, dim;
    };

    GForm gf_;
    std::vector<VarInfo> vars_;
    std::vector<int> scalar_cols_;
    std::vector<ConInfo> cons_;
    int zoff_ = 0;

    void scatter_psd_rows(const Expr& e);
};

// Solve with tolerance loosening on numerical failure (x10 steps, capped at
// the solver's 1e-4 ceiling); ill-conditioned endgames then certify at the
// loosened tolerance instead of failing outright.
HermSdp::Result solve_retrying(const HermSdp& sdp, double tol, int max_iters = 200);

// Hermitian coordinate helpers shared with users of HermSdp: the coordinate
// order for an n x n Hermitian X is, for i <= j row-major over the upper
// triangle, X_ii (one real coordinate) and (Re X_ij, Im X_ij) for i < j.
int herm_coord_count(int n);
std::vector<double> herm_coords_from_matrix(const linalg::CMatrix& x);
linalg::CMatrix herm_matrix_from_coords(const std::vector<double>& w, int n);

}  // namespace chancomp::conic
