// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "chancomp/linalg.hpp"

namespace chancomp::conic {

// ----------------------------------------------------------------------------
// Standard-form conic program
//
//   minimize (or maximize)  c'x   subject to   A x = b,   x in K,
//
// where K is a product of blocks. A Psd(n) block contributes n(n+1)/2
// scalarized variables holding the lower triangle of a real symmetric PSD
// matrix in column-major order with off-diagonal entries scaled by sqrt(2)
// (svec convention, so that the Euclidean inner product of two svec vectors
// equals Tr[S T]). Nonneg(n) and Free(n) blocks contribute n plain scalars.
// ----------------------------------------------------------------------------

enum class BlockKind { Psd, Nonneg, Free };

struct Block {
    BlockKind kind;
    int n;
    int scalar_count() const { return kind == BlockKind::Psd ? n * (n + 1) / 2 : n; }
};

struct Triplet {
    int row, col;
    double val;
};

struct ConicProblem {
    bool maximize = false;
    std::vector<double> c;
    std::vector<Triplet> a;
    std::vector<double> b;
    std::vector<Block> blocks;

    int num_vars() const {
        int n = 0;
        for (const auto& blk : blocks) n += blk.scalar_count();
        return n;
    }
    int num_rows() const { return static_cast<int>(b.size()); }
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

std::string to_string(SolveStatus s);

struct Residuals {
    double primal = 0.0, dual = 0.0, gap = 0.0;
};

struct ConicSolution {
    SolveStatus status = SolveStatus::NumericalFailure;
    double primal_value = 0.0, dual_value = 0.0;
    std::vector<double> x;  // primal point
    std::vector<double> y;  // equality multipliers (dual: max b'y s.t. c - A'y in K*)
    std::vector<double> s;  // dual slack c - A'y per scalarized variable
    Residuals residuals;
    int iterations = 0;
};

ConicSolution solve(const ConicProblem& p, double tol = 1e-7);

// svec packing helpers for Psd blocks.
inline int svec_dim(int n) { return n * (n + 1) / 2; }
// index of entry (p, q), p >= q, in the svec layout
inline int svec_index(int n, int p, int q) { return q * n - q * (q - 1) / 2 + (p - q); }
std::vector<double> svec_pack(const std::vector<double>& sym, int n);    // row-major n*n
std::vector<double> svec_unpack(const std::vector<double>& v, int n);    // to row-major

// [[Re h, -Im h], [Im h, Re h]] as a real symmetric 2n x 2n matrix; the
// spectrum of the embedding is the spectrum of h with doubled multiplicity.
linalg::CMatrix embed_hermitian(const linalg::CMatrix& h);

// Text dump in a sparse-triplet format for external cross-checking. Layout:
//   line 1:  "conicproblem-v1 <sense> <nvars> <nrows> <nblocks>"
//   then:    "block <id> <psd|nonneg|free> <n>"          per block
//   then:    "c <col> <value>"                            nonzero objective
//   then:    "a <row> <col> <value>"                      constraint triplets
//   then:    "b <row> <value>"                            nonzero rhs
void dump_problem(const ConicProblem& p, const std::string& path);

// ----------------------------------------------------------------------------
// Internal standard form consumed by the interior-point core:
//
//   minimize c'x   s.t.  A x = b,   G x + s = h,   s in K,
//
// with x free and K a product of Nonneg/Psd (svec) blocks. The public
// ConicProblem is reduced to this form (cone variables become slacks through
// an identity G block; Free variables are eliminated by presolve).
// ----------------------------------------------------------------------------

struct SparseRow {
    std::vector<std::pair<int, double>> e;
    void add(int col, double val) {
        if (val != 0.0) e.emplace_back(col, val);
    }
};

struct ConeSpec {
    BlockKind kind;  // Psd or Nonneg
    int n;
    int scalar_count() const { return kind == BlockKind::Psd ? n * (n + 1) / 2 : n; }
};

struct GForm {
    int nvar = 0;
    bool maximize = false;
    std::vector<double> c;
    std::vector<SparseRow> arows;
    std::vector<double> b;
    std::vector<SparseRow> grows;
    std::vector<double> h;
    std::vector<ConeSpec> cones;
    double obj_offset = 0.0;
};

struct GSolution {
    SolveStatus status = SolveStatus::NumericalFailure;
    double primal_value = 0.0, dual_value = 0.0;
    std::vector<double> x;
    std::vector<double> y;  // multipliers of A x = b
    std::vector<double> z;  // cone multipliers of G x + s = h
    std::vector<double> s;  // cone slacks
    Residuals residuals;
    int iterations = 0;
};

struct SolveOptions {
    double tol = 1e-7;
    int max_iters = 200;
    // Optional per-iteration probe (used by tests to inspect the path).
    void (*iter_probe)(void* ctx, int iter, double pcost, double dcost, double gap) = nullptr;
    void* probe_ctx = nullptr;
};

GSolution solve_gform(const GForm& f, const SolveOptions& opts = {});

}  // namespace chancomp::conic
