// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.

#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace chancomp::linalg {

using cplx = std::complex<double>;

// Dense complex matrix, row-major. Values are immutable by convention after
// construction; all operations return fresh matrices.
class CMatrix {
public:
    CMatrix() : rows_(0), cols_(0) {}
    CMatrix(int rows, int cols)
        : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {
        if (rows < 0 || cols < 0) throw std::invalid_argument("CMatrix: negative shape");
    }

    static CMatrix identity(int n);
    static CMatrix zero(int rows, int cols) { return CMatrix(rows, cols); }
    static CMatrix diag(const std::vector<cplx>& d);
    // Column vector from entries.
    static CMatrix col(const std::vector<cplx>& v);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    size_t size() const { return a_.size(); }

    cplx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    const cplx& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    const std::vector<cplx>& data() const { return a_; }
    std::vector<cplx>& data() { return a_; }

    CMatrix operator+(const CMatrix& o) const;
    CMatrix operator-(const CMatrix& o) const;
    CMatrix operator-() const;
    CMatrix operator*(const CMatrix& o) const;  // matrix product
    CMatrix operator*(cplx s) const;
    CMatrix operator*(double s) const { return (*this) * cplx(s, 0.0); }
    CMatrix& operator+=(const CMatrix& o);
    CMatrix& operator-=(const CMatrix& o);

    CMatrix adjoint() const;
    CMatrix transpose() const;
    CMatrix conjugate() const;

    cplx trace() const;
    double frob_norm() const;
    double max_abs() const;

    bool is_hermitian(double tol = 1e-10) const;
    // x >= -tol * max(1, op-norm scale), checked on the symmetrized part.
    bool is_psd(double tol = 1e-9) const;

private:
    int rows_, cols_;
    std::vector<cplx> a_;
};

inline CMatrix operator*(cplx s, const CMatrix& m) { return m * s; }
inline CMatrix operator*(double s, const CMatrix& m) { return m * cplx(s, 0.0); }

// Ordered list of labeled tensor factors. The factor order is the storage
// order of all matrices annotated with this object; reorderings must go
// through permute_systems.
struct SystemDims {
    std::vector<std::pair<std::string, int>> sys;

    SystemDims() = default;
    SystemDims(std::initializer_list<std::pair<std::string, int>> init) : sys(init) { validate(); }
    explicit SystemDims(std::vector<std::pair<std::string, int>> s) : sys(std::move(s)) { validate(); }

    static SystemDims single(const std::string& label, int dim) {
        return SystemDims({{label, dim}});
    }

    int total_dim() const;
    size_t count() const { return sys.size(); }
    bool has(const std::string& label) const;
    int index_of(const std::string& label) const;  // throws on unknown label
    int dim_of(const std::string& label) const;
    std::vector<std::string> labels() const;

    SystemDims without(const std::vector<std::string>& labels) const;
    SystemDims concat(const SystemDims& other) const;
    SystemDims reordered(const std::vector<std::string>& order) const;

    bool operator==(const SystemDims& o) const { return sys == o.sys; }

    void validate() const;  // throws on duplicate labels / nonpositive dims
};

// --- tensor-structure operations -------------------------------------------

CMatrix kron(const CMatrix& a, const CMatrix& b);

CMatrix partial_trace(const CMatrix& x, const SystemDims& dims,
                      const std::vector<std::string>& traced);

CMatrix partial_transpose(const CMatrix& x, const SystemDims& dims,
                          const std::vector<std::string>& flipped);

// Conjugation by the permutation unitary taking the factor order of `dims`
// to `new_order` (a permutation of the labels).
CMatrix permute_systems(const CMatrix& x, const SystemDims& dims,
                        const std::vector<std::string>& new_order);

// |W>> = sum_i W|i> (x) |i>, as a column vector on out (x) in.
CMatrix vec_doubleket(const CMatrix& w);
// Inverse of vec_doubleket for a (rows*cols)-entry column vector.
CMatrix unvec_doubleket(const CMatrix& v, int rows, int cols);

// --- spectral routines ------------------------------------------------------

struct EigResult {
    std::vector<double> eigenvalues;  // ascending
    CMatrix eigenvectors;             // columns, orthonormal
};

// Hermitian eigendecomposition (Householder tridiagonalization followed by
// implicit QL with shifts). Input is symmetrized as (x + x*)/2 first; throws
// if the anti-Hermitian part exceeds the tolerance.
EigResult herm_eig(const CMatrix& x, double herm_tol = 1e-10);

// f applied to the spectrum of a Hermitian PSD matrix; eigenvalues below
// support_tol * max(1, lambda_max) are treated as exactly zero and mapped
// through f_zero.
CMatrix herm_spectral_fn(const CMatrix& x, double (*f)(double), double f_zero,
                         double support_tol = 1e-12);
CMatrix herm_sqrt(const CMatrix& x);
CMatrix herm_inv_sqrt_pinv(const CMatrix& x, double rank_tol = 1e-9);

// --- norms and distances ----------------------------------------------------

double trace_norm(const CMatrix& x);
double op_norm(const CMatrix& x);
// F(rho, sigma) = || rho^{1/2} sigma^{1/2} ||_1 on PSD unit-trace inputs.
double fidelity(const CMatrix& rho, const CMatrix& sigma);
// sqrt(1 - F^2)
double purified_distance(const CMatrix& rho, const CMatrix& sigma);

}  // namespace chancomp::linalg
