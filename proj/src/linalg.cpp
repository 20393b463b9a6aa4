// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.

#include "chancomp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace chancomp::linalg {

namespace {

void check_same_shape(const CMatrix& a, const CMatrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

void check_square(const CMatrix& a, const char* what) {
    if (a.rows() != a.cols())
        throw std::invalid_argument(std::string(what) + ": matrix not square");
}

}  // namespace

CMatrix CMatrix::identity(int n) {
    CMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMatrix CMatrix::diag(const std::vector<cplx>& d) {
    CMatrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
    return m;
}

CMatrix CMatrix::col(const std::vector<cplx>& v) {
    CMatrix m(static_cast<int>(v.size()), 1);
    for (size_t i = 0; i < v.size(); ++i) m(static_cast<int>(i), 0) = v[i];
    return m;
}

CMatrix CMatrix::operator+(const CMatrix& o) const {
    check_same_shape(*this, o, "operator+");
    CMatrix r(rows_, cols_);
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] + o.a_[i];
    return r;
}

CMatrix CMatrix::operator-(const CMatrix& o) const {
    check_same_shape(*this, o, "operator-");
    CMatrix r(rows_, cols_);
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] - o.a_[i];
    return r;
}

CMatrix CMatrix::operator-() const {
    CMatrix r(rows_, cols_);
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = -a_[i];
    return r;
}

CMatrix& CMatrix::operator+=(const CMatrix& o) {
    check_same_shape(*this, o, "operator+=");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& o) {
    check_same_shape(*this, o, "operator-=");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
}

CMatrix CMatrix::operator*(const CMatrix& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("operator*: inner dimension mismatch");
    CMatrix r(rows_, o.cols_);
    for (int i = 0; i < rows_; ++i) {
        for (int k = 0; k < cols_; ++k) {
            const cplx aik = (*this)(i, k);
            if (aik == cplx(0.0, 0.0)) continue;
            const cplx* brow = &o.a_[static_cast<size_t>(k) * o.cols_];
            cplx* rrow = &r.a_[static_cast<size_t>(i) * o.cols_];
            for (int j = 0; j < o.cols_; ++j) rrow[j] += aik * brow[j];
        }
    }
    return r;
}

CMatrix CMatrix::operator*(cplx s) const {
    CMatrix r(rows_, cols_);
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = a_[i] * s;
    return r;
}

CMatrix CMatrix::adjoint() const {
    CMatrix r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
}

CMatrix CMatrix::transpose() const {
    CMatrix r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
}

CMatrix CMatrix::conjugate() const {
    CMatrix r(rows_, cols_);
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = std::conj(a_[i]);
    return r;
}

cplx CMatrix::trace() const {
    check_square(*this, "trace");
    cplx t = 0.0;
    for (int i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
}

double CMatrix::frob_norm() const {
    double s = 0.0;
    for (const auto& v : a_) s += std::norm(v);
    return std::sqrt(s);
}

double CMatrix::max_abs() const {
    double s = 0.0;
    for (const auto& v : a_) s = std::max(s, std::abs(v));
    return s;
}

bool CMatrix::is_hermitian(double tol) const {
    if (rows_ != cols_) return false;
    const double scale = std::max(1.0, max_abs());
    for (int i = 0; i < rows_; ++i)
        for (int j = i; j < cols_; ++j)
            if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol * scale) return false;
    return true;
}

bool CMatrix::is_psd(double tol) const {
    if (rows_ != cols_) return false;
    EigResult e = herm_eig(*this, 1e-6);
    const double scale = std::max(1.0, e.eigenvalues.empty() ? 0.0 : std::abs(e.eigenvalues.back()));
    return e.eigenvalues.empty() || e.eigenvalues.front() >= -tol * scale;
}

// --- SystemDims --------------------------------------------------------------

void SystemDims::validate() const {
    for (size_t i = 0; i < sys.size(); ++i) {
        if (sys[i].second <= 0) throw std::invalid_argument("SystemDims: nonpositive dimension");
        for (size_t j = i + 1; j < sys.size(); ++j)
            if (sys[i].first == sys[j].first)
                throw std::invalid_argument("SystemDims: duplicate label '" + sys[i].first + "'");
    }
}

int SystemDims::total_dim() const {
    int d = 1;
    for (const auto& [l, n] : sys) d *= n;
    return d;
}

bool SystemDims::has(const std::string& label) const {
    for (const auto& [l, n] : sys)
        if (l == label) return true;
    return false;
}

int SystemDims::index_of(const std::string& label) const {
    for (size_t i = 0; i < sys.size(); ++i)
        if (sys[i].first == label) return static_cast<int>(i);
    throw std::invalid_argument("SystemDims: unknown label '" + label + "'");
}

int SystemDims::dim_of(const std::string& label) const { return sys[index_of(label)].second; }

std::vector<std::string> SystemDims::labels() const {
    std::vector<std::string> r;
    r.reserve(sys.size());
    for (const auto& [l, n] : sys) r.push_back(l);
    return r;
}

SystemDims SystemDims::without(const std::vector<std::string>& labels) const {
    for (const auto& l : labels) (void)index_of(l);
    SystemDims r;
    for (const auto& s : sys)
        if (std::find(labels.begin(), labels.end(), s.first) == labels.end()) r.sys.push_back(s);
    return r;
}

SystemDims SystemDims::concat(const SystemDims& other) const {
    SystemDims r;
    r.sys = sys;
    r.sys.insert(r.sys.end(), other.sys.begin(), other.sys.end());
    r.validate();
    return r;
}

SystemDims SystemDims::reordered(const std::vector<std::string>& order) const {
    if (order.size() != sys.size())
        throw std::invalid_argument("SystemDims::reordered: wrong number of labels");
    SystemDims r;
    for (const auto& l : order) r.sys.push_back(sys[index_of(l)]);
    r.validate();
    return r;
}

// --- tensor-structure operations ---------------------------------------------

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            const cplx aij = a(i, j);
            if (aij == cplx(0.0, 0.0)) continue;
            for (int p = 0; p < b.rows(); ++p)
                for (int q = 0; q < b.cols(); ++q)
                    r(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
        }
    return r;
}

namespace {

// For every full linear index, the additive contribution of a chosen subset
// of factors (with the original strides). Index arithmetic for the partial
// operations reduces to sums of these contributions.
struct FactorSplit {
    std::vector<int> in_part;    // contribution of factors in the subset
    std::vector<int> out_part;   // contribution of the complement
    std::vector<int> in_packed;  // subset digits repacked with compact strides
    std::vector<int> out_packed;
    int in_dim = 1, out_dim = 1;
};

FactorSplit split_factors(const SystemDims& dims, const std::vector<std::string>& subset) {
    for (const auto& l : subset) (void)dims.index_of(l);
    const int k = static_cast<int>(dims.sys.size());
    std::vector<bool> in_set(k, false);
    for (const auto& l : subset) in_set[dims.index_of(l)] = true;

    std::vector<int> stride(k, 1);
    for (int f = k - 2; f >= 0; --f) stride[f] = stride[f + 1] * dims.sys[f + 1].second;

    FactorSplit fs;
    std::vector<int> in_stride(k, 0), out_stride(k, 0);
    int sin = 1, sout = 1;
    for (int f = k - 1; f >= 0; --f) {
        if (in_set[f]) {
            in_stride[f] = sin;
            sin *= dims.sys[f].second;
        } else {
            out_stride[f] = sout;
            sout *= dims.sys[f].second;
        }
    }
    fs.in_dim = sin;
    fs.out_dim = sout;

    const int total = dims.total_dim();
    fs.in_part.assign(total, 0);
    fs.out_part.assign(total, 0);
    fs.in_packed.assign(total, 0);
    fs.out_packed.assign(total, 0);
    for (int idx = 0; idx < total; ++idx) {
        int rest = idx;
        for (int f = 0; f < k; ++f) {
            const int digit = rest / stride[f];
            rest -= digit * stride[f];
            if (in_set[f]) {
                fs.in_part[idx] += digit * stride[f];
                fs.in_packed[idx] += digit * in_stride[f];
            } else {
                fs.out_part[idx] += digit * stride[f];
                fs.out_packed[idx] += digit * out_stride[f];
            }
        }
    }
    return fs;
}

}  // namespace

CMatrix partial_trace(const CMatrix& x, const SystemDims& dims,
                      const std::vector<std::string>& traced) {
    check_square(x, "partial_trace");
    if (x.rows() != dims.total_dim())
        throw std::invalid_argument("partial_trace: dims inconsistent with matrix");
    FactorSplit fs = split_factors(dims, traced);
    CMatrix r(fs.out_dim, fs.out_dim);
    const int total = x.rows();
    for (int i = 0; i < total; ++i)
        for (int j = 0; j < total; ++j)
            if (fs.in_part[i] == fs.in_part[j])
                r(fs.out_packed[i], fs.out_packed[j]) += x(i, j);
    return r;
}

CMatrix partial_transpose(const CMatrix& x, const SystemDims& dims,
                          const std::vector<std::string>& flipped) {
    check_square(x, "partial_transpose");
    if (x.rows() != dims.total_dim())
        throw std::invalid_argument("partial_transpose: dims inconsistent with matrix");
    FactorSplit fs = split_factors(dims, flipped);
    CMatrix r(x.rows(), x.cols());
    const int total = x.rows();
    for (int i = 0; i < total; ++i)
        for (int j = 0; j < total; ++j)
            r(fs.out_part[i] + fs.in_part[j], fs.out_part[j] + fs.in_part[i]) = x(i, j);
    return r;
}

CMatrix permute_systems(const CMatrix& x, const SystemDims& dims,
                        const std::vector<std::string>& new_order) {
    check_square(x, "permute_systems");
    if (x.rows() != dims.total_dim())
        throw std::invalid_argument("permute_systems: dims inconsistent with matrix");
    SystemDims nd = dims.reordered(new_order);

    const int k = static_cast<int>(dims.sys.size());
    std::vector<int> stride(k, 1), new_stride(k, 1);
    for (int f = k - 2; f >= 0; --f) stride[f] = stride[f + 1] * dims.sys[f + 1].second;
    for (int f = k - 2; f >= 0; --f) new_stride[f] = new_stride[f + 1] * nd.sys[f + 1].second;
    // new position of old factor f
    std::vector<int> pos(k);
    for (int f = 0; f < k; ++f) pos[f] = nd.index_of(dims.sys[f].first);

    const int total = dims.total_dim();
    std::vector<int> map(total, 0);
    for (int idx = 0; idx < total; ++idx) {
        int rest = idx;
        for (int f = 0; f < k; ++f) {
            const int digit = rest / stride[f];
            rest -= digit * stride[f];
            map[idx] += digit * new_stride[pos[f]];
        }
    }
    CMatrix r(total, total);
    for (int i = 0; i < total; ++i)
        for (int j = 0; j < total; ++j) r(map[i], map[j]) = x(i, j);
    return r;
}

CMatrix vec_doubleket(const CMatrix& w) {
    check_square(w, "vec_doubleket");
    const int n = w.rows();
    CMatrix v(n * n, 1);
    // sum_i W|i> (x) |i>: component (a, i) = W_{a i}
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i) v(a * n + i, 0) = w(a, i);
    return v;
}

CMatrix unvec_doubleket(const CMatrix& v, int rows, int cols) {
    if (v.cols() != 1 || v.rows() != rows * cols)
        throw std::invalid_argument("unvec_doubleket: bad shape");
    CMatrix w(rows, cols);
    for (int a = 0; a < rows; ++a)
        for (int i = 0; i < cols; ++i) w(a, i) = v(a * cols + i, 0);
    return w;
}

// --- Hermitian eigendecomposition ---------------------------------------------

EigResult herm_eig(const CMatrix& x, double herm_tol) {
    check_square(x, "herm_eig");
    const int n = x.rows();
    {
        const double scale = std::max(1.0, x.max_abs());
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j)
                if (std::abs(x(i, j) - std::conj(x(j, i))) > herm_tol * scale)
                    throw std::invalid_argument("herm_eig: input not Hermitian within tolerance");
    }
    CMatrix a = (x + x.adjoint()) * 0.5;
    CMatrix q = CMatrix::identity(n);
    if (n == 0) return {{}, q};
    if (n == 1) return {{a(0, 0).real()}, CMatrix::identity(1)};

    // Householder reduction to Hermitian tridiagonal form, accumulating q.
    for (int k = 0; k + 2 < n; ++k) {
        double sigma2 = 0.0;
        for (int j = k + 1; j < n; ++j) sigma2 += std::norm(a(j, k));
        const double sigma = std::sqrt(sigma2);
        if (sigma <= 0.0) continue;
        const cplx alpha = a(k + 1, k);
        const double aa = std::abs(alpha);
        const cplx phase = (aa > 0.0) ? alpha / aa : cplx(1.0, 0.0);
        // v = x + phase*sigma*e_{k+1}
        std::vector<cplx> v(n, 0.0);
        for (int j = k + 1; j < n; ++j) v[j] = a(j, k);
        v[k + 1] += phase * sigma;
        double vnorm2 = 0.0;
        for (int j = k + 1; j < n; ++j) vnorm2 += std::norm(v[j]);
        if (vnorm2 <= 0.0) continue;
        const double tau = 2.0 / vnorm2;

        // p = tau * A v over the trailing block (rows/cols k+1..n-1 plus column k)
        std::vector<cplx> p(n, 0.0);
        for (int i = k; i < n; ++i) {
            cplx s = 0.0;
            for (int j = k + 1; j < n; ++j) s += a(i, j) * v[j];
            p[i] = tau * s;
        }
        cplx vtp = 0.0;
        for (int j = k + 1; j < n; ++j) vtp += std::conj(v[j]) * p[j];
        const cplx kappa = 0.5 * tau * vtp;
        std::vector<cplx> w(n, 0.0);
        for (int i = k; i < n; ++i) w[i] = p[i] - kappa * v[i];
        // A <- A - v w† - w v†  (v supported on k+1..n-1; also fixes row/col k)
        for (int i = k; i < n; ++i) {
            const cplx vi = (i >= k + 1) ? v[i] : cplx(0.0, 0.0);
            for (int j = k; j < n; ++j) {
                const cplx vj = (j >= k + 1) ? v[j] : cplx(0.0, 0.0);
                a(i, j) -= vi * std::conj(w[j]) + w[i] * std::conj(vj);
            }
        }
        // q <- q (I - tau v v†)
        for (int i = 0; i < n; ++i) {
            cplx qv = 0.0;
            for (int j = k + 1; j < n; ++j) qv += q(i, j) * v[j];
            qv *= tau;
            for (int j = k + 1; j < n; ++j) q(i, j) -= qv * std::conj(v[j]);
        }
    }

    // Extract tridiagonal data; rotate phases so the subdiagonal is real.
    std::vector<double> d(n), e(n, 0.0);
    for (int i = 0; i < n; ++i) d[i] = a(i, i).real();
    cplx ph = 1.0;
    for (int k = 0; k + 1 < n; ++k) {
        const cplx sub = a(k + 1, k);
        const double m = std::abs(sub);
        e[k] = m;
        ph *= (m > 0.0) ? sub / m : cplx(1.0, 0.0);
        for (int i = 0; i < n; ++i) q(i, k + 1) *= ph;
    }

    // Implicit QL with Wilkinson shifts on the real tridiagonal (d, e).
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
                if (iter++ == 100) throw std::runtime_error("herm_eig: QL failed to converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (int row = 0; row < n; ++row) {
                        const cplx qf = q(row, i + 1);
                        q(row, i + 1) = s * q(row, i) + c * qf;
                        q(row, i) = c * q(row, i) - s * qf;
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }

    // Ascending sort with a deterministic permutation.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return d[i] < d[j]; });
    EigResult res;
    res.eigenvalues.resize(n);
    res.eigenvectors = CMatrix(n, n);
    for (int c = 0; c < n; ++c) {
        res.eigenvalues[c] = d[order[c]];
        for (int r2 = 0; r2 < n; ++r2) res.eigenvectors(r2, c) = q(r2, order[c]);
    }
    return res;
}

CMatrix herm_spectral_fn(const CMatrix& x, double (*f)(double), double f_zero,
                         double support_tol) {
    EigResult e = herm_eig(x);
    const int n = x.rows();
    const double lmax = e.eigenvalues.empty() ? 0.0 : std::abs(e.eigenvalues.back());
    const double cut = support_tol * std::max(1.0, lmax);
    CMatrix r(n, n);
    for (int k = 0; k < n; ++k) {
        const double lam = e.eigenvalues[k];
        const double fv = (std::abs(lam) <= cut) ? f_zero : f(lam);
        if (fv == 0.0) continue;
        for (int i = 0; i < n; ++i) {
            const cplx vik = e.eigenvectors(i, k) * fv;
            for (int j = 0; j < n; ++j) r(i, j) += vik * std::conj(e.eigenvectors(j, k));
        }
    }
    return r;
}

namespace {
double sqrt_clamped(double v) { return v > 0.0 ? std::sqrt(v) : 0.0; }
double inv_sqrt(double v) { return 1.0 / std::sqrt(v); }
}  // namespace

CMatrix herm_sqrt(const CMatrix& x) { return herm_spectral_fn(x, &sqrt_clamped, 0.0); }

CMatrix herm_inv_sqrt_pinv(const CMatrix& x, double rank_tol) {
    return herm_spectral_fn(x, &inv_sqrt, 0.0, rank_tol);
}

// --- norms and distances -------------------------------------------------------

double trace_norm(const CMatrix& x) {
    if (x.rows() == x.cols() && x.is_hermitian(1e-10)) {
        EigResult e = herm_eig(x);
        double s = 0.0;
        for (double lam : e.eigenvalues) s += std::abs(lam);
        return s;
    }
    // General case: singular values from the Gram matrix.
    EigResult e = herm_eig(x.adjoint() * x, 1e-8);
    double s = 0.0;
    for (double lam : e.eigenvalues) s += sqrt_clamped(lam);
    return s;
}

double op_norm(const CMatrix& x) {
    if (x.rows() == x.cols() && x.is_hermitian(1e-10)) {
        EigResult e = herm_eig(x);
        double s = 0.0;
        for (double lam : e.eigenvalues) s = std::max(s, std::abs(lam));
        return s;
    }
    EigResult e = herm_eig(x.adjoint() * x, 1e-8);
    return e.eigenvalues.empty() ? 0.0 : sqrt_clamped(e.eigenvalues.back());
}

double fidelity(const CMatrix& rho, const CMatrix& sigma) {
    check_same_shape(rho, sigma, "fidelity");
    const double tol = 1e-7;
    if (!rho.is_hermitian(tol) || !sigma.is_hermitian(tol))
        throw std::invalid_argument("fidelity: inputs must be Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > 1e-6 || std::abs(sigma.trace().real() - 1.0) > 1e-6)
        throw std::invalid_argument("fidelity: inputs must have unit trace");
    CMatrix s = herm_sqrt(rho);
    CMatrix m = s * sigma * s;
    m = (m + m.adjoint()) * 0.5;
    EigResult e = herm_eig(m, 1e-7);
    double f = 0.0;
    for (double lam : e.eigenvalues) f += sqrt_clamped(lam);
    return std::min(f, 1.0 + 1e-12);
}

double purified_distance(const CMatrix& rho, const CMatrix& sigma) {
    const double f = fidelity(rho, sigma);
    return std::sqrt(std::max(0.0, 1.0 - f * f));
}

}  // namespace chancomp::linalg
