// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.

#include "chancomp/classical.hpp"

#include <cmath>
#include <stdexcept>

namespace chancomp::classical {

using conic::BlockKind;
using conic::ConicProblem;
using conic::ConicSolution;
using conic::SolveStatus;

void Experiment::validate(double tol) const {
    if (distributions.empty()) throw std::invalid_argument("Experiment: empty");
    const size_t m0 = distributions[0].size();
    for (const auto& d : distributions) {
        if (d.size() != m0) throw std::invalid_argument("Experiment: ragged distributions");
        double s = 0.0;
        for (double v : d) {
            if (v < -tol) throw std::invalid_argument("Experiment: negative probability");
            s += v;
        }
        if (std::abs(s - 1.0) > 1e-12 + tol)
            throw std::invalid_argument("Experiment: distribution does not sum to one");
    }
}

LecamResult lecam_deficiency(const Experiment& p, const Experiment& q, double tol) {
    p.validate();
    q.validate();
    if (p.k() != q.k())
        throw std::invalid_argument("lecam_deficiency: experiments must have equal size");
    const int k = p.k(), mp = p.m(), mq = q.m();

    // variable layout (one nonnegative block):
    //   T (mq*mp, column-major by source point), u^i, v^i (mq each), t, s_i
    const int off_t_mat = 0;
    const int off_u = off_t_mat + mq * mp;
    const int off_v = off_u + k * mq;
    const int off_t = off_v + k * mq;
    const int off_s = off_t + 1;
    const int nvar = off_s + k;

    ConicProblem prob;
    prob.blocks = {{BlockKind::Nonneg, nvar}};
    prob.c.assign(nvar, 0.0);
    prob.c[off_t] = 1.0;

    int row = 0;
    // columns of T are distributions
    for (int j = 0; j < mp; ++j) {
        for (int x = 0; x < mq; ++x) prob.a.push_back({row, off_t_mat + j * mq + x, 1.0});
        prob.b.push_back(1.0);
        ++row;
    }
    // T p^i - q^i = u^i - v^i
    for (int i = 0; i < k; ++i)
        for (int x = 0; x < mq; ++x) {
            for (int j = 0; j < mp; ++j) {
                const double c = p.distributions[i][j];
                if (c != 0.0) prob.a.push_back({row, off_t_mat + j * mq + x, c});
            }
            prob.a.push_back({row, off_u + i * mq + x, -1.0});
            prob.a.push_back({row, off_v + i * mq + x, 1.0});
            prob.b.push_back(q.distributions[i][x]);
            ++row;
        }
    // sum(u^i + v^i) + s_i = t
    for (int i = 0; i < k; ++i) {
        for (int x = 0; x < mq; ++x) {
            prob.a.push_back({row, off_u + i * mq + x, 1.0});
            prob.a.push_back({row, off_v + i * mq + x, 1.0});
        }
        prob.a.push_back({row, off_s + i, 1.0});
        prob.a.push_back({row, off_t, -1.0});
        prob.b.push_back(0.0);
        ++row;
    }

    ConicSolution sol = conic::solve(prob, tol);
    if (sol.status != SolveStatus::Optimal)
        throw std::runtime_error("lecam_deficiency: solver failure (" +
                                 conic::to_string(sol.status) + ")");
    LecamResult res;
    res.delta = sol.primal_value;
    res.t.assign(mq, std::vector<double>(mp, 0.0));
    for (int j = 0; j < mp; ++j)
        for (int x = 0; x < mq; ++x) res.t[x][j] = sol.x[off_t_mat + j * mq + x];
    res.residuals = sol.residuals;
    res.iterations = sol.iterations;
    return res;
}

double lecam_distance(const Experiment& p, const Experiment& q, double tol) {
    return std::max(lecam_deficiency(p, q, tol).delta, lecam_deficiency(q, p, tol).delta);
}

namespace {

// sup over column-stochastic decision rules Theta (D x m) of
// sum_{s,d} Theta[d][s] w[d][s]
double best_gain(const std::vector<std::vector<double>>& w, int d_count, int m, double tol) {
    ConicProblem prob;
    prob.maximize = true;
    prob.blocks = {{BlockKind::Nonneg, d_count * m}};
    prob.c.assign(static_cast<size_t>(d_count) * m, 0.0);
    for (int d = 0; d < d_count; ++d)
        for (int s = 0; s < m; ++s) prob.c[s * d_count + d] = w[d][s];
    for (int s = 0; s < m; ++s) {
        for (int d = 0; d < d_count; ++d) prob.a.push_back({s, s * d_count + d, 1.0});
        prob.b.push_back(1.0);
    }
    ConicSolution sol = conic::solve(prob, tol);
    if (sol.status != SolveStatus::Optimal)
        throw std::runtime_error("gain_check: solver failure");
    return sol.primal_value;
}

}  // namespace

GainReport gain_check(const Experiment& p, const Experiment& q, double epsilon,
                      const std::vector<std::vector<double>>& gain,
                      const std::vector<double>& prior, double tol) {
    p.validate();
    q.validate();
    if (p.k() != q.k())
        throw std::invalid_argument("gain_check: experiments must have equal size");
    const int k = p.k();
    if (static_cast<int>(gain.size()) != k || static_cast<int>(prior.size()) != k)
        throw std::invalid_argument("gain_check: gain/prior shape mismatch");
    const int d_count = static_cast<int>(gain[0].size());
    for (const auto& row : gain) {
        if (static_cast<int>(row.size()) != d_count)
            throw std::invalid_argument("gain_check: ragged gain");
        for (double v : row)
            if (v < 0.0) throw std::invalid_argument("gain_check: gains must be nonnegative");
    }

    auto weights = [&](const Experiment& e) {
        std::vector<std::vector<double>> w(d_count, std::vector<double>(e.m(), 0.0));
        for (int d = 0; d < d_count; ++d)
            for (int s = 0; s < e.m(); ++s)
                for (int i = 0; i < k; ++i)
                    w[d][s] += prior[i] * e.distributions[i][s] * gain[i][d];
        return w;
    };

    GainReport rep;
    rep.sup_p = best_gain(weights(p), d_count, p.m(), tol);
    rep.sup_q = best_gain(weights(q), d_count, q.m(), tol);
    double norm = 0.0;
    for (int i = 0; i < k; ++i) {
        double mx = 0.0;
        for (int d = 0; d < d_count; ++d) mx = std::max(mx, gain[i][d]);
        norm += prior[i] * mx;
    }
    rep.allowance = 0.5 * epsilon * norm;
    rep.slack = rep.sup_p + rep.allowance - rep.sup_q;
    rep.satisfied = rep.slack >= -1e-8 * (1.0 + std::abs(rep.sup_p));
    return rep;
}

}  // namespace chancomp::classical
