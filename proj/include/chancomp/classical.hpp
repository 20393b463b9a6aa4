// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.

#pragma once

#include <vector>

#include "chancomp/conic.hpp"

namespace chancomp::classical {

// Finite classical statistical experiment: k distributions over m points.
struct Experiment {
    std::vector<std::vector<double>> distributions;

    void validate(double tol = 1e-12) const;
    int k() const { return static_cast<int>(distributions.size()); }
    int m() const { return distributions.empty() ? 0 : static_cast<int>(distributions[0].size()); }
};

struct LecamResult {
    double delta = 0.0;
    std::vector<std::vector<double>> t;  // column-stochastic randomization, m_q x m_p
    conic::Residuals residuals;
    int iterations = 0;
};

// min t  s.t.  T column-stochastic,  || T p^i - q^i ||_1 <= t for all i
LecamResult lecam_deficiency(const Experiment& p, const Experiment& q, double tol = 1e-8);
double lecam_distance(const Experiment& p, const Experiment& q, double tol = 1e-8);

// Randomization-criterion check: both sides of
//   sup_T G(q...) <= sup_T G(p...) + (eps/2) sum_i prior_i max_d gain(i,d)
// computed by LP over decision rules.
struct GainReport {
    double sup_p = 0.0, sup_q = 0.0;
    double allowance = 0.0;  // (eps/2) sum_i prior_i max_d gain(i,d)
    double slack = 0.0;      // sup_p + allowance - sup_q
    bool satisfied = false;
};
GainReport gain_check(const Experiment& p, const Experiment& q, double epsilon,
                      const std::vector<std::vector<double>>& gain,
                      const std::vector<double>& prior, double tol = 1e-8);

}  // namespace chancomp::classical
