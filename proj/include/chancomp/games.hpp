// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chancomp/channels.hpp"
#include "chancomp/linalg.hpp"

namespace chancomp::games {

using channels::ChoiMap;
using linalg::CMatrix;
using linalg::SystemDims;

// Prior-weighted state list.
struct Ensemble {
    struct Item {
        double prob;
        CMatrix state;
    };
    std::vector<Item> items;
    SystemDims dims;

    void validate(double tol = 1e-9) const;
    int size() const { return static_cast<int>(items.size()); }
    // quantum-classical flag state sum_i p_i rho_i (x) |i><i| on dims (x) flag
    CMatrix qc_state() const;
};

// Positive effects summing to the identity.
struct Povm {
    std::vector<CMatrix> effects;
    SystemDims dims;

    void validate(double tol = 1e-9) const;
    int outcomes() const { return static_cast<int>(effects.size()); }
};

// Finite family of POVMs on a common space with a common outcome count.
using MeasurementSet = std::vector<Povm>;
void validate_measurement_set(const MeasurementSet& ms, double tol = 1e-9);

// sum_i p_i Tr[rho_i M_i]
double psucc(const Ensemble& e, const Povm& m);
// SDP maximum over POVMs with one outcome per ensemble item.
double psucc_opt(const Ensemble& e, double tol = 1e-7);
// Best guess from a fixed measurement followed by classical post-processing:
// sum_j max_x p_x Tr[rho_x M_j] (argmax ties resolved toward the lowest item).
double psucc_q(const Ensemble& e, const Povm& m);

// Weyl-Heisenberg unitaries X^a Z^b, lexicographic in (a, b).
std::vector<CMatrix> pauli_group(int d);
// d^2 rank-one Bell effects (1/d)|U_x>><<U_x| on two d-dimensional factors.
Povm bell_measurement(int d, const std::string& l1 = "R", const std::string& l2 = "R'");
// the d_R^2 equiprobable states (id (x) transpose-conjugation_x)(rho)
Ensemble pauli_ensemble(const CMatrix& rho, const SystemDims& dims,
                        const std::string& r_label);

// measurement <-> channel correspondence on A (x) R
Povm meas_from_channel(const ChoiMap& beta);
ChoiMap channel_from_meas(const Povm& m, int d_r, const std::string& in = "A0",
                          const std::string& out = "A1");

// Bell-measurement guessing game reproducing the diamond distance of two
// channels with equal wires.
struct CoroPsucReport {
    double sdp_value = 0.0;   // (1/2)||Phi1 - Phi2||_diamond by SDP
    double game_value = 0.0;  // [P1 - P2]/P_opt with the Bell measurement
    double gap = 0.0;
};
CoroPsucReport verify_coro_psuc(const ChoiMap& phi1, const ChoiMap& phi2, double tol = 1e-7);

// Sampled check of the simulability success-probability inequality
//   max_y P^Q(E, N^y) <= max_i P^Q(E, M^i) + (eps/2) P_succ(E).
// The first samples are the effect ensembles of the target family (designed
// witnesses); the rest are seeded random ensembles. A positive violation
// certifies that N is not eps-simulable by M.
struct ViolationSample {
    int sample = 0;
    std::uint64_t seed = 0;
    double lhs = 0.0, rhs = 0.0, gap = 0.0;
};
struct ScSimulReport {
    double epsilon = 0.0;
    int n_samples = 0;
    double max_violation = 0.0;  // most positive lhs - rhs (can be negative)
    std::vector<ViolationSample> violations;  // strictly positive gaps
    std::vector<ViolationSample> worst;       // three largest gaps for replay
};
ScSimulReport verify_sc_simul(const MeasurementSet& mset, const MeasurementSet& nset,
                              double epsilon, int n_ensembles, std::uint64_t seed,
                              double tol = 1e-7, int jobs = 1);

}  // namespace chancomp::games
