// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chancomp/channels.hpp"
#include "chancomp/games.hpp"
#include "chancomp/linalg.hpp"
#include "chancomp/norms.hpp"

namespace chancomp::convert {

using channels::ChoiMap;
using channels::SuperchannelChoi;
using games::MeasurementSet;
using linalg::CMatrix;
using linalg::SystemDims;

enum class Variant { Post, Pre, Partial };

// Certified conversion distance together with the achieving processing and
// the dual-optimal distinguisher.
struct ConversionResult {
    double delta = 0.0;
    ChoiMap optimizer_channel;                  // Post/Pre: the processing channel
    SuperchannelChoi optimizer_comb;            // Partial / measurement simulation
    std::vector<double> optimizer_condprob;     // measurement simulation p(x,i|y,j),
                                                // index ((x*k + i)*m + y)*l + j
    CMatrix witness;                            // dual-optimal rho, PSD, normalized so
    SystemDims witness_dims;                    // that its min-entropy norm is one
    double recheck = 0.0;                       // re-evaluated diamond distance of the optimizer
    conic::Residuals residuals;
    int iterations = 0;
};

// min over postprocessing channels of || Lambda o Phi1 - Phi2 ||_diamond.
// Inputs must share the input wires; output wires may differ.
ConversionResult delta_post(const ChoiMap& phi1, const ChoiMap& phi2, double tol = 1e-7);
// min over preprocessing channels of || Phi1 o Lambda - Phi2 ||_diamond.
ConversionResult delta_pre(const ChoiMap& phi1, const ChoiMap& phi2, double tol = 1e-7);
// min over 2-combs acting on the non-fixed wires of
// || (Theta (x) id_B)(Phi1) - Phi2 ||_diamond. `fixed_b` lists the B-wire
// labels (input and output) common to both channels; exactly one non-fixed
// input and output label per channel is supported.
ConversionResult delta_partial(const ChoiMap& phi1, const ChoiMap& phi2,
                               const std::vector<std::string>& fixed_b, double tol = 1e-7);
// epsilon-simulability distance of the POVM family nset by mset: joint program
// over classical superchannels p(x,i|y,j).
ConversionResult delta_meas_sim(const MeasurementSet& mset, const MeasurementSet& nset,
                                double tol = 1e-7);

double delta_symmetric(const ChoiMap& a, const ChoiMap& b, Variant v,
                       const std::vector<std::string>& fixed_b = {}, double tol = 1e-7);

// Sampled check of the min-entropy characterization: for states rho on the
// admissible wires,
//   ||rho * C_phi2||^F <= ||rho * C_phi1||^F + (eps/2) ||rho||_diamond-dual.
// Sample 0 is the conversion program's dual-optimal witness; a positive
// violation certifies delta > eps, absence of violations is evidence only.
struct RandChansReport {
    Variant variant = Variant::Post;
    double epsilon = 0.0;
    double delta = 0.0;  // the conversion distance computed along the way
    int n_samples = 0;
    double max_violation = 0.0;
    std::vector<games::ViolationSample> violations;
    std::vector<games::ViolationSample> worst;
};
RandChansReport verify_rand_chans(const ChoiMap& phi1, const ChoiMap& phi2, Variant v,
                                  const std::vector<std::string>& fixed_b, double epsilon,
                                  int n_samples, std::uint64_t seed, double tol = 1e-7,
                                  int jobs = 1);

// inf over states sigma with sigma_R = xi_R of
// || (Phi1 (x) id)(sigma) - (Phi2 (x) id)(xi) ||_1; xi lives on
// phi2's input wires plus the reference label r.
double pre_range_inner(const ChoiMap& phi1, const ChoiMap& phi2, const CMatrix& xi,
                       const SystemDims& xi_dims, const std::string& r_label,
                       double tol = 1e-7);

// m(x, y) = ||x - y||_1 + 2 p(x_R, y_R) on states sharing the labeled space.
double hausdorff_pre_metric(const CMatrix& x, const CMatrix& y, const SystemDims& dims,
                            const std::vector<std::string>& r_labels);

}  // namespace chancomp::convert
