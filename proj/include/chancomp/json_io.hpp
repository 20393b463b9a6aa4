// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.

#pragma once

#include <string>

#include "chancomp/channels.hpp"
#include "chancomp/classical.hpp"
#include "chancomp/games.hpp"

namespace chancomp::io {

// File schemas. Complex matrices are row-major arrays of [re, im] pairs;
// dimension lists are arrays of [label, dim] pairs.
//   choimap-v1:    {"schema", "in_dims", "out_dims", "choi"}
//   state-v1:      {"schema", "dims", "mat"}
//   povm-v1:       {"schema", "dims", "effects"}
//   ensemble-v1:   {"schema", "dims", "items": [{"prob", "state"}]}
//   experiment-v1: {"schema", "distributions"}
//   measset-v1:    {"schema", "povms": [povm-v1 objects]}

channels::ChoiMap load_choimap(const std::string& path);
channels::Labeled load_state(const std::string& path);
games::Povm load_povm(const std::string& path);
games::Ensemble load_ensemble(const std::string& path);
games::MeasurementSet load_measset(const std::string& path);
classical::Experiment load_experiment(const std::string& path);

void save_choimap(const std::string& path, const channels::ChoiMap& phi);
void save_state(const std::string& path, const channels::Labeled& state);
void save_povm(const std::string& path, const games::Povm& povm);
void save_ensemble(const std::string& path, const games::Ensemble& ensemble);
void save_measset(const std::string& path, const games::MeasurementSet& ms);
void save_experiment(const std::string& path, const classical::Experiment& e);

// canonical float rendering (17 significant digits, lossless round trip)
std::string format_double(double v);
std::string render_matrix(const linalg::CMatrix& m);
std::string render_dims(const linalg::SystemDims& d);

}  // namespace chancomp::io
