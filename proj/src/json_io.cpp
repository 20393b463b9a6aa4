// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.

#include "chancomp/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace chancomp::io {

using json = nlohmann::json;
using linalg::CMatrix;
using linalg::cplx;
using linalg::SystemDims;

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::invalid_argument("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

void require_schema(const json& j, const std::string& name, const std::string& path) {
    if (!j.is_object() || !j.contains("schema") || j["schema"] != name)
        throw std::invalid_argument(path + ": expected schema " + name);
}

SystemDims parse_dims(const json& j, const std::string& what) {
    if (!j.is_array()) throw std::invalid_argument(what + ": dims must be an array");
    SystemDims d;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() ||
            !e[1].is_number_integer())
            throw std::invalid_argument(what + ": dims entries must be [label, dim]");
        d.sys.push_back({e[0].get<std::string>(), e[1].get<int>()});
    }
    d.validate();
    return d;
}

CMatrix parse_matrix(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty())
        throw std::invalid_argument(what + ": matrix must be a nonempty array of rows");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j[0].size());
    CMatrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(j[r].size()) != cols)
            throw std::invalid_argument(what + ": ragged matrix");
        for (int c = 0; c < cols; ++c) {
            const auto& e = j[r][c];
            if (!e.is_array() || e.size() != 2)
                throw std::invalid_argument(what + ": entries must be [re, im]");
            m(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
        }
    }
    return m;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write file: " + path);
    out << content;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string render_matrix(const CMatrix& m) {
    std::ostringstream os;
    os << "[";
    for (int r = 0; r < m.rows(); ++r) {
        if (r) os << ",";
        os << "[";
        for (int c = 0; c < m.cols(); ++c) {
            if (c) os << ",";
            os << "[" << format_double(m(r, c).real()) << "," << format_double(m(r, c).imag())
               << "]";
        }
        os << "]";
    }
    os << "]";
    return os.str();
}

std::string render_dims(const SystemDims& d) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < d.sys.size(); ++i) {
        if (i) os << ",";
        os << "[\"" << d.sys[i].first << "\"," << d.sys[i].second << "]";
    }
    os << "]";
    return os.str();
}

channels::ChoiMap load_choimap(const std::string& path) {
    json j = load_json(path);
    require_schema(j, "choimap-v1", path);
    channels::ChoiMap phi;
    phi.in_dims = parse_dims(j.at("in_dims"), path);
    phi.out_dims = parse_dims(j.at("out_dims"), path);
    phi.choi = parse_matrix(j.at("choi"), path);
    const int d = phi.d_in() * phi.d_out();
    if (phi.choi.rows() != d || phi.choi.cols() != d)
        throw std::invalid_argument(path + ": Choi matrix does not match dims");
    if (!phi.choi.is_hermitian(1e-8))
        throw std::invalid_argument(path + ": Choi matrix must be Hermitian");
    return phi;
}

channels::Labeled load_state(const std::string& path) {
    json j = load_json(path);
    require_schema(j, "state-v1", path);
    channels::Labeled st;
    st.dims = parse_dims(j.at("dims"), path);
    st.mat = parse_matrix(j.at("mat"), path);
    if (st.mat.rows() != st.dims.total_dim() || st.mat.cols() != st.dims.total_dim())
        throw std::invalid_argument(path + ": matrix does not match dims");
    if (!st.mat.is_hermitian(1e-8))
        throw std::invalid_argument(path + ": state must be Hermitian");
    return st;
}

games::Povm load_povm(const std::string& path) {
    json j = load_json(path);
    require_schema(j, "povm-v1", path);
    games::Povm p;
    p.dims = parse_dims(j.at("dims"), path);
    for (const auto& e : j.at("effects")) p.effects.push_back(parse_matrix(e, path));
    p.validate(1e-7);
    return p;
}

games::Ensemble load_ensemble(const std::string& path) {
    json j = load_json(path);
    require_schema(j, "ensemble-v1", path);
    games::Ensemble e;
    e.dims = parse_dims(j.at("dims"), path);
    for (const auto& it : j.at("items")) {
        if (!it.contains("prob") || !it.contains("state"))
            throw std::invalid_argument(path + ": items need prob and state");
        e.items.push_back({it["prob"].get<double>(), parse_matrix(it["state"], path)});
    }
    e.validate(1e-7);
    return e;
}

games::MeasurementSet load_measset(const std::string& path) {
    json j = load_json(path);
    require_schema(j, "measset-v1", path);
    games::MeasurementSet ms;
    for (const auto& pj : j.at("povms")) {
        if (!pj.is_object() || !pj.contains("schema") || pj["schema"] != "povm-v1")
            throw std::invalid_argument(path + ": povms must hold povm-v1 objects");
        games::Povm p;
        p.dims = parse_dims(pj.at("dims"), path);
        for (const auto& e : pj.at("effects")) p.effects.push_back(parse_matrix(e, path));
        p.validate(1e-7);
        ms.push_back(std::move(p));
    }
    games::validate_measurement_set(ms, 1e-7);
    return ms;
}

classical::Experiment load_experiment(const std::string& path) {
    json j = load_json(path);
    require_schema(j, "experiment-v1", path);
    classical::Experiment e;
    for (const auto& row : j.at("distributions")) {
        std::vector<double> d;
        for (const auto& v : row) d.push_back(v.get<double>());
        e.distributions.push_back(std::move(d));
    }
    e.validate(1e-9);
    return e;
}

void save_choimap(const std::string& path, const channels::ChoiMap& phi) {
    std::ostringstream os;
    os << "{\"schema\":\"choimap-v1\",\"in_dims\":" << render_dims(phi.in_dims)
       << ",\"out_dims\":" << render_dims(phi.out_dims)
       << ",\"choi\":" << render_matrix(phi.choi) << "}\n";
    write_file(path, os.str());
}

void save_state(const std::string& path, const channels::Labeled& state) {
    std::ostringstream os;
    os << "{\"schema\":\"state-v1\",\"dims\":" << render_dims(state.dims)
       << ",\"mat\":" << render_matrix(state.mat) << "}\n";
    write_file(path, os.str());
}

namespace {

std::string render_povm_object(const games::Povm& povm) {
    std::ostringstream os;
    os << "{\"schema\":\"povm-v1\",\"dims\":" << render_dims(povm.dims) << ",\"effects\":[";
    for (size_t i = 0; i < povm.effects.size(); ++i) {
        if (i) os << ",";
        os << render_matrix(povm.effects[i]);
    }
    os << "]}";
    return os.str();
}

}  // namespace

void save_povm(const std::string& path, const games::Povm& povm) {
    write_file(path, render_povm_object(povm) + "\n");
}

void save_ensemble(const std::string& path, const games::Ensemble& ensemble) {
    std::ostringstream os;
    os << "{\"schema\":\"ensemble-v1\",\"dims\":" << render_dims(ensemble.dims)
       << ",\"items\":[";
    for (size_t i = 0; i < ensemble.items.size(); ++i) {
        if (i) os << ",";
        os << "{\"prob\":" << format_double(ensemble.items[i].prob)
           << ",\"state\":" << render_matrix(ensemble.items[i].state) << "}";
    }
    os << "]}\n";
    write_file(path, os.str());
}

void save_measset(const std::string& path, const games::MeasurementSet& ms) {
    std::ostringstream os;
    os << "{\"schema\":\"measset-v1\",\"povms\":[";
    for (size_t i = 0; i < ms.size(); ++i) {
        if (i) os << ",";
        os << render_povm_object(ms[i]);
    }
    os << "]}\n";
    write_file(path, os.str());
}

void save_experiment(const std::string& path, const classical::Experiment& e) {
    std::ostringstream os;
    os << "{\"schema\":\"experiment-v1\",\"distributions\":[";
    for (size_t i = 0; i < e.distributions.size(); ++i) {
        if (i) os << ",";
        os << "[";
        for (size_t j = 0; j < e.distributions[i].size(); ++j) {
            if (j) os << ",";
            os << format_double(e.distributions[i][j]);
        }
        os << "]";
    }
    os << "]}\n";
    write_file(path, os.str());
}

}  // namespace chancomp::io
