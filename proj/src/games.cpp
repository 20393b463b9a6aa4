// This file is part of chancomp.
//
// This source code is licensed under the Apache License, Version 2.0. You may
// obtain a copy at http://www.apache.org/licenses/LICENSE-2.0.

#include "chancomp/games.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "chancomp/norms.hpp"
#include "chancomp/sdp_builder.hpp"

namespace chancomp::games {

using channels::apply;
using channels::kraus_of_choi;
using channels::Labeled;
using conic::HermSdp;
using linalg::cplx;
using linalg::kron;
using linalg::partial_trace;
using linalg::vec_doubleket;

void Ensemble::validate(double tol) const {
    if (items.empty()) throw std::invalid_argument("Ensemble: empty");
    const int d = dims.total_dim();
    double psum = 0.0;
    for (const auto& it : items) {
        if (it.prob < -1e-12) throw std::invalid_argument("Ensemble: negative prior");
        psum += it.prob;
        if (it.state.rows() != d || it.state.cols() != d)
            throw std::invalid_argument("Ensemble: state dimension mismatch");
        if (!it.state.is_hermitian(1e-8) || std::abs(it.state.trace().real() - 1.0) > 1e-7 ||
            !it.state.is_psd(tol))
            throw std::invalid_argument("Ensemble: item is not a state");
    }
    if (std::abs(psum - 1.0) > 1e-10)
        throw std::invalid_argument("Ensemble: priors do not sum to one");
}

CMatrix Ensemble::qc_state() const {
    const int d = dims.total_dim();
    const int k = size();
    CMatrix rho(d * k, d * k);
    for (int i = 0; i < k; ++i)
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                rho(a * k + i, b * k + i) = items[i].prob * items[i].state(a, b);
    return rho;
}

void Povm::validate(double tol) const {
    if (effects.empty()) throw std::invalid_argument("Povm: empty");
    const int d = dims.total_dim();
    CMatrix sum(d, d);
    for (const auto& m : effects) {
        if (m.rows() != d || m.cols() != d)
            throw std::invalid_argument("Povm: effect dimension mismatch");
        if (!m.is_hermitian(1e-8) || !m.is_psd(1e-10 + tol))
            throw std::invalid_argument("Povm: effect not PSD");
        sum += m;
    }
    if ((sum - CMatrix::identity(d)).max_abs() > tol)
        throw std::invalid_argument("Povm: effects do not sum to identity");
}

void validate_measurement_set(const MeasurementSet& ms, double tol) {
    if (ms.empty()) throw std::invalid_argument("MeasurementSet: empty");
    const int d = ms.front().dims.total_dim();
    const int n = ms.front().outcomes();
    for (const auto& m : ms) {
        m.validate(tol);
        if (m.dims.total_dim() != d)
            throw std::invalid_argument("MeasurementSet: mixed spaces");
        if (m.outcomes() != n)
            throw std::invalid_argument("MeasurementSet: inconsistent outcome counts");
    }
}

double psucc(const Ensemble& e, const Povm& m) {
    if (e.size() != m.outcomes())
        throw std::invalid_argument("psucc: outcome count must match ensemble size");
    if (e.dims.total_dim() != m.dims.total_dim())
        throw std::invalid_argument("psucc: dimension mismatch");
    double s = 0.0;
    for (int i = 0; i < e.size(); ++i)
        s += e.items[i].prob * (e.items[i].state * m.effects[i]).trace().real();
    return s;
}

double psucc_opt(const Ensemble& e, double tol) {
    e.validate();
    const int d = e.dims.total_dim();
    const int k = e.size();
    HermSdp sdp;
    std::vector<int> vars;
    for (int i = 0; i < k; ++i) vars.push_back(sdp.add_herm_var(d));
    HermSdp::Expr complete(d);
    for (int i = 0; i < k; ++i) complete.add(vars[i], [](const CMatrix& m) { return m; });
    complete.add_const(-CMatrix::identity(d));
    sdp.add_equality(complete);
    for (int i = 0; i < k; ++i)
        sdp.add_objective_term(vars[i], e.items[i].state * e.items[i].prob);
    sdp.set_maximize(true);
    auto r = conic::solve_retrying(sdp, tol);
    if (r.status != conic::SolveStatus::Optimal)
        throw std::runtime_error("psucc_opt: solver failure");
    return r.value;
}

double psucc_q(const Ensemble& e, const Povm& m) {
    if (e.dims.total_dim() != m.dims.total_dim())
        throw std::invalid_argument("psucc_q: dimension mismatch");
    double s = 0.0;
    for (const auto& eff : m.effects) {
        double best = 0.0;
        bool first = true;
        for (const auto& it : e.items) {
            const double v = it.prob * (it.state * eff).trace().real();
            if (first || v > best) {
                best = v;
                first = false;
            }
        }
        s += best;
    }
    return s;
}

std::vector<CMatrix> pauli_group(int d) {
    if (d < 2) throw std::invalid_argument("pauli_group: d must be at least 2");
    const double theta = 2.0 * 3.14159265358979323846 / d;
    std::vector<CMatrix> us;
    us.reserve(static_cast<size_t>(d) * d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            CMatrix u(d, d);
            for (int i = 0; i < d; ++i)
                u((i + a) % d, i) = std::polar(1.0, theta * i * b);
            us.push_back(std::move(u));
        }
    return us;
}

Povm bell_measurement(int d, const std::string& l1, const std::string& l2) {
    Povm b;
    b.dims = SystemDims({{l1, d}, {l2, d}});
    for (const auto& u : pauli_group(d)) {
        CMatrix v = vec_doubleket(u);
        b.effects.push_back(v * v.adjoint() * (1.0 / d));
    }
    return b;
}

Ensemble pauli_ensemble(const CMatrix& rho, const SystemDims& dims,
                        const std::string& r_label) {
    const int dr = dims.dim_of(r_label);
    SystemDims rest = dims.without({r_label});
    // move the R factor last for the local conjugation, then move it back
    std::vector<std::string> order = rest.labels();
    order.push_back(r_label);
    CMatrix moved = linalg::permute_systems(rho, dims, order);
    const int da = rest.total_dim();
    Ensemble e;
    e.dims = dims;
    const double p = 1.0 / (dr * dr);
    for (const auto& u : pauli_group(dr)) {
        CMatrix ut = u.transpose();
        CMatrix w = kron(CMatrix::identity(da), ut);
        CMatrix item = w * moved * w.adjoint();
        SystemDims moved_dims = dims.reordered(order);
        e.items.push_back({p, linalg::permute_systems(item, moved_dims, dims.labels())});
    }
    return e;
}

Povm meas_from_channel(const ChoiMap& beta) {
    const int da = beta.d_in();
    const int dr = beta.d_out();
    const auto ks = kraus_of_choi(beta);
    Povm bell = bell_measurement(dr);
    Povm m;
    m.dims = SystemDims({{"A", da}, {"R", dr}});
    for (const auto& bx : bell.effects) {
        CMatrix eff(da * dr, da * dr);
        for (const auto& k : ks) {
            CMatrix kk = kron(k.adjoint(), CMatrix::identity(dr));
            eff += kk * bx * kk.adjoint();
        }
        m.effects.push_back((eff + eff.adjoint()) * 0.5);
    }
    return m;
}

ChoiMap channel_from_meas(const Povm& m, int d_r, const std::string& in,
                          const std::string& out) {
    const int total = m.dims.total_dim();
    if (total % d_r != 0)
        throw std::invalid_argument("channel_from_meas: measurement space not A (x) R");
    const int da = total / d_r;
    if (m.outcomes() != d_r * d_r)
        throw std::invalid_argument("channel_from_meas: need d_R^2 outcomes");
    auto paulis = pauli_group(d_r);
    // psi^R on (Rt, R), normalized
    CMatrix v = vec_doubleket(CMatrix::identity(d_r));
    CMatrix psi = v * v.adjoint() * (1.0 / d_r);
    SystemDims big({{"A", da}, {"Rt", d_r}, {"R", d_r}});
    auto act = [&](const CMatrix& sigma) {
        CMatrix out_m(d_r, d_r);
        for (int x = 0; x < d_r * d_r; ++x) {
            // (sigma (x) psi)(M_x (x) I_R), traced over A and Rt
            CMatrix w = kron(sigma, psi) * kron(m.effects[x], CMatrix::identity(d_r));
            CMatrix omega = partial_trace(w, big, {"A", "Rt"});
            out_m += paulis[x] * omega * paulis[x].adjoint();
        }
        return out_m;
    };
    return channels::choi_of_apply(act, SystemDims::single(in, da),
                                   SystemDims::single(out, d_r));
}

CoroPsucReport verify_coro_psuc(const ChoiMap& phi1, const ChoiMap& phi2, double tol) {
    if (!(phi1.in_dims == phi2.in_dims) || !(phi1.out_dims == phi2.out_dims))
        throw std::invalid_argument("verify_coro_psuc: channels must share wires");
    const int din = phi1.d_in(), dout = phi1.d_out();
    ChoiMap delta{phi1.choi - phi2.choi, phi1.out_dims, phi1.in_dims};
    norms::DiamondResult dn = norms::diamond_norm_full(delta, tol);
    const double s = 0.5 * dn.value;

    CMatrix rho = dn.primal_x;
    {
        // clip solver-tolerance negative dust so the witness is an exact state
        linalg::EigResult er = linalg::herm_eig((rho + rho.adjoint()) * 0.5, 1e-6);
        const int n = rho.rows();
        CMatrix clipped(n, n);
        for (int k = 0; k < n; ++k) {
            if (er.eigenvalues[k] <= 0.0) continue;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    clipped(i, j) += er.eigenvalues[k] * er.eigenvectors(i, k) *
                                     std::conj(er.eigenvectors(j, k));
        }
        rho = clipped;
    }
    const double tr = rho.trace().real();
    if (tr > 1e-9)
        rho = rho * (1.0 / tr);
    else
        rho = CMatrix::identity(din * dout) * (1.0 / (din * dout));

    SystemDims rho_dims({{"A", din}, {"R", dout}});
    Ensemble e = pauli_ensemble(rho, rho_dims, "R");
    Povm bell = bell_measurement(dout);

    auto transformed = [&](const ChoiMap& phi) {
        Ensemble out;
        out.dims = SystemDims({{"B", dout}, {"R", dout}});
        ChoiMap local = channels::relabeled(phi, {"B"}, {"A"});
        ChoiMap ext = channels::tensor(local, channels::identity_channel(dout, "R", "Ro"));
        for (const auto& it : e.items) out.items.push_back({it.prob, apply(ext, it.state)});
        return out;
    };
    const double p1 = psucc(transformed(phi1), bell);
    const double p2 = psucc(transformed(phi2), bell);
    const double popt = psucc_opt(e, tol);

    CoroPsucReport rep;
    rep.sdp_value = s;
    rep.game_value = (p1 - p2) / popt;
    rep.gap = std::abs(rep.sdp_value - rep.game_value);
    return rep;
}

ScSimulReport verify_sc_simul(const MeasurementSet& mset, const MeasurementSet& nset,
                              double epsilon, int n_ensembles, std::uint64_t seed,
                              double tol, int jobs) {
    validate_measurement_set(mset);
    validate_measurement_set(nset);
    if (mset.front().dims.total_dim() != nset.front().dims.total_dim())
        throw std::invalid_argument("verify_sc_simul: families act on different spaces");
    if (epsilon < 0.0) throw std::invalid_argument("verify_sc_simul: epsilon < 0");
    const int dc = mset.front().dims.total_dim();
    const SystemDims cdims = mset.front().dims;
    int max_out = 0;
    for (const auto& p : mset) max_out = std::max(max_out, p.outcomes());
    for (const auto& p : nset) max_out = std::max(max_out, p.outcomes());

    // designed candidates: the effect ensembles of the target family
    std::vector<Ensemble> designed;
    for (const auto& n : nset) {
        Ensemble e;
        e.dims = cdims;
        bool ok = true;
        for (const auto& eff : n.effects) {
            const double w = eff.trace().real();
            if (w < 1e-12) {
                ok = false;
                break;
            }
            e.items.push_back({w / dc, eff * (1.0 / w)});
        }
        if (ok && !e.items.empty()) designed.push_back(std::move(e));
    }

    const int total = n_ensembles;
    ScSimulReport rep;
    rep.epsilon = epsilon;
    rep.n_samples = total;
    rep.max_violation = -std::numeric_limits<double>::infinity();

    std::vector<ViolationSample> all(total);
    auto eval_one = [&](int k) {
        const std::uint64_t skey = Rng::mix(seed, static_cast<std::uint64_t>(k));
        Ensemble e;
        if (k < static_cast<int>(designed.size())) {
            e = designed[k];
        } else {
            Rng rng(skey);
            const int count = rng.uniform_int(2, std::max(2, 2 * max_out));
            auto priors = rng.dirichlet(count);
            e.dims = cdims;
            for (int i = 0; i < count; ++i) {
                CMatrix st = (rng.uniform() < 0.5)
                                 ? channels::haar_pure_state(dc, rng)
                                 : channels::random_density_matrix(
                                       dc, rng.uniform_int(1, dc), rng);
                e.items.push_back({priors[i], st});
            }
        }
        double lhs = 0.0, rhs_best = 0.0;
        for (const auto& n : nset) lhs = std::max(lhs, psucc_q(e, n));
        for (const auto& m : mset) rhs_best = std::max(rhs_best, psucc_q(e, m));
        const double popt = psucc_opt(e, tol);
        ViolationSample vs;
        vs.sample = k;
        vs.seed = skey;
        vs.lhs = lhs;
        vs.rhs = rhs_best + 0.5 * epsilon * popt;
        vs.gap = vs.lhs - vs.rhs;
        all[k] = vs;
    };

    if (jobs <= 1) {
        for (int k = 0; k < total; ++k) eval_one(k);
    } else {
        std::vector<std::thread> pool;
        std::atomic_int next{0};
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back([&]() {
                for (;;) {
                    const int k = next.fetch_add(1);
                    if (k >= total) return;
                    eval_one(k);
                }
            });
        for (auto& th : pool) th.join();
    }

    std::vector<ViolationSample> sorted = all;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const ViolationSample& a, const ViolationSample& b) {
                         return a.gap > b.gap;
                     });
    for (const auto& vs : all) {
        rep.max_violation = std::max(rep.max_violation, vs.gap);
        if (vs.gap > 1e-9) rep.violations.push_back(vs);
    }
    for (size_t i = 0; i < sorted.size() && i < 3; ++i) rep.worst.push_back(sorted[i]);
    return rep;
}

}  // namespace chancomp::games
