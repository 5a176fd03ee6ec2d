// Copyright 2026 The PPC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/// @file
/// Standard process tomography baseline: tensor-product preparations
/// {|0>, |1>, |+>, |i>} and measurement settings {I, Y(-pi/2), X(-pi/2)} per
/// qubit, linear-inversion estimate of the Pauli transfer matrix, conversion
/// to the chi matrix.
///
/// Conventions. Effects E_j = G_m^dagger |o><o| G_m are indexed
/// j = m 2^n + o. The transfer matrix is R_kl = tr(P_k E(P_l)) / 2^n, so
/// lambda_ij = tr(E_j E(rho_i)) = sum_kl M_jk R_kl Q_li / 2^n with
/// M_jk = tr(E_j P_k) and Q_li = tr(P_l rho_i).

#include <Eigen/SVD>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ppc/estimation.hpp"
#include "ppc/simulator.hpp"

namespace ppc {

inline std::uint64_t ipow(std::uint64_t base, int exp) {
    std::uint64_t r = 1;
    for (int i = 0; i < exp; ++i)
        r *= base;
    return r;
}

/// Single-qubit preparation gates: index 0 |0>, 1 |1>, 2 |+>, 3 |i>.
inline std::vector<Gate> qpt_preparation_gates(int label, int q) {
    switch (label) {
    case 0:
        return {};
    case 1:
        return {Gate::x(q)};
    case 2:
        return {Gate::h(q)};
    case 3:
        return {Gate::rx(q, -kPi / 2)};
    }
    throw InvalidArgument("preparation label must be in 0..3");
}

/// Single-qubit measurement basis changes: index 0 I, 1 Y(-pi/2), 2 X(-pi/2).
inline std::vector<Gate> qpt_setting_gates(int label, int q) {
    switch (label) {
    case 0:
        return {};
    case 1:
        return {Gate::ry(q, -kPi / 2)};
    case 2:
        return {Gate::rx(q, -kPi / 2)};
    }
    throw InvalidArgument("measurement setting label must be in 0..2");
}

struct QptPlan {
    int n = 1;
    /// 4^n preparation circuits (gates only) and their density matrices.
    std::vector<std::vector<Gate>> preparations;
    std::vector<CMatrix> states;
    /// 3^n basis-change gate lists and the matching 6^n effects.
    std::vector<std::vector<Gate>> settings;
    std::vector<CMatrix> effects;

    std::size_t preparation_count() const { return preparations.size(); }
    std::size_t setting_count() const { return settings.size(); }
    std::size_t effect_count() const { return effects.size(); }
    std::size_t circuit_count() const { return preparations.size() * settings.size(); }
    /// Circuit c runs preparation c / 3^n and setting c % 3^n.
    std::size_t circuit_index(std::size_t prep, std::size_t setting) const {
        return prep * settings.size() + setting;
    }
    std::size_t effect_index(std::size_t setting, Index outcome) const {
        return setting * static_cast<std::size_t>(dim_for_qubits(n)) + static_cast<std::size_t>(outcome);
    }

    /// Preparation, process and measurement basis change as one circuit.
    CircuitSpec circuit(std::size_t prep, std::size_t setting, const std::vector<Gate>& process) const {
        CircuitSpec c;
        c.n = n;
        c.gates = preparations.at(prep);
        c.gates.insert(c.gates.end(), process.begin(), process.end());
        const auto& s = settings.at(setting);
        c.gates.insert(c.gates.end(), s.begin(), s.end());
        return c;
    }
};

/// Full tensor-product plan; labels run with qubit 0 as the most significant
/// digit.
inline QptPlan qpt_plan(int n) {
    const Index d = dim_for_qubits(n);
    QptPlan plan;
    plan.n = n;
    for (std::uint64_t idx = 0; idx < ipow(4, n); ++idx) {
        std::vector<Gate> gates;
        std::uint64_t rest = idx;
        std::vector<int> digits(static_cast<std::size_t>(n));
        for (int q = n - 1; q >= 0; --q, rest /= 4)
            digits[static_cast<std::size_t>(q)] = static_cast<int>(rest % 4);
        for (int q = 0; q < n; ++q)
            for (Gate& g : qpt_preparation_gates(digits[static_cast<std::size_t>(q)], q))
                gates.push_back(std::move(g));
        CircuitSpec c{n, 0, gates};
        const CVector psi = evolve(c);
        plan.states.push_back(psi * psi.adjoint());
        plan.preparations.push_back(std::move(gates));
    }
    for (std::uint64_t idx = 0; idx < ipow(3, n); ++idx) {
        std::vector<Gate> gates;
        std::uint64_t rest = idx;
        std::vector<int> digits(static_cast<std::size_t>(n));
        for (int q = n - 1; q >= 0; --q, rest /= 3)
            digits[static_cast<std::size_t>(q)] = static_cast<int>(rest % 3);
        for (int q = 0; q < n; ++q)
            for (Gate& g : qpt_setting_gates(digits[static_cast<std::size_t>(q)], q))
                gates.push_back(std::move(g));
        const CMatrix basis_change = circuit_unitary(CircuitSpec{n, 0, gates});
        for (Index o = 0; o < d; ++o) {
            const CVector row = basis_change.row(o).adjoint();
            plan.effects.push_back(row * row.adjoint());
        }
        plan.settings.push_back(std::move(gates));
    }
    return plan;
}

/// Measured frequencies lambda(i, j) = P(effect j | preparation i).
struct QptData {
    int n = 1;
    RMatrix lambda; ///< preparations x effects
    /// Raw counts per circuit (circuit_index order); empty in exact mode.
    std::vector<std::vector<std::int64_t>> counts;
    Shots shots = Shots::exact_mode();
};

struct QptSystem {
    /// Rows i 6^n + j, columns k + l 4^n; entry tr(E_j P_k) tr(P_l rho_i) / 2^n.
    RMatrix design;
    /// Measurement and preparation factors: design = kron(Q^T, M) / 2^n.
    RMatrix effect_factor;      ///< M, 6^n x 4^n
    RMatrix preparation_factor; ///< Q, 4^n x 4^n
};

inline QptSystem qpt_factors(const QptPlan& plan) {
    const int n = plan.n;
    const Index p = pauli_count(n);
    std::vector<CMatrix> paulis;
    for (Index k = 0; k < p; ++k)
        paulis.push_back(pauli_string(k, n));
    QptSystem s;
    s.effect_factor.resize(static_cast<Index>(plan.effect_count()), p);
    for (std::size_t j = 0; j < plan.effect_count(); ++j)
        for (Index k = 0; k < p; ++k)
            s.effect_factor(static_cast<Index>(j), k) =
                (plan.effects[j] * paulis[static_cast<std::size_t>(k)]).trace().real();
    s.preparation_factor.resize(p, static_cast<Index>(plan.preparation_count()));
    for (Index l = 0; l < p; ++l)
        for (std::size_t i = 0; i < plan.preparation_count(); ++i)
            s.preparation_factor(l, static_cast<Index>(i)) =
                (paulis[static_cast<std::size_t>(l)] * plan.states[i]).trace().real();
    return s;
}

/// Assembles the explicit linear system. The design matrix has 24^n x 16^n
/// entries, so this is limited to n <= 3.
inline QptSystem qpt_build_system(const QptPlan& plan) {
    if (plan.n > 3)
        throw InvalidArgument("explicit tomography system is limited to n <= 3");
    QptSystem s = qpt_factors(plan);
    s.design = Eigen::kroneckerProduct(s.preparation_factor.transpose(), s.effect_factor).eval() /
               static_cast<double>(dim_for_qubits(plan.n));
    return s;
}

/// Simulates every tomography circuit for the given process. Circuit c
/// samples on stream stream_id(qpt, c).
inline QptData run_qpt_circuits(const QptPlan& plan, const std::vector<Gate>& process, const NoiseProfile& noise,
                                Shots shots, unsigned threads = 0) {
    std::vector<CircuitSpec> circuits;
    circuits.reserve(plan.circuit_count());
    for (std::size_t i = 0; i < plan.preparation_count(); ++i)
        for (std::size_t m = 0; m < plan.setting_count(); ++m)
            circuits.push_back(plan.circuit(i, m, process));
    const auto runs = run_batch(circuits, noise, shots, stream_id(StreamTag::qpt, 0), threads);
    const Index d = dim_for_qubits(plan.n);
    QptData data;
    data.n = plan.n;
    data.shots = shots;
    data.lambda.resize(static_cast<Index>(plan.preparation_count()), static_cast<Index>(plan.effect_count()));
    for (std::size_t i = 0; i < plan.preparation_count(); ++i)
        for (std::size_t m = 0; m < plan.setting_count(); ++m) {
            const Execution& e = runs[plan.circuit_index(i, m)];
            for (Index o = 0; o < d; ++o)
                data.lambda(static_cast<Index>(i), static_cast<Index>(plan.effect_index(m, o))) = e.distribution[o];
            if (!shots.exact)
                data.counts.push_back(e.counts);
        }
    return data;
}

struct QptOptions {
    /// Clip negative eigenvalues of chi and restore its trace.
    bool psd_projection = false;
    /// Mitigate each setting's distribution with this matrix first (ablation
    /// only; tomography is normally run without it).
    std::optional<TransitionMatrix> mitigation;
    Normalization normalization = Normalization::trace_one;
};

struct QptEstimate {
    ProcessMatrix chi;
    /// Pauli transfer matrix R_kl = tr(P_k E(P_l)) / 2^n.
    RMatrix ptm;
    /// RMS of lambda - B x.
    double residual = 0.0;
    std::vector<std::string> warnings;
};

/// chi_kl from the transfer matrix through the Choi matrix
/// Lambda = sum_kl R_kl P_k (x) P_l^T / 2^n.
inline ProcessMatrix chi_from_ptm(const RMatrix& ptm, int n, Normalization norm = Normalization::trace_one) {
    const Index p = pauli_count(n), d = dim_for_qubits(n);
    if (ptm.rows() != p || ptm.cols() != p)
        throw InvalidArgument("transfer matrix has the wrong size");
    std::vector<CMatrix> paulis;
    for (Index k = 0; k < p; ++k)
        paulis.push_back(pauli_string(k, n));
    CMatrix choi = CMatrix::Zero(d * d, d * d);
    for (Index k = 0; k < p; ++k) {
        CMatrix mixed = CMatrix::Zero(d, d);
        for (Index l = 0; l < p; ++l)
            if (ptm(k, l) != 0.0)
                mixed += ptm(k, l) * paulis[static_cast<std::size_t>(l)];
        choi += kron(paulis[static_cast<std::size_t>(k)], mixed.transpose());
    }
    choi /= static_cast<double>(d);
    // Column k of V is P_k flattened row-major.
    CMatrix v(d * d, p);
    for (Index k = 0; k < p; ++k)
        for (Index a = 0; a < d; ++a)
            for (Index b = 0; b < d; ++b)
                v(a * d + b, k) = paulis[static_cast<std::size_t>(k)](a, b);
    CMatrix chi = v.adjoint() * choi * v / static_cast<double>(p);
    chi = (0.5 * (chi + chi.adjoint())).eval();
    return ProcessMatrix{n, std::move(chi) * chi_trace_scale(norm, n), norm};
}

/// Clips negative eigenvalues and rescales to the original trace.
inline ProcessMatrix project_psd(const ProcessMatrix& p) {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(p.chi);
    const double trace = p.trace().real();
    RVector vals = eig.eigenvalues().cwiseMax(0.0);
    if (vals.sum() <= 0)
        throw FitFailure("process matrix has no positive eigenvalue");
    vals *= trace / vals.sum();
    CMatrix chi = eig.eigenvectors() * vals.cast<cplx>().asDiagonal() * eig.eigenvectors().adjoint();
    return ProcessMatrix{p.n, std::move(chi), p.normalization};
}

/// Least-squares solution of B x = lambda via the Kronecker factors,
/// R = 2^n pinv(M) Y pinv(Q) with Y_ji = lambda_ij; identical to the
/// explicit solve because both factors have full rank.
inline QptEstimate qpt_estimate_chi(const QptPlan& plan, const QptData& data, const QptOptions& options = {}) {
    const int n = plan.n;
    if (data.n != n)
        throw InvalidArgument("tomography data and plan disagree on qubit count");
    if (data.lambda.rows() != static_cast<Index>(plan.preparation_count()) ||
        data.lambda.cols() != static_cast<Index>(plan.effect_count()))
        throw InvalidArgument("frequency table must cover every (preparation, effect) pair: expected " +
                              std::to_string(plan.preparation_count()) + "x" + std::to_string(plan.effect_count()));
    if (!data.lambda.allFinite())
        throw InvalidArgument("frequency table has missing entries");
    QptEstimate out;
    RMatrix lambda = data.lambda;
    if (options.mitigation) {
        const Index d = dim_for_qubits(n);
        for (Index i = 0; i < lambda.rows(); ++i)
            for (std::size_t m = 0; m < plan.setting_count(); ++m) {
                const Index start = static_cast<Index>(plan.effect_index(m, 0));
                const RVector q = lambda.row(i).segment(start, d).transpose();
                const MitigationResult r =
                    mitigate_distribution(ProbabilityDistribution::from_probabilities(q), *options.mitigation);
                lambda.row(i).segment(start, d) = r.p.probabilities().transpose();
                for (const auto& w : r.warnings)
                    if (std::find(out.warnings.begin(), out.warnings.end(), w) == out.warnings.end())
                        out.warnings.push_back(w);
            }
    }
    const QptSystem s = qpt_factors(plan);
    auto pinv = [](const RMatrix& a, const char* what) {
        Eigen::JacobiSVD<RMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const RVector& sv = svd.singularValues();
        const double cut = 1e-10 * sv(0);
        for (Index i = 0; i < sv.size(); ++i)
            if (!(sv(i) > cut))
                throw RankDeficiency(std::string("tomography ") + what + " factor is rank deficient");
        return RMatrix(svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose());
    };
    const RMatrix y = lambda.transpose();
    const double d = static_cast<double>(dim_for_qubits(n));
    out.ptm = d * pinv(s.effect_factor, "measurement") * y * pinv(s.preparation_factor, "preparation");
    const RMatrix fitted = s.effect_factor * out.ptm * s.preparation_factor / d;
    out.residual = std::sqrt((fitted - y).squaredNorm() / static_cast<double>(y.size()));
    out.chi = chi_from_ptm(out.ptm, n, options.normalization);
    if (options.psd_projection)
        out.chi = project_psd(out.chi);
    return out;
}

struct QptResult {
    QptPlan plan;
    QptData data;
    QptEstimate estimate;
};

/// Plans, simulates and estimates tomography of `process` (gates applied
/// after preparation).
inline QptResult run_qpt(int n, const std::vector<Gate>& process, const NoiseProfile& noise, Shots shots,
                         const QptOptions& options = {}, unsigned threads = 0) {
    if (noise.transition.qubits() != n)
        throw InvalidArgument("noise profile is for a different qubit count");
    QptResult r;
    r.plan = qpt_plan(n);
    r.data = run_qpt_circuits(r.plan, process, noise, shots, threads);
    r.estimate = qpt_estimate_chi(r.plan, r.data, options);
    return r;
}

inline QptResult run_qpt(const UnitaryOperator& target, const NoiseProfile& noise, Shots shots,
                         const QptOptions& options = {}, unsigned threads = 0) {
    std::vector<int> all(static_cast<std::size_t>(target.qubits()));
    for (int q = 0; q < target.qubits(); ++q)
        all[static_cast<std::size_t>(q)] = q;
    return run_qpt(target.qubits(), {Gate::unitary(target.matrix(), all)}, noise, shots, options, threads);
}

} // namespace ppc
