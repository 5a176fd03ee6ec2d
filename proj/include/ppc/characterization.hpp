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
/// Parameterized process characterization: rotation sweeps through the
/// gate under test, readout mitigation, sinusoid fits and reconstruction of
/// the unitary by phase-graph assembly.
///
/// For the sweep (k, s) the gate sees cos(theta/2)|k> + r sin(theta/2)|k + 1_s>
/// with r = 1 (Y rotation) or r = -i (X rotation). Writing a = <j|U|k> and
/// b = <j|U|k + 1_s>, outcome j has probability
///   (A_j + B_j cos theta + C_j sin theta) / 2,
///   A_j = |a|^2 + |b|^2,  B_j = |a|^2 - |b|^2,
///   C_j = 2 Re(a b*) (Y)  or  -2 Im(a b*) (X).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "ppc/calibration.hpp"
#include "ppc/estimation.hpp"
#include "ppc/metrics.hpp"
#include "ppc/sweep.hpp"

namespace ppc {

struct SweepCoefficients {
    RVector A, B, C;
};

/// Exact model coefficients of the sweep (k, s, axis) through U.
inline SweepCoefficients model_coefficients(const CMatrix& u, std::uint64_t k, int s, Axis axis) {
    const int n = qubits_for_dim(u.rows());
    if (k & qubit_mask(s, n))
        throw InvalidArgument("bit s of k must be 0");
    const CVector a = u.col(static_cast<Index>(k));
    const CVector b = u.col(static_cast<Index>(k | qubit_mask(s, n)));
    SweepCoefficients c;
    c.A = a.cwiseAbs2() + b.cwiseAbs2();
    c.B = a.cwiseAbs2() - b.cwiseAbs2();
    const CVector cross = a.cwiseProduct(b.conjugate());
    c.C = axis == Axis::Y ? RVector(2.0 * cross.real()) : RVector(-2.0 * cross.imag());
    return c;
}

inline RVector model_distribution(const SweepCoefficients& c, double theta) {
    return 0.5 * (c.A + c.B * std::cos(theta) + c.C * std::sin(theta));
}

/// For each axis, each rotated qubit s and each |k> with bit s = 0: prepare
/// |k>, rotate qubit s through the grid, apply the target. Per axis this is
/// 2^(n-1) n (n_theta + 1) circuits.
inline std::vector<PlannedSweep> characterization_sweep_plan(const UnitaryOperator& target, int n_theta,
                                                             const std::vector<Axis>& axes) {
    const int n = target.qubits();
    if (axes.empty())
        throw InvalidArgument("characterization needs at least one axis");
    const auto grid = angle_grid(n_theta);
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q)
        all[static_cast<std::size_t>(q)] = q;
    const std::vector<Gate> tail{Gate::unitary(target.matrix(), all)};
    std::vector<PlannedSweep> plan;
    for (Axis axis : axes)
        for (int s = 0; s < n; ++s)
            for (std::uint64_t k : labels_with_qubit_zero(n, s))
                plan.push_back(make_sweep(n, k, s, axis, grid, tail));
    return plan;
}

struct FitOptions {
    /// Mitigate readout with the calibrated transition matrix.
    bool mitigate = true;
    /// Inverse-variance weights per (angle, outcome); ignored in exact mode.
    bool weighted = false;
};

struct SweepFit {
    std::uint64_t k = 0;
    int s = 0;
    Axis axis = Axis::Y;
    SinusoidFit fit;
    /// theta0 applied to the nominal angles.
    double prep_phase = 0.0;
    std::vector<std::string> warnings;
};

/// Mitigates every per-angle distribution with cal.transition, shifts the
/// angles by the calibrated theta0 and fits the sinusoid model.
inline SweepFit fit_sweep(const SweepRecord& record, const CalibrationResult& cal, const FitOptions& options = {}) {
    record.validate();
    if (cal.n != record.n)
        throw InvalidArgument("calibration is for " + std::to_string(cal.n) + " qubits, sweep for " +
                              std::to_string(record.n));
    SweepFit out;
    out.k = record.k;
    out.s = record.s;
    out.axis = record.axis;
    out.prep_phase = cal.prep_phase_for(record.s, record.axis);

    std::vector<RVector> data;
    data.reserve(record.distributions.size());
    std::set<std::string> warnings;
    for (const RVector& q : record.distributions) {
        if (options.mitigate && !record.mitigated) {
            MitigationResult m = mitigate_distribution(ProbabilityDistribution::from_probabilities(q), cal.transition);
            warnings.insert(m.warnings.begin(), m.warnings.end());
            data.push_back(m.p.probabilities());
        } else {
            data.push_back(q);
        }
    }
    out.warnings.assign(warnings.begin(), warnings.end());

    std::vector<double> angles = record.angles;
    for (double& a : angles)
        a += out.prep_phase;
    if (options.weighted && !record.shots.exact) {
        const RMatrix w = variance_weights(data, record.shots.count);
        out.fit = fit_sinusoid(angles, data, &w);
    } else {
        out.fit = fit_sinusoid(angles, data);
    }
    return out;
}

struct ReconstructOptions {
    /// Columns whose modulus is at most this fraction of the row maximum do
    /// not take part in phase assembly.
    double modulus_threshold = 1e-3;
    /// Cycle inconsistency (radians) above which a noisy-data warning is raised.
    double cycle_warning = 0.5;
    Normalization normalization = Normalization::trace_one;
};

struct RowPhaseReport {
    Index row = 0;
    /// Anchor column of every connected component (phase fixed to 0).
    std::vector<std::uint64_t> anchors;
    /// Component index of each column.
    std::vector<int> component;
    double cycle_inconsistency = 0.0;
};

struct ReconstructionResult {
    UnitaryOperator u_hat;
    /// Assembled matrix before unitary projection.
    CMatrix raw;
    RMatrix moduli;
    /// ||raw - u_hat||_F
    double unitarity_residual = 0.0;
    std::vector<RowPhaseReport> rows;
    double cycle_inconsistency = 0.0;
    ProcessMatrix chi;
    /// Row phases are fixed by anchors, not observed.
    bool gauge_representative = true;
    std::vector<std::string> warnings;
};

namespace detail {

inline double wrap_angle(double x) { return std::remainder(x, 2 * kPi); }

} // namespace detail

/// Assembles U from sweep fits.
///
/// 1. Moduli: |U_jc|^2 = (A_j + B_j)/2 for the sweep's |k> column and
///    (A_j - B_j)/2 for its |k + 1_s> column, inverse-variance averaged over
///    all sweeps and axes touching the column; negatives clip to 0.
/// 2. Cross products g = U_{j,k} U_{j,k+1_s}^*: Re g = C_j/2 from Y sweeps,
///    Im g = -C'_j/2 from X sweeps (0 with a warning when absent).
/// 3. Per row, columns with modulus above the threshold form a graph with one
///    edge per sweep; the largest-modulus column of each component is the
///    anchor (phase 0) and phases propagate along a maximum-weight spanning
///    tree (weight |U_jc0||U_jc1|). Non-tree edges measure the cycle
///    inconsistency.
/// 4. The assembled matrix is projected to the nearest unitary.
inline ReconstructionResult reconstruct_unitary(std::span<const SweepFit> fits, int n,
                                                const ReconstructOptions& options = {}) {
    const Index d = dim_for_qubits(n);
    std::set<std::pair<std::uint64_t, int>> y_pairs;
    for (const SweepFit& f : fits) {
        if (f.fit.A.size() != d)
            throw InvalidArgument("sweep fit dimension does not match qubit count");
        if (f.axis == Axis::Y)
            y_pairs.insert({f.k, f.s});
    }
    for (int s = 0; s < n; ++s)
        for (std::uint64_t k : labels_with_qubit_zero(n, s))
            if (!y_pairs.count({k, s}))
                throw InvalidArgument("Y-axis fits must cover every (k, s); missing k=" + basis_label(k, n) +
                                      " s=" + std::to_string(s));

    // 1. moduli
    RMatrix weight_sum = RMatrix::Zero(d, d), value_sum = RMatrix::Zero(d, d);
    auto accumulate = [&](Index j, std::uint64_t c, double value, double variance) {
        const double w = 1.0 / (variance + 1e-18);
        weight_sum(j, static_cast<Index>(c)) += w;
        value_sum(j, static_cast<Index>(c)) += w * value;
    };
    struct Edge {
        std::uint64_t c0 = 0, c1 = 0;
        double re = 0.0, im = 0.0;
        bool has_im = false;
    };
    std::map<std::pair<std::uint64_t, int>, std::vector<Edge>> edges; // per (k, s): one entry per row
    for (const SweepFit& f : fits) {
        const std::uint64_t c0 = f.k, c1 = f.k | qubit_mask(f.s, n);
        auto& row_edges = edges[{f.k, f.s}];
        if (row_edges.empty())
            row_edges.assign(static_cast<std::size_t>(d), Edge{c0, c1});
        for (Index j = 0; j < d; ++j) {
            const double var = 0.25 * (f.fit.se_A(j) * f.fit.se_A(j) + f.fit.se_B(j) * f.fit.se_B(j));
            accumulate(j, c0, 0.5 * (f.fit.A(j) + f.fit.B(j)), var);
            accumulate(j, c1, 0.5 * (f.fit.A(j) - f.fit.B(j)), var);
            Edge& e = row_edges[static_cast<std::size_t>(j)];
            if (f.axis == Axis::Y) {
                e.re = 0.5 * f.fit.C(j);
            } else {
                e.im = -0.5 * f.fit.C(j);
                e.has_im = true;
            }
        }
    }
    RMatrix moduli(d, d);
    for (Index j = 0; j < d; ++j)
        for (Index c = 0; c < d; ++c)
            moduli(j, c) = std::sqrt(std::max(0.0, value_sum(j, c) / weight_sum(j, c)));

    std::vector<std::string> warnings;
    bool missing_imag = false;
    for (const auto& [key, row_edges] : edges)
        missing_imag = missing_imag || !row_edges.front().has_im;
    if (missing_imag)
        warnings.push_back("no X-axis sweeps: imaginary cross terms set to 0, complex phases are not recovered");

    // 2-3. per-row phase assembly
    CMatrix raw(d, d);
    std::vector<RowPhaseReport> reports;
    double worst_cycle = 0.0;
    for (Index j = 0; j < d; ++j) {
        const double max_mod = moduli.row(j).maxCoeff();
        if (!(max_mod * max_mod > 1e-12))
            throw DegenerateRow("row " + std::to_string(j) + " of the reconstructed unitary is empty");
        const double tau = options.modulus_threshold * max_mod;
        std::vector<bool> active(static_cast<std::size_t>(d));
        for (Index c = 0; c < d; ++c)
            active[static_cast<std::size_t>(c)] = moduli(j, c) > tau;

        struct Link {
            std::uint64_t other;
            std::complex<double> g; // U_{j,this} U_{j,other}^*
            double weight;
            std::size_t id;
        };
        std::vector<std::vector<Link>> adjacency(static_cast<std::size_t>(d));
        std::size_t edge_count = 0;
        std::vector<std::tuple<std::uint64_t, std::uint64_t, std::complex<double>>> edge_list;
        for (const auto& [key, row_edges] : edges) {
            const Edge& e = row_edges[static_cast<std::size_t>(j)];
            if (!active[e.c0] || !active[e.c1])
                continue;
            const std::complex<double> g(e.re, e.im);
            const double w = moduli(j, static_cast<Index>(e.c0)) * moduli(j, static_cast<Index>(e.c1));
            adjacency[e.c0].push_back({e.c1, g, w, edge_count});
            adjacency[e.c1].push_back({e.c0, std::conj(g), w, edge_count});
            edge_list.emplace_back(e.c0, e.c1, g);
            ++edge_count;
        }

        RowPhaseReport report;
        report.row = j;
        report.component.assign(static_cast<std::size_t>(d), -1);
        std::vector<double> phase(static_cast<std::size_t>(d), 0.0);
        std::vector<bool> tree_edge(edge_count, false);
        // Components in order of decreasing anchor modulus.
        std::vector<Index> order(static_cast<std::size_t>(d));
        for (Index c = 0; c < d; ++c)
            order[static_cast<std::size_t>(c)] = c;
        std::stable_sort(order.begin(), order.end(),
                         [&](Index a, Index b) { return moduli(j, a) > moduli(j, b); });
        int components = 0;
        for (Index anchor : order) {
            if (report.component[static_cast<std::size_t>(anchor)] >= 0)
                continue;
            const int comp = components++;
            report.anchors.push_back(static_cast<std::uint64_t>(anchor));
            report.component[static_cast<std::size_t>(anchor)] = comp;
            phase[static_cast<std::size_t>(anchor)] = 0.0;
            using Item = std::tuple<double, std::size_t, std::uint64_t, std::uint64_t>; // weight, id, from, to
            std::priority_queue<Item> frontier;
            auto push_links = [&](std::uint64_t node) {
                for (const Link& l : adjacency[node])
                    if (report.component[l.other] < 0)
                        frontier.emplace(l.weight, l.id, node, l.other);
            };
            push_links(static_cast<std::uint64_t>(anchor));
            while (!frontier.empty()) {
                const auto [w, id, from, to] = frontier.top();
                frontier.pop();
                if (report.component[to] >= 0)
                    continue;
                std::complex<double> g;
                for (const Link& l : adjacency[from])
                    if (l.id == id)
                        g = l.g;
                // g = U_from U_to^*  =>  phase(to) = phase(from) - arg g
                phase[to] = detail::wrap_angle(phase[from] - std::arg(g));
                report.component[to] = comp;
                tree_edge[id] = true;
                push_links(to);
            }
        }
        for (std::size_t id = 0; id < edge_count; ++id) {
            if (tree_edge[id])
                continue;
            const auto& [c0, c1, g] = edge_list[id];
            const double gap = std::abs(detail::wrap_angle(phase[c0] - phase[c1] - std::arg(g)));
            report.cycle_inconsistency = std::max(report.cycle_inconsistency, gap);
        }
        worst_cycle = std::max(worst_cycle, report.cycle_inconsistency);
        for (Index c = 0; c < d; ++c)
            raw(j, c) = std::polar(moduli(j, c), phase[static_cast<std::size_t>(c)]);
        reports.push_back(std::move(report));
    }
    if (worst_cycle > options.cycle_warning)
        warnings.push_back("phase cycle inconsistency " + std::to_string(worst_cycle) +
                           " rad exceeds threshold: data are noisy");

    // 4. projection
    NearestUnitary projected = nearest_unitary(raw);
    ProcessMatrix chi = chi_from_unitary(projected.unitary, options.normalization);
    return ReconstructionResult{std::move(projected.unitary),
                                std::move(raw),
                                std::move(moduli),
                                projected.distance,
                                std::move(reports),
                                worst_cycle,
                                std::move(chi),
                                true,
                                std::move(warnings)};
}

// ---------------------------------------------------------------------------
// End-to-end characterization

struct CharacterizationConfig {
    int n_theta = kDefaultNThetaY;
    Shots shots = Shots::of(5000);
    std::vector<Axis> axes{Axis::Y};
    /// Calibrating both axes matches the 2^n N calibration budget and
    /// provides theta0 for either sweep axis.
    std::vector<Axis> calibration_axes{Axis::Y, Axis::X};
    bool run_calibration = true;
    CalibrationOptions calibration{};
    FitOptions fit{};
    ReconstructOptions reconstruct{};
    unsigned threads = 0;
};

/// Figures of merit against a known target.
struct PpcAssessment {
    /// Normalized chi overlap after gauge alignment.
    double process_fidelity = 0.0;
    /// tr(chi chi0)/4^n after gauge alignment, in trace_d normalization.
    double raw_process_fidelity = 0.0;
    /// Normalized chi overlap of the anchored (unaligned) estimate.
    double anchored_process_fidelity = 0.0;
    double gauge_aligned_fidelity = 0.0;
    /// Largest |Im chi_kl| of the aligned estimate.
    double max_abs_imag_chi = 0.0;
    ProcessMatrix aligned_chi;
};

struct CharacterizationResult {
    CalibrationResult calibration;
    std::vector<SweepRecord> records;
    std::vector<SweepFit> fits;
    ReconstructionResult reconstruction;
};

inline PpcAssessment assess(const ReconstructionResult& r, const UnitaryOperator& target) {
    PpcAssessment a;
    const Normalization norm = r.chi.normalization;
    const ProcessMatrix chi0 = chi_from_unitary(target, norm);
    a.aligned_chi = chi_from_unitary(gauge_align(r.u_hat, target), norm);
    a.process_fidelity = process_fidelity(a.aligned_chi, chi0);
    a.raw_process_fidelity = raw_process_fidelity(a.aligned_chi.renormalized(Normalization::trace_d),
                                                  chi0.renormalized(Normalization::trace_d));
    a.anchored_process_fidelity = process_fidelity(r.chi, chi0);
    a.gauge_aligned_fidelity = gauge_aligned_fidelity(r.u_hat, target);
    a.max_abs_imag_chi = a.aligned_chi.chi.imag().cwiseAbs().maxCoeff();
    return a;
}

/// Runs calibration (unless a cached result is given or calibration is
/// disabled), the characterization sweeps, fits and reconstruction.
inline CharacterizationResult characterize(const UnitaryOperator& target, const NoiseProfile& noise,
                                           const CharacterizationConfig& config,
                                           const CalibrationResult* cached = nullptr) {
    const int n = target.qubits();
    if (noise.transition.qubits() != n)
        throw InvalidArgument("noise profile is for a different qubit count");
    CalibrationResult cal = cached                   ? *cached
                            : config.run_calibration ? calibrate(n, config.n_theta, config.calibration_axes, noise,
                                                                 config.shots, config.calibration)
                                                     : CalibrationResult::trivial(n);
    if (cal.n != n)
        throw InvalidArgument("cached calibration is for a different qubit count");
    const auto plan = characterization_sweep_plan(target, config.n_theta, config.axes);
    auto records = execute_sweeps(plan, noise, config.shots, StreamTag::characterization, config.threads);
    std::vector<SweepFit> fits(records.size());
    parallel_for(records.size(), [&](std::size_t i) { fits[i] = fit_sweep(records[i], cal, config.fit); },
                 config.threads);
    auto recon = reconstruct_unitary(fits, n, config.reconstruct);
    return {std::move(cal), std::move(records), std::move(fits), std::move(recon)};
}

} // namespace ppc
