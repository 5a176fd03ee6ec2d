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
/// Angle-sweep calibration of the readout transition matrix T and the
/// preparation phase theta0.
///
/// Rotating qubit s of |k> (bit s = 0) through theta produces populations
/// cos^2(phi/2) on |k> and sin^2(phi/2) on |k + 1_s>, phi = theta + theta0.
/// The observed distribution is T(:, k) cos^2(phi/2) + T(:, k + 1_s) sin^2(phi/2),
/// so each sweep determines two columns of T; theta0 is shared by every sweep
/// of one (qubit, axis).

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ppc/estimation.hpp"
#include "ppc/sweep.hpp"

namespace ppc {

struct CalibrationOptions {
    /// Qubits rotated during calibration. Each sweep set costs 2^(n-1)
    /// preparations per axis.
    std::vector<int> rotated_qubits{0};
    PhaseSearch search{};
    unsigned threads = 0;
};

/// Circuits for every axis, rotated qubit and preparation |0_q, k>:
/// |axes| * |rotated qubits| * 2^(n-1) * (n_theta + 1) in total.
inline std::vector<PlannedSweep> calibration_sweep_plan(int n, int n_theta, const std::vector<Axis>& axes,
                                                        const std::vector<int>& rotated_qubits = {0}) {
    dim_for_qubits(n);
    if (axes.empty())
        throw InvalidArgument("calibration needs at least one axis");
    const auto grid = angle_grid(n_theta);
    std::vector<PlannedSweep> plan;
    for (Axis axis : axes)
        for (int q : rotated_qubits) {
            if (q < 0 || q >= n)
                throw InvalidArgument("calibration qubit " + std::to_string(q) + " out of range");
            for (std::uint64_t k : labels_with_qubit_zero(n, q))
                plan.push_back(make_sweep(n, k, q, axis, grid, {}));
        }
    return plan;
}

struct CalibrationGroupSummary {
    int qubit = 0;
    Axis axis = Axis::Y;
    double residual = 0.0;
    int solves = 0;
    bool at_boundary = false;
};

struct CalibrationResult {
    int n = 1;
    TransitionMatrix transition;
    RMatrix transition_std_error;
    PrepPhases prep_phase;
    std::map<std::pair<int, Axis>, double> prep_phase_std_error;
    std::vector<double> angles;
    Shots shots = Shots::exact_mode();
    std::vector<CalibrationGroupSummary> groups;
    /// Identifies the (configuration, seed) that produced this result; empty
    /// when not computed.
    std::string content_hash;

    /// theta0 for a swept rotation on `qubit`. Qubits that were not rotated
    /// during calibration use the lowest calibrated qubit of the same axis.
    double prep_phase_for(int qubit, Axis axis) const {
        if (prep_phase.contains(qubit, axis))
            return prep_phase.get(qubit, axis);
        for (const auto& [key, value] : prep_phase.values())
            if (key.second == axis)
                return value;
        return 0.0;
    }

    /// Perfect readout and zero offset, for running characterization without
    /// calibration.
    static CalibrationResult trivial(int n) {
        CalibrationResult r;
        r.n = n;
        r.transition = TransitionMatrix::identity(n);
        r.transition_std_error = RMatrix::Zero(dim_for_qubits(n), dim_for_qubits(n));
        return r;
    }
};

/// Fits T and theta0 from calibration sweeps. Sweeps are grouped by
/// (rotated qubit, axis); each group shares one theta0. Column estimates from
/// several groups are combined by inverse variance and every column is then
/// projected onto the probability simplex.
inline CalibrationResult fit_calibration(std::span<const SweepRecord> records, const PhaseSearch& search = {}) {
    if (records.empty())
        throw IncompleteCalibration("no calibration sweeps supplied");
    const int n = records.front().n;
    const Index d = dim_for_qubits(n);
    std::map<std::pair<int, Axis>, std::vector<const SweepRecord*>> groups;
    for (const SweepRecord& r : records) {
        r.validate();
        if (r.n != n)
            throw InvalidArgument("calibration sweeps disagree on qubit count");
        groups[{r.s, r.axis}].push_back(&r);
    }

    CalibrationResult out;
    out.n = n;
    out.angles = records.front().angles;
    out.shots = records.front().shots;

    struct ColumnEstimate {
        RVector value, se;
    };
    std::map<std::uint64_t, std::vector<ColumnEstimate>> columns;
    const PhaseModel model = population_model();
    for (const auto& [key, group] : groups) {
        std::vector<PhaseBlock> blocks;
        for (const SweepRecord* r : group)
            blocks.push_back({r->angles, r->distributions});
        const PhaseFit fit = fit_phase_and_linear(blocks, model, search);
        out.prep_phase.set(key.first, key.second, fit.phase);
        out.prep_phase_std_error[key] = fit.phase_std_error;
        out.groups.push_back({key.first, key.second, fit.residual, fit.solves, fit.at_boundary});
        for (std::size_t b = 0; b < group.size(); ++b) {
            const RMatrix& coef = fit.coefficients[b];
            const RMatrix& se = fit.std_errors[b];
            columns[group[b]->k].push_back({coef.row(0).transpose(), se.row(0).transpose()});
            columns[group[b]->partner()].push_back({coef.row(1).transpose(), se.row(1).transpose()});
        }
    }

    std::vector<std::uint64_t> missing;
    for (std::uint64_t c = 0; c < static_cast<std::uint64_t>(d); ++c)
        if (!columns.count(c))
            missing.push_back(c);
    if (!missing.empty()) {
        std::string list;
        for (auto c : missing)
            list += (list.empty() ? "" : ", ") + std::to_string(c);
        throw IncompleteCalibration("calibration does not determine transition columns: " + list);
    }

    RMatrix t(d, d), t_se(d, d);
    for (const auto& [c, estimates] : columns) {
        RVector value = RVector::Zero(d), se = RVector::Zero(d);
        for (Index j = 0; j < d; ++j) {
            bool all_positive = true;
            for (const auto& e : estimates)
                all_positive = all_positive && e.se(j) > 0;
            if (all_positive) {
                double wsum = 0.0, acc = 0.0;
                for (const auto& e : estimates) {
                    const double w = 1.0 / (e.se(j) * e.se(j));
                    wsum += w;
                    acc += w * e.value(j);
                }
                value(j) = acc / wsum;
                se(j) = 1.0 / std::sqrt(wsum);
            } else {
                for (const auto& e : estimates) {
                    value(j) += e.value(j);
                    se(j) += e.se(j);
                }
                value(j) /= static_cast<double>(estimates.size());
                se(j) /= static_cast<double>(estimates.size());
            }
        }
        t.col(static_cast<Index>(c)) = project_to_simplex(value);
        t_se.col(static_cast<Index>(c)) = se;
    }
    out.transition = TransitionMatrix(t);
    out.transition_std_error = t_se;
    return out;
}

/// Plans, executes and fits a calibration run.
inline CalibrationResult calibrate(int n, int n_theta, const std::vector<Axis>& axes, const NoiseProfile& noise,
                                   Shots shots, const CalibrationOptions& options = {}) {
    const auto plan = calibration_sweep_plan(n, n_theta, axes, options.rotated_qubits);
    const auto records = execute_sweeps(plan, noise, shots, StreamTag::calibration, options.threads);
    return fit_calibration(records, options.search);
}

// ---------------------------------------------------------------------------
// Hyperparameter sweep over (n_theta, shots)

struct HyperparameterRow {
    int n_theta = 0;
    /// 0 in exact mode.
    std::int64_t shots = 0;
    std::string parameter;
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Parameter names: "t_j_k" for transition entries, "theta0_<axis>_q<qubit>"
/// for preparation phases.
inline std::vector<std::pair<std::string, std::pair<double, double>>>
calibration_parameters(const CalibrationResult& r) {
    std::vector<std::pair<std::string, std::pair<double, double>>> out;
    const Index d = r.transition.dim();
    for (Index k = 0; k < d; ++k)
        for (Index j = 0; j < d; ++j)
            out.push_back({"t_" + std::to_string(j) + "_" + std::to_string(k),
                           {r.transition(j, k), r.transition_std_error(j, k)}});
    for (const auto& [key, value] : r.prep_phase.values())
        out.push_back({"theta0_" + to_string(key.second) + "_q" + std::to_string(key.first),
                       {value, r.prep_phase_std_error.at(key)}});
    return out;
}

/// Repeats calibration `repetitions` times per (n_theta, shots) grid point.
/// Each row reports the mean estimate and the root-mean-square fitted
/// standard error across repetitions. Repetition r of grid point g samples
/// with master seed derive_seed(noise.seed, stream_id(user, g * repetitions + r)).
inline std::vector<HyperparameterRow>
calibration_hyperparameter_sweep(int n, const std::vector<int>& n_thetas, const std::vector<Shots>& shot_grid,
                                 const std::vector<Axis>& axes, const NoiseProfile& noise, int repetitions = 1,
                                 const CalibrationOptions& options = {}) {
    if (n_thetas.empty() || shot_grid.empty())
        throw InvalidArgument("hyperparameter grids must be nonempty");
    if (repetitions < 1)
        throw InvalidArgument("repetitions must be >= 1");
    std::vector<HyperparameterRow> rows;
    std::uint64_t grid_index = 0;
    for (int n_theta : n_thetas)
        for (const Shots& shots : shot_grid) {
            std::vector<std::string> names;
            std::vector<double> est_sum, se_sq_sum;
            for (int rep = 0; rep < repetitions; ++rep) {
                NoiseProfile run_noise = noise;
                run_noise.seed = derive_seed(
                    noise.seed, stream_id(StreamTag::user, grid_index * static_cast<std::uint64_t>(repetitions) +
                                                               static_cast<std::uint64_t>(rep)));
                const auto params = calibration_parameters(calibrate(n, n_theta, axes, run_noise, shots, options));
                if (names.empty()) {
                    for (const auto& p : params)
                        names.push_back(p.first);
                    est_sum.assign(params.size(), 0.0);
                    se_sq_sum.assign(params.size(), 0.0);
                }
                for (std::size_t i = 0; i < params.size(); ++i) {
                    est_sum[i] += params[i].second.first;
                    se_sq_sum[i] += params[i].second.second * params[i].second.second;
                }
            }
            for (std::size_t i = 0; i < names.size(); ++i)
                rows.push_back({n_theta, shots.exact ? 0 : shots.count, names[i], est_sum[i] / repetitions,
                                std::sqrt(se_sq_sum[i] / repetitions)});
            ++grid_index;
        }
    return rows;
}

} // namespace ppc
