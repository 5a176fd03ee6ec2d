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
/// Rotation sweeps shared by calibration and characterization: the angle
/// grid, the per-sweep data record and batch execution on the simulator.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ppc/simulator.hpp"

namespace ppc {

/// Default grid sizes for Y and X sweeps.
inline constexpr int kDefaultNThetaY = 51;
inline constexpr int kDefaultNThetaX = 41;

inline int default_n_theta(Axis axis) { return axis == Axis::Y ? kDefaultNThetaY : kDefaultNThetaX; }

/// theta_j = (2j / n_theta - 1) pi for j = 0..n_theta: n_theta intervals,
/// n_theta + 1 points, endpoints -pi and pi.
inline std::vector<double> angle_grid(int n_theta) {
    if (n_theta < 3)
        throw InvalidArgument("angle grid needs n_theta >= 3");
    std::vector<double> grid(static_cast<std::size_t>(n_theta) + 1);
    for (int j = 0; j <= n_theta; ++j)
        grid[static_cast<std::size_t>(j)] = (2.0 * j / n_theta - 1.0) * kPi;
    grid.back() = kPi;
    return grid;
}

/// One rotation sweep: basis state |k> with qubit s in |0>, rotated about
/// `axis` on qubit s through every grid angle.
struct SweepRecord {
    int n = 1;
    /// Full basis label of the prepared state; its qubit-s bit is 0.
    std::uint64_t k = 0;
    int s = 0;
    Axis axis = Axis::Y;
    std::vector<double> angles;
    std::vector<RVector> distributions;
    /// Raw counts per angle; empty in exact mode.
    std::vector<std::vector<std::int64_t>> counts;
    Shots shots = Shots::exact_mode();
    bool mitigated = false;

    std::uint64_t partner() const { return k | qubit_mask(s, n); }

    void validate() const {
        dim_for_qubits(n);
        if (s < 0 || s >= n)
            throw InvalidArgument("sweep qubit out of range");
        if (k >= (std::uint64_t{1} << n))
            throw InvalidArgument("sweep basis label out of range");
        if (k & qubit_mask(s, n))
            throw InvalidArgument("rotated qubit must start in |0> (bit s of k must be 0)");
        if (angles.size() != distributions.size())
            throw InvalidArgument("sweep has " + std::to_string(angles.size()) + " angles but " +
                                  std::to_string(distributions.size()) + " distributions");
        for (const RVector& p : distributions)
            ProbabilityDistribution::from_probabilities(p, 1e-9);
    }
};

/// A sweep to execute: the record skeleton (angles, labels) and one circuit
/// per angle.
struct PlannedSweep {
    SweepRecord record;
    std::vector<CircuitSpec> circuits;
};

/// Gates preparing basis state |k> from |0...0>.
inline std::vector<Gate> basis_preparation(std::uint64_t k, int n) {
    std::vector<Gate> g;
    for (int q = 0; q < n; ++q)
        if (k & qubit_mask(q, n))
            g.push_back(Gate::x(q));
    return g;
}

/// Basis labels with bit s cleared, in increasing order (2^(n-1) of them).
inline std::vector<std::uint64_t> labels_with_qubit_zero(int n, int s) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t k = 0; k < (std::uint64_t{1} << n); ++k)
        if (!(k & qubit_mask(s, n)))
            out.push_back(k);
    return out;
}

/// Builds a sweep preparing |k> (bit s = 0), rotating qubit s through the
/// grid with a swept rotation, then appending `tail` gates.
inline PlannedSweep make_sweep(int n, std::uint64_t k, int s, Axis axis, const std::vector<double>& grid,
                               const std::vector<Gate>& tail) {
    PlannedSweep p;
    p.record.n = n;
    p.record.k = k;
    p.record.s = s;
    p.record.axis = axis;
    p.record.angles = grid;
    for (double theta : grid) {
        CircuitSpec c;
        c.n = n;
        c.gates = basis_preparation(k, n);
        c.gates.push_back(Gate::rotation(axis, s, theta, /*swept=*/true));
        c.gates.insert(c.gates.end(), tail.begin(), tail.end());
        p.circuits.push_back(std::move(c));
    }
    return p;
}

inline std::size_t circuit_count(std::span<const PlannedSweep> plan) {
    std::size_t total = 0;
    for (const PlannedSweep& p : plan)
        total += p.circuits.size();
    return total;
}

/// Executes every planned circuit. Circuit i (in plan order) samples on
/// stream stream_id(tag, i) of noise.seed.
inline std::vector<SweepRecord> execute_sweeps(std::span<const PlannedSweep> plan, const NoiseProfile& noise,
                                               Shots shots, StreamTag tag, unsigned threads = 0) {
    std::vector<CircuitSpec> flat;
    for (const PlannedSweep& p : plan)
        flat.insert(flat.end(), p.circuits.begin(), p.circuits.end());
    const auto runs = run_batch(flat, noise, shots, stream_id(tag, 0), threads);
    std::vector<SweepRecord> out;
    std::size_t i = 0;
    for (const PlannedSweep& p : plan) {
        SweepRecord r = p.record;
        r.shots = shots;
        for (std::size_t a = 0; a < p.circuits.size(); ++a, ++i) {
            r.distributions.push_back(runs[i].distribution.probabilities());
            if (!shots.exact)
                r.counts.push_back(runs[i].counts);
        }
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace ppc
