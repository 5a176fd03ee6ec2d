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

#include "catch_amalgamated.hpp"

#include "ppc/calibration.hpp"
#include "support.hpp"

using namespace ppc;

TEST_CASE("calibration plan size", "[calibration]") {
    for (int n = 1; n <= 4; ++n) {
        const auto plan = calibration_sweep_plan(n, 20, {Axis::Y, Axis::X});
        CHECK(plan.size() == 2u * (1u << (n - 1)));
        CHECK(circuit_count(plan) == 2u * (1u << (n - 1)) * 21u);
        for (const auto& p : plan)
            CHECK(((p.record.k >> (n - 1)) & 1u) == 0u);
    }
    CHECK(calibration_sweep_plan(3, 10, {Axis::Y}, {0, 2}).size() == 8u);
    CHECK_THROWS_AS(calibration_sweep_plan(2, 10, {}), InvalidArgument);
    CHECK_THROWS_AS(calibration_sweep_plan(2, 10, {Axis::Y}, {2}), InvalidArgument);
}

TEST_CASE("exact calibration recovers readout and phase offsets", "[calibration]") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> offset(-0.3, 0.3);
    for (int n = 1; n <= 2; ++n)
        for (int trial = 0; trial < 3; ++trial) {
            NoiseProfile noise{TransitionMatrix::random(n, 0.8, 0.97, rng), {}, 7};
            const double ty = offset(rng), tx = offset(rng);
            noise.prep_phase.set(0, Axis::Y, ty);
            noise.prep_phase.set(0, Axis::X, tx);
            const CalibrationResult cal = calibrate(n, 30, {Axis::Y, Axis::X}, noise, Shots::exact_mode());
            CHECK((cal.transition.matrix() - noise.transition.matrix()).cwiseAbs().maxCoeff() < 1e-8);
            CHECK(std::abs(cal.prep_phase.get(0, Axis::Y) - ty) < 1e-8);
            CHECK(std::abs(cal.prep_phase.get(0, Axis::X) - tx) < 1e-8);
            CHECK(cal.groups.size() == 2u);
        }
}

TEST_CASE("sampled calibration is close to the truth", "[calibration]") {
    NoiseProfile noise{TransitionMatrix::from_qubit_fidelities({{0.93, 0.9}}), {}, 99};
    noise.prep_phase.set(0, Axis::Y, 0.05);
    const CalibrationResult cal = calibrate(1, 50, {Axis::Y}, noise, Shots::of(5000));
    CHECK((cal.transition.matrix() - noise.transition.matrix()).cwiseAbs().maxCoeff() < 0.01);
    CHECK(std::abs(cal.prep_phase.get(0, Axis::Y) - 0.05) < 0.02);
    CHECK(cal.prep_phase_std_error.at({0, Axis::Y}) > 0.0);
    CHECK(cal.prep_phase_std_error.at({0, Axis::Y}) < 0.01);
    for (Index c = 0; c < 2; ++c)
        CHECK(std::abs(cal.transition.matrix().col(c).sum() - 1.0) < 1e-12);
}

TEST_CASE("missing calibration columns", "[calibration]") {
    CHECK_THROWS_AS(fit_calibration({}), IncompleteCalibration);
    auto plan = calibration_sweep_plan(2, 10, {Axis::Y});
    plan.pop_back();
    const auto records = execute_sweeps(plan, NoiseProfile::ideal(2), Shots::exact_mode(), StreamTag::calibration);
    CHECK_THROWS_AS(fit_calibration(records), IncompleteCalibration);
}

TEST_CASE("phase offset fallback for uncalibrated qubits", "[calibration]") {
    CalibrationResult r = CalibrationResult::trivial(3);
    CHECK(r.prep_phase_for(1, Axis::Y) == 0.0);
    r.prep_phase.set(0, Axis::Y, 0.04);
    r.prep_phase.set(2, Axis::Y, 0.07);
    CHECK(r.prep_phase_for(2, Axis::Y) == 0.07);
    CHECK(r.prep_phase_for(1, Axis::Y) == 0.04);
    CHECK(r.prep_phase_for(1, Axis::X) == 0.0);
}

TEST_CASE("calibration is deterministic in the seed", "[calibration]") {
    NoiseProfile noise{TransitionMatrix::from_qubit_fidelities({{0.95, 0.9}, {0.9, 0.92}}), {}, 12345};
    noise.prep_phase.set(0, Axis::Y, 0.03);
    const auto a = calibrate(2, 20, {Axis::Y}, noise, Shots::of(500), {{0}, {}, 1});
    const auto b = calibrate(2, 20, {Axis::Y}, noise, Shots::of(500), {{0}, {}, 4});
    CHECK(a.transition.matrix() == b.transition.matrix());
    CHECK(a.prep_phase == b.prep_phase);
    noise.seed = 12346;
    const auto c = calibrate(2, 20, {Axis::Y}, noise, Shots::of(500));
    CHECK(a.transition.matrix() != c.transition.matrix());
}

TEST_CASE("hyperparameter sweep rows", "[calibration]") {
    NoiseProfile noise{TransitionMatrix::from_qubit_fidelities({{0.9, 0.8}}), {}, 5};
    noise.prep_phase.set(0, Axis::Y, 0.05);
    const std::vector<int> n_thetas{11, 21, 31, 41, 51, 61, 71};
    const auto exact = calibration_hyperparameter_sweep(1, n_thetas, {Shots::exact_mode(), Shots::exact_mode()},
                                                        {Axis::Y}, noise);
    // Four transition entries and one phase offset per grid point.
    CHECK(exact.size() == 5u * 14u);
    std::map<std::string, int> per_parameter;
    for (const auto& row : exact) {
        ++per_parameter[row.parameter];
        CHECK(row.std_error < 1e-9);
        CHECK(row.shots == 0);
    }
    CHECK(per_parameter.size() == 5u);
    for (const auto& [name, count] : per_parameter)
        CHECK(count == 14);

    const auto sampled =
        calibration_hyperparameter_sweep(1, {11, 71}, {Shots::of(2000)}, {Axis::Y}, noise, 3);
    double se_small = 0.0, se_large = 0.0;
    for (const auto& row : sampled)
        if (row.parameter == "theta0_Y_q0")
            (row.n_theta == 11 ? se_small : se_large) = row.std_error;
    CHECK(se_small > 0.0);
    CHECK(se_large < se_small / 1.8);
    CHECK_THROWS_AS(calibration_hyperparameter_sweep(1, {}, {Shots::of(10)}, {Axis::Y}, noise), InvalidArgument);
}
