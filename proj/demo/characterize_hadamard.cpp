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

// Characterizes a Hadamard gate on a simulated device with readout errors
// and a preparation phase offset, then runs tomography on the same device.

#include <iostream>

#include "ppc/characterization.hpp"
#include "ppc/qpt.hpp"

int main() {
    using namespace ppc;

    const UnitaryOperator target(gates::H());
    NoiseProfile device;
    device.transition = TransitionMatrix::from_qubit_fidelities({{0.93, 0.90}});
    device.prep_phase = PrepPhases::uniform(1, 0.05, 0.05);
    device.seed = 2024;

    CharacterizationConfig config;
    config.shots = Shots::of(5000);
    const CharacterizationResult result = characterize(target, device, config);
    const PpcAssessment ppc = assess(result.reconstruction, target);

    std::cout << "calibrated T:\n" << result.calibration.transition.matrix() << "\n";
    std::cout << "calibrated theta0 (Y): " << result.calibration.prep_phase_for(0, Axis::Y) << "\n";
    std::cout << "reconstructed U:\n" << result.reconstruction.u_hat.matrix() << "\n";
    std::cout << "sweep fidelity:       " << ppc.process_fidelity << "\n";

    const QptResult qpt = run_qpt(target, device, Shots::of(5000));
    std::cout << "tomography fidelity:  " << process_fidelity(qpt.estimate.chi, chi_from_unitary(target)) << "\n";
}
