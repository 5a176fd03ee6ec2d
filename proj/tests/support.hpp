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

#include <Eigen/QR>

#include <random>

#include "ppc/qcore.hpp"

namespace ppc::testing {

/// Haar-random unitary: QR of a complex Gaussian matrix with R's diagonal
/// phases folded back into Q.
inline UnitaryOperator random_unitary(int n, std::mt19937_64& rng) {
    const Index d = dim_for_qubits(n);
    std::normal_distribution<double> g;
    CMatrix z(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j)
            z(i, j) = cplx(g(rng), g(rng));
    Eigen::HouseholderQR<CMatrix> qr(z);
    CMatrix q = qr.householderQ();
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < d; ++j)
        q.col(j) *= r(j, j) / std::abs(r(j, j));
    return UnitaryOperator(q);
}

inline CMatrix random_density(int n, std::mt19937_64& rng) {
    const Index d = dim_for_qubits(n);
    std::normal_distribution<double> g;
    CMatrix a(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j)
            a(i, j) = cplx(g(rng), g(rng));
    CMatrix rho = a * a.adjoint();
    return rho / rho.trace();
}

inline CMatrix random_diagonal_phases(Index d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> phase(-kPi, kPi);
    CMatrix dm = CMatrix::Zero(d, d);
    for (Index j = 0; j < d; ++j)
        dm(j, j) = std::polar(1.0, phase(rng));
    return dm;
}

} // namespace ppc::testing
