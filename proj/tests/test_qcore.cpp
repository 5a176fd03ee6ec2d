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

#include "ppc/qcore.hpp"
#include "support.hpp"

using namespace ppc;
using Catch::Approx;

TEST_CASE("basis labels put qubit 0 first", "[qcore]") {
    CHECK(basis_label(1, 3) == "001");
    CHECK(basis_label(4, 3) == "100");
    CHECK(parse_basis_label("110") == 6);
    CHECK(qubit_mask(0, 2) == 2);
    CHECK(qubit_mask(1, 2) == 1);
    CHECK_THROWS_AS(parse_basis_label("102"), InvalidArgument);
}

TEST_CASE("dimension helpers validate their input", "[qcore]") {
    CHECK(dim_for_qubits(3) == 8);
    CHECK(qubits_for_dim(16) == 4);
    CHECK_THROWS_AS(dim_for_qubits(0), InvalidArgument);
    CHECK_THROWS_AS(qubits_for_dim(6), InvalidArgument);
    CHECK_THROWS_AS(qubits_for_dim(1), InvalidArgument);
}

TEST_CASE("UnitaryOperator rejects non-unitary and non-square input", "[qcore]") {
    CMatrix m = CMatrix::Identity(2, 2);
    m(0, 0) = 2.0;
    CHECK_THROWS_AS(UnitaryOperator(m), InvalidArgument);
    CHECK_THROWS_AS(UnitaryOperator(CMatrix::Identity(3, 3)), InvalidArgument);
    CHECK_THROWS_AS(UnitaryOperator(CMatrix::Identity(2, 4)), InvalidArgument);
    CHECK(UnitaryOperator::identity(2).dim() == 4);
}

TEST_CASE("rotation conventions", "[qcore]") {
    const double t = 0.7;
    const CMatrix ry = gates::RY(t);
    CHECK(std::abs(ry(0, 0) - std::cos(t / 2)) < 1e-15);
    CHECK(std::abs(ry(1, 0) - std::sin(t / 2)) < 1e-15);
    CHECK(std::abs(ry(0, 1) + std::sin(t / 2)) < 1e-15);
    const CMatrix rx = gates::RX(t);
    CHECK(std::abs(rx(1, 0) - cplx(0, -std::sin(t / 2))) < 1e-15);
    // RX(pi) = -i X, RY(pi) = -i Y
    CHECK((gates::RX(kPi) - cplx(0, -1) * gates::X()).norm() < 1e-15);
    CHECK((gates::RY(kPi) - cplx(0, -1) * gates::Y()).norm() < 1e-15);
}

TEST_CASE("embedding places gates on the right qubits", "[qcore]") {
    CHECK((embed(gates::X(), {1}, 2) - kron(gates::I(), gates::X())).norm() < 1e-15);
    CHECK((embed(gates::X(), {0}, 2) - kron(gates::X(), gates::I())).norm() < 1e-15);
    // CX with control 1 and target 0 maps |01> to |11>.
    const CMatrix cx10 = embed(gates::CX(), {1, 0}, 2);
    CHECK(std::abs(cx10(3, 1) - 1.0) < 1e-15);
    CHECK(std::abs(cx10(2, 2) - 1.0) < 1e-15);
    CHECK((embed(gates::CX(), {0, 1}, 2) - gates::CX()).norm() < 1e-15);
    CHECK_THROWS_AS(embed(gates::X(), {2}, 2), InvalidArgument);
    CHECK_THROWS_AS(embed(gates::CX(), {1, 1}, 2), InvalidArgument);
}

TEST_CASE("Pauli basis is orthogonal and lexicographic", "[qcore]") {
    for (int n : {1, 2}) {
        const auto basis = pauli_basis(n);
        REQUIRE(static_cast<Index>(basis.size()) == pauli_count(n));
        for (std::size_t k = 0; k < basis.size(); ++k)
            for (std::size_t l = 0; l < basis.size(); ++l) {
                const cplx ip = (basis[k].matrix().adjoint() * basis[l].matrix()).trace();
                CHECK(std::abs(ip - (k == l ? double(1 << n) : 0.0)) < 1e-12);
            }
    }
    CHECK(pauli_label(0, 2) == "II");
    CHECK(pauli_label(6, 2) == "XY");
    CHECK(pauli_label(15, 2) == "ZZ");
    CHECK((pauli_string(6, 2) - kron(gates::X(), gates::Y())).norm() < 1e-15);
}

TEST_CASE("chi of the Hadamard gate", "[qcore]") {
    // H = (X + Z)/sqrt(2): u_X = u_Z = 1/sqrt(2), all other coefficients 0.
    const ProcessMatrix chi = chi_from_unitary(UnitaryOperator(gates::H()));
    const Index X = 1, Z = 3;
    for (Index k = 0; k < 4; ++k)
        for (Index l = 0; l < 4; ++l) {
            const double expected = ((k == X || k == Z) && (l == X || l == Z)) ? 0.5 : 0.0;
            CHECK(std::abs(chi.chi(k, l) - expected) < 1e-15);
        }
    CHECK(std::abs(chi.trace() - 1.0) < 1e-15);
    const ProcessMatrix chi_d = chi_from_unitary(UnitaryOperator(gates::H()), Normalization::trace_d);
    CHECK(std::abs(chi_d.trace() - 2.0) < 1e-14);
    CHECK((chi_d.renormalized(Normalization::trace_one).chi - chi.chi).norm() < 1e-14);
}

TEST_CASE("chi reproduces the unitary channel", "[qcore]") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 1 + trial % 2;
        const UnitaryOperator u = testing::random_unitary(n, rng);
        const CMatrix rho = testing::random_density(n, rng);
        const CMatrix expected = u.matrix() * rho * u.matrix().adjoint();
        for (Normalization norm : {Normalization::trace_one, Normalization::trace_d}) {
            const ProcessMatrix chi = chi_from_unitary(u, norm);
            CHECK((apply_process(chi, rho) - expected).norm() < 1e-12);
            CHECK((chi.chi - chi.chi.adjoint()).norm() < 1e-13);
            Eigen::SelfAdjointEigenSolver<CMatrix> eig(chi.chi);
            CHECK(eig.eigenvalues()(eig.eigenvalues().size() - 2) < 1e-12); // rank one
        }
        CHECK((unitary_from_coefficients(pauli_coefficients(u)) - u.matrix()).norm() < 1e-12);
        CHECK((unitary_from_coefficients(pauli_coefficients(u, Normalization::trace_d)) - u.matrix()).norm() < 1e-12);
    }
}

TEST_CASE("normalization names round trip", "[qcore]") {
    for (Normalization n : {Normalization::trace_one, Normalization::trace_d})
        CHECK(parse_normalization(to_string(n)) == n);
    CHECK_THROWS_AS(parse_normalization("unit"), InvalidArgument);
}

TEST_CASE("named gates", "[qcore]") {
    CHECK((named_gate("CNOT") - gates::CX()).norm() == 0.0);
    CHECK((gates::S() * gates::S() - gates::Z()).norm() < 1e-15);
    CHECK((gates::T() * gates::T() - gates::S()).norm() < 1e-15);
    CHECK_THROWS_AS(named_gate("toffoli"), InvalidArgument);
}
