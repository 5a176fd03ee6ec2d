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
/// Dense linear algebra over the 2^n-dimensional qubit Hilbert space: named
/// gates, tensor embedding, the Pauli basis and process matrices built from
/// unitaries.
///
/// Conventions used throughout the library:
///  - qubit 0 is the most significant bit of a basis index, so |q0 q1 ...>
///    has index sum_q b_q 2^(n-1-q);
///  - operator matrices are indexed (output, input);
///  - the n-qubit Pauli basis is ordered lexicographically over (I, X, Y, Z)
///    with qubit 0 as the most significant digit, i.e. index
///    sum_q d_q 4^(n-1-q).

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "ppc/errors.hpp"

namespace ppc {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kPi = std::numbers::pi;
inline constexpr int kMaxQubits = 8;

inline Index dim_for_qubits(int n) {
    if (n < 1 || n > kMaxQubits)
        throw InvalidArgument("qubit count must be in [1, " + std::to_string(kMaxQubits) +
                              "], got " + std::to_string(n));
    return Index{1} << n;
}

inline int qubits_for_dim(Index dim) {
    if (dim < 2 || (dim & (dim - 1)) != 0)
        throw InvalidArgument("dimension must be a power of two >= 2, got " + std::to_string(dim));
    int n = 0;
    while ((Index{1} << n) < dim)
        ++n;
    return n;
}

/// Mask selecting qubit q inside a basis index of an n-qubit register.
inline std::uint64_t qubit_mask(int q, int n) { return std::uint64_t{1} << (n - 1 - q); }

/// Basis index rendered as a bit string, qubit 0 first.
inline std::string basis_label(std::uint64_t index, int n) {
    std::string s(static_cast<std::size_t>(n), '0');
    for (int q = 0; q < n; ++q)
        if (index & qubit_mask(q, n))
            s[static_cast<std::size_t>(q)] = '1';
    return s;
}

inline std::uint64_t parse_basis_label(std::string_view s) {
    std::uint64_t v = 0;
    for (char c : s) {
        if (c != '0' && c != '1')
            throw InvalidArgument("basis label must be a bit string, got '" + std::string(s) + "'");
        v = (v << 1) | static_cast<std::uint64_t>(c == '1');
    }
    return v;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out = Eigen::kroneckerProduct(a, b).eval();
    return out;
}

/// Largest absolute entry of U^dagger U - I.
inline double unitarity_defect(const CMatrix& m) {
    return (m.adjoint() * m - CMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

/// A dense 2^n x 2^n unitary; construction checks the shape and U^dagger U = I.
class UnitaryOperator {
  public:
    explicit UnitaryOperator(CMatrix m, double tolerance = 1e-10) : m_(std::move(m)) {
        if (m_.rows() != m_.cols())
            throw InvalidArgument("unitary must be square");
        n_ = qubits_for_dim(m_.rows());
        const double defect = unitarity_defect(m_);
        if (!(defect <= tolerance))
            throw InvalidArgument("matrix is not unitary (max |U'U - I| = " + std::to_string(defect) + ")");
    }

    static UnitaryOperator identity(int n) {
        return UnitaryOperator(CMatrix::Identity(dim_for_qubits(n), dim_for_qubits(n)));
    }

    int qubits() const noexcept { return n_; }
    Index dim() const noexcept { return m_.rows(); }
    const CMatrix& matrix() const noexcept { return m_; }
    cplx operator()(Index row, Index col) const { return m_(row, col); }

    UnitaryOperator adjoint() const { return UnitaryOperator(m_.adjoint()); }

    friend UnitaryOperator operator*(const UnitaryOperator& a, const UnitaryOperator& b) {
        if (a.dim() != b.dim())
            throw InvalidArgument("unitary dimension mismatch");
        return UnitaryOperator(a.m_ * b.m_);
    }

  private:
    CMatrix m_;
    int n_ = 0;
};

namespace gates {

inline CMatrix I() { return CMatrix::Identity(2, 2); }

inline CMatrix X() {
    CMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline CMatrix Y() {
    CMatrix m(2, 2);
    m << 0, cplx(0, -1), cplx(0, 1), 0;
    return m;
}

inline CMatrix Z() {
    CMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

inline CMatrix H() {
    CMatrix m(2, 2);
    const double r = 1.0 / std::sqrt(2.0);
    m << r, r, r, -r;
    return m;
}

inline CMatrix S() {
    CMatrix m(2, 2);
    m << 1, 0, 0, cplx(0, 1);
    return m;
}

inline CMatrix T() {
    CMatrix m(2, 2);
    m << 1, 0, 0, std::polar(1.0, kPi / 4);
    return m;
}

/// exp(-i theta sigma_y / 2)
inline CMatrix RY(double theta) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    CMatrix m(2, 2);
    m << c, -s, s, c;
    return m;
}

/// exp(-i theta sigma_x / 2)
inline CMatrix RX(double theta) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    CMatrix m(2, 2);
    m << c, cplx(0, -s), cplx(0, -s), c;
    return m;
}

/// Controlled-X with the control on the first (most significant) qubit.
inline CMatrix CX() {
    CMatrix m = CMatrix::Zero(4, 4);
    m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
    return m;
}

inline CMatrix CZ() {
    CMatrix m = CMatrix::Identity(4, 4);
    m(3, 3) = -1;
    return m;
}

inline CMatrix SWAP() {
    CMatrix m = CMatrix::Zero(4, 4);
    m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1;
    return m;
}

} // namespace gates

/// Looks up a fixed gate by name (I, X, Y, Z, H, S, T, CX/CNOT, CZ, SWAP).
inline CMatrix named_gate(std::string_view name) {
    if (name == "I" || name == "id")
        return gates::I();
    if (name == "X")
        return gates::X();
    if (name == "Y")
        return gates::Y();
    if (name == "Z")
        return gates::Z();
    if (name == "H")
        return gates::H();
    if (name == "S")
        return gates::S();
    if (name == "T")
        return gates::T();
    if (name == "CX" || name == "CNOT")
        return gates::CX();
    if (name == "CZ")
        return gates::CZ();
    if (name == "SWAP")
        return gates::SWAP();
    throw InvalidArgument("unknown gate '" + std::string(name) + "'");
}

/// Embeds a k-qubit gate acting on `targets` (targets[0] is the gate's most
/// significant qubit) into an n-qubit operator.
inline CMatrix embed(const CMatrix& gate, const std::vector<int>& targets, int n) {
    const Index dim = dim_for_qubits(n);
    const int k = static_cast<int>(targets.size());
    if (k < 1 || gate.rows() != (Index{1} << k) || gate.cols() != gate.rows())
        throw InvalidArgument("gate shape does not match its target list");
    std::uint64_t target_mask = 0;
    for (int t : targets) {
        if (t < 0 || t >= n)
            throw InvalidArgument("qubit index " + std::to_string(t) + " out of range for " +
                                  std::to_string(n) + " qubits");
        if (target_mask & qubit_mask(t, n))
            throw InvalidArgument("repeated target qubit " + std::to_string(t));
        target_mask |= qubit_mask(t, n);
    }
    auto local = [&](std::uint64_t idx) {
        std::uint64_t m = 0;
        for (int i = 0; i < k; ++i)
            m = (m << 1) | ((idx & qubit_mask(targets[i], n)) ? 1u : 0u);
        return m;
    };
    CMatrix out = CMatrix::Zero(dim, dim);
    for (Index r = 0; r < dim; ++r)
        for (Index c = 0; c < dim; ++c) {
            const auto ur = static_cast<std::uint64_t>(r), uc = static_cast<std::uint64_t>(c);
            if ((ur & ~target_mask) != (uc & ~target_mask))
                continue;
            out(r, c) = gate(static_cast<Index>(local(ur)), static_cast<Index>(local(uc)));
        }
    return out;
}

// ---------------------------------------------------------------------------
// Pauli basis

inline CMatrix pauli_matrix(int digit) {
    switch (digit) {
    case 0:
        return gates::I();
    case 1:
        return gates::X();
    case 2:
        return gates::Y();
    case 3:
        return gates::Z();
    default:
        throw InvalidArgument("Pauli digit must be 0..3");
    }
}

inline Index pauli_count(int n) { return Index{1} << (2 * n); }

/// Tensor-product Pauli operator with lexicographic index k.
inline CMatrix pauli_string(Index k, int n) {
    CMatrix m = CMatrix::Identity(1, 1);
    for (int q = 0; q < n; ++q) {
        const int digit = static_cast<int>((k >> (2 * (n - 1 - q))) & 3);
        m = kron(m, pauli_matrix(digit));
    }
    return m;
}

inline std::string pauli_label(Index k, int n) {
    static constexpr char kNames[] = {'I', 'X', 'Y', 'Z'};
    std::string s;
    for (int q = 0; q < n; ++q)
        s.push_back(kNames[(k >> (2 * (n - 1 - q))) & 3]);
    return s;
}

/// The 4^n Pauli operators, ordered lexicographically over (I, X, Y, Z) with
/// qubit 0 as the most significant digit. Element 0 is the identity.
inline std::vector<UnitaryOperator> pauli_basis(int n) {
    if (n < 1)
        throw InvalidArgument("pauli_basis needs n >= 1");
    dim_for_qubits(n);
    std::vector<UnitaryOperator> basis;
    basis.reserve(static_cast<std::size_t>(pauli_count(n)));
    for (Index k = 0; k < pauli_count(n); ++k)
        basis.emplace_back(pauli_string(k, n));
    return basis;
}

// ---------------------------------------------------------------------------
// Process matrices

/// trace_one: chi has unit trace for a unitary process.
/// trace_d:   chi has trace 2^n.
enum class Normalization { trace_one, trace_d };

inline std::string to_string(Normalization n) {
    return n == Normalization::trace_one ? "trace_one" : "trace_d";
}

inline Normalization parse_normalization(std::string_view s) {
    if (s == "trace_one")
        return Normalization::trace_one;
    if (s == "trace_d")
        return Normalization::trace_d;
    throw InvalidArgument("unknown normalization '" + std::string(s) + "'");
}

/// Trace of chi for a trace-preserving process under the given convention.
inline double chi_trace_scale(Normalization norm, int n) {
    return norm == Normalization::trace_one ? 1.0 : static_cast<double>(dim_for_qubits(n));
}

struct PauliCoefficients {
    int n = 0;
    CVector u;
    Normalization normalization = Normalization::trace_one;
};

struct ProcessMatrix {
    int n = 0;
    CMatrix chi;
    Normalization normalization = Normalization::trace_one;

    cplx trace() const { return chi.trace(); }

    /// Same process expressed in another normalization.
    ProcessMatrix renormalized(Normalization target) const {
        ProcessMatrix out = *this;
        out.chi *= chi_trace_scale(target, n) / chi_trace_scale(normalization, n);
        out.normalization = target;
        return out;
    }
};

/// u_k = tr(U P_k) / 2^n (trace_one) or tr(U P_k) / sqrt(2^n) (trace_d).
inline PauliCoefficients pauli_coefficients(const UnitaryOperator& u,
                                            Normalization norm = Normalization::trace_one) {
    const int n = u.qubits();
    const double d = static_cast<double>(u.dim());
    const double denom = norm == Normalization::trace_one ? d : std::sqrt(d);
    PauliCoefficients out{n, CVector(pauli_count(n)), norm};
    for (Index k = 0; k < pauli_count(n); ++k)
        out.u(k) = (u.matrix() * pauli_string(k, n)).trace() / denom;
    return out;
}

/// Inverse of pauli_coefficients: sum_k u_k P_k, rescaled to the operator.
inline CMatrix unitary_from_coefficients(const PauliCoefficients& c) {
    const Index d = dim_for_qubits(c.n);
    const double scale =
        c.normalization == Normalization::trace_one ? 1.0 : 1.0 / std::sqrt(static_cast<double>(d));
    CMatrix m = CMatrix::Zero(d, d);
    for (Index k = 0; k < c.u.size(); ++k)
        m += c.u(k) * pauli_string(k, c.n);
    return m * scale;
}

/// chi = u u^dagger for the unitary process rho -> U rho U^dagger.
inline ProcessMatrix chi_from_unitary(const UnitaryOperator& u,
                                      Normalization norm = Normalization::trace_one) {
    const PauliCoefficients c = pauli_coefficients(u, norm);
    return ProcessMatrix{c.n, c.u * c.u.adjoint(), norm};
}

/// Applies sum_kl chi_kl P_k rho P_l, divided by the normalization scale so
/// the result is the channel output for either convention.
inline CMatrix apply_process(const ProcessMatrix& p, const CMatrix& rho) {
    const Index d = dim_for_qubits(p.n);
    if (rho.rows() != d || rho.cols() != d)
        throw InvalidArgument("density matrix dimension mismatch");
    std::vector<CMatrix> paulis;
    for (Index k = 0; k < pauli_count(p.n); ++k)
        paulis.push_back(pauli_string(k, p.n));
    CMatrix out = CMatrix::Zero(d, d);
    for (Index k = 0; k < pauli_count(p.n); ++k) {
        const CMatrix left = paulis[static_cast<std::size_t>(k)] * rho;
        for (Index l = 0; l < pauli_count(p.n); ++l)
            if (p.chi(k, l) != cplx(0))
                out += p.chi(k, l) * left * paulis[static_cast<std::size_t>(l)];
    }
    return out / chi_trace_scale(p.normalization, p.n);
}

} // namespace ppc
