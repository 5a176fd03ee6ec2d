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
/// Fidelities, process-matrix distances and resource counts.

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>

#include "ppc/qcore.hpp"

namespace ppc {

namespace detail {

inline void check_same_shape(const ProcessMatrix& a, const ProcessMatrix& b) {
    if (a.n != b.n || a.chi.rows() != b.chi.rows() || a.chi.cols() != b.chi.cols())
        throw InvalidArgument("process matrices have different qubit counts");
}

} // namespace detail

/// Normalized overlap tr(chi chi0) / (tr chi tr chi0), clamped to [0, 1].
/// Independent of either argument's normalization; 1 for identical unitary
/// processes.
inline double process_fidelity(const ProcessMatrix& chi, const ProcessMatrix& chi0) {
    detail::check_same_shape(chi, chi0);
    const double t1 = chi.trace().real(), t0 = chi0.trace().real();
    if (std::abs(t1) < 1e-14 || std::abs(t0) < 1e-14)
        throw InvalidArgument("process fidelity of a zero-trace process matrix");
    const double overlap = (chi.chi * chi0.chi).trace().real();
    return std::clamp(overlap / (t1 * t0), 0.0, 1.0);
}

/// tr(chi chi0) / 4^n evaluated on the matrices as stored.
inline double raw_process_fidelity(const ProcessMatrix& chi, const ProcessMatrix& chi0) {
    detail::check_same_shape(chi, chi0);
    return (chi.chi * chi0.chi).trace().real() / static_cast<double>(pauli_count(chi.n));
}

/// max over diagonal phase matrices D of |tr(D U_hat U0^dagger)|^2 / 4^n,
/// i.e. (sum_j |(U_hat U0^dagger)_jj|)^2 / 4^n.
inline double gauge_aligned_fidelity(const UnitaryOperator& u_hat, const UnitaryOperator& u0) {
    if (u_hat.dim() != u0.dim())
        throw InvalidArgument("unitaries have different dimensions");
    const CMatrix m = u_hat.matrix() * u0.matrix().adjoint();
    const double s = m.diagonal().cwiseAbs().sum();
    return std::min(1.0, s * s / static_cast<double>(u0.dim() * u0.dim()));
}

/// D U_hat with D the diagonal phase matrix maximizing the overlap with U0.
inline UnitaryOperator gauge_align(const UnitaryOperator& u_hat, const UnitaryOperator& u0) {
    if (u_hat.dim() != u0.dim())
        throw InvalidArgument("unitaries have different dimensions");
    const CMatrix m = u_hat.matrix() * u0.matrix().adjoint();
    CMatrix aligned = u_hat.matrix();
    for (Index j = 0; j < m.rows(); ++j) {
        const double mag = std::abs(m(j, j));
        if (mag > 0)
            aligned.row(j) *= std::conj(m(j, j)) / mag;
    }
    return UnitaryOperator(aligned);
}

enum class DistanceMode { entrywise, operator_norm };

inline std::string to_string(DistanceMode m) { return m == DistanceMode::entrywise ? "entrywise" : "operator"; }

inline DistanceMode parse_distance_mode(std::string_view s) {
    if (s == "entrywise")
        return DistanceMode::entrywise;
    if (s == "operator")
        return DistanceMode::operator_norm;
    throw InvalidArgument("unknown distance mode '" + std::string(s) + "'");
}

/// entrywise: max_kl |chi1_kl - chi2_kl|; operator: largest singular value of
/// the difference.
inline double d_inf(const ProcessMatrix& a, const ProcessMatrix& b, DistanceMode mode = DistanceMode::entrywise) {
    detail::check_same_shape(a, b);
    if (a.normalization != b.normalization)
        throw InvalidArgument("d_inf needs matching normalizations (" + to_string(a.normalization) + " vs " +
                              to_string(b.normalization) + ")");
    const CMatrix diff = a.chi - b.chi;
    if (mode == DistanceMode::entrywise)
        return diff.cwiseAbs().maxCoeff();
    Eigen::JacobiSVD<CMatrix> svd(diff);
    return svd.singularValues()(0);
}

struct ResourceCounts {
    std::uint64_t ppc_total = 0;
    std::uint64_t ppc_calibration = 0;
    std::uint64_t ppc_characterization = 0;
    std::uint64_t qpt = 0;
};

/// Circuit counts: calibration 2^n N, characterization 2^(n-1) n N,
/// total 2^(n-1) (n + 2) N, tomography 12^n.
inline ResourceCounts resource_counts(int n, int n_theta) {
    if (n < 1 || n > 16)
        throw InvalidArgument("resource_counts needs 1 <= n <= 16");
    if (n_theta < 1)
        throw InvalidArgument("resource_counts needs n_theta >= 1");
    const std::uint64_t half = std::uint64_t{1} << (n - 1), nt = static_cast<std::uint64_t>(n_theta);
    ResourceCounts r;
    r.ppc_calibration = 2 * half * nt;
    r.ppc_characterization = half * static_cast<std::uint64_t>(n) * nt;
    r.ppc_total = half * static_cast<std::uint64_t>(n + 2) * nt;
    r.qpt = 1;
    for (int i = 0; i < n; ++i)
        r.qpt *= 12;
    return r;
}

/// Nonparametric bootstrap standard deviation of the sample mean.
inline double bootstrap_std(std::span<const double> values, int resamples, std::uint64_t seed) {
    if (values.size() < 2)
        throw InvalidArgument("bootstrap needs at least 2 samples");
    if (resamples < 2)
        throw InvalidArgument("bootstrap needs at least 2 resamples");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
    double mean = 0.0, m2 = 0.0;
    for (int r = 0; r < resamples; ++r) {
        double sum = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
            sum += values[pick(rng)];
        const double x = sum / static_cast<double>(values.size());
        const double delta = x - mean;
        mean += delta / (r + 1);
        m2 += delta * (x - mean);
    }
    return std::sqrt(m2 / (resamples - 1));
}

} // namespace ppc
