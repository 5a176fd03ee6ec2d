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
/// Deterministic state-vector execution of characterization circuits with
/// readout (transition matrix) and rotation-offset noise, plus seeded
/// multinomial shot sampling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ppc/parallel.hpp"
#include "ppc/qcore.hpp"

namespace ppc {

/// Rotation axis of a swept single-qubit rotation.
enum class Axis { Y, X };

inline std::string to_string(Axis a) { return a == Axis::Y ? "Y" : "X"; }

inline Axis parse_axis(std::string_view s) {
    if (s == "Y" || s == "y")
        return Axis::Y;
    if (s == "X" || s == "x")
        return Axis::X;
    throw InvalidArgument("unknown rotation axis '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Circuits

enum class GateKind { I, X, H, CX, RY, RX, Unitary };

struct Gate {
    GateKind kind = GateKind::I;
    std::vector<int> qubits;
    double angle = 0.0;
    /// Swept rotations receive the device's preparation-phase offset.
    bool swept = false;
    /// Only for GateKind::Unitary.
    CMatrix matrix;

    static Gate id(int q) { return {GateKind::I, {q}, 0.0, false, {}}; }
    static Gate x(int q) { return {GateKind::X, {q}, 0.0, false, {}}; }
    static Gate h(int q) { return {GateKind::H, {q}, 0.0, false, {}}; }
    static Gate cx(int control, int target) { return {GateKind::CX, {control, target}, 0.0, false, {}}; }
    static Gate ry(int q, double theta, bool swept = false) { return {GateKind::RY, {q}, theta, swept, {}}; }
    static Gate rx(int q, double theta, bool swept = false) { return {GateKind::RX, {q}, theta, swept, {}}; }
    static Gate rotation(Axis axis, int q, double theta, bool swept = false) {
        return axis == Axis::Y ? ry(q, theta, swept) : rx(q, theta, swept);
    }
    static Gate unitary(CMatrix m, std::vector<int> qubits) {
        return {GateKind::Unitary, std::move(qubits), 0.0, false, std::move(m)};
    }

    /// The gate's local matrix with `offset` added to a rotation angle.
    CMatrix local_matrix(double offset = 0.0) const {
        switch (kind) {
        case GateKind::I:
            return gates::I();
        case GateKind::X:
            return gates::X();
        case GateKind::H:
            return gates::H();
        case GateKind::CX:
            return gates::CX();
        case GateKind::RY:
            return gates::RY(angle + offset);
        case GateKind::RX:
            return gates::RX(angle + offset);
        case GateKind::Unitary:
            return matrix;
        }
        return gates::I();
    }
};

struct CircuitSpec {
    int n = 1;
    /// Computational basis state the register starts in.
    std::uint64_t initial = 0;
    std::vector<Gate> gates;

    void validate() const {
        const Index dim = dim_for_qubits(n);
        if (initial >= static_cast<std::uint64_t>(dim))
            throw InvalidArgument("initial basis label out of range");
        for (const Gate& g : gates) {
            for (int q : g.qubits)
                if (q < 0 || q >= n)
                    throw InvalidArgument("gate qubit index " + std::to_string(q) + " out of range for " +
                                          std::to_string(n) + " qubits");
            const std::size_t arity = g.kind == GateKind::CX ? 2
                                      : g.kind == GateKind::Unitary
                                          ? static_cast<std::size_t>(qubits_for_dim(g.matrix.rows()))
                                          : 1;
            if (g.qubits.size() != arity)
                throw InvalidArgument("gate arity does not match its qubit list");
            for (std::size_t a = 0; a < g.qubits.size(); ++a)
                for (std::size_t b = a + 1; b < g.qubits.size(); ++b)
                    if (g.qubits[a] == g.qubits[b])
                        throw InvalidArgument("gate acts twice on qubit " + std::to_string(g.qubits[a]));
            if (!std::isfinite(g.angle))
                throw InvalidArgument("rotation angle must be finite");
        }
    }
};

/// Preparation/compilation phase offset theta0 per (qubit, axis). Missing
/// entries are zero.
class PrepPhases {
  public:
    double get(int qubit, Axis axis) const {
        auto it = values_.find({qubit, axis});
        return it == values_.end() ? 0.0 : it->second;
    }
    bool contains(int qubit, Axis axis) const { return values_.count({qubit, axis}) != 0; }
    void set(int qubit, Axis axis, double theta0) {
        if (!(std::abs(theta0) <= kPi))
            throw InvalidArgument("preparation phase must satisfy |theta0| <= pi");
        values_[{qubit, axis}] = theta0;
    }
    /// The same offset on every qubit for the given axes.
    static PrepPhases uniform(int n, double y_offset, double x_offset = 0.0) {
        PrepPhases p;
        for (int q = 0; q < n; ++q) {
            p.set(q, Axis::Y, y_offset);
            p.set(q, Axis::X, x_offset);
        }
        return p;
    }
    const std::map<std::pair<int, Axis>, double>& values() const noexcept { return values_; }
    bool operator==(const PrepPhases&) const = default;

  private:
    std::map<std::pair<int, Axis>, double> values_;
};

/// Applies a k-qubit local matrix to a state vector in place.
inline void apply_local(CVector& state, const CMatrix& local, const std::vector<int>& targets, int n) {
    const int k = static_cast<int>(targets.size());
    const Index sub = Index{1} << k;
    std::uint64_t target_mask = 0;
    std::vector<std::uint64_t> offsets(static_cast<std::size_t>(sub), 0);
    for (int t : targets)
        target_mask |= qubit_mask(t, n);
    for (Index m = 0; m < sub; ++m)
        for (int i = 0; i < k; ++i)
            if (m & (Index{1} << (k - 1 - i)))
                offsets[static_cast<std::size_t>(m)] |= qubit_mask(targets[static_cast<std::size_t>(i)], n);
    CVector gathered(sub);
    const auto dim = static_cast<std::uint64_t>(state.size());
    for (std::uint64_t base = 0; base < dim; ++base) {
        if (base & target_mask)
            continue;
        for (Index m = 0; m < sub; ++m)
            gathered(m) = state(static_cast<Index>(base | offsets[static_cast<std::size_t>(m)]));
        const CVector out = local * gathered;
        for (Index m = 0; m < sub; ++m)
            state(static_cast<Index>(base | offsets[static_cast<std::size_t>(m)])) = out(m);
    }
}

/// Final state vector; swept rotations on qubit q are shifted by phases(q, axis).
inline CVector evolve(const CircuitSpec& circuit, const PrepPhases& phases = {}) {
    circuit.validate();
    CVector state = CVector::Zero(dim_for_qubits(circuit.n));
    state(static_cast<Index>(circuit.initial)) = 1.0;
    for (const Gate& g : circuit.gates) {
        double offset = 0.0;
        if (g.swept && (g.kind == GateKind::RY || g.kind == GateKind::RX))
            offset = phases.get(g.qubits[0], g.kind == GateKind::RY ? Axis::Y : Axis::X);
        apply_local(state, g.local_matrix(offset), g.qubits, circuit.n);
    }
    return state;
}

/// Unitary implemented by the gate list (ignores the initial state).
inline CMatrix circuit_unitary(const CircuitSpec& circuit) {
    const Index dim = dim_for_qubits(circuit.n);
    CMatrix u(dim, dim);
    for (Index c = 0; c < dim; ++c) {
        CircuitSpec column = circuit;
        column.initial = static_cast<std::uint64_t>(c);
        u.col(c) = evolve(column);
    }
    return u;
}

/// Single-qubit rotation about `axis` embedded into n qubits.
inline UnitaryOperator rotation_gate(Axis axis, double theta, int qubit, int n) {
    if (!std::isfinite(theta))
        throw InvalidArgument("rotation angle must be finite");
    return UnitaryOperator(embed(axis == Axis::Y ? gates::RY(theta) : gates::RX(theta), {qubit}, n));
}

// ---------------------------------------------------------------------------
// Distributions and noise

/// Outcome distribution over the 2^n computational basis states.
class ProbabilityDistribution {
  public:
    ProbabilityDistribution() = default;

    /// Validates p >= -tol and |sum p - 1| <= tol; tiny negatives are clipped.
    static ProbabilityDistribution from_probabilities(RVector p, double tolerance = 1e-9) {
        const int n = qubits_for_dim(p.size());
        if (!p.allFinite())
            throw InvalidArgument("probabilities must be finite");
        if (p.minCoeff() < -tolerance)
            throw InvalidArgument("negative probability " + std::to_string(p.minCoeff()));
        if (std::abs(p.sum() - 1.0) > tolerance)
            throw InvalidArgument("probabilities sum to " + std::to_string(p.sum()));
        p = p.cwiseMax(0.0);
        return ProbabilityDistribution(n, std::move(p));
    }

    static ProbabilityDistribution from_counts(std::span<const std::int64_t> counts) {
        RVector p(static_cast<Index>(counts.size()));
        std::int64_t total = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            if (counts[i] < 0)
                throw InvalidArgument("negative count");
            total += counts[i];
        }
        if (total <= 0)
            throw InvalidArgument("counts are empty");
        for (std::size_t i = 0; i < counts.size(); ++i)
            p(static_cast<Index>(i)) = static_cast<double>(counts[i]) / static_cast<double>(total);
        const int n = qubits_for_dim(p.size());
        return ProbabilityDistribution(n, std::move(p));
    }

    int qubits() const noexcept { return n_; }
    Index size() const noexcept { return p_.size(); }
    double operator[](Index j) const { return p_(j); }
    const RVector& probabilities() const noexcept { return p_; }

  private:
    ProbabilityDistribution(int n, RVector p) : n_(n), p_(std::move(p)) {}
    int n_ = 0;
    RVector p_;
};

/// Column-stochastic readout assignment matrix, t(j, k) = P(observe j | prepared k).
class TransitionMatrix {
  public:
    TransitionMatrix() : TransitionMatrix(RMatrix::Identity(2, 2)) {}

    explicit TransitionMatrix(RMatrix t, double tolerance = 1e-9) : t_(std::move(t)) {
        if (t_.rows() != t_.cols())
            throw InvalidArgument("transition matrix must be square");
        n_ = qubits_for_dim(t_.rows());
        if (!t_.allFinite() || t_.minCoeff() < -1e-12 || t_.maxCoeff() > 1.0 + 1e-12)
            throw InvalidArgument("transition matrix entries must lie in [0, 1]");
        for (Index c = 0; c < t_.cols(); ++c)
            if (std::abs(t_.col(c).sum() - 1.0) > tolerance)
                throw InvalidArgument("transition matrix column " + std::to_string(c) + " sums to " +
                                      std::to_string(t_.col(c).sum()));
    }

    static TransitionMatrix identity(int n) {
        return TransitionMatrix(RMatrix::Identity(dim_for_qubits(n), dim_for_qubits(n)));
    }

    /// Uncorrelated readout: tensor product of per-qubit 2x2 channels with
    /// correct-assignment probabilities (t00, t11), qubit 0 first.
    static TransitionMatrix from_qubit_fidelities(const std::vector<std::pair<double, double>>& per_qubit) {
        RMatrix t = RMatrix::Identity(1, 1);
        for (auto [t00, t11] : per_qubit) {
            RMatrix q(2, 2);
            q << t00, 1.0 - t11, 1.0 - t00, t11;
            t = Eigen::kroneckerProduct(t, q).eval();
        }
        return TransitionMatrix(t);
    }

    /// Random column-stochastic matrix whose diagonal lies in [lo, hi]; the
    /// remaining mass of each column is spread over the other outcomes with
    /// random proportions.
    template <class Rng>
    static TransitionMatrix random(int n, double lo, double hi, Rng& rng) {
        const Index d = dim_for_qubits(n);
        std::uniform_real_distribution<double> diag(lo, hi), unit(0.05, 1.0);
        RMatrix t(d, d);
        for (Index c = 0; c < d; ++c) {
            const double keep = diag(rng);
            double total = 0;
            for (Index r = 0; r < d; ++r)
                if (r != c)
                    total += (t(r, c) = unit(rng));
            for (Index r = 0; r < d; ++r)
                t(r, c) = r == c ? keep : (1.0 - keep) * t(r, c) / total;
        }
        return TransitionMatrix(t);
    }

    int qubits() const noexcept { return n_; }
    Index dim() const noexcept { return t_.rows(); }
    const RMatrix& matrix() const noexcept { return t_; }
    double operator()(Index j, Index k) const { return t_(j, k); }

  private:
    int n_ = 1;
    RMatrix t_;
};

struct NoiseProfile {
    TransitionMatrix transition;
    PrepPhases prep_phase;
    std::uint64_t seed = 0;

    static NoiseProfile ideal(int n, std::uint64_t seed = 0) {
        return NoiseProfile{TransitionMatrix::identity(n), {}, seed};
    }
};

/// Shot budget per circuit, or exact (infinite-shot) mode.
struct Shots {
    bool exact = false;
    std::int64_t count = 0;

    static Shots exact_mode() { return {true, 0}; }
    static Shots of(std::int64_t n) {
        if (n < 1)
            throw InvalidArgument("shot count must be >= 1 (use exact mode for infinite shots)");
        return {false, n};
    }
    bool operator==(const Shots&) const = default;
};

/// p_j = |<j| U_circuit |initial>|^2.
inline ProbabilityDistribution ideal_distribution(const CircuitSpec& circuit, const PrepPhases& phases = {}) {
    const CVector psi = evolve(circuit, phases);
    RVector p = psi.cwiseAbs2();
    p /= p.sum();
    return ProbabilityDistribution::from_probabilities(std::move(p));
}

/// q = T p.
inline ProbabilityDistribution apply_readout_noise(const ProbabilityDistribution& p, const TransitionMatrix& t) {
    if (p.size() != t.dim())
        throw InvalidArgument("distribution and transition matrix dimensions differ");
    RVector q = t.matrix() * p.probabilities();
    q = q.cwiseMax(0.0);
    q /= q.sum();
    return ProbabilityDistribution::from_probabilities(std::move(q));
}

/// SplitMix64 finalizer.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Per-circuit seed: splitmix64(master ^ splitmix64(stream)). Streams are
/// circuit indices offset by a per-protocol tag (see stream_tag).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(master ^ splitmix64(stream));
}

enum class StreamTag : std::uint64_t { calibration = 1, characterization = 2, qpt = 3, user = 4 };

inline std::uint64_t stream_id(StreamTag tag, std::uint64_t index) {
    return (static_cast<std::uint64_t>(tag) << 40) | index;
}

/// Multinomial draw of `shots` outcomes by sequential conditional binomials.
inline std::vector<std::int64_t> sample_counts(const ProbabilityDistribution& p, std::int64_t shots,
                                               std::uint64_t seed) {
    if (shots < 1)
        throw InvalidArgument("shot count must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(p.size()), 0);
    std::int64_t remaining = shots;
    double mass = 1.0;
    for (Index j = 0; j < p.size() && remaining > 0; ++j) {
        if (j == p.size() - 1) {
            counts[static_cast<std::size_t>(j)] = remaining;
            break;
        }
        const double prob = mass > 0 ? std::clamp(p[j] / mass, 0.0, 1.0) : 0.0;
        std::binomial_distribution<std::int64_t> draw(remaining, prob);
        const std::int64_t c = prob >= 1.0 ? remaining : draw(rng);
        counts[static_cast<std::size_t>(j)] = c;
        remaining -= c;
        mass -= p[j];
    }
    return counts;
}

struct Execution {
    ProbabilityDistribution distribution;
    /// Empty in exact mode.
    std::vector<std::int64_t> counts;
    Shots shots;
};

/// Runs one circuit: swept angles shifted by theta0, ideal evolution, readout
/// channel T, then sampling (skipped in exact mode). The sampling seed is
/// derive_seed(noise.seed, stream).
inline Execution run_noisy(const CircuitSpec& circuit, const NoiseProfile& noise, Shots shots,
                           std::uint64_t stream = 0) {
    const ProbabilityDistribution ideal = ideal_distribution(circuit, noise.prep_phase);
    ProbabilityDistribution noisy = apply_readout_noise(ideal, noise.transition);
    if (shots.exact)
        return {std::move(noisy), {}, shots};
    auto counts = sample_counts(noisy, shots.count, derive_seed(noise.seed, stream));
    return {ProbabilityDistribution::from_counts(counts), std::move(counts), shots};
}

/// Runs circuits[i] on stream stream_base + i, in parallel; results are
/// independent of thread scheduling.
inline std::vector<Execution> run_batch(std::span<const CircuitSpec> circuits, const NoiseProfile& noise,
                                        Shots shots, std::uint64_t stream_base, unsigned threads = 0) {
    std::vector<Execution> out(circuits.size());
    parallel_for(
        circuits.size(), [&](std::size_t i) { out[i] = run_noisy(circuits[i], noise, shots, stream_base + i); },
        threads);
    return out;
}

} // namespace ppc
