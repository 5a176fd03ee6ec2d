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

#include "ppc/simulator.hpp"
#include "support.hpp"

using namespace ppc;

TEST_CASE("state evolution of simple circuits", "[simulator]") {
    CircuitSpec c{2, 0, {Gate::h(0), Gate::cx(0, 1)}};
    const RVector p = ideal_distribution(c).probabilities();
    CHECK(std::abs(p(0) - 0.5) < 1e-15);
    CHECK(std::abs(p(3) - 0.5) < 1e-15);
    CHECK(std::abs(p(1)) < 1e-15);

    CircuitSpec flip{2, 0, {Gate::x(1)}};
    CHECK(std::abs(ideal_distribution(flip).probabilities()(1) - 1.0) < 1e-15);

    CircuitSpec start{2, 2, {}};
    CHECK(std::abs(ideal_distribution(start).probabilities()(2) - 1.0) < 1e-15);
}

TEST_CASE("circuit_unitary matches the product of embedded gates", "[simulator]") {
    CircuitSpec c{2, 0, {Gate::h(1), Gate::cx(1, 0), Gate::ry(0, 0.3), Gate::rx(1, -0.8)}};
    const CMatrix expected = embed(gates::RX(-0.8), {1}, 2) * embed(gates::RY(0.3), {0}, 2) *
                             embed(gates::CX(), {1, 0}, 2) * embed(gates::H(), {1}, 2);
    CHECK((circuit_unitary(c) - expected).norm() < 1e-14);
}

TEST_CASE("preparation phase shifts swept rotations only", "[simulator]") {
    PrepPhases phases;
    phases.set(0, Axis::Y, 0.05);
    CircuitSpec swept{1, 0, {Gate::ry(0, 0.9, true)}};
    CircuitSpec shifted{1, 0, {Gate::ry(0, 0.95)}};
    CircuitSpec fixed{1, 0, {Gate::ry(0, 0.9)}};
    CHECK((ideal_distribution(swept, phases).probabilities() - ideal_distribution(shifted).probabilities()).norm() <
          1e-15);
    CHECK((ideal_distribution(fixed, phases).probabilities() - ideal_distribution(fixed).probabilities()).norm() ==
          0.0);
    CHECK_THROWS_AS(phases.set(0, Axis::X, 4.0), InvalidArgument);
}

TEST_CASE("transition matrices", "[simulator]") {
    const TransitionMatrix t = TransitionMatrix::from_qubit_fidelities({{0.95, 0.9}});
    CHECK(t(0, 0) == 0.95);
    CHECK(std::abs(t(1, 0) - 0.05) < 1e-15);
    CHECK(std::abs(t(0, 1) - 0.1) < 1e-15);
    const TransitionMatrix t2 = TransitionMatrix::from_qubit_fidelities({{0.95, 0.9}, {0.8, 0.85}});
    CHECK(std::abs(t2(0, 0) - 0.95 * 0.8) < 1e-15);
    CHECK(std::abs(t2(3, 0) - 0.05 * 0.2) < 1e-15);
    RMatrix bad(2, 2);
    bad << 0.9, 0.2, 0.2, 0.8;
    CHECK_THROWS_AS(TransitionMatrix(bad), InvalidArgument);
    std::mt19937_64 rng(5);
    const TransitionMatrix r = TransitionMatrix::random(2, 0.9, 0.95, rng);
    for (Index c = 0; c < 4; ++c) {
        CHECK(std::abs(r.matrix().col(c).sum() - 1.0) < 1e-12);
        CHECK(r(c, c) >= 0.9);
        CHECK(r(c, c) <= 0.95);
    }
}

TEST_CASE("readout noise is the matrix-vector product", "[simulator]") {
    const TransitionMatrix t = TransitionMatrix::from_qubit_fidelities({{0.9, 0.8}});
    const auto p = ProbabilityDistribution::from_probabilities((RVector(2) << 0.3, 0.7).finished());
    const RVector q = apply_readout_noise(p, t).probabilities();
    CHECK(std::abs(q(0) - (0.9 * 0.3 + 0.2 * 0.7)) < 1e-15);
    CHECK_THROWS_AS(ProbabilityDistribution::from_probabilities((RVector(2) << 0.5, 0.6).finished()),
                    InvalidArgument);
    CHECK_THROWS_AS(ProbabilityDistribution::from_probabilities((RVector(3) << 0.5, 0.5, 0).finished()),
                    InvalidArgument);
}

TEST_CASE("splitmix64 matches the reference generator", "[simulator]") {
    // First three outputs of the reference SplitMix64 stream seeded with 0.
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafull);
    CHECK(splitmix64(0x9E3779B97F4A7C15ull) == 0x6e789e6aa1b965f4ull);
    CHECK(splitmix64(2 * 0x9E3779B97F4A7C15ull) == 0x06c45d188009454full);
    CHECK(derive_seed(7, 3) == splitmix64(7 ^ splitmix64(3)));
    CHECK(stream_id(StreamTag::qpt, 5) == ((std::uint64_t{3} << 40) | 5));
}

TEST_CASE("multinomial sampling", "[simulator]") {
    const auto p = ProbabilityDistribution::from_probabilities((RVector(4) << 0.1, 0.2, 0.3, 0.4).finished());
    const auto a = sample_counts(p, 100000, 42);
    const auto b = sample_counts(p, 100000, 42);
    CHECK(a == b);
    std::int64_t total = 0;
    double chi2 = 0.0;
    for (Index j = 0; j < 4; ++j) {
        total += a[static_cast<std::size_t>(j)];
        const double expected = 100000 * p[j];
        chi2 += std::pow(a[static_cast<std::size_t>(j)] - expected, 2) / expected;
    }
    CHECK(total == 100000);
    CHECK(chi2 < 16.3); // 99.9% quantile, 3 degrees of freedom
    const auto det = sample_counts(ProbabilityDistribution::from_probabilities((RVector(2) << 0.0, 1.0).finished()),
                                   50, 1);
    CHECK(det[0] == 0);
    CHECK(det[1] == 50);
    CHECK_THROWS_AS(sample_counts(p, 0, 1), InvalidArgument);
}

TEST_CASE("batched execution is deterministic regardless of thread count", "[simulator]") {
    std::vector<CircuitSpec> circuits;
    for (int i = 0; i < 40; ++i)
        circuits.push_back({2, 0, {Gate::ry(0, 0.1 * i, true), Gate::cx(0, 1), Gate::rx(1, -0.05 * i, true)}});
    NoiseProfile noise{TransitionMatrix::from_qubit_fidelities({{0.95, 0.9}, {0.92, 0.93}}),
                       PrepPhases::uniform(2, 0.05, -0.03), 99};
    const auto one = run_batch(circuits, noise, Shots::of(1000), 17, 1);
    const auto many = run_batch(circuits, noise, Shots::of(1000), 17, 4);
    for (std::size_t i = 0; i < circuits.size(); ++i)
        CHECK(one[i].counts == many[i].counts);
    const auto exact = run_batch(circuits, noise, Shots::exact_mode(), 17, 2);
    CHECK(exact[0].counts.empty());
    const RVector expected =
        noise.transition.matrix() * ideal_distribution(circuits[3], noise.prep_phase).probabilities();
    CHECK((exact[3].distribution.probabilities() - expected).norm() < 1e-15);
}

TEST_CASE("invalid circuits are rejected", "[simulator]") {
    CHECK_THROWS_AS(evolve(CircuitSpec{2, 0, {Gate::x(2)}}), InvalidArgument);
    CHECK_THROWS_AS(evolve(CircuitSpec{2, 4, {}}), InvalidArgument);
    CHECK_THROWS_AS(evolve(CircuitSpec{2, 0, {Gate::cx(1, 1)}}), InvalidArgument);
    CHECK_THROWS_AS(Shots::of(0), InvalidArgument);
}
