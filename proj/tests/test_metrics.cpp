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

#include "ppc/metrics.hpp"
#include "support.hpp"

using namespace ppc;

TEST_CASE("process fidelity", "[metrics]") {
    const ProcessMatrix h = chi_from_unitary(UnitaryOperator(gates::H()));
    const ProcessMatrix id = chi_from_unitary(UnitaryOperator::identity(1));
    CHECK(process_fidelity(h, h) == Catch::Approx(1.0).margin(1e-15));
    CHECK(process_fidelity(h, id) == Catch::Approx(0.0).margin(1e-15));

    std::mt19937_64 rng(81);
    for (int trial = 0; trial < 10; ++trial) {
        const UnitaryOperator a = testing::random_unitary(2, rng), b = testing::random_unitary(2, rng);
        const ProcessMatrix ca = chi_from_unitary(a), cb = chi_from_unitary(b);
        const double f = process_fidelity(ca, cb);
        // Closed form for unitary processes: |tr(A^dagger B)|^2 / d^2.
        CHECK(f == Catch::Approx(std::norm((a.matrix().adjoint() * b.matrix()).trace()) / 16.0).margin(1e-12));
        CHECK(f == Catch::Approx(process_fidelity(cb, ca)).margin(1e-14));
        CHECK(f == Catch::Approx(process_fidelity(ca.renormalized(Normalization::trace_d), cb)).margin(1e-14));
        CHECK(raw_process_fidelity(ca.renormalized(Normalization::trace_d), cb.renormalized(Normalization::trace_d)) ==
              Catch::Approx(f).margin(1e-12));
    }
    ProcessMatrix zero{1, CMatrix::Zero(4, 4), Normalization::trace_one};
    CHECK_THROWS_AS(process_fidelity(zero, h), InvalidArgument);
    CHECK_THROWS_AS(process_fidelity(h, chi_from_unitary(UnitaryOperator::identity(2))), InvalidArgument);
}

TEST_CASE("gauge-aligned fidelity", "[metrics]") {
    std::mt19937_64 rng(83);
    for (int trial = 0; trial < 10; ++trial) {
        const UnitaryOperator u0 = testing::random_unitary(1, rng);
        const UnitaryOperator u = testing::random_unitary(1, rng);
        // Grid search over the relative row phase.
        const CMatrix m = u.matrix() * u0.matrix().adjoint();
        double best = 0.0;
        for (int i = 0; i < 20000; ++i) {
            const double phi = 2 * kPi * i / 20000;
            best = std::max(best, std::norm(m(0, 0) + std::polar(1.0, phi) * m(1, 1)) / 4.0);
        }
        const double f = gauge_aligned_fidelity(u, u0);
        CHECK(f >= best - 1e-12);
        CHECK(f < best + 1e-7);
        CHECK(process_fidelity(chi_from_unitary(gauge_align(u, u0)), chi_from_unitary(u0)) ==
              Catch::Approx(f).margin(1e-12));
    }
    const UnitaryOperator u0 = testing::random_unitary(2, rng);
    const UnitaryOperator shifted(testing::random_diagonal_phases(4, rng) * u0.matrix());
    CHECK(gauge_aligned_fidelity(shifted, u0) == Catch::Approx(1.0).margin(1e-12));
    CHECK((gauge_align(shifted, u0).matrix() - u0.matrix()).norm() < 1e-12);
    CHECK_THROWS_AS(gauge_aligned_fidelity(u0, UnitaryOperator::identity(1)), InvalidArgument);
}

TEST_CASE("maximum chi distance", "[metrics]") {
    const ProcessMatrix id = chi_from_unitary(UnitaryOperator::identity(1));
    const ProcessMatrix x = chi_from_unitary(UnitaryOperator(gates::X()));
    CHECK(d_inf(id, x) == Catch::Approx(1.0).margin(1e-15));
    CHECK(d_inf(id, x, DistanceMode::operator_norm) == Catch::Approx(1.0).margin(1e-12));
    CHECK(d_inf(x, x) == 0.0);
    std::mt19937_64 rng(87);
    for (int trial = 0; trial < 10; ++trial) {
        const ProcessMatrix a = chi_from_unitary(testing::random_unitary(2, rng));
        const ProcessMatrix b = chi_from_unitary(testing::random_unitary(2, rng));
        CHECK(d_inf(a, b) <= d_inf(a, b, DistanceMode::operator_norm) + 1e-14);
        CHECK(d_inf(a, b) == d_inf(b, a));
    }
    CHECK_THROWS_AS(d_inf(id, x.renormalized(Normalization::trace_d)), InvalidArgument);
    CHECK_THROWS_AS(d_inf(id, chi_from_unitary(UnitaryOperator::identity(2))), InvalidArgument);
    CHECK(parse_distance_mode("operator") == DistanceMode::operator_norm);
    CHECK_THROWS_AS(parse_distance_mode("frobenius"), InvalidArgument);
}

TEST_CASE("circuit counts", "[metrics]") {
    const ResourceCounts one = resource_counts(1, 51), two = resource_counts(2, 51), three = resource_counts(3, 51);
    CHECK(one.ppc_total == 153u);
    CHECK(one.qpt == 12u);
    CHECK(two.ppc_total == 408u);
    CHECK(two.qpt == 144u);
    CHECK(three.ppc_total == 1020u);
    CHECK(three.qpt == 1728u);
    CHECK(three.ppc_calibration == 408u);
    CHECK(three.ppc_characterization == 612u);
    for (int n = 1; n <= 10; ++n) {
        const ResourceCounts r = resource_counts(n, 51);
        CHECK(r.ppc_total == r.ppc_calibration + r.ppc_characterization);
        CHECK((r.ppc_total < r.qpt) == (n >= 3));
    }
    CHECK_THROWS_AS(resource_counts(0, 51), InvalidArgument);
    CHECK_THROWS_AS(resource_counts(2, 0), InvalidArgument);
}

TEST_CASE("bootstrap standard deviation", "[metrics]") {
    const std::vector<double> constant(10, 0.7);
    CHECK(bootstrap_std(constant, 100, 1) == Catch::Approx(0.0).margin(1e-15));
    const std::vector<double> coin{0.0, 1.0};
    CHECK(bootstrap_std(coin, 200000, 2) == Catch::Approx(std::sqrt(0.125)).margin(0.003));
    const std::vector<double> values{0.1, 0.5, 0.2, 0.9, 0.4};
    CHECK(bootstrap_std(values, 500, 3) == bootstrap_std(values, 500, 3));
    CHECK(bootstrap_std(values, 500, 3) != bootstrap_std(values, 500, 4));
    CHECK_THROWS_AS(bootstrap_std(std::vector<double>{1.0}, 100, 1), InvalidArgument);
}
