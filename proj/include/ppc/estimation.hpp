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
/// Fitting and projection primitives: linear least squares for sinusoid
/// coefficients, separable least squares for a shared phase offset,
/// simplex-constrained readout mitigation and nearest-unitary projection.

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ppc/qcore.hpp"
#include "ppc/simulator.hpp"

namespace ppc {

// ---------------------------------------------------------------------------
// Linear least squares

/// Multi-response least squares Y ~ X * coef for a shared design X.
struct LinearFit {
    RMatrix coef;      ///< p x d
    RMatrix std_error; ///< p x d
    RVector rss;       ///< per response column
    Index dof = 0;
};

namespace detail {

/// Residual standard deviation, or 0 when it sits at rounding level.
inline double residual_sigma(double rss, Index dof, double scale) {
    if (dof <= 0)
        return std::numeric_limits<double>::quiet_NaN();
    const double sigma = std::sqrt(std::max(rss, 0.0) / static_cast<double>(dof));
    return sigma <= 64 * std::numeric_limits<double>::epsilon() * std::max(scale, 1.0) ? 0.0 : sigma;
}

inline void check_conditioning(const RVector& sv, const char* what) {
    const double smax = sv.maxCoeff(), smin = sv.minCoeff();
    if (!(smin > 0) || smax / smin > 1e8)
        throw IllConditioned(std::string(what) + ": design matrix is rank deficient (condition number " +
                             std::to_string(smin > 0 ? smax / smin : std::numeric_limits<double>::infinity()) +
                             ")");
}

} // namespace detail

/// Ordinary least squares for every column of `y`; throws IllConditioned when
/// cond(X) > 1e8.
inline LinearFit linear_least_squares(const RMatrix& x, const RMatrix& y) {
    if (x.rows() != y.rows())
        throw InvalidArgument("design and response row counts differ");
    Eigen::JacobiSVD<RMatrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    detail::check_conditioning(svd.singularValues(), "linear least squares");
    LinearFit out;
    out.coef = svd.solve(y);
    const RVector inv_sv2 = svd.singularValues().cwiseAbs2().cwiseInverse();
    const RVector cov_diag = (svd.matrixV() * inv_sv2.asDiagonal() * svd.matrixV().transpose()).diagonal();
    out.dof = x.rows() - x.cols();
    const RMatrix resid = y - x * out.coef;
    out.rss = resid.colwise().squaredNorm().transpose();
    out.std_error.resize(x.cols(), y.cols());
    for (Index c = 0; c < y.cols(); ++c) {
        const double sigma = detail::residual_sigma(out.rss(c), out.dof, y.col(c).cwiseAbs().maxCoeff());
        out.std_error.col(c) = sigma * cov_diag.cwiseSqrt();
    }
    return out;
}

/// Weighted least squares, one weight per (row, response column).
inline LinearFit weighted_least_squares(const RMatrix& x, const RMatrix& y, const RMatrix& w) {
    if (w.rows() != y.rows() || w.cols() != y.cols())
        throw InvalidArgument("weight matrix shape must match the responses");
    if (w.minCoeff() <= 0)
        throw InvalidArgument("weights must be positive");
    LinearFit out;
    out.coef.resize(x.cols(), y.cols());
    out.std_error.resize(x.cols(), y.cols());
    out.rss.resize(y.cols());
    out.dof = x.rows() - x.cols();
    for (Index c = 0; c < y.cols(); ++c) {
        const RVector sw = w.col(c).cwiseSqrt();
        const RMatrix xw = sw.asDiagonal() * x;
        const RVector yw = sw.cwiseProduct(y.col(c));
        Eigen::JacobiSVD<RMatrix> svd(xw, Eigen::ComputeThinU | Eigen::ComputeThinV);
        detail::check_conditioning(svd.singularValues(), "weighted least squares");
        out.coef.col(c) = svd.solve(yw);
        out.rss(c) = (yw - xw * out.coef.col(c)).squaredNorm();
        const RVector inv_sv2 = svd.singularValues().cwiseAbs2().cwiseInverse();
        const RVector cov_diag = (svd.matrixV() * inv_sv2.asDiagonal() * svd.matrixV().transpose()).diagonal();
        out.std_error.col(c) =
            detail::residual_sigma(out.rss(c), out.dof, yw.cwiseAbs().maxCoeff()) * cov_diag.cwiseSqrt();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model families linear in their coefficients once the phase is fixed

struct PhaseModel {
    std::string name;
    Index size = 0;
    std::function<RVector(double)> basis;
    std::function<RVector(double)> derivative;
};

/// P(phi) = (A + B cos phi + C sin phi) / 2 with coefficients (A, B, C).
inline PhaseModel sinusoid_model() {
    return {"sinusoid", 3,
            [](double phi) {
                RVector v(3);
                v << 0.5, 0.5 * std::cos(phi), 0.5 * std::sin(phi);
                return v;
            },
            [](double phi) {
                RVector v(3);
                v << 0.0, -0.5 * std::sin(phi), 0.5 * std::cos(phi);
                return v;
            }};
}

/// P(phi) = a cos^2(phi/2) + b sin^2(phi/2): the two-column calibration model.
inline PhaseModel population_model() {
    return {"population", 2,
            [](double phi) {
                const double c = std::cos(phi / 2), s = std::sin(phi / 2);
                RVector v(2);
                v << c * c, s * s;
                return v;
            },
            [](double phi) {
                RVector v(2);
                v << -0.5 * std::sin(phi), 0.5 * std::sin(phi);
                return v;
            }};
}

inline RMatrix design_matrix(const PhaseModel& model, std::span<const double> angles, double offset = 0.0) {
    RMatrix x(static_cast<Index>(angles.size()), model.size);
    for (std::size_t i = 0; i < angles.size(); ++i)
        x.row(static_cast<Index>(i)) = model.basis(angles[i] + offset).transpose();
    return x;
}

/// Stacks per-angle distributions into an (angles x outcomes) matrix.
inline RMatrix stack_rows(std::span<const RVector> data) {
    if (data.empty())
        throw InvalidArgument("no data");
    RMatrix y(static_cast<Index>(data.size()), data.front().size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].size() != y.cols())
            throw InvalidArgument("distributions differ in length");
        y.row(static_cast<Index>(i)) = data[i].transpose();
    }
    return y;
}

// ---------------------------------------------------------------------------
// Sinusoid fit

struct SinusoidFit {
    RVector A, B, C;
    RVector se_A, se_B, se_C;
    /// Root-mean-square gap between model and data probabilities.
    double residual = 0.0;
    Index points = 0;
};

/// Weights 1 / max(p(1-p)/N, floor) per (angle, outcome); the floor defaults
/// to 1/(4 N^2) so deterministic angles do not dominate.
inline RMatrix variance_weights(std::span<const RVector> data, std::int64_t shots, std::optional<double> floor = {}) {
    if (shots < 1)
        throw InvalidArgument("variance weights need a finite shot count");
    const double n = static_cast<double>(shots);
    const double f = floor.value_or(1.0 / (4.0 * n * n));
    RMatrix y = stack_rows(data);
    return y.unaryExpr([&](double p) { return 1.0 / std::max(p * (1.0 - p) / n, f); });
}

/// Fits P_j(theta) = (A_j + B_j cos theta + C_j sin theta) / 2 for every
/// outcome j by (optionally weighted) linear least squares.
inline SinusoidFit fit_sinusoid(std::span<const double> angles, std::span<const RVector> data,
                                const RMatrix* weights = nullptr) {
    if (angles.size() != data.size())
        throw InvalidArgument("angle and data counts differ");
    std::vector<double> distinct(angles.begin(), angles.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end(),
                               [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                   distinct.end());
    if (distinct.size() < 3)
        throw IllConditioned("sinusoid fit needs at least 3 distinct angles");
    const PhaseModel model = sinusoid_model();
    const RMatrix x = design_matrix(model, angles);
    const RMatrix y = stack_rows(data);
    const LinearFit lin = weights ? weighted_least_squares(x, y, *weights) : linear_least_squares(x, y);
    SinusoidFit out;
    out.A = lin.coef.row(0).transpose();
    out.B = lin.coef.row(1).transpose();
    out.C = lin.coef.row(2).transpose();
    out.se_A = lin.std_error.row(0).transpose();
    out.se_B = lin.std_error.row(1).transpose();
    out.se_C = lin.std_error.row(2).transpose();
    out.points = x.rows();
    out.residual = std::sqrt((y - x * lin.coef).squaredNorm() / static_cast<double>(y.size()));
    return out;
}

// ---------------------------------------------------------------------------
// Separable fit: shared phase offset + per-block linear coefficients

struct PhaseBlock {
    std::vector<double> angles;
    std::vector<RVector> data;
};

struct PhaseSearch {
    double lower = -kPi / 4;
    double upper = kPi / 4;
    int grid_points = 101;
    int max_solves = 200;
    double tolerance = 1e-11;
};

struct PhaseFit {
    /// Offset added to the nominal angles: the model is evaluated at theta + phase.
    double phase = 0.0;
    double phase_std_error = 0.0;
    std::vector<RMatrix> coefficients; ///< per block, model.size x outcomes
    std::vector<RMatrix> std_errors;
    double rss = 0.0;
    /// Root-mean-square model-data gap.
    double residual = 0.0;
    int solves = 0;
    bool at_boundary = false;
};

namespace detail {

inline double profiled_rss(const PhaseModel& model, std::span<const PhaseBlock> blocks,
                           const std::vector<RMatrix>& ys, double phase) {
    double total = 0.0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const RMatrix x = design_matrix(model, blocks[b].angles, phase);
        const RMatrix coef = x.colPivHouseholderQr().solve(ys[b]);
        total += (ys[b] - x * coef).squaredNorm();
    }
    return total;
}

} // namespace detail

/// Minimizes the residual over one phase offset shared by every block, with
/// the linear coefficients profiled out: a grid scan over
/// [search.lower, search.upper] followed by golden-section refinement.
/// Each evaluation of the profiled residual counts as one inner solve.
inline PhaseFit fit_phase_and_linear(std::span<const PhaseBlock> blocks, const PhaseModel& model,
                                     const PhaseSearch& search = {}) {
    if (blocks.empty())
        throw InvalidArgument("phase fit needs at least one block");
    std::vector<RMatrix> ys;
    for (const PhaseBlock& b : blocks) {
        if (b.angles.size() != b.data.size())
            throw InvalidArgument("angle and data counts differ");
        if (static_cast<Index>(b.angles.size()) <= model.size)
            throw IllConditioned("too few angles for the phase model");
        ys.push_back(stack_rows(b.data));
        Eigen::JacobiSVD<RMatrix> svd(design_matrix(model, b.angles));
        detail::check_conditioning(svd.singularValues(), "phase fit");
    }

    int solves = 0;
    auto rss_at = [&](double phase) {
        ++solves;
        return detail::profiled_rss(model, blocks, ys, phase);
    };

    const int g = std::max(search.grid_points, 3);
    const double step = (search.upper - search.lower) / (g - 1);
    int best = 0;
    double best_rss = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g; ++i) {
        const double r = rss_at(search.lower + step * i);
        if (r < best_rss) {
            best_rss = r;
            best = i;
        }
    }

    double a = search.lower + step * std::max(best - 1, 0);
    double b = search.lower + step * std::min(best + 1, g - 1);
    const double inv_phi = (std::sqrt(5.0) - 1) / 2;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = rss_at(c), fd = rss_at(d);
    while (b - a > search.tolerance) {
        if (solves >= search.max_solves)
            throw FitFailure("phase fit did not converge within " + std::to_string(search.max_solves) +
                             " inner solves (bracket [" + std::to_string(a) + ", " + std::to_string(b) +
                             "], rss " + std::to_string(std::min(fc, fd)) + ")");
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = rss_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = rss_at(d);
        }
    }

    PhaseFit out;
    out.phase = fc <= fd ? c : d;
    if (best_rss < std::min(fc, fd))
        out.phase = search.lower + step * best;
    out.solves = solves;
    out.at_boundary = out.phase - search.lower < step || search.upper - out.phase < step;

    // Linear coefficients at the optimum, and standard errors from the
    // Gauss-Newton information with the phase/coefficient coupling folded in
    // through a Schur complement.
    double info_phase = 0.0;
    Index residual_count = 0, parameter_count = 1;
    double scale = 0.0;
    struct Cross {
        RMatrix ginv;
        RVector g;
    };
    std::vector<std::vector<Cross>> cross(blocks.size());
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const RMatrix x = design_matrix(model, blocks[bi].angles, out.phase);
        RMatrix dx(x.rows(), x.cols());
        for (Index i = 0; i < x.rows(); ++i)
            dx.row(i) = model.derivative(blocks[bi].angles[static_cast<std::size_t>(i)] + out.phase).transpose();
        const RMatrix coef = x.colPivHouseholderQr().solve(ys[bi]);
        out.coefficients.push_back(coef);
        out.rss += (ys[bi] - x * coef).squaredNorm();
        residual_count += ys[bi].size();
        parameter_count += coef.size();
        scale = std::max(scale, ys[bi].cwiseAbs().maxCoeff());
        const RMatrix gram_inv = (x.transpose() * x).inverse();
        for (Index j = 0; j < ys[bi].cols(); ++j) {
            const RVector dj = dx * coef.col(j);
            const RVector gj = x.transpose() * dj;
            info_phase += dj.squaredNorm() - gj.dot(gram_inv * gj);
            cross[bi].push_back({gram_inv, gj});
        }
    }
    out.residual = std::sqrt(out.rss / static_cast<double>(residual_count));
    const double sigma = detail::residual_sigma(out.rss, residual_count - parameter_count, scale);
    out.phase_std_error = info_phase > 0 ? sigma / std::sqrt(info_phase) : std::numeric_limits<double>::infinity();
    if (sigma == 0.0)
        out.phase_std_error = 0.0;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        RMatrix se(model.size, ys[bi].cols());
        for (Index j = 0; j < ys[bi].cols(); ++j) {
            const Cross& cr = cross[bi][static_cast<std::size_t>(j)];
            const RVector u = cr.ginv * cr.g;
            RVector var = cr.ginv.diagonal();
            if (info_phase > 0)
                var += u.cwiseAbs2() / info_phase;
            se.col(j) = sigma * var.cwiseSqrt();
        }
        out.std_errors.push_back(se);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Simplex-constrained mitigation

/// Euclidean projection onto the probability simplex.
inline RVector project_to_simplex(const RVector& v) {
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0, tau = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cumulative += u[i];
        const double t = (cumulative - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0)
            tau = t;
    }
    RVector out = (v.array() - tau).cwiseMax(0.0);
    return out / out.sum();
}

/// Lawson-Hanson non-negative least squares: argmin ||A x - b||, x >= 0.
inline RVector nnls(const RMatrix& a, const RVector& b, int max_iterations = 500) {
    const Index n = a.cols();
    RVector x = RVector::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);
    const double tol = 1e-13 * std::max(1.0, a.cwiseAbs().maxCoeff() * b.cwiseAbs().maxCoeff()) *
                       static_cast<double>(std::max(a.rows(), n));
    auto solve_passive = [&](RVector& z) {
        std::vector<Index> idx;
        for (Index i = 0; i < n; ++i)
            if (passive[static_cast<std::size_t>(i)])
                idx.push_back(i);
        RMatrix ap(a.rows(), static_cast<Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k)
            ap.col(static_cast<Index>(k)) = a.col(idx[k]);
        const RVector zp = ap.completeOrthogonalDecomposition().solve(b);
        z.setZero(n);
        for (std::size_t k = 0; k < idx.size(); ++k)
            z(idx[k]) = zp(static_cast<Index>(k));
    };
    for (int outer = 0; outer < max_iterations; ++outer) {
        const RVector w = a.transpose() * (b - a * x);
        Index best = -1;
        double best_w = tol;
        for (Index i = 0; i < n; ++i)
            if (!passive[static_cast<std::size_t>(i)] && w(i) > best_w) {
                best_w = w(i);
                best = i;
            }
        if (best < 0)
            break;
        passive[static_cast<std::size_t>(best)] = true;
        RVector z;
        for (int inner = 0; inner < max_iterations; ++inner) {
            solve_passive(z);
            bool feasible = true;
            for (Index i = 0; i < n; ++i)
                if (passive[static_cast<std::size_t>(i)] && z(i) <= 0)
                    feasible = false;
            if (feasible)
                break;
            double alpha = 1.0;
            for (Index i = 0; i < n; ++i)
                if (passive[static_cast<std::size_t>(i)] && z(i) <= 0)
                    alpha = std::min(alpha, x(i) / (x(i) - z(i)));
            x += alpha * (z - x);
            for (Index i = 0; i < n; ++i)
                if (passive[static_cast<std::size_t>(i)] && x(i) <= 1e-15) {
                    passive[static_cast<std::size_t>(i)] = false;
                    x(i) = 0;
                }
        }
        x = z;
    }
    return x;
}

namespace detail {

/// argmin ||T_P y - q|| subject to sum y = 1 over the index set P.
inline RVector simplex_face_solve(const RMatrix& t, const RVector& q, const std::vector<Index>& support) {
    const Index k = static_cast<Index>(support.size());
    RMatrix kkt = RMatrix::Zero(k + 1, k + 1);
    RVector rhs(k + 1);
    RMatrix tp(t.rows(), k);
    for (Index i = 0; i < k; ++i)
        tp.col(i) = t.col(support[static_cast<std::size_t>(i)]);
    kkt.topLeftCorner(k, k) = tp.transpose() * tp;
    kkt.block(0, k, k, 1).setOnes();
    kkt.block(k, 0, 1, k).setOnes();
    rhs.head(k) = tp.transpose() * q;
    rhs(k) = 1.0;
    const RVector sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    RVector y = RVector::Zero(t.cols());
    for (Index i = 0; i < k; ++i)
        y(support[static_cast<std::size_t>(i)]) = sol(i);
    return y;
}

} // namespace detail

struct MitigationResult {
    ProbabilityDistribution p;
    /// ||q - T p||_2 at the solution.
    double residual = 0.0;
    double condition_number = 1.0;
    std::vector<std::string> warnings;
};

/// argmin over the probability simplex of ||q - T p||_2.
///
/// Starts from Lawson-Hanson NNLS on T with an appended heavily weighted
/// sum-to-one row, projects that onto the simplex, then runs a primal
/// active-set method on the simplex faces so the result is the exact
/// constrained minimizer.
inline MitigationResult mitigate_distribution(const ProbabilityDistribution& q, const TransitionMatrix& t) {
    if (q.size() != t.dim())
        throw InvalidArgument("distribution and transition matrix dimensions differ");
    const RMatrix& tm = t.matrix();
    const RVector& qv = q.probabilities();
    const Index d = tm.cols();
    MitigationResult out;
    {
        Eigen::JacobiSVD<RMatrix> svd(tm);
        const double smin = svd.singularValues().minCoeff();
        out.condition_number =
            smin > 0 ? svd.singularValues().maxCoeff() / smin : std::numeric_limits<double>::infinity();
        if (out.condition_number > 1e8)
            out.warnings.push_back("transition matrix is severely ill-conditioned (condition number " +
                                   std::to_string(out.condition_number) + ")");
    }

    const double weight = 1e3;
    RMatrix aug(d + 1, d);
    aug.topRows(d) = tm;
    aug.row(d).setConstant(weight);
    RVector rhs(d + 1);
    rhs.head(d) = qv;
    rhs(d) = weight;
    RVector x = project_to_simplex(nnls(aug, rhs));

    const double tol = 1e-14;
    for (int iter = 0; iter < 20 * static_cast<int>(d) + 20; ++iter) {
        std::vector<Index> support;
        for (Index i = 0; i < d; ++i)
            if (x(i) > 0)
                support.push_back(i);
        const RVector y = detail::simplex_face_solve(tm, qv, support);
        bool feasible = true;
        for (Index i : support)
            if (y(i) < 0)
                feasible = false;
        if (!feasible) {
            double alpha = 1.0;
            for (Index i : support)
                if (y(i) < 0)
                    alpha = std::min(alpha, x(i) / (x(i) - y(i)));
            x += alpha * (y - x);
            for (Index i = 0; i < d; ++i)
                if (x(i) <= 1e-15)
                    x(i) = 0;
            continue;
        }
        x = y;
        const RVector grad = tm.transpose() * (tm * x - qv);
        double nu = 0.0;
        for (Index i : support)
            nu += grad(i);
        nu /= static_cast<double>(support.size());
        Index enter = -1;
        double most = -tol;
        for (Index i = 0; i < d; ++i)
            if (x(i) == 0 && grad(i) - nu < most) {
                most = grad(i) - nu;
                enter = i;
            }
        if (enter < 0)
            break;
        // Move a small step into the entering coordinate so it joins the support.
        const double eps = 1e-12;
        x *= (1.0 - eps);
        x(enter) = eps;
    }
    x = x.cwiseMax(0.0);
    x /= x.sum();
    out.residual = (qv - tm * x).norm();
    out.p = ProbabilityDistribution::from_probabilities(x);
    return out;
}

// ---------------------------------------------------------------------------
// Nearest unitary

struct NearestUnitary {
    UnitaryOperator unitary;
    /// ||M - W||_F
    double distance = 0.0;
    double min_singular_value = 0.0;
};

/// Polar factor W of M = W P, the unitary closest to M in Frobenius norm.
inline NearestUnitary nearest_unitary(const CMatrix& m) {
    if (m.rows() != m.cols())
        throw InvalidArgument("nearest_unitary needs a square matrix");
    qubits_for_dim(m.rows());
    Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double smax = svd.singularValues().maxCoeff(), smin = svd.singularValues().minCoeff();
    if (!(smin > 1e-12 * std::max(1.0, smax)))
        throw SingularMatrix("matrix is numerically singular (smallest singular value " + std::to_string(smin) +
                             ")");
    CMatrix w = svd.matrixU() * svd.matrixV().adjoint();
    const double distance = (m - w).norm();
    return {UnitaryOperator(std::move(w)), distance, smin};
}

} // namespace ppc
