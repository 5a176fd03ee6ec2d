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
/// JSON and CSV persistence for sweep records, process matrices,
/// tomography frequency tables, calibration results and hyperparameter
/// tables.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "ppc/calibration.hpp"
#include "ppc/qpt.hpp"
#include "ppc/sweep.hpp"

namespace ppc::io {

using nlohmann::json;

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v)
            break;
    }
    return buf;
}

inline std::string format_angle(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// JSON helpers

inline json to_json(const RMatrix& m) {
    json rows = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < m.cols(); ++c)
            row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline RMatrix real_matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty() || !j.front().is_array())
        throw InvalidArgument("expected a nonempty array of rows");
    const Index rows = static_cast<Index>(j.size()), cols = static_cast<Index>(j.front().size());
    RMatrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const json& row = j.at(static_cast<std::size_t>(r));
        if (!row.is_array() || static_cast<Index>(row.size()) != cols)
            throw InvalidArgument("matrix rows have different lengths");
        for (Index c = 0; c < cols; ++c) {
            const json& v = row.at(static_cast<std::size_t>(c));
            if (!v.is_number())
                throw InvalidArgument("matrix entries must be numbers");
            m(r, c) = v.get<double>();
        }
    }
    return m;
}

inline json to_json(const CMatrix& m) { return {{"re", to_json(RMatrix(m.real()))}, {"im", to_json(RMatrix(m.imag()))}}; }

inline CMatrix complex_matrix_from_json(const json& j) {
    const RMatrix re = real_matrix_from_json(j.at("re")), im = real_matrix_from_json(j.at("im"));
    if (re.rows() != im.rows() || re.cols() != im.cols())
        throw InvalidArgument("real and imaginary parts differ in shape");
    CMatrix m(re.rows(), re.cols());
    m.real() = re;
    m.imag() = im;
    return m;
}

inline json to_json(const ProcessMatrix& p) {
    json j = to_json(p.chi);
    j["n"] = p.n;
    j["normalization"] = to_string(p.normalization);
    return j;
}

inline ProcessMatrix process_matrix_from_json(const json& j) {
    ProcessMatrix p;
    p.n = j.at("n").get<int>();
    p.normalization = parse_normalization(j.at("normalization").get<std::string>());
    p.chi = complex_matrix_from_json(j);
    if (p.chi.rows() != pauli_count(p.n) || p.chi.cols() != pauli_count(p.n))
        throw InvalidArgument("process matrix shape does not match n");
    return p;
}

// ---------------------------------------------------------------------------
// Calibration

inline json to_json(const CalibrationResult& r) {
    json phases = json::array();
    for (const auto& [key, value] : r.prep_phase.values()) {
        const auto se = r.prep_phase_std_error.find(key);
        phases.push_back({{"qubit", key.first},
                          {"axis", to_string(key.second)},
                          {"value", value},
                          {"std_error", se == r.prep_phase_std_error.end() ? 0.0 : se->second}});
    }
    json groups = json::array();
    for (const auto& g : r.groups)
        groups.push_back({{"qubit", g.qubit},
                          {"axis", to_string(g.axis)},
                          {"residual", g.residual},
                          {"solves", g.solves},
                          {"at_boundary", g.at_boundary}});
    return {{"n", r.n},
            {"transition", to_json(r.transition.matrix())},
            {"transition_std_error", to_json(r.transition_std_error)},
            {"prep_phase", std::move(phases)},
            {"n_points", r.angles.size()},
            {"shots", r.shots.exact ? json("exact") : json(r.shots.count)},
            {"groups", std::move(groups)},
            {"content_hash", r.content_hash}};
}

inline Shots shots_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() != "exact")
            throw InvalidArgument("shots must be a positive integer or \"exact\"");
        return Shots::exact_mode();
    }
    if (!j.is_number_integer())
        throw InvalidArgument("shots must be a positive integer or \"exact\"");
    return Shots::of(j.get<std::int64_t>());
}

inline json to_json(Shots s) { return s.exact ? json("exact") : json(s.count); }

inline CalibrationResult calibration_from_json(const json& j) {
    CalibrationResult r;
    r.n = j.at("n").get<int>();
    r.transition = TransitionMatrix(real_matrix_from_json(j.at("transition")));
    r.transition_std_error = real_matrix_from_json(j.at("transition_std_error"));
    if (r.transition.qubits() != r.n)
        throw InvalidArgument("calibration transition matrix does not match n");
    for (const json& p : j.at("prep_phase")) {
        const int q = p.at("qubit").get<int>();
        const Axis axis = parse_axis(p.at("axis").get<std::string>());
        r.prep_phase.set(q, axis, p.at("value").get<double>());
        r.prep_phase_std_error[{q, axis}] = p.at("std_error").get<double>();
    }
    const auto n_points = j.at("n_points").get<std::size_t>();
    if (n_points > 1)
        r.angles = angle_grid(static_cast<int>(n_points) - 1);
    r.shots = shots_from_json(j.at("shots"));
    for (const json& g : j.at("groups"))
        r.groups.push_back({g.at("qubit").get<int>(), parse_axis(g.at("axis").get<std::string>()),
                            g.at("residual").get<double>(), g.at("solves").get<int>(),
                            g.at("at_boundary").get<bool>()});
    r.content_hash = j.at("content_hash").get<std::string>();
    return r;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

inline std::vector<std::vector<std::string>> read_csv(std::istream& in, std::string_view header) {
    std::string line;
    if (!std::getline(in, line))
        throw InvalidArgument("CSV is empty");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != header)
        throw InvalidArgument("CSV header '" + line + "' does not match '" + std::string(header) + "'");
    const std::size_t columns = split_csv_line(std::string(header)).size();
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto cells = split_csv_line(line);
        if (cells.size() != columns)
            throw InvalidArgument("CSV row has " + std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(columns));
        rows.push_back(std::move(cells));
    }
    return rows;
}

inline double to_double(const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size())
        throw InvalidArgument("not a number: '" + s + "'");
    return v;
}

inline std::int64_t to_int(const std::string& s) {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size())
        throw InvalidArgument("not an integer: '" + s + "'");
    return v;
}

} // namespace detail

inline constexpr std::string_view kSweepHeader = "k,s,axis,theta,outcome,count,shots";
inline constexpr std::string_view kChiHeader = "row_label,col_label,re,im";
inline constexpr std::string_view kLambdaHeader = "prep_index,meas_setting,outcome,count,shots";
inline constexpr std::string_view kHyperparameterHeader = "n_theta,shots,parameter,estimate,std_error";

/// One row per (sweep, angle, outcome). Basis labels are bit strings with
/// qubit 0 first. In exact mode shots is 0 and count holds the probability.
inline void write_sweep_csv(std::ostream& out, std::span<const SweepRecord> records) {
    out << kSweepHeader << '\n';
    for (const SweepRecord& r : records) {
        const Index d = dim_for_qubits(r.n);
        for (std::size_t a = 0; a < r.angles.size(); ++a)
            for (Index o = 0; o < d; ++o) {
                out << basis_label(r.k, r.n) << ',' << r.s << ',' << to_string(r.axis) << ','
                    << format_angle(r.angles[a]) << ',' << basis_label(static_cast<std::uint64_t>(o), r.n) << ',';
                if (r.shots.exact)
                    out << format_double(r.distributions[a](o)) << ",0\n";
                else
                    out << r.counts[a][static_cast<std::size_t>(o)] << ',' << r.shots.count << '\n';
            }
    }
}

inline std::vector<SweepRecord> read_sweep_csv(std::istream& in) {
    const auto rows = detail::read_csv(in, kSweepHeader);
    std::vector<SweepRecord> out;
    std::map<std::tuple<std::uint64_t, int, Axis>, std::size_t> index;
    for (const auto& row : rows) {
        const int n = static_cast<int>(row[0].size());
        const std::uint64_t k = parse_basis_label(row[0]);
        const int s = static_cast<int>(detail::to_int(row[1]));
        const Axis axis = parse_axis(row[2]);
        const double theta = detail::to_double(row[3]);
        const Index outcome = static_cast<Index>(parse_basis_label(row[4]));
        const std::int64_t shots = detail::to_int(row[6]);
        const auto key = std::make_tuple(k, s, axis);
        auto it = index.find(key);
        if (it == index.end()) {
            SweepRecord r;
            r.n = n;
            r.k = k;
            r.s = s;
            r.axis = axis;
            r.shots = shots == 0 ? Shots::exact_mode() : Shots::of(shots);
            it = index.emplace(key, out.size()).first;
            out.push_back(std::move(r));
        }
        SweepRecord& r = out[it->second];
        if (r.angles.empty() || r.angles.back() != theta) {
            r.angles.push_back(theta);
            r.distributions.push_back(RVector::Zero(dim_for_qubits(n)));
            if (!r.shots.exact)
                r.counts.emplace_back(static_cast<std::size_t>(dim_for_qubits(n)), 0);
        }
        if (outcome >= dim_for_qubits(n))
            throw InvalidArgument("sweep outcome label out of range");
        if (r.shots.exact) {
            r.distributions.back()(outcome) = detail::to_double(row[5]);
        } else {
            const std::int64_t c = detail::to_int(row[5]);
            r.counts.back()[static_cast<std::size_t>(outcome)] = c;
            r.distributions.back()(outcome) = static_cast<double>(c) / static_cast<double>(shots);
        }
    }
    for (SweepRecord& r : out)
        r.validate();
    return out;
}

/// Heat-map rows for every (k, l) Pauli pair.
inline void write_chi_csv(std::ostream& out, const ProcessMatrix& p) {
    out << kChiHeader << '\n';
    for (Index k = 0; k < p.chi.rows(); ++k)
        for (Index l = 0; l < p.chi.cols(); ++l)
            out << pauli_label(k, p.n) << ',' << pauli_label(l, p.n) << ',' << format_double(p.chi(k, l).real())
                << ',' << format_double(p.chi(k, l).imag()) << '\n';
}

inline Index parse_pauli_label(std::string_view s) {
    Index k = 0;
    for (char c : s) {
        const std::string_view digits = "IXYZ";
        const auto pos = digits.find(c);
        if (pos == std::string_view::npos)
            throw InvalidArgument("bad Pauli label '" + std::string(s) + "'");
        k = 4 * k + static_cast<Index>(pos);
    }
    return k;
}

inline ProcessMatrix read_chi_csv(std::istream& in, Normalization norm) {
    const auto rows = detail::read_csv(in, kChiHeader);
    if (rows.empty())
        throw InvalidArgument("chi CSV has no rows");
    const int n = static_cast<int>(rows.front()[0].size());
    const Index p = pauli_count(n);
    if (static_cast<Index>(rows.size()) != p * p)
        throw InvalidArgument("chi CSV must list all " + std::to_string(p * p) + " entries");
    ProcessMatrix out{n, CMatrix::Zero(p, p), norm};
    for (const auto& row : rows)
        out.chi(parse_pauli_label(row[0]), parse_pauli_label(row[1])) =
            cplx(detail::to_double(row[2]), detail::to_double(row[3]));
    return out;
}

/// Frequencies per (preparation, setting, outcome). In exact mode shots is 0
/// and count holds the probability.
inline void write_lambda_csv(std::ostream& out, const QptPlan& plan, const QptData& data) {
    out << kLambdaHeader << '\n';
    const Index d = dim_for_qubits(plan.n);
    for (std::size_t i = 0; i < plan.preparation_count(); ++i)
        for (std::size_t m = 0; m < plan.setting_count(); ++m)
            for (Index o = 0; o < d; ++o) {
                out << i << ',' << m << ',' << basis_label(static_cast<std::uint64_t>(o), plan.n) << ',';
                if (data.shots.exact)
                    out << format_double(data.lambda(static_cast<Index>(i), static_cast<Index>(plan.effect_index(m, o))))
                        << ",0\n";
                else
                    out << data.counts[plan.circuit_index(i, m)][static_cast<std::size_t>(o)] << ','
                        << data.shots.count << '\n';
            }
}

inline QptData read_lambda_csv(std::istream& in, const QptPlan& plan) {
    const auto rows = detail::read_csv(in, kLambdaHeader);
    const Index d = dim_for_qubits(plan.n);
    if (rows.size() != plan.circuit_count() * static_cast<std::size_t>(d))
        throw InvalidArgument("frequency table must cover every (preparation, setting, outcome)");
    QptData data;
    data.n = plan.n;
    data.lambda = RMatrix::Constant(static_cast<Index>(plan.preparation_count()),
                                    static_cast<Index>(plan.effect_count()), std::numeric_limits<double>::quiet_NaN());
    const std::int64_t shots = detail::to_int(rows.front()[4]);
    data.shots = shots == 0 ? Shots::exact_mode() : Shots::of(shots);
    if (!data.shots.exact)
        data.counts.assign(plan.circuit_count(), std::vector<std::int64_t>(static_cast<std::size_t>(d), 0));
    for (const auto& row : rows) {
        const auto i = static_cast<std::size_t>(detail::to_int(row[0]));
        const auto m = static_cast<std::size_t>(detail::to_int(row[1]));
        const auto o = static_cast<Index>(parse_basis_label(row[2]));
        if (i >= plan.preparation_count() || m >= plan.setting_count() || o >= d)
            throw InvalidArgument("frequency table index out of range");
        const Index col = static_cast<Index>(plan.effect_index(m, o));
        if (data.shots.exact) {
            data.lambda(static_cast<Index>(i), col) = detail::to_double(row[3]);
        } else {
            const std::int64_t c = detail::to_int(row[3]);
            data.counts[plan.circuit_index(i, m)][static_cast<std::size_t>(o)] = c;
            data.lambda(static_cast<Index>(i), col) = static_cast<double>(c) / static_cast<double>(shots);
        }
    }
    return data;
}

inline void write_hyperparameter_csv(std::ostream& out, std::span<const HyperparameterRow> rows) {
    out << kHyperparameterHeader << '\n';
    for (const auto& r : rows)
        out << r.n_theta << ',' << r.shots << ',' << r.parameter << ',' << format_double(r.estimate) << ','
            << format_double(r.std_error) << '\n';
}

inline std::vector<HyperparameterRow> read_hyperparameter_csv(std::istream& in) {
    std::vector<HyperparameterRow> out;
    for (const auto& row : detail::read_csv(in, kHyperparameterHeader))
        out.push_back({static_cast<int>(detail::to_int(row[0])), detail::to_int(row[1]), row[2],
                       detail::to_double(row[3]), detail::to_double(row[4])});
    return out;
}

} // namespace ppc::io
