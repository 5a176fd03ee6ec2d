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
/// Experiment configuration, report model and orchestration behind the
/// command-line tool. Everything here produces values or in-memory file
/// contents; writing to disk is left to the caller.

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ppc/characterization.hpp"
#include "ppc/io.hpp"
#include "ppc/metrics.hpp"
#include "ppc/qpt.hpp"

namespace ppc {

inline constexpr int kSchemaVersion = 1;

enum class Protocol { ppc, qpt, both };

inline std::string to_string(Protocol p) {
    switch (p) {
    case Protocol::ppc:
        return "ppc";
    case Protocol::qpt:
        return "qpt";
    case Protocol::both:
        return "both";
    }
    return "both";
}

inline Protocol parse_protocol(std::string_view s) {
    if (s == "ppc")
        return Protocol::ppc;
    if (s == "qpt")
        return Protocol::qpt;
    if (s == "both")
        return Protocol::both;
    throw InvalidArgument("protocol must be ppc, qpt or both, got '" + std::string(s) + "'");
}

/// theta0 for one axis on one qubit, or on every qubit when qubit is unset.
struct PhaseEntry {
    std::optional<int> qubit;
    Axis axis = Axis::Y;
    double value = 0.0;
    bool operator==(const PhaseEntry&) const = default;
};

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    /// Named gate or explicit matrix, applied to `targets`.
    std::string gate = "H";
    std::optional<CMatrix> unitary;
    std::vector<int> targets{0};
    int n = 1;
    int n_theta = kDefaultNThetaY;
    Shots shots = Shots::of(5000);
    std::vector<Axis> axes{Axis::Y};
    std::vector<Axis> calibration_axes{Axis::Y, Axis::X};
    std::vector<int> calibration_qubits{0};
    bool calibrate = true;
    /// "ideal", "mild_readout", "paper_like" or "custom".
    std::string noise_preset = "ideal";
    std::optional<RMatrix> transition;
    std::vector<std::pair<double, double>> qubit_fidelities;
    std::vector<PhaseEntry> prep_phase;
    std::optional<std::uint64_t> seed;
    Protocol protocol = Protocol::both;
    std::string output_dir = "out";
    Normalization normalization = Normalization::trace_one;
    DistanceMode distance = DistanceMode::entrywise;
    bool weighted_fit = false;
    bool qpt_psd_projection = false;
    bool qpt_mitigation = false;
    unsigned threads = 0;
    std::vector<int> sweep_n_thetas{11, 21, 31, 41, 51, 61, 71};
    std::vector<Shots> sweep_shots{Shots::of(1000), Shots::of(5000)};
    int sweep_repetitions = 1;
};

// ---------------------------------------------------------------------------
// Config parsing

namespace detail {

inline std::vector<Axis> axes_from_json(const io::json& j, const char* key) {
    if (!j.is_array())
        throw InvalidArgument(std::string(key) + " must be an array of axis names");
    std::vector<Axis> out;
    for (const auto& a : j)
        out.push_back(parse_axis(a.get<std::string>()));
    return out;
}

inline io::json axes_to_json(const std::vector<Axis>& axes) {
    io::json out = io::json::array();
    for (Axis a : axes)
        out.push_back(to_string(a));
    return out;
}

template <class T>
T get_or(const io::json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

} // namespace detail

inline const std::set<std::string>& config_keys() {
    static const std::set<std::string> keys{
        "schema_version", "target",     "n",         "n_theta",  "shots",       "axes",          "calibration",
        "noise",          "seed",       "protocol",  "output_dir", "normalization", "distance",   "fit",
        "qpt",            "threads",    "sweep"};
    return keys;
}

inline ExperimentConfig config_from_json(const io::json& j) {
    if (!j.is_object())
        throw InvalidArgument("configuration must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!config_keys().count(key))
            throw InvalidArgument("unknown configuration key '" + key + "'");
    ExperimentConfig c;
    try {
        c.schema_version = detail::get_or(j, "schema_version", kSchemaVersion);
        if (c.schema_version != kSchemaVersion)
            throw InvalidArgument("unsupported schema_version " + std::to_string(c.schema_version));
        c.n = j.at("n").get<int>();
        if (j.contains("target")) {
            const auto& t = j.at("target");
            if (t.contains("unitary")) {
                c.unitary = io::complex_matrix_from_json(t.at("unitary"));
                c.gate = "custom";
            } else {
                c.gate = t.at("gate").get<std::string>();
            }
            c.targets = t.contains("qubits") ? t.at("qubits").get<std::vector<int>>() : std::vector<int>{};
        }
        c.n_theta = detail::get_or(j, "n_theta", c.n_theta);
        if (j.contains("shots"))
            c.shots = io::shots_from_json(j.at("shots"));
        if (j.contains("axes"))
            c.axes = detail::axes_from_json(j.at("axes"), "axes");
        if (j.contains("calibration")) {
            const auto& cal = j.at("calibration");
            c.calibrate = detail::get_or(cal, "enabled", c.calibrate);
            if (cal.contains("axes"))
                c.calibration_axes = detail::axes_from_json(cal.at("axes"), "calibration.axes");
            if (cal.contains("qubits"))
                c.calibration_qubits = cal.at("qubits").get<std::vector<int>>();
        }
        if (j.contains("noise")) {
            const auto& nz = j.at("noise");
            c.noise_preset = detail::get_or<std::string>(nz, "preset", "custom");
            if (nz.contains("transition"))
                c.transition = io::real_matrix_from_json(nz.at("transition"));
            if (nz.contains("qubit_fidelities"))
                c.qubit_fidelities = nz.at("qubit_fidelities").get<std::vector<std::pair<double, double>>>();
            if (nz.contains("prep_phase")) {
                const auto& pp = nz.at("prep_phase");
                if (pp.is_object() && !pp.contains("axis")) {
                    for (const auto& [axis, value] : pp.items())
                        c.prep_phase.push_back({std::nullopt, parse_axis(axis), value.get<double>()});
                } else {
                    for (const auto& e : pp.is_array() ? pp : io::json::array({pp})) {
                        PhaseEntry entry;
                        if (e.contains("qubit"))
                            entry.qubit = e.at("qubit").get<int>();
                        entry.axis = parse_axis(e.at("axis").get<std::string>());
                        entry.value = e.at("value").get<double>();
                        c.prep_phase.push_back(entry);
                    }
                }
            }
            if (c.noise_preset == "custom" && !c.transition && c.qubit_fidelities.empty())
                c.noise_preset = "ideal";
        }
        if (j.contains("seed")) {
            if (!j.at("seed").is_number_unsigned())
                throw InvalidArgument("seed must be a nonnegative integer");
            c.seed = j.at("seed").get<std::uint64_t>();
        }
        if (j.contains("protocol"))
            c.protocol = parse_protocol(j.at("protocol").get<std::string>());
        c.output_dir = detail::get_or(j, "output_dir", c.output_dir);
        if (j.contains("normalization"))
            c.normalization = parse_normalization(j.at("normalization").get<std::string>());
        if (j.contains("distance"))
            c.distance = parse_distance_mode(j.at("distance").get<std::string>());
        if (j.contains("fit"))
            c.weighted_fit = detail::get_or(j.at("fit"), "weighted", c.weighted_fit);
        if (j.contains("qpt")) {
            c.qpt_psd_projection = detail::get_or(j.at("qpt"), "psd_projection", c.qpt_psd_projection);
            c.qpt_mitigation = detail::get_or(j.at("qpt"), "mitigation", c.qpt_mitigation);
        }
        c.threads = detail::get_or(j, "threads", c.threads);
        if (j.contains("sweep")) {
            const auto& s = j.at("sweep");
            if (s.contains("n_thetas"))
                c.sweep_n_thetas = s.at("n_thetas").get<std::vector<int>>();
            if (s.contains("shots")) {
                c.sweep_shots.clear();
                for (const auto& v : s.at("shots"))
                    c.sweep_shots.push_back(io::shots_from_json(v));
            }
            c.sweep_repetitions = detail::get_or(s, "repetitions", c.sweep_repetitions);
        }
    } catch (const io::json::exception& e) {
        throw InvalidArgument(std::string("configuration: ") + e.what());
    }
    return c;
}

inline io::json to_json(const ExperimentConfig& c) {
    io::json target;
    if (c.unitary)
        target["unitary"] = io::to_json(*c.unitary);
    else
        target["gate"] = c.gate;
    target["qubits"] = c.targets;
    io::json noise{{"preset", c.noise_preset}};
    if (c.transition)
        noise["transition"] = io::to_json(*c.transition);
    if (!c.qubit_fidelities.empty())
        noise["qubit_fidelities"] = c.qubit_fidelities;
    io::json phases = io::json::array();
    for (const auto& p : c.prep_phase) {
        io::json e{{"axis", to_string(p.axis)}, {"value", p.value}};
        if (p.qubit)
            e["qubit"] = *p.qubit;
        phases.push_back(std::move(e));
    }
    noise["prep_phase"] = std::move(phases);
    io::json sweep_shots = io::json::array();
    for (Shots s : c.sweep_shots)
        sweep_shots.push_back(io::to_json(s));
    io::json j{{"schema_version", c.schema_version},
               {"target", std::move(target)},
               {"n", c.n},
               {"n_theta", c.n_theta},
               {"shots", io::to_json(c.shots)},
               {"axes", detail::axes_to_json(c.axes)},
               {"calibration",
                {{"enabled", c.calibrate},
                 {"axes", detail::axes_to_json(c.calibration_axes)},
                 {"qubits", c.calibration_qubits}}},
               {"noise", std::move(noise)},
               {"protocol", to_string(c.protocol)},
               {"output_dir", c.output_dir},
               {"normalization", to_string(c.normalization)},
               {"distance", to_string(c.distance)},
               {"fit", {{"weighted", c.weighted_fit}}},
               {"qpt", {{"psd_projection", c.qpt_psd_projection}, {"mitigation", c.qpt_mitigation}}},
               {"threads", c.threads},
               {"sweep",
                {{"n_thetas", c.sweep_n_thetas},
                 {"shots", std::move(sweep_shots)},
                 {"repetitions", c.sweep_repetitions}}}};
    if (c.seed)
        j["seed"] = *c.seed;
    return j;
}

inline ExperimentConfig parse_config(std::string_view text) {
    io::json j;
    try {
        j = io::json::parse(text);
    } catch (const io::json::parse_error& e) {
        throw InvalidArgument(std::string("configuration is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

/// Per-qubit readout fidelities (t00, t11) of a named preset.
inline std::vector<std::pair<double, double>> preset_fidelities(const std::string& preset, int n) {
    if (preset == "ideal")
        return std::vector<std::pair<double, double>>(static_cast<std::size_t>(n), {1.0, 1.0});
    if (preset == "mild_readout")
        return std::vector<std::pair<double, double>>(static_cast<std::size_t>(n), {0.95, 0.95});
    if (preset == "paper_like")
        return std::vector<std::pair<double, double>>(static_cast<std::size_t>(n), {0.9, 0.8});
    throw InvalidArgument("unknown noise preset '" + preset + "' (ideal, mild_readout, paper_like, custom)");
}

inline void check_seed(const ExperimentConfig& c) {
    if (!c.seed)
        throw InvalidArgument("a master seed is required (config key 'seed' or --seed)");
}

/// Throws InvalidArgument describing the first problem found.
inline void validate(const ExperimentConfig& c) {
    if (c.n < 1 || c.n > 6)
        throw InvalidArgument("n must be in [1, 6], got " + std::to_string(c.n));
    if (c.n_theta < 3)
        throw InvalidArgument("n_theta must be >= 3");
    if (c.targets.empty())
        throw InvalidArgument("target needs at least one qubit");
    std::set<int> seen;
    for (int q : c.targets) {
        if (q < 0 || q >= c.n)
            throw InvalidArgument("target qubit " + std::to_string(q) + " out of range for n = " + std::to_string(c.n));
        if (!seen.insert(q).second)
            throw InvalidArgument("target qubit " + std::to_string(q) + " repeated");
    }
    const CMatrix gate = c.unitary ? *c.unitary : named_gate(c.gate);
    if (gate.rows() != (Index{1} << c.targets.size()))
        throw InvalidArgument("gate '" + c.gate + "' acts on " + std::to_string(qubits_for_dim(gate.rows())) +
                              " qubits but " + std::to_string(c.targets.size()) + " targets were given");
    UnitaryOperator checked(gate, 1e-8);
    if (c.axes.empty() || std::find(c.axes.begin(), c.axes.end(), Axis::Y) == c.axes.end())
        throw InvalidArgument("characterization axes must include Y");
    if (c.calibrate) {
        if (c.calibration_axes.empty())
            throw InvalidArgument("calibration needs at least one axis");
        for (Axis a : c.axes)
            if (std::find(c.calibration_axes.begin(), c.calibration_axes.end(), a) == c.calibration_axes.end())
                throw InvalidArgument("axis " + to_string(a) + " is swept but not calibrated");
        if (c.calibration_qubits.empty())
            throw InvalidArgument("calibration needs at least one rotated qubit");
        for (int q : c.calibration_qubits)
            if (q < 0 || q >= c.n)
                throw InvalidArgument("calibration qubit " + std::to_string(q) + " out of range");
    }
    if (c.noise_preset == "custom") {
        if (c.transition && !c.qubit_fidelities.empty())
            throw InvalidArgument("give either noise.transition or noise.qubit_fidelities, not both");
        if (c.transition && TransitionMatrix(*c.transition).qubits() != c.n)
            throw InvalidArgument("noise.transition does not match n");
        if (!c.transition && static_cast<int>(c.qubit_fidelities.size()) != c.n)
            throw InvalidArgument("noise.qubit_fidelities needs one pair per qubit");
    } else {
        preset_fidelities(c.noise_preset, c.n);
    }
    for (const auto& [t00, t11] : c.qubit_fidelities)
        if (!(t00 >= 0 && t00 <= 1 && t11 >= 0 && t11 <= 1))
            throw InvalidArgument("readout fidelities must lie in [0, 1]");
    for (const auto& p : c.prep_phase) {
        if (p.qubit && (*p.qubit < 0 || *p.qubit >= c.n))
            throw InvalidArgument("prep_phase qubit " + std::to_string(*p.qubit) + " out of range");
        if (!(std::abs(p.value) <= kPi))
            throw InvalidArgument("prep_phase values must satisfy |theta0| <= pi");
    }
    if ((c.protocol != Protocol::ppc) && c.n > 4)
        throw InvalidArgument("tomography is limited to n <= 4");
    if (c.sweep_n_thetas.empty() || c.sweep_shots.empty())
        throw InvalidArgument("sweep grids must be nonempty");
    for (int nt : c.sweep_n_thetas)
        if (nt < 3)
            throw InvalidArgument("sweep n_theta values must be >= 3");
    if (c.sweep_repetitions < 1)
        throw InvalidArgument("sweep repetitions must be >= 1");
}

inline UnitaryOperator target_unitary(const ExperimentConfig& c) {
    const CMatrix gate = c.unitary ? *c.unitary : named_gate(c.gate);
    return UnitaryOperator(embed(gate, c.targets, c.n), 1e-8);
}

inline NoiseProfile noise_profile(const ExperimentConfig& c) {
    NoiseProfile p;
    if (c.transition)
        p.transition = TransitionMatrix(*c.transition);
    else
        p.transition = TransitionMatrix::from_qubit_fidelities(
            c.noise_preset == "custom" ? c.qubit_fidelities : preset_fidelities(c.noise_preset, c.n));
    for (const auto& e : c.prep_phase) {
        if (e.qubit) {
            p.prep_phase.set(*e.qubit, e.axis, e.value);
        } else {
            for (int q = 0; q < c.n; ++q)
                p.prep_phase.set(q, e.axis, e.value);
        }
    }
    p.seed = c.seed.value_or(0);
    return p;
}

/// Identifies a calibration run: qubit count, axes, rotated qubits, grid,
/// shots, seed and the full noise profile.
inline std::string calibration_hash(const ExperimentConfig& c) {
    const NoiseProfile noise = noise_profile(c);
    io::json phases = io::json::array();
    for (const auto& [key, value] : noise.prep_phase.values())
        phases.push_back({key.first, to_string(key.second), value});
    const io::json key{{"n", c.n},
                       {"axes", detail::axes_to_json(c.calibration_axes)},
                       {"qubits", c.calibration_qubits},
                       {"n_theta", c.n_theta},
                       {"shots", io::to_json(c.shots)},
                       {"seed", noise.seed},
                       {"transition", io::to_json(noise.transition.matrix())},
                       {"prep_phase", std::move(phases)}};
    return io::hex64(io::fnv1a64(key.dump()));
}

// ---------------------------------------------------------------------------
// Report

struct FidelitySummary {
    double process = 0.0;
    double raw = 0.0;
    std::optional<double> gauge_aligned_unitary;
    std::optional<double> anchored;
    bool operator==(const FidelitySummary&) const = default;
};

struct DistanceSummary {
    double entrywise = 0.0;
    double operator_norm = 0.0;
    bool operator==(const DistanceSummary&) const = default;
};

namespace detail {

inline bool same(const CMatrix& a, const CMatrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

inline bool same(const ProcessMatrix& a, const ProcessMatrix& b) {
    return a.n == b.n && a.normalization == b.normalization && same(a.chi, b.chi);
}

} // namespace detail

struct PpcSection {
    /// Anchored estimate as reconstructed.
    ProcessMatrix chi;
    /// Estimate after row-phase alignment to the target.
    ProcessMatrix aligned_chi;
    CMatrix u_hat;
    FidelitySummary fidelity;
    double max_abs_imag_chi = 0.0;
    DistanceSummary d_inf_target;
    double unitarity_residual = 0.0;
    double cycle_inconsistency = 0.0;
    std::uint64_t circuits = 0;
    std::vector<std::string> warnings;

    bool operator==(const PpcSection& o) const {
        return detail::same(chi, o.chi) && detail::same(aligned_chi, o.aligned_chi) && detail::same(u_hat, o.u_hat) && fidelity == o.fidelity &&
               max_abs_imag_chi == o.max_abs_imag_chi && d_inf_target == o.d_inf_target &&
               unitarity_residual == o.unitarity_residual && cycle_inconsistency == o.cycle_inconsistency &&
               circuits == o.circuits && warnings == o.warnings;
    }
};

struct QptSection {
    ProcessMatrix chi;
    FidelitySummary fidelity;
    double max_abs_imag_chi = 0.0;
    DistanceSummary d_inf_target;
    double residual = 0.0;
    bool psd_projection = false;
    bool mitigated = false;
    std::uint64_t circuits = 0;
    std::vector<std::string> warnings;

    bool operator==(const QptSection& o) const {
        return detail::same(chi, o.chi) && fidelity == o.fidelity && max_abs_imag_chi == o.max_abs_imag_chi &&
               d_inf_target == o.d_inf_target && residual == o.residual && psd_projection == o.psd_projection &&
               mitigated == o.mitigated && circuits == o.circuits && warnings == o.warnings;
    }
};

/// Wall-clock seconds; the only fields that differ between identical runs.
struct Timing {
    double calibration = 0.0;
    double characterization = 0.0;
    double tomography = 0.0;
    double total = 0.0;
    bool operator==(const Timing&) const = default;
};

struct ProcessReport {
    int schema_version = kSchemaVersion;
    io::json config;
    ProcessMatrix target_chi;
    std::optional<PpcSection> ppc;
    std::optional<QptSection> qpt;
    std::optional<DistanceSummary> ppc_vs_qpt;
    ResourceCounts resources;
    std::optional<io::json> calibration;
    Timing timing;

    bool operator==(const ProcessReport& o) const {
        return schema_version == o.schema_version && config == o.config && detail::same(target_chi, o.target_chi) &&
               ppc == o.ppc && qpt == o.qpt && ppc_vs_qpt == o.ppc_vs_qpt &&
               resources.ppc_total == o.resources.ppc_total &&
               resources.ppc_calibration == o.resources.ppc_calibration &&
               resources.ppc_characterization == o.resources.ppc_characterization &&
               resources.qpt == o.resources.qpt && calibration == o.calibration && timing == o.timing;
    }
};

namespace detail {

inline io::json to_json(const FidelitySummary& f) {
    io::json j{{"process", f.process}, {"raw", f.raw}};
    if (f.gauge_aligned_unitary)
        j["gauge_aligned_unitary"] = *f.gauge_aligned_unitary;
    if (f.anchored)
        j["anchored"] = *f.anchored;
    return j;
}

inline FidelitySummary fidelity_from_json(const io::json& j) {
    FidelitySummary f;
    f.process = j.at("process").get<double>();
    f.raw = j.at("raw").get<double>();
    if (j.contains("gauge_aligned_unitary"))
        f.gauge_aligned_unitary = j.at("gauge_aligned_unitary").get<double>();
    if (j.contains("anchored"))
        f.anchored = j.at("anchored").get<double>();
    return f;
}

inline io::json to_json(const DistanceSummary& d) { return {{"entrywise", d.entrywise}, {"operator", d.operator_norm}}; }

inline DistanceSummary distance_from_json(const io::json& j) {
    return {j.at("entrywise").get<double>(), j.at("operator").get<double>()};
}

} // namespace detail

inline io::json to_json(const ProcessReport& r) {
    io::json j{{"schema_version", r.schema_version}, {"config", r.config}, {"target_chi", io::to_json(r.target_chi)}};
    if (r.ppc) {
        const PpcSection& p = *r.ppc;
        j["ppc"] = {{"chi", io::to_json(p.chi)},
                    {"aligned_chi", io::to_json(p.aligned_chi)},
                    {"u_hat", io::to_json(p.u_hat)},
                    {"fidelity", detail::to_json(p.fidelity)},
                    {"max_abs_imag_chi", p.max_abs_imag_chi},
                    {"d_inf_target", detail::to_json(p.d_inf_target)},
                    {"unitarity_residual", p.unitarity_residual},
                    {"cycle_inconsistency", p.cycle_inconsistency},
                    {"circuits", p.circuits},
                    {"warnings", p.warnings}};
    }
    if (r.qpt) {
        const QptSection& q = *r.qpt;
        j["qpt"] = {{"chi", io::to_json(q.chi)},
                    {"fidelity", detail::to_json(q.fidelity)},
                    {"max_abs_imag_chi", q.max_abs_imag_chi},
                    {"d_inf_target", detail::to_json(q.d_inf_target)},
                    {"residual", q.residual},
                    {"psd_projection", q.psd_projection},
                    {"mitigated", q.mitigated},
                    {"circuits", q.circuits},
                    {"warnings", q.warnings}};
    }
    if (r.ppc_vs_qpt)
        j["ppc_vs_qpt"] = {{"d_inf", detail::to_json(*r.ppc_vs_qpt)}};
    j["resources"] = {{"ppc_total", r.resources.ppc_total},
                      {"ppc_calibration", r.resources.ppc_calibration},
                      {"ppc_characterization", r.resources.ppc_characterization},
                      {"qpt", r.resources.qpt}};
    if (r.calibration)
        j["calibration"] = *r.calibration;
    j["timing"] = {{"calibration_s", r.timing.calibration},
                   {"characterization_s", r.timing.characterization},
                   {"tomography_s", r.timing.tomography},
                   {"total_s", r.timing.total}};
    return j;
}

inline ProcessReport report_from_json(const io::json& j) {
    ProcessReport r;
    try {
        r.schema_version = j.at("schema_version").get<int>();
        if (r.schema_version != kSchemaVersion)
            throw InvalidArgument("unsupported report schema_version " + std::to_string(r.schema_version));
        r.config = j.at("config");
        r.target_chi = io::process_matrix_from_json(j.at("target_chi"));
        if (j.contains("ppc")) {
            const auto& p = j.at("ppc");
            PpcSection s;
            s.chi = io::process_matrix_from_json(p.at("chi"));
            s.aligned_chi = io::process_matrix_from_json(p.at("aligned_chi"));
            s.u_hat = io::complex_matrix_from_json(p.at("u_hat"));
            s.fidelity = detail::fidelity_from_json(p.at("fidelity"));
            s.max_abs_imag_chi = p.at("max_abs_imag_chi").get<double>();
            s.d_inf_target = detail::distance_from_json(p.at("d_inf_target"));
            s.unitarity_residual = p.at("unitarity_residual").get<double>();
            s.cycle_inconsistency = p.at("cycle_inconsistency").get<double>();
            s.circuits = p.at("circuits").get<std::uint64_t>();
            s.warnings = p.at("warnings").get<std::vector<std::string>>();
            r.ppc = std::move(s);
        }
        if (j.contains("qpt")) {
            const auto& q = j.at("qpt");
            QptSection s;
            s.chi = io::process_matrix_from_json(q.at("chi"));
            s.fidelity = detail::fidelity_from_json(q.at("fidelity"));
            s.max_abs_imag_chi = q.at("max_abs_imag_chi").get<double>();
            s.d_inf_target = detail::distance_from_json(q.at("d_inf_target"));
            s.residual = q.at("residual").get<double>();
            s.psd_projection = q.at("psd_projection").get<bool>();
            s.mitigated = q.at("mitigated").get<bool>();
            s.circuits = q.at("circuits").get<std::uint64_t>();
            s.warnings = q.at("warnings").get<std::vector<std::string>>();
            r.qpt = std::move(s);
        }
        if (j.contains("ppc_vs_qpt"))
            r.ppc_vs_qpt = detail::distance_from_json(j.at("ppc_vs_qpt").at("d_inf"));
        const auto& res = j.at("resources");
        r.resources = {res.at("ppc_total").get<std::uint64_t>(), res.at("ppc_calibration").get<std::uint64_t>(),
                       res.at("ppc_characterization").get<std::uint64_t>(), res.at("qpt").get<std::uint64_t>()};
        if (j.contains("calibration"))
            r.calibration = j.at("calibration");
        const auto& t = j.at("timing");
        r.timing = {t.at("calibration_s").get<double>(), t.at("characterization_s").get<double>(),
                    t.at("tomography_s").get<double>(), t.at("total_s").get<double>()};
    } catch (const io::json::exception& e) {
        throw InvalidArgument(std::string("report: ") + e.what());
    }
    return r;
}

/// Pretty-printed JSON with a trailing newline.
inline std::string serialize(const ProcessReport& r) { return to_json(r).dump(2) + "\n"; }

inline ProcessReport parse_report(std::string_view text) {
    try {
        return report_from_json(io::json::parse(text));
    } catch (const io::json::parse_error& e) {
        throw InvalidArgument(std::string("report is not valid JSON: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Orchestration

/// Everything a run produced; `files` maps output-relative paths to contents.
struct RunOutput {
    ProcessReport report;
    std::optional<CalibrationResult> calibration;
    std::map<std::string, std::string> files;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline DistanceSummary distances(const ProcessMatrix& a, const ProcessMatrix& b) {
    return {d_inf(a, b, DistanceMode::entrywise), d_inf(a, b, DistanceMode::operator_norm)};
}

inline std::string sweep_csv(std::span<const SweepRecord> records) {
    std::ostringstream out;
    io::write_sweep_csv(out, records);
    return out.str();
}

} // namespace detail

inline CalibrationOptions calibration_options(const ExperimentConfig& c) {
    CalibrationOptions o;
    o.rotated_qubits = c.calibration_qubits;
    o.threads = c.threads;
    return o;
}

/// Runs the calibration sweeps and fits them; the raw sweeps are returned
/// for persistence.
inline std::pair<CalibrationResult, std::vector<SweepRecord>> run_calibration(const ExperimentConfig& c) {
    const NoiseProfile noise = noise_profile(c);
    const auto plan = calibration_sweep_plan(c.n, c.n_theta, c.calibration_axes, c.calibration_qubits);
    auto records = execute_sweeps(plan, noise, c.shots, StreamTag::calibration, c.threads);
    CalibrationResult cal = fit_calibration(records);
    cal.content_hash = calibration_hash(c);
    return {std::move(cal), std::move(records)};
}

/// Executes the configured protocol(s). `cached` replaces the calibration
/// step when given. Throws InvalidArgument on configuration problems and
/// FitFailure (or IllConditioned / IncompleteCalibration) on fit problems.
inline RunOutput run_experiment(const ExperimentConfig& c, const CalibrationResult* cached = nullptr) {
    validate(c);
    check_seed(c);
    const auto t_start = detail::Clock::now();
    const UnitaryOperator target = target_unitary(c);
    const NoiseProfile noise = noise_profile(c);
    RunOutput out;
    ProcessReport& report = out.report;
    report.config = to_json(c);
    report.target_chi = chi_from_unitary(target, c.normalization);
    report.resources = resource_counts(c.n, c.n_theta);

    if (c.protocol != Protocol::qpt) {
        auto t0 = detail::Clock::now();
        CalibrationResult cal;
        std::vector<SweepRecord> cal_records;
        if (cached) {
            if (cached->n != c.n)
                throw InvalidArgument("cached calibration is for a different qubit count");
            cal = *cached;
        } else if (c.calibrate) {
            std::tie(cal, cal_records) = run_calibration(c);
        } else {
            cal = CalibrationResult::trivial(c.n);
        }
        report.timing.calibration = detail::seconds_since(t0);

        t0 = detail::Clock::now();
        CharacterizationConfig cc;
        cc.n_theta = c.n_theta;
        cc.shots = c.shots;
        cc.axes = c.axes;
        cc.fit.weighted = c.weighted_fit;
        cc.fit.mitigate = c.calibrate || cached;
        cc.reconstruct.normalization = c.normalization;
        cc.threads = c.threads;
        const CharacterizationResult r = characterize(target, noise, cc, &cal);
        report.timing.characterization = detail::seconds_since(t0);

        const PpcAssessment a = assess(r.reconstruction, target);
        PpcSection s;
        s.chi = r.reconstruction.chi;
        s.aligned_chi = a.aligned_chi;
        s.u_hat = r.reconstruction.u_hat.matrix();
        s.fidelity = {a.process_fidelity, a.raw_process_fidelity, a.gauge_aligned_fidelity,
                      a.anchored_process_fidelity};
        s.max_abs_imag_chi = a.max_abs_imag_chi;
        s.d_inf_target = detail::distances(a.aligned_chi, report.target_chi);
        s.unitarity_residual = r.reconstruction.unitarity_residual;
        s.cycle_inconsistency = r.reconstruction.cycle_inconsistency;
        std::size_t circuits = 0;
        for (const auto& rec : r.records)
            circuits += rec.angles.size();
        for (const auto& rec : cal_records)
            circuits += rec.angles.size();
        s.circuits = circuits;
        std::set<std::string> warnings(r.reconstruction.warnings.begin(), r.reconstruction.warnings.end());
        for (const auto& f : r.fits)
            warnings.insert(f.warnings.begin(), f.warnings.end());
        s.warnings.assign(warnings.begin(), warnings.end());
        report.ppc = std::move(s);
        if (c.calibrate || cached)
            report.calibration = io::to_json(cal);

        std::ostringstream chi_csv;
        io::write_chi_csv(chi_csv, a.aligned_chi);
        out.files["chi_ppc.csv"] = chi_csv.str();
        out.files["sweeps/characterization.csv"] = detail::sweep_csv(r.records);
        if (!cal_records.empty())
            out.files["sweeps/calibration.csv"] = detail::sweep_csv(cal_records);
        if (c.calibrate || cached) {
            out.files["calibration.json"] = io::to_json(cal).dump(2) + "\n";
            out.calibration = std::move(cal);
        }
    }

    if (c.protocol != Protocol::ppc) {
        const auto t0 = detail::Clock::now();
        QptOptions qo;
        qo.psd_projection = c.qpt_psd_projection;
        qo.normalization = c.normalization;
        if (c.qpt_mitigation)
            qo.mitigation = out.calibration ? out.calibration->transition : noise.transition;
        const QptResult q = run_qpt(target, noise, c.shots, qo, c.threads);
        report.timing.tomography = detail::seconds_since(t0);
        QptSection s;
        s.chi = q.estimate.chi;
        s.fidelity = {process_fidelity(s.chi, report.target_chi),
                      raw_process_fidelity(s.chi.renormalized(Normalization::trace_d),
                                           report.target_chi.renormalized(Normalization::trace_d)),
                      std::nullopt, std::nullopt};
        s.max_abs_imag_chi = s.chi.chi.imag().cwiseAbs().maxCoeff();
        s.d_inf_target = detail::distances(s.chi, report.target_chi);
        s.residual = q.estimate.residual;
        s.psd_projection = c.qpt_psd_projection;
        s.mitigated = c.qpt_mitigation;
        s.circuits = q.plan.circuit_count();
        s.warnings = q.estimate.warnings;
        std::ostringstream chi_csv, lambda_csv;
        io::write_chi_csv(chi_csv, s.chi);
        io::write_lambda_csv(lambda_csv, q.plan, q.data);
        out.files["chi_qpt.csv"] = chi_csv.str();
        out.files["qpt_lambda.csv"] = lambda_csv.str();
        report.qpt = std::move(s);
    }

    if (report.ppc && report.qpt) {
        report.ppc_vs_qpt = detail::distances(report.ppc->aligned_chi, report.qpt->chi);
    }
    report.timing.total = detail::seconds_since(t_start);
    out.files["report.json"] = serialize(report);
    return out;
}

/// Calibration-only run: calibration.json and the calibration sweeps.
inline RunOutput run_calibration_only(const ExperimentConfig& c) {
    validate(c);
    check_seed(c);
    auto [cal, records] = run_calibration(c);
    RunOutput out;
    out.files["calibration.json"] = io::to_json(cal).dump(2) + "\n";
    out.files["sweeps/calibration.csv"] = detail::sweep_csv(records);
    out.calibration = std::move(cal);
    return out;
}

/// Hyperparameter sweep over the configured (n_theta, shots) grids.
inline std::vector<HyperparameterRow> run_hyperparameter_sweep(const ExperimentConfig& c) {
    validate(c);
    check_seed(c);
    return calibration_hyperparameter_sweep(c.n, c.sweep_n_thetas, c.sweep_shots, c.calibration_axes,
                                            noise_profile(c), c.sweep_repetitions, calibration_options(c));
}

// ---------------------------------------------------------------------------
// Comparison of two reports

struct Comparison {
    std::string protocol_a, protocol_b;
    ProcessMatrix chi_a, chi_b;
    DistanceSummary d_inf;
    /// Normalized overlap between the two estimates.
    double mutual_fidelity = 0.0;
    /// Each estimate against its own report's target.
    double fidelity_a = 0.0, fidelity_b = 0.0;
};

/// Picks the PPC estimate (gauge aligned) when present, else the tomography
/// estimate, unless `which` names one.
inline std::pair<std::string, ProcessMatrix> report_chi(const ProcessReport& r, const std::string& which = "auto") {
    const bool want_ppc = which == "ppc" || (which == "auto" && r.ppc);
    if (which != "auto" && which != "ppc" && which != "qpt")
        throw InvalidArgument("protocol selector must be auto, ppc or qpt");
    if (want_ppc) {
        if (!r.ppc)
            throw InvalidArgument("report has no ppc section");
        return {"ppc", r.ppc->aligned_chi};
    }
    if (!r.qpt)
        throw InvalidArgument("report has no qpt section");
    return {"qpt", r.qpt->chi};
}

inline Comparison compare_reports(const ProcessReport& a, const ProcessReport& b, const std::string& which_a = "auto",
                                  const std::string& which_b = "auto") {
    Comparison c;
    std::tie(c.protocol_a, c.chi_a) = report_chi(a, which_a);
    std::tie(c.protocol_b, c.chi_b) = report_chi(b, which_b);
    if (c.chi_a.n != c.chi_b.n)
        throw InvalidArgument("reports describe different qubit counts (" + std::to_string(c.chi_a.n) + " vs " +
                              std::to_string(c.chi_b.n) + ")");
    if (c.chi_a.normalization != c.chi_b.normalization)
        throw InvalidArgument("reports use different chi normalizations");
    c.d_inf = detail::distances(c.chi_a, c.chi_b);
    c.mutual_fidelity = process_fidelity(c.chi_a, c.chi_b);
    c.fidelity_a = process_fidelity(c.chi_a, a.target_chi);
    c.fidelity_b = process_fidelity(c.chi_b, b.target_chi);
    return c;
}

inline io::json to_json(const Comparison& c) {
    io::json diffs = io::json::array();
    for (Index k = 0; k < c.chi_a.chi.rows(); ++k)
        for (Index l = 0; l < c.chi_a.chi.cols(); ++l) {
            const cplx d = c.chi_a.chi(k, l) - c.chi_b.chi(k, l);
            diffs.push_back({{"row_label", pauli_label(k, c.chi_a.n)},
                             {"col_label", pauli_label(l, c.chi_a.n)},
                             {"re", d.real()},
                             {"im", d.imag()}});
        }
    return {{"a", {{"protocol", c.protocol_a}, {"fidelity_to_target", c.fidelity_a}}},
            {"b", {{"protocol", c.protocol_b}, {"fidelity_to_target", c.fidelity_b}}},
            {"d_inf", detail::to_json(c.d_inf)},
            {"mutual_fidelity", c.mutual_fidelity},
            {"differences", std::move(diffs)}};
}

} // namespace ppc
