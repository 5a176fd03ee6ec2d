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

// Command-line front end: run, calibrate, characterize, qpt, compare, sweep,
// resources.
//
// Exit codes: 0 success, 1 I/O or unexpected error, 2 invalid input,
// 3 fit failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ppc/experiment.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitFit = 3;

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> shots;
    std::optional<int> n_theta;
    std::optional<unsigned> threads;
    std::optional<std::string> calibration_file;
    std::optional<std::string> calibration_cache;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ppc::InvalidArgument("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_atomically(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out)
            throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
    fs::rename(tmp, path);
}

void write_outputs(const std::string& dir, const std::map<std::string, std::string>& files) {
    for (const auto& [name, content] : files)
        write_atomically(fs::path(dir) / name, content);
}

ppc::ExperimentConfig load_config(const Overrides& o) {
    ppc::ExperimentConfig c = ppc::parse_config(read_file(o.config_path));
    if (o.seed)
        c.seed = *o.seed;
    if (o.out)
        c.output_dir = *o.out;
    if (o.shots)
        c.shots = *o.shots == "exact" ? ppc::Shots::exact_mode() : ppc::Shots::of(std::stoll(*o.shots));
    if (o.n_theta)
        c.n_theta = *o.n_theta;
    if (o.threads)
        c.threads = *o.threads;
    ppc::validate(c);
    ppc::check_seed(c);
    return c;
}

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("config", o.config_path, "Experiment configuration (JSON)")->required();
    cmd->add_option("--seed", o.seed, "Master seed (overrides the config)");
    cmd->add_option("--out", o.out, "Output directory (overrides the config)");
    cmd->add_option("--shots", o.shots, "Shots per circuit, or 'exact'");
    cmd->add_option("--n-theta", o.n_theta, "Angle grid intervals");
    cmd->add_option("--threads", o.threads, "Worker threads (0 = hardware concurrency)");
}

std::optional<ppc::CalibrationResult> cached_calibration(const Overrides& o, const ppc::ExperimentConfig& c) {
    if (o.calibration_file) {
        auto cal = ppc::io::calibration_from_json(ppc::io::json::parse(read_file(*o.calibration_file)));
        if (cal.content_hash != ppc::calibration_hash(c))
            std::cerr << "warning: calibration file was produced under different settings\n";
        return cal;
    }
    if (o.calibration_cache) {
        const fs::path path = fs::path(*o.calibration_cache) / ("calibration_" + ppc::calibration_hash(c) + ".json");
        if (fs::exists(path)) {
            std::cerr << "using cached calibration " << path.string() << "\n";
            return ppc::io::calibration_from_json(ppc::io::json::parse(read_file(path.string())));
        }
    }
    return std::nullopt;
}

void store_in_cache(const Overrides& o, const ppc::CalibrationResult& cal) {
    if (!o.calibration_cache || cal.content_hash.empty())
        return;
    const fs::path path = fs::path(*o.calibration_cache) / ("calibration_" + cal.content_hash + ".json");
    if (!fs::exists(path))
        write_atomically(path, ppc::io::to_json(cal).dump(2) + "\n");
}

void print_summary(const ppc::ProcessReport& r) {
    if (r.ppc)
        std::cout << "ppc: fidelity " << r.ppc->fidelity.process << ", gauge-aligned unitary fidelity "
                  << r.ppc->fidelity.gauge_aligned_unitary.value_or(0.0) << ", max |Im chi| "
                  << r.ppc->max_abs_imag_chi << ", circuits " << r.ppc->circuits << "\n";
    if (r.qpt)
        std::cout << "qpt: fidelity " << r.qpt->fidelity.process << ", circuits " << r.qpt->circuits << "\n";
    if (r.ppc_vs_qpt)
        std::cout << "d_inf(ppc, qpt): entrywise " << r.ppc_vs_qpt->entrywise << ", operator "
                  << r.ppc_vs_qpt->operator_norm << "\n";
    for (const auto* w : {r.ppc ? &r.ppc->warnings : nullptr, r.qpt ? &r.qpt->warnings : nullptr})
        if (w)
            for (const auto& msg : *w)
                std::cerr << "warning: " << msg << "\n";
}

int run_protocol(const Overrides& o, std::optional<ppc::Protocol> force) {
    ppc::ExperimentConfig c = load_config(o);
    if (force)
        c.protocol = *force;
    const auto cached = cached_calibration(o, c);
    const ppc::RunOutput out = ppc::run_experiment(c, cached ? &*cached : nullptr);
    write_outputs(c.output_dir, out.files);
    if (out.calibration && !cached)
        store_in_cache(o, *out.calibration);
    print_summary(out.report);
    std::cout << "wrote " << out.files.size() << " files to " << c.output_dir << "\n";
    return 0;
}

int run_calibrate(const Overrides& o) {
    const ppc::ExperimentConfig c = load_config(o);
    const ppc::RunOutput out = ppc::run_calibration_only(c);
    write_outputs(c.output_dir, out.files);
    store_in_cache(o, *out.calibration);
    const auto& cal = *out.calibration;
    std::cout << "transition matrix:\n" << cal.transition.matrix() << "\n";
    for (const auto& [key, value] : cal.prep_phase.values())
        std::cout << "theta0[" << ppc::to_string(key.second) << ", q" << key.first << "] = " << value << " +/- "
                  << cal.prep_phase_std_error.at(key) << "\n";
    std::cout << "content hash " << cal.content_hash << "\n";
    return 0;
}

int run_sweep(const Overrides& o) {
    const ppc::ExperimentConfig c = load_config(o);
    const auto rows = ppc::run_hyperparameter_sweep(c);
    std::ostringstream csv;
    ppc::io::write_hyperparameter_csv(csv, rows);
    write_outputs(c.output_dir, {{"sweep.csv", csv.str()}});
    std::cout << "wrote " << rows.size() << " rows to " << (fs::path(c.output_dir) / "sweep.csv").string() << "\n";
    return 0;
}

int run_compare(const std::string& a, const std::string& b, const std::string& which_a, const std::string& which_b,
                const std::optional<std::string>& out) {
    const auto ra = ppc::parse_report(read_file(a));
    const auto rb = ppc::parse_report(read_file(b));
    const ppc::Comparison cmp = ppc::compare_reports(ra, rb, which_a, which_b);
    const std::string doc = ppc::to_json(cmp).dump(2) + "\n";
    if (out)
        write_atomically(*out, doc);
    std::cout << "protocol,fidelity_to_target\n"
              << "a:" << cmp.protocol_a << "," << cmp.fidelity_a << "\n"
              << "b:" << cmp.protocol_b << "," << cmp.fidelity_b << "\n"
              << "d_inf entrywise " << cmp.d_inf.entrywise << ", operator " << cmp.d_inf.operator_norm
              << ", mutual fidelity " << cmp.mutual_fidelity << "\n";
    return 0;
}

int run_resources(const std::vector<int>& n_thetas, int max_qubits, const std::optional<std::string>& out) {
    std::ostringstream csv;
    csv << "n,n_theta,ppc_total,ppc_calibration,ppc_characterization,qpt\n";
    for (int nt : n_thetas)
        for (int n = 1; n <= max_qubits; ++n) {
            const auto r = ppc::resource_counts(n, nt);
            csv << n << ',' << nt << ',' << r.ppc_total << ',' << r.ppc_calibration << ','
                << r.ppc_characterization << ',' << r.qpt << '\n';
        }
    if (out)
        write_atomically(*out, csv.str());
    std::cout << csv.str();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parameterized process characterization and process tomography simulator"};
    app.require_subcommand(1);

    Overrides run_o, cal_o, char_o, qpt_o, sweep_o;
    auto* run = app.add_subcommand("run", "Run the protocol(s) named in the config");
    add_common(run, run_o);
    run->add_option("--calibration-cache", run_o.calibration_cache, "Directory of cached calibrations");
    run->add_option("--calibration", run_o.calibration_file, "Reuse this calibration.json");

    auto* cal = app.add_subcommand("calibrate", "Estimate the readout matrix and preparation phase");
    add_common(cal, cal_o);
    cal->add_option("--calibration-cache", cal_o.calibration_cache, "Directory of cached calibrations");

    auto* chr = app.add_subcommand("characterize", "Characterize the target with rotation sweeps");
    add_common(chr, char_o);
    chr->add_option("--calibration-cache", char_o.calibration_cache, "Directory of cached calibrations");
    chr->add_option("--calibration", char_o.calibration_file, "Reuse this calibration.json");

    auto* qpt = app.add_subcommand("qpt", "Run standard process tomography on the target");
    add_common(qpt, qpt_o);

    auto* sweep = app.add_subcommand("sweep", "Calibration hyperparameter sweep over (n_theta, shots)");
    add_common(sweep, sweep_o);

    std::string report_a, report_b, which_a = "auto", which_b = "auto";
    std::optional<std::string> compare_out;
    auto* cmp = app.add_subcommand("compare", "Compare the chi matrices of two reports");
    cmp->add_option("report_a", report_a, "First report.json")->required();
    cmp->add_option("report_b", report_b, "Second report.json")->required();
    cmp->add_option("--a", which_a, "Estimate to take from the first report (auto, ppc, qpt)");
    cmp->add_option("--b", which_b, "Estimate to take from the second report (auto, ppc, qpt)");
    cmp->add_option("--out", compare_out, "Write the comparison document here");

    std::vector<int> n_thetas{31, 51, 71};
    int max_qubits = 6;
    std::optional<std::string> resources_out;
    auto* res = app.add_subcommand("resources", "Circuit counts of both protocols");
    res->add_option("--n-theta", n_thetas, "Angle grid sizes")->delimiter(',');
    res->add_option("--max-qubits", max_qubits, "Largest qubit count")->check(CLI::Range(1, 16));
    res->add_option("--out", resources_out, "Also write the table as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }

    try {
        if (*run)
            return run_protocol(run_o, std::nullopt);
        if (*cal)
            return run_calibrate(cal_o);
        if (*chr)
            return run_protocol(char_o, ppc::Protocol::ppc);
        if (*qpt)
            return run_protocol(qpt_o, ppc::Protocol::qpt);
        if (*sweep)
            return run_sweep(sweep_o);
        if (*cmp)
            return run_compare(report_a, report_b, which_a, which_b, compare_out);
        if (*res)
            return run_resources(n_thetas, max_qubits, resources_out);
    } catch (const ppc::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const ppc::FitFailure& e) {
        std::cerr << "fit failure: " << e.what() << "\n";
        return kExitFit;
    } catch (const ppc::IllConditioned& e) {
        std::cerr << "fit failure: " << e.what() << "\n";
        return kExitFit;
    } catch (const ppc::IncompleteCalibration& e) {
        std::cerr << "fit failure: " << e.what() << "\n";
        return kExitFit;
    } catch (const ppc::io::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return 0;
}
