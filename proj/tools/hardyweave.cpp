// Copyright 2026 The HardyWeave Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// hardyweave: run the three-laser interferometer, execute .circ files, and
// scan the weak-laser amplitude.
//
// Exit codes: 0 success, 1 usage or parse error, 2 physics gate
// (CancellationFailed / EmptySelection).

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hardyweave/analysis.hpp"
#include "hardyweave/compile.hpp"
#include "hardyweave/dsl.hpp"
#include "hardyweave/pipeline.hpp"
#include "hardyweave/report.hpp"

namespace {

using namespace hardyweave;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitGate = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Complex complex_flag(const std::string &name, const std::string &text) {
    auto c = parse_complex(text);
    if (!c) throw UsageError("--" + name + ": bad complex number '" + text + "'");
    return *c;
}

int exit_code_for(const Error &e) { return is_physics_gate(e.code()) ? kExitGate : kExitUsage; }

void print_error(const Error &e) {
    std::cerr << "hardyweave: " << to_string(e.code()) << ": " << e.what() << '\n';
}

// ---------------------------------------------------------------- hardy

struct HardyFlags {
    std::string alpha = "0.01";
    std::string beta = "0.01";
    std::string gamma = "0.05";
    std::string q = "0.001";
    int pump_n_max = 3;
    double tol = kDefaultCondition5Tol;
    std::string format = "text";
};

int cmd_hardy(const HardyFlags &flags) {
    LaserConfig cfg;
    cfg.alpha = complex_flag("alpha", flags.alpha);
    cfg.beta = complex_flag("beta", flags.beta);
    cfg.gamma = complex_flag("gamma", flags.gamma);
    cfg.pump_n_max = flags.pump_n_max;
    Complex q = complex_flag("q", flags.q);
    PipelineOptions options{flags.tol};

    Json inputs{{"alpha", to_json(cfg.alpha)}, {"beta", to_json(cfg.beta)},         {"gamma", to_json(cfg.gamma)},
                {"q", to_json(q)},             {"pump_n_max", cfg.pump_n_max}, {"tol", flags.tol}};

    try {
        cfg.validate();
    } catch (const Error &e) {
        print_error(e);
        return kExitUsage;
    }

    PipelineReport report;
    ParadoxReport paradox;
    try {
        report = run_full(cfg, q, options);
        paradox = verify_hardy_paradox(cfg, q, options);
    } catch (const Error &e) {
        print_error(e);
        if (flags.format == "json") {
            std::cout << make_record("hardy", inputs, Json{{"error", error_json(e)}}).dump(2) << '\n';
        }
        return exit_code_for(e);
    }

    const char *shown[] = {stage::kHardyState, stage::kFinal, stage::kFinalSignalOnly, stage::kFinalIdlerOnly};
    if (flags.format == "json") {
        Json stages = Json::object();
        for (const char *name : shown) stages[name] = to_json(report.stage(name));
        Json results{{"condition5_residual", number_or_null(report.condition5_residual)},
                     {"cancellation_residual", report.cancellation_residual},
                     {"stages", stages},
                     {"detection_probabilities", to_json(report.detection_table)},
                     {"paradox", to_json(paradox)}};
        std::cout << make_record("hardy", inputs, results).dump(2) << '\n';
    } else if (flags.format == "csv") {
        std::cout << "outcome,probability\n";
        for (const auto &[k, p] : report.detection_table) std::cout << '"' << k << "\"," << format_real(p) << '\n';
    } else {
        std::cout << "alpha=" << flags.alpha << " beta=" << flags.beta << " gamma=" << flags.gamma
                  << " q=" << flags.q << " pump_n_max=" << cfg.pump_n_max << '\n';
        std::cout << "condition5 residual:    " << report.condition5_residual << '\n';
        std::cout << "cancellation residual:  " << report.cancellation_residual << "\n\n";
        const char *titles[] = {"hardy_state (after cancellation)", "final (both detector splitters)",
                                "final_signal_only (signal splitter only)", "final_idler_only (idler splitter only)"};
        for (int k = 0; k < 4; ++k) {
            std::cout << "[" << titles[k] << "]\n" << format_state_text(report.stage(shown[k])) << '\n';
        }
        std::cout << "detection probabilities:\n";
        for (const auto &[k, p] : report.detection_table) std::cout << "  " << k << "  " << format_probability(p) << '\n';
        std::cout << "\nparadox: <u_S u_I|hardy>=" << paradox.amp_uu << "  <d_S v_I|signal-only>=" << paradox.amp_dSvI
                  << "  <v_S d_I|idler-only>=" << paradox.amp_vSdI << "  P(d_S,d_I)=" << format_probability(paradox.p_dd)
                  << '\n';
        std::cout << "verdict: " << (paradox.verdict ? "reproduced" : "not reproduced") << '\n';
    }
    return paradox.verdict ? kExitOk : kExitGate;
}

// ---------------------------------------------------------------- run

struct RunFlags {
    std::string file;
    std::string format = "text";
    bool emit_stages = false;
};

int cmd_run(const RunFlags &flags) {
    std::ifstream in(flags.file, std::ios::binary);
    if (!in) {
        std::cerr << "hardyweave: cannot open '" << flags.file << "'\n";
        return kExitUsage;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();

    Circuit circuit;
    try {
        circuit = parse_circuit(buffer.str());
    } catch (const ParseError &e) {
        std::cerr << format_diagnostic(flags.file, e) << '\n';
        return kExitUsage;
    }

    Json inputs{{"file", flags.file}, {"emit_stages", flags.emit_stages}, {"circuit", format_circuit(circuit)}};
    RunResult result;
    Program program;
    try {
        program = compile_circuit(circuit);
        result = execute(program);
    } catch (const Error &e) {
        print_error(e);
        if (flags.format == "json") {
            std::cout << make_record("run", inputs, Json{{"error", error_json(e)}}).dump(2) << '\n';
        }
        return exit_code_for(e);
    }

    if (flags.format == "json") {
        Json steps = Json::array();
        for (const auto &s : program.steps) steps.push_back(s.name);
        Json results{{"steps", steps}};
        if (result.condition5_residual) results["condition5_residual"] = number_or_null(*result.condition5_residual);
        if (result.cancellation_residual) results["cancellation_residual"] = *result.cancellation_residual;
        results["detection_probabilities"] =
            result.probabilities ? to_json(*result.probabilities) : Json(nullptr);
        if (flags.emit_stages) {
            Json stages = Json::array();
            for (const auto &[name, state] : result.stages) {
                stages.push_back(Json{{"name", name}, {"terms", to_json(state)}});
            }
            results["stages"] = stages;
        }
        std::cout << make_record("run", inputs, results).dump(2) << '\n';
    } else if (flags.format == "csv") {
        std::cout << "outcome,probability\n";
        if (result.probabilities) {
            for (const auto &[k, p] : *result.probabilities) std::cout << '"' << k << "\"," << format_real(p) << '\n';
        }
    } else {
        std::cout << flags.file << ": " << circuit.modes.size() << " modes, " << circuit.elements.size()
                  << " elements\n";
        if (flags.emit_stages) {
            for (const auto &[name, state] : result.stages) {
                std::cout << "\n[" << name << "]\n" << format_state_text(state);
            }
            std::cout << '\n';
        }
        if (result.cancellation_residual) {
            std::cout << "cancellation residual: " << *result.cancellation_residual << '\n';
        }
        if (result.probabilities) {
            std::cout << "detection probabilities:\n";
            for (const auto &[k, p] : *result.probabilities) {
                std::cout << "  " << k << "  " << format_probability(p) << '\n';
            }
        }
    }
    return kExitOk;
}

// ---------------------------------------------------------------- scan

struct ScanFlags {
    std::string param = "alpha";
    std::vector<double> values;
    double min = 0.02;
    double max = 0.2;
    int steps = 4;
    std::string spacing = "log";
    bool satisfy_condition5 = true;
    std::string q = "0.001";
    std::string gamma = "0.05";
    int pump_n_max = 3;
    std::string format = "csv";
};

int cmd_scan(const ScanFlags &flags) {
    if (flags.param != "alpha") throw UsageError("--param: only 'alpha' can be scanned");
    std::vector<double> grid = flags.values;
    if (grid.empty()) {
        if (flags.steps < 2) throw UsageError("--steps must be at least 2");
        if (!(flags.min > 0.0) || !(flags.max > flags.min)) throw UsageError("--min/--max must satisfy 0 < min < max");
        for (int k = 0; k < flags.steps; ++k) {
            double t = static_cast<double>(k) / (flags.steps - 1);
            grid.push_back(flags.spacing == "log" ? flags.min * std::pow(flags.max / flags.min, t)
                                                  : flags.min + t * (flags.max - flags.min));
        }
    } else {
        if (grid.size() < 2) throw UsageError("--values needs at least 2 entries");
        for (double v : grid) {
            if (!(v > 0.0)) throw UsageError("--values must be positive");
        }
    }

    ScanOptions opts;
    opts.q = complex_flag("q", flags.q);
    opts.gamma = complex_flag("gamma", flags.gamma);
    opts.satisfy_condition5 = flags.satisfy_condition5;
    opts.pump_n_max = flags.pump_n_max;

    std::vector<ScanPoint> points;
    try {
        points = scan_alpha(grid, opts);
    } catch (const Error &e) {
        print_error(e);
        return exit_code_for(e);
    }

    std::vector<double> xs, triple, two_pair;
    for (const auto &p : points) {
        if (p.noise.ratio_triple > 0.0 && p.noise.ratio_two_pair > 0.0 && std::isfinite(p.noise.ratio_triple)) {
            xs.push_back(std::abs(p.cfg.alpha));
            triple.push_back(p.noise.ratio_triple);
            two_pair.push_back(p.noise.ratio_two_pair);
        }
    }
    double slope_triple = xs.size() >= 2 ? fit_loglog_slope(xs, triple) : std::nan("");
    double slope_two_pair = xs.size() >= 2 ? fit_loglog_slope(xs, two_pair) : std::nan("");

    if (flags.format == "json") {
        Json inputs{{"param", flags.param},
                    {"grid", grid},
                    {"satisfy_condition5", flags.satisfy_condition5},
                    {"q", to_json(opts.q)},
                    {"gamma", to_json(opts.gamma)},
                    {"pump_n_max", opts.pump_n_max}};
        Json rows = Json::array();
        for (std::size_t k = 0; k < points.size(); ++k) {
            const auto &p = points[k];
            rows.push_back(Json{{"index", k},
                                {"alpha", to_json(p.cfg.alpha)},
                                {"beta", to_json(p.cfg.beta)},
                                {"gamma", to_json(p.cfg.gamma)},
                                {"q", to_json(p.q)},
                                {"noise", to_json(p.noise)},
                                {"p_dd", number_or_null(p.p_dd)}});
        }
        Json results{{"points", rows},
                     {"fit", Json{{"slope_triple", number_or_null(slope_triple)},
                                  {"slope_two_pair", number_or_null(slope_two_pair)}}}};
        std::cout << make_record("scan", inputs, results).dump(2) << '\n';
    } else if (flags.format == "csv") {
        std::cout << "index,alpha,beta,gamma,q,ratio_triple,ratio_two_pair,p_dd\n";
        for (std::size_t k = 0; k < points.size(); ++k) {
            const auto &p = points[k];
            std::cout << k << ',' << format_real(p.cfg.alpha.real()) << ',' << format_real(p.cfg.beta.real()) << ','
                      << format_real(std::abs(p.cfg.gamma)) << ',' << format_real(std::abs(p.q)) << ','
                      << format_real(p.noise.ratio_triple) << ',' << format_real(p.noise.ratio_two_pair) << ','
                      << (std::isfinite(p.p_dd) ? format_real(p.p_dd) : std::string("nan")) << '\n';
        }
    } else {
        for (std::size_t k = 0; k < points.size(); ++k) {
            const auto &p = points[k];
            std::cout << "alpha=" << format_real(p.cfg.alpha.real()) << "  ratio_triple=" << p.noise.ratio_triple
                      << "  ratio_two_pair=" << p.noise.ratio_two_pair << "  p_dd=" << p.p_dd << '\n';
        }
        std::cout << "log-log slope (triple/pair):   " << slope_triple << '\n';
        std::cout << "log-log slope (two-pair/pair): " << slope_two_pair << '\n';
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Three-laser interferometer simulator"};
    app.require_subcommand(1);

    HardyFlags hardy;
    auto *hardy_cmd = app.add_subcommand("hardy", "run the interferometer with laser amplitudes and crystal q");
    hardy_cmd->add_option("--alpha", hardy.alpha, "signal laser amplitude (complex, e.g. 0.01 or 0.01+0.002i)");
    hardy_cmd->add_option("--beta", hardy.beta, "idler laser amplitude");
    hardy_cmd->add_option("--gamma", hardy.gamma, "pump laser amplitude");
    hardy_cmd->add_option("--q", hardy.q, "down-conversion amplitude");
    hardy_cmd->add_option("--pump-n-max", hardy.pump_n_max, "pump expansion order")->check(CLI::Range(0, 12));
    hardy_cmd->add_option("--tol", hardy.tol, "acceptance window for alpha*beta = 2*q*gamma");
    hardy_cmd->add_option("--format", hardy.format)->check(CLI::IsMember({"text", "json", "csv"}));

    RunFlags run;
    auto *run_cmd = app.add_subcommand("run", "compile and execute a .circ file");
    run_cmd->add_option("file", run.file, "circuit file")->required();
    run_cmd->add_option("--format", run.format)->check(CLI::IsMember({"text", "json", "csv"}));
    run_cmd->add_flag("--emit-stages", run.emit_stages, "dump the state after every step");

    ScanFlags scan;
    auto *scan_cmd = app.add_subcommand("scan", "noise ratios and P(d_S,d_I) over a grid of alpha (beta = alpha)");
    scan_cmd->add_option("--param", scan.param, "scanned parameter (alpha)");
    scan_cmd->add_option("--values", scan.values, "explicit grid, e.g. --values 0.2,0.1,0.05,0.02")->delimiter(',');
    scan_cmd->add_option("--min", scan.min);
    scan_cmd->add_option("--max", scan.max);
    scan_cmd->add_option("--steps", scan.steps);
    scan_cmd->add_option("--spacing", scan.spacing)->check(CLI::IsMember({"log", "linear"}));
    scan_cmd->add_flag("--satisfy-condition5,!--no-satisfy-condition5", scan.satisfy_condition5,
                       "set gamma = alpha^2/(2q) at each point (default on)");
    scan_cmd->add_option("--q", scan.q);
    scan_cmd->add_option("--gamma", scan.gamma, "pump amplitude when the condition is not maintained");
    scan_cmd->add_option("--pump-n-max", scan.pump_n_max)->check(CLI::Range(0, 12));
    scan_cmd->add_option("--format", scan.format)->check(CLI::IsMember({"text", "json", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*hardy_cmd) return cmd_hardy(hardy);
        if (*run_cmd) return cmd_run(run);
        if (*scan_cmd) return cmd_scan(scan);
    } catch (const UsageError &e) {
        std::cerr << "hardyweave: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error &e) {
        print_error(e);
        return exit_code_for(e);
    }
    return kExitUsage;
}
