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

/**
 * @file
 * Lowering of a parsed Circuit to a sequence of state operations, and an
 * executor for that sequence.
 *
 * Lasers are gathered into one preparation step. A circuit with a crystal
 * gets a post-selection step right after the crystal (and any pinholes that
 * follow it): one photon in the signal band, one in the idler band, pump
 * factored out, and (with `constraint condition5`) the interference gate.
 * Detectors do not collapse the state; they select the modes of the final
 * probability readout.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "dsl.hpp"
#include "fock.hpp"
#include "optics.hpp"
#include "pipeline.hpp"

namespace hardyweave {

struct LaserSource {
    ModeId mode;
    Complex amplitude;
    int n_max = 1;
};

struct PrepareStep {
    std::vector<LaserSource> lasers;
};

struct BeamSplitStep {
    BeamSplitterSpec spec;
};

/// A mirror with in == out applies a phase; otherwise it also moves the beam.
struct MirrorStep {
    ModeId from;
    ModeId to;
    Complex phase{1.0, 0.0};
};

struct DownConvertStep {
    DownConversionSpec spec;
};

/// Pinhole: identifies the filtered beam with `to` (a no-op when from == to).
struct IdentifyStep {
    ModeId from;
    ModeId to;
};

struct Condition5Gate {
    Complex alpha;
    Complex beta;
    Complex gamma;
    Complex q;
    double tol = kDefaultCondition5Tol;
};

struct PostSelectStep {
    PairSelection selection;
    ModeId signal;  // crystal outputs; |signal idler> is the interfering pair
    ModeId idler;
    Complex gamma;
    int pump_n_max = 0;
    Complex q;
    std::optional<Condition5Gate> gate;
};

struct ReadoutStep {
    std::vector<ModeId> detectors;
};

using Step = std::variant<PrepareStep, BeamSplitStep, MirrorStep, DownConvertStep, IdentifyStep, PostSelectStep,
                          ReadoutStep>;

struct CompiledStep {
    std::string name;
    Step op;
    std::vector<ModeId> reads;
    std::vector<ModeId> writes;
};

struct Program {
    ModeSet modes;
    std::vector<int> cutoffs;
    std::vector<CompiledStep> steps;
};

namespace compile_detail {

inline std::string element_label(const ElementSpec &e) {
    std::string out(keyword(e.kind));
    if (e.kind == ElementKind::Laser) return out + ' ' + e.outputs.at(0).name();
    for (const auto &m : e.inputs) out += ' ' + m.name();
    if (!e.outputs.empty()) {
        out += " ->";
        for (const auto &m : e.outputs) out += ' ' + m.name();
    }
    return out;
}

[[noreturn]] inline void unsupported(const ElementSpec &e, const std::string &what) {
    throw Error(ErrorCode::UnsupportedParam, "line " + std::to_string(e.span.line) + " (" + element_label(e) +
                                                 "): " + what);
}

inline void allow_params(const ElementSpec &e, std::initializer_list<std::string_view> keys) {
    for (const auto &[key, value] : e.params) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) unsupported(e, "unsupported parameter '" + key + "'");
    }
}

inline std::optional<Complex> complex_param(const ElementSpec &e, const std::string &key) {
    auto it = e.params.find(key);
    if (it == e.params.end()) return std::nullopt;
    if (auto c = std::get_if<Complex>(&it->second)) return *c;
    unsupported(e, "parameter '" + key + "' must be a number");
}

inline std::optional<std::string> word_param(const ElementSpec &e, const std::string &key) {
    auto it = e.params.find(key);
    if (it == e.params.end()) return std::nullopt;
    if (auto s = std::get_if<std::string>(&it->second)) return *s;
    unsupported(e, "parameter '" + key + "' must be a word");
}

using Band = std::set<std::string>;  // names of the lasers (or crystal outputs) a beam descends from

}  // namespace compile_detail

/// Lowers `circuit` to steps. Throws UnsupportedParam for parameters that
/// cannot be realized.
inline Program compile_circuit(const Circuit &circuit) {
    using namespace compile_detail;
    Program program;
    program.modes = circuit.modes.empty() ? ModeSet() : ModeSet::from_names(circuit.modes);
    program.cutoffs.assign(program.modes.size(), kDefaultCutoff);

    const ElementSpec *crystal = nullptr;
    for (std::size_t i = 0; i < circuit.elements.size(); ++i) {
        if (circuit.elements[i].kind != ElementKind::Crystal) continue;
        if (crystal) unsupported(circuit.elements[i], "only one crystal per circuit is supported");
        crystal = &circuit.elements[i];
    }

    // lasers first
    PrepareStep prepare;
    std::map<std::string, LaserSource> lasers;
    for (const auto &e : circuit.elements) {
        if (e.kind != ElementKind::Laser) continue;
        allow_params(e, {"amp", "nmax"});
        auto amp = complex_param(e, "amp");
        if (!amp) unsupported(e, "laser needs amp=<complex>");
        bool pumps = crystal && crystal->inputs[0] == e.outputs[0];
        int n_max = pumps ? 3 : 1;
        if (auto it = e.params.find("nmax"); it != e.params.end()) {
            auto n = std::get_if<std::int64_t>(&it->second);
            if (!n || *n < 0 || *n > 12) unsupported(e, "nmax must be an integer in [0, 12]");
            n_max = static_cast<int>(*n);
        }
        std::size_t idx = program.modes.require(e.outputs[0]);
        program.cutoffs[idx] = std::max(program.cutoffs[idx], n_max + (pumps ? 1 : 0));
        LaserSource src{e.outputs[0], *amp, n_max};
        lasers.emplace(e.outputs[0].name(), src);
        prepare.lasers.push_back(src);
    }
    if (!prepare.lasers.empty()) {
        std::vector<ModeId> writes;
        for (const auto &l : prepare.lasers) writes.push_back(l.mode);
        program.steps.push_back({"prepare", prepare, {}, writes});
    }

    std::map<std::string, Band> band;
    std::vector<std::string> live;  // modes currently carrying a beam, in production order
    auto make_live = [&](const ModeId &m) {
        if (std::find(live.begin(), live.end(), m.name()) == live.end()) live.push_back(m.name());
    };
    auto retire = [&](const ModeId &m) { live.erase(std::remove(live.begin(), live.end(), m.name()), live.end()); };
    for (const auto &l : prepare.lasers) {
        band[l.mode.name()] = {l.mode.name()};
        make_live(l.mode);
    }

    std::vector<ModeId> detectors;
    std::optional<Condition5Gate> gate;
    for (const auto &k : circuit.constraints) {
        if (k.name == "condition5") gate = Condition5Gate{{}, {}, {}, {}, k.tol};
    }
    if (gate && !crystal) {
        throw Error(ErrorCode::UnsupportedParam, "constraint condition5 needs a crystal");
    }

    bool post_select_pending = false;
    auto emit_post_select = [&]() {
        const ElementSpec &e = *crystal;
        const ModeId &pump = e.inputs[0];
        const ModeId &sig = e.outputs[0];
        const ModeId &idl = e.outputs[1];
        auto band_modes = [&](const ModeId &root) {
            std::vector<ModeId> out;
            const Band &b = band[root.name()];
            for (const auto &m : circuit.modes) {
                if (std::find(live.begin(), live.end(), m.name()) == live.end() || m == pump) continue;
                const Band &mb = band[m.name()];
                bool shared = std::any_of(mb.begin(), mb.end(), [&](const auto &r) { return b.contains(r); });
                if (shared) out.push_back(m);
            }
            return out;
        };
        PostSelectStep step;
        step.selection = {{band_modes(sig), band_modes(idl)}, pump};
        for (const auto &m : step.selection.bands[0]) {
            const auto &other = step.selection.bands[1];
            if (std::find(other.begin(), other.end(), m) != other.end()) {
                unsupported(e, "signal and idler beams are mixed before post-selection");
            }
        }
        step.signal = sig;
        step.idler = idl;
        step.q = *complex_param(e, "q");
        auto pump_laser = lasers.find(pump.name());
        step.gamma = pump_laser == lasers.end() ? Complex{} : pump_laser->second.amplitude;
        step.pump_n_max = pump_laser == lasers.end() ? 0 : pump_laser->second.n_max;
        if (gate) {
            auto root_amp = [&](const ModeId &m) {
                std::vector<Complex> amps;
                for (const auto &r : band[m.name()]) {
                    if (auto it = lasers.find(r); it != lasers.end()) amps.push_back(it->second.amplitude);
                }
                if (amps.size() != 1) unsupported(e, "condition5 needs exactly one laser feeding each crystal output");
                return amps[0];
            };
            gate->alpha = root_amp(sig);
            gate->beta = root_amp(idl);
            gate->gamma = step.gamma;
            gate->q = step.q;
            step.gate = gate;
        }
        std::vector<ModeId> reads = step.selection.bands[0];
        reads.insert(reads.end(), step.selection.bands[1].begin(), step.selection.bands[1].end());
        reads.push_back(pump);
        program.steps.push_back({"post_select", step, reads, reads});
        post_select_pending = false;
    };

    for (std::size_t i = 0; i < circuit.elements.size(); ++i) {
        const auto &e = circuit.elements[i];
        if (post_select_pending && e.kind != ElementKind::Pinhole) emit_post_select();
        std::string label = element_label(e);
        switch (e.kind) {
            case ElementKind::Laser: break;
            case ElementKind::BeamSplitter: {
                allow_params(e, {"matrix"});
                auto which = word_param(e, "matrix").value_or("final");
                Matrix2 m;
                if (which == "final") m = bs_matrix_final();
                else if (which == "input") m = bs_matrix_input();
                else unsupported(e, "matrix must be 'input' or 'final'");
                BeamSplitterSpec spec{e.inputs[0], std::nullopt, e.outputs[0], e.outputs[1], m};
                if (e.inputs.size() == 2) spec.in2 = e.inputs[1];
                try {
                    spec.validate();
                } catch (const Error &err) {
                    unsupported(e, err.what());
                }
                Band merged;
                for (const auto &in : e.inputs) merged.insert(band[in.name()].begin(), band[in.name()].end());
                for (const auto &in : e.inputs) retire(in);
                for (const auto &out : e.outputs) {
                    band[out.name()] = merged;
                    make_live(out);
                }
                program.steps.push_back({label, BeamSplitStep{spec}, e.inputs, e.outputs});
                break;
            }
            case ElementKind::Mirror: {
                allow_params(e, {"phase"});
                Complex phase = complex_param(e, "phase").value_or(Complex{1.0, 0.0});
                if (std::abs(std::abs(phase) - 1.0) > 1e-12) unsupported(e, "mirror phase must have unit magnitude");
                if (e.inputs[0] != e.outputs[0]) {
                    band[e.outputs[0].name()] = band[e.inputs[0].name()];
                    retire(e.inputs[0]);
                    make_live(e.outputs[0]);
                }
                program.steps.push_back({label, MirrorStep{e.inputs[0], e.outputs[0], phase}, e.inputs, e.outputs});
                break;
            }
            case ElementKind::Crystal: {
                allow_params(e, {"q", "order"});
                auto q = complex_param(e, "q");
                if (!q) unsupported(e, "crystal needs q=<complex>");
                auto order_word = word_param(e, "order").value_or("1");
                ExpansionOrder order = ExpansionOrder::First;
                if (order_word == "exact") order = ExpansionOrder::Exact;
                else if (order_word != "1") unsupported(e, "order must be 1 or exact");
                DownConversionSpec spec{e.inputs[0], e.outputs[0], e.outputs[1], *q, order};
                try {
                    spec.validate();
                } catch (const Error &err) {
                    unsupported(e, err.what());
                }
                std::size_t pump = program.modes.require(e.inputs[0]);
                auto pump_laser = lasers.find(e.inputs[0].name());
                if (pump_laser != lasers.end()) {
                    program.cutoffs[pump] = std::max(program.cutoffs[pump], pump_laser->second.n_max + 1);
                }
                const char *tags[] = {"signal", "idler"};
                for (int k = 0; k < 2; ++k) {
                    const auto &out = e.outputs[k];
                    if (band[out.name()].empty()) band[out.name()] = {"crystal:" + std::string(tags[k])};
                    make_live(out);
                }
                std::vector<ModeId> touched{e.inputs[0], e.outputs[0], e.outputs[1]};
                program.steps.push_back({label, DownConvertStep{spec}, touched, touched});
                post_select_pending = true;
                break;
            }
            case ElementKind::Pinhole: {
                allow_params(e, {});
                if (e.inputs[0] != e.outputs[0]) {
                    band[e.outputs[0].name()] = band[e.inputs[0].name()];
                    retire(e.inputs[0]);
                    make_live(e.outputs[0]);
                }
                program.steps.push_back({label, IdentifyStep{e.inputs[0], e.outputs[0]}, e.inputs, e.outputs});
                break;
            }
            case ElementKind::Detector: {
                allow_params(e, {});
                detectors.push_back(e.inputs[0]);
                break;
            }
        }
    }
    if (post_select_pending) emit_post_select();
    if (!detectors.empty()) {
        std::vector<ModeId> ordered;
        for (const auto &m : circuit.modes) {
            if (std::find(detectors.begin(), detectors.end(), m) != detectors.end()) ordered.push_back(m);
        }
        program.steps.push_back({"readout", ReadoutStep{ordered}, ordered, {}});
    }
    return program;
}

struct RunResult {
    std::vector<std::pair<std::string, QuantumState>> stages;
    std::optional<DetectionTable> probabilities;
    std::optional<double> condition5_residual;
    std::optional<double> cancellation_residual;
};

/// Called before each step runs.
using StepObserver = std::function<void(const CompiledStep &)>;

inline QuantumState apply_post_select(const QuantumState &state, const PostSelectStep &step, RunResult &result) {
    QuantumState selected = select_pair_sector(state, step.selection);
    if (step.q * step.gamma == Complex{}) {
        throw Error(ErrorCode::EmptySelection, "no down-converted pair: the interference branch is empty");
    }
    QuantumState slice = factor_pump(selected, step.selection.pump, step.gamma, step.pump_n_max);
    FockBasisState pair = slice.basis({{step.signal, 1}, {step.idler, 1}});
    if (!step.gate) return normalize(slice);

    LaserConfig cfg{step.gate->alpha, step.gate->beta, step.gate->gamma, step.pump_n_max};
    double c5 = check_condition5(cfg, step.gate->q);
    result.condition5_residual = c5;
    if (!(c5 <= step.gate->tol)) {
        double total = norm(slice);
        double leftover = std::abs(slice.amplitude(pair));
        double rest = std::sqrt(std::max(0.0, total * total - leftover * leftover));
        throw Error(ErrorCode::CancellationFailed,
                    "condition alpha*beta = 2*q*gamma violated (relative residual " + std::to_string(c5) + ")",
                    rest == 0.0 ? std::numeric_limits<double>::infinity() : leftover / rest);
    }
    HardyExtraction extraction = extract_interference_free(slice, pair);
    result.cancellation_residual = extraction.cancellation_residual;
    return extraction.state;
}

/// Runs `program` from the vacuum. Errors are tagged with the step name.
inline RunResult execute(const Program &program, const StepObserver &observe = {}) {
    RunResult result;
    QuantumState state = vacuum(program.modes, program.cutoffs);
    for (const auto &step : program.steps) {
        if (observe) observe(step);
        try {
            std::visit(
                [&](const auto &op) {
                    using T = std::decay_t<decltype(op)>;
                    if constexpr (std::is_same_v<T, PrepareStep>) {
                        for (const auto &laser : op.lasers) {
                            std::size_t idx = program.modes.require(laser.mode);
                            QuantumState factor = coherent_term_expansion(program.modes, laser.mode, laser.amplitude,
                                                                          laser.n_max, program.cutoffs);
                            QuantumState::TermMap terms;
                            for (const auto &[b, amp] : state.terms()) {
                                for (const auto &[fb, famp] : factor.terms()) {
                                    FockBasisState out = b;
                                    out[idx] += fb[idx];
                                    detail::accumulate(terms, out, amp * famp);
                                }
                            }
                            state = state.with_terms(std::move(terms));
                        }
                        state = normalize(state);
                    } else if constexpr (std::is_same_v<T, BeamSplitStep>) {
                        state = apply_beam_splitter(state, op.spec);
                    } else if constexpr (std::is_same_v<T, MirrorStep>) {
                        state = op.from == op.to ? apply_mirror(state, MirrorSpec{op.from, op.phase})
                                                 : relabel_mode(state, op.from, op.to, op.phase);
                    } else if constexpr (std::is_same_v<T, DownConvertStep>) {
                        state = apply_down_conversion(state, op.spec);
                    } else if constexpr (std::is_same_v<T, IdentifyStep>) {
                        if (op.from != op.to) state = relabel_mode(state, op.from, op.to);
                    } else if constexpr (std::is_same_v<T, PostSelectStep>) {
                        state = apply_post_select(state, op, result);
                    } else if constexpr (std::is_same_v<T, ReadoutStep>) {
                        result.probabilities = detection_probabilities(state, op.detectors);
                    }
                },
                step.op);
        } catch (const Error &e) {
            if (!e.stage().empty()) throw;
            throw e.at_stage(step.name);
        }
        if (!std::holds_alternative<ReadoutStep>(step.op)) result.stages.emplace_back(step.name, state);
    }
    return result;
}

}  // namespace hardyweave
