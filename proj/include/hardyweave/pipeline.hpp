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
 * The three-laser interferometer end to end.
 *
 * Two weak lasers (signal and idler wavelengths) are split into u/v arms; the
 * u arms cross a down-conversion crystal pumped by a third laser. Post-selecting
 * one signal-band and one idler-band photon leaves two interfering branches in
 * |u_S u_I>: the laser pair (amplitude −αβ/2) and the down-converted pair
 * (amplitude qγ). When αβ = 2qγ they cancel and the remaining three-term state
 * is sent through the detector splitters.
 */

#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fock.hpp"
#include "optics.hpp"

namespace hardyweave {

inline constexpr double kDefaultCondition5Tol = 1e-9;
inline constexpr double kCancellationThreshold = 1e-9;
/// Amplitudes below this (on the normalized state) are dropped once the
/// cancellation gate has passed.
inline constexpr double kCancelledAmplitudePrune = 1e-12;
inline constexpr double kMaxWeakLaserAmplitude = 0.3;
inline const Complex kDefaultQ{1e-3, 0.0};

struct LaserConfig {
    Complex alpha{1e-2, 0.0};
    Complex beta{1e-2, 0.0};
    Complex gamma{0.05, 0.0};
    int pump_n_max = 3;

    void validate() const {
        if (std::abs(std::abs(alpha) - std::abs(beta)) > 1e-9) {
            throw Error(ErrorCode::InvalidConfig, "signal and idler lasers need equal intensity (|alpha| = |beta|)");
        }
        if (std::abs(alpha) > kMaxWeakLaserAmplitude) {
            throw Error(ErrorCode::InvalidConfig, "|alpha| must be <= 0.3 for the two-term truncation");
        }
        if (pump_n_max < 0) throw Error(ErrorCode::InvalidConfig, "pump_n_max must be non-negative");
        for (Complex c : {alpha, beta, gamma}) {
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
                throw Error(ErrorCode::InvalidConfig, "laser amplitudes must be finite");
            }
        }
    }
};

enum class Side { Signal, Idler, Both };

/// Per-mode cutoffs for the interferometer: kDefaultCutoff everywhere, and
/// pump_n_max + 1 on the pump so the pump-refilling branch fits.
inline std::vector<int> pipeline_cutoffs(const LaserConfig &cfg) {
    ModeSet modes = canonical_modes();
    std::vector<int> cutoffs(modes.size(), kDefaultCutoff);
    cutoffs[modes.require(mode::F)] = cfg.pump_n_max + 1;
    return cutoffs;
}

inline QuantumState build_initial_state(const LaserConfig &cfg) {
    cfg.validate();
    ModeSet modes = canonical_modes();
    auto cutoffs = pipeline_cutoffs(cfg);
    auto single = [&](const ModeId &id, Complex amp, int n_max) {
        return coherent_term_expansion(register_modes({id}), id, amp, n_max, {cutoffs[modes.require(id)]});
    };
    QuantumState product = tensor(tensor(single(mode::S_in, cfg.alpha, 1), single(mode::I_in, cfg.beta, 1)),
                                  single(mode::F, cfg.gamma, cfg.pump_n_max));
    QuantumState full = extend(product, modes);
    return normalize(QuantumState(modes, cutoffs, full.terms()));
}

inline BeamSplitterSpec input_splitter(Side side) {
    if (side == Side::Idler) return {mode::I_in, std::nullopt, mode::v_I, mode::u_I, bs_matrix_input()};
    return {mode::S_in, std::nullopt, mode::v_S, mode::u_S, bs_matrix_input()};
}

inline BeamSplitterSpec final_splitter(Side side) {
    if (side == Side::Idler) return {mode::u_I, mode::v_I, mode::c_I, mode::d_I, bs_matrix_final()};
    return {mode::u_S, mode::v_S, mode::c_S, mode::d_S, bs_matrix_final()};
}

inline DownConversionSpec crystal_spec(Complex q) { return {mode::F, mode::u_S, mode::u_I, q}; }

inline QuantumState run_input_splitters(const QuantumState &state) {
    return apply_beam_splitter(apply_beam_splitter(state, input_splitter(Side::Signal)),
                               input_splitter(Side::Idler));
}

inline QuantumState run_crystal(const QuantumState &state, Complex q) {
    return apply_down_conversion(state, crystal_spec(q));
}

/// |αβ − 2qγ| / |αβ|. With αβ = 0 the residual is 0 if 2qγ = 0 too, else +inf.
inline double check_condition5(const LaserConfig &cfg, Complex q) {
    Complex lasers = cfg.alpha * cfg.beta;
    Complex pair = 2.0 * q * cfg.gamma;
    if (lasers == Complex{}) return pair == Complex{} ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(lasers - pair) / std::abs(lasers);
}

/// Occupation-based selector: exactly one photon in each band, nothing in
/// any mode outside the bands except `pump`.
struct PairSelection {
    std::vector<std::vector<ModeId>> bands;
    ModeId pump;
};

inline PairSelection hardy_selection() { return {{{mode::u_S, mode::v_S}, {mode::u_I, mode::v_I}}, mode::F}; }

inline QuantumState select_pair_sector(const QuantumState &state, const PairSelection &sel) {
    const auto &modes = state.modes();
    std::vector<int> band_of(modes.size(), -1);
    for (std::size_t b = 0; b < sel.bands.size(); ++b) {
        for (const auto &id : sel.bands[b]) band_of[modes.require(id)] = static_cast<int>(b);
    }
    std::size_t pump = modes.require(sel.pump);
    QuantumState out = project(state, [&](const FockBasisState &basis) {
        std::vector<int> count(sel.bands.size(), 0);
        for (std::size_t i = 0; i < basis.size(); ++i) {
            if (band_of[i] >= 0) {
                count[band_of[i]] += basis[i];
            } else if (i != pump && basis[i] != 0) {
                return false;
            }
        }
        for (int c : count)
            if (c != 1) return false;
        return true;
    });
    if (out.is_zero()) throw Error(ErrorCode::EmptySelection, "post-selection kept no terms");
    return out;
}

/// Projects onto one photon per band (signal: u_S, v_S; idler: u_I, v_I).
/// The down-converted |u_S u_I> branch lands in the same sector as the laser
/// pair, so both interfering contributions are kept. Not renormalized.
inline QuantumState post_select_single_pair(const QuantumState &state) {
    return select_pair_sector(state, hardy_selection());
}

/// Checks that the pump factors out of `state` as Σγⁿ(n!)^{-1/2}|n_F> over
/// the slices n < n_max and returns the |0_F> slice.
///
/// The top slice n = n_max is skipped: the down-converted branch carries the
/// pump tail one term shorter there (a_F lowers the truncated expansion).
inline QuantumState factor_pump(const QuantumState &state, const ModeId &pump, Complex gamma, int n_max,
                                double tol = 1e-9) {
    std::size_t idx = state.modes().require(pump);
    auto slice = [&](int n) {
        QuantumState::TermMap terms;
        for (const auto &[b, amp] : state.terms()) {
            if (b[idx] != n) continue;
            FockBasisState moved = b;
            moved[idx] = 0;
            terms.emplace(std::move(moved), amp);
        }
        return state.with_terms(std::move(terms));
    };
    QuantumState base = slice(0);
    double scale = 0.0;
    for (const auto &[b, amp] : base.terms()) scale = std::max(scale, std::abs(amp));
    Complex weight{1.0, 0.0};
    for (int n = 1; n < n_max; ++n) {
        weight *= gamma / std::sqrt(static_cast<double>(n));
        double err = max_amplitude_difference(slice(n), weight * base);
        if (err > tol * scale * std::max(1.0, std::abs(weight))) {
            throw Error(ErrorCode::FactorizationFailed,
                        "pump slice " + std::to_string(n) + " is not proportional to the vacuum slice");
        }
    }
    return base;
}

struct HardyExtraction {
    QuantumState state;            // normalized, cancelled term pruned
    double cancellation_residual;  // |<pair|·>| over the norm of everything else
    double pair_amplitude;         // |<pair|·>| on the normalized state, before pruning
};

/// Measures the leftover of the interfering pair `pair` (a basis state) in
/// `slice`, gates it at kCancellationThreshold and returns the normalized
/// remainder.
inline HardyExtraction extract_interference_free(const QuantumState &slice, const FockBasisState &pair) {
    double total = norm(slice);
    if (total == 0.0) throw Error(ErrorCode::EmptySelection, "post-selected slice is empty");
    double leftover = std::abs(slice.amplitude(pair));
    double rest = std::sqrt(std::max(0.0, total * total - leftover * leftover));
    double residual = rest == 0.0 ? std::numeric_limits<double>::infinity() : leftover / rest;
    if (!(residual <= kCancellationThreshold)) {
        throw Error(ErrorCode::CancellationFailed,
                    "interfering pair amplitude did not cancel (residual " + std::to_string(residual) + ")",
                    residual);
    }
    QuantumState normalized = normalize(slice);
    return {prune(normalized, kCancelledAmplitudePrune).state, residual, leftover / total};
}

inline HardyExtraction extract_hardy_state(const QuantumState &selected, const LaserConfig &cfg) {
    QuantumState slice = factor_pump(selected, mode::F, cfg.gamma, cfg.pump_n_max);
    return extract_interference_free(slice, slice.basis({{mode::u_S, 1}, {mode::u_I, 1}}));
}

/// The three-term entangled state left after the |u_S u_I> branches cancel.
/// Throws CancellationFailed when they do not.
inline QuantumState hardy_state(const QuantumState &selected, const LaserConfig &cfg, Complex /*q*/) {
    return extract_hardy_state(selected, cfg).state;
}

inline QuantumState run_final_bs(const QuantumState &state, Side side) {
    QuantumState out = state;
    if (side != Side::Idler) out = apply_beam_splitter(out, final_splitter(Side::Signal));
    if (side != Side::Signal) out = apply_beam_splitter(out, final_splitter(Side::Idler));
    return out;
}

using DetectionTable = std::map<std::string, double>;

/// Joint click probabilities over `detectors`. Keys list the clicking
/// detectors in mode order ("c_S,d_I"; "c_S^2" for two photons; "none").
inline DetectionTable detection_probabilities(const QuantumState &state, const std::vector<ModeId> &detectors) {
    double n = norm(state);
    if (std::abs(n - 1.0) > 1e-6) {
        throw Error(ErrorCode::UnnormalizedInput, "detection readout needs a normalized state");
    }
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < state.modes().size(); ++i) {
        for (const auto &d : detectors) {
            if (state.modes()[i] == d) idx.push_back(i);
        }
    }
    if (idx.size() != detectors.size()) {
        for (const auto &d : detectors) state.modes().require(d);
    }
    DetectionTable table;
    for (const auto &[b, amp] : state.terms()) {
        std::string key;
        for (std::size_t i : idx) {
            if (b[i] == 0) continue;
            if (!key.empty()) key += ',';
            key += state.modes()[i].name();
            if (b[i] > 1) key += '^' + std::to_string(b[i]);
        }
        table[key.empty() ? "none" : key] += std::norm(amp);
    }
    return table;
}

inline DetectionTable detection_probabilities(const QuantumState &state) {
    return detection_probabilities(state, {mode::c_S, mode::d_S, mode::c_I, mode::d_I});
}

struct PipelineOptions {
    double tol = kDefaultCondition5Tol;
};

struct PipelineReport {
    std::vector<std::pair<std::string, QuantumState>> stage_states;
    double condition5_residual = 0.0;
    double cancellation_residual = 0.0;
    double pair_amplitude = 0.0;
    DetectionTable detection_table;

    const QuantumState &stage(const std::string &name) const {
        for (const auto &[n, s] : stage_states)
            if (n == name) return s;
        throw Error(ErrorCode::InvalidSpec, "no stage named '" + name + "'");
    }
};

namespace stage {
inline constexpr const char *kInitial = "initial";
inline constexpr const char *kInputSplitters = "input_splitters";
inline constexpr const char *kCrystal = "crystal";
inline constexpr const char *kPostSelected = "post_selected";
inline constexpr const char *kHardyState = "hardy_state";
inline constexpr const char *kFinalSignalOnly = "final_signal_only";
inline constexpr const char *kFinalIdlerOnly = "final_idler_only";
inline constexpr const char *kFinal = "final";
}  // namespace stage

/// Runs every stage in order. Failures are rethrown tagged with the stage name.
inline PipelineReport run_full(const LaserConfig &cfg, Complex q, const PipelineOptions &options = {}) {
    PipelineReport report;
    std::string current = stage::kInitial;
    try {
        report.condition5_residual = check_condition5(cfg, q);
        QuantumState state = build_initial_state(cfg);
        report.stage_states.emplace_back(current, state);

        current = stage::kInputSplitters;
        state = run_input_splitters(state);
        report.stage_states.emplace_back(current, state);

        current = stage::kCrystal;
        state = run_crystal(state, q);
        report.stage_states.emplace_back(current, state);

        current = stage::kPostSelected;
        state = post_select_single_pair(state);
        report.stage_states.emplace_back(current, state);
        if (q * cfg.gamma == Complex{}) {
            throw Error(ErrorCode::EmptySelection, "no down-converted pair: the interference branch is empty");
        }

        current = stage::kHardyState;
        QuantumState slice = factor_pump(state, mode::F, cfg.gamma, cfg.pump_n_max);
        FockBasisState pair = slice.basis({{mode::u_S, 1}, {mode::u_I, 1}});
        if (!(report.condition5_residual <= options.tol)) {
            double total = norm(slice);
            double leftover = std::abs(slice.amplitude(pair));
            double rest = std::sqrt(std::max(0.0, total * total - leftover * leftover));
            double residual = rest == 0.0 ? std::numeric_limits<double>::infinity() : leftover / rest;
            throw Error(ErrorCode::CancellationFailed,
                        "condition alpha*beta = 2*q*gamma violated (relative residual " +
                            std::to_string(report.condition5_residual) + ")",
                        residual);
        }
        HardyExtraction hardy = extract_interference_free(slice, pair);
        report.cancellation_residual = hardy.cancellation_residual;
        report.pair_amplitude = hardy.pair_amplitude;
        report.stage_states.emplace_back(current, hardy.state);

        current = stage::kFinalSignalOnly;
        report.stage_states.emplace_back(current, run_final_bs(hardy.state, Side::Signal));
        current = stage::kFinalIdlerOnly;
        report.stage_states.emplace_back(current, run_final_bs(hardy.state, Side::Idler));
        current = stage::kFinal;
        QuantumState final_state = run_final_bs(hardy.state, Side::Both);
        report.stage_states.emplace_back(current, final_state);
        report.detection_table = detection_probabilities(final_state);
    } catch (const Error &e) {
        if (!e.stage().empty()) throw;
        throw e.at_stage(current);
    }
    return report;
}

}  // namespace hardyweave
