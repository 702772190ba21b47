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
 * Optical elements acting on QuantumState: beam splitters, mirrors, mode
 * relabeling and parametric down-conversion.
 *
 * Linear elements are applied as substitutions of creation operators,
 * a†_in → Σ_out M[out][in] a†_out, expanded on each basis term.
 */

#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "fock.hpp"

namespace hardyweave {

/// 2×2 mode-mixing matrix, indexed [output][input].
using Matrix2 = std::array<std::array<Complex, 2>, 2>;

inline Matrix2 multiply(const Matrix2 &a, const Matrix2 &b) {
    Matrix2 out{};
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            for (int k = 0; k < 2; ++k) out[r][c] += a[r][k] * b[k][c];
    return out;
}

inline Matrix2 dagger(const Matrix2 &m) {
    return {{{std::conj(m[0][0]), std::conj(m[1][0])}, {std::conj(m[0][1]), std::conj(m[1][1])}}};
}

inline double unitarity_error(const Matrix2 &m) {
    Matrix2 p = multiply(m, dagger(m));
    double worst = 0.0;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) worst = std::max(worst, std::abs(p[r][c] - Complex(r == c ? 1.0 : 0.0)));
    return worst;
}

/// Input splitters: the occupied port goes to (v + ιu)/√2, outputs ordered (v, u).
inline Matrix2 bs_matrix_input() {
    const double h = 1.0 / std::sqrt(2.0);
    return {{{h, kIota * h}, {kIota * h, h}}};
}

/// Detector splitters: u → (c + ιd)/√2, v → (ιc + d)/√2, inputs (u, v),
/// outputs (c, d).
inline Matrix2 bs_matrix_final() {
    const double h = 1.0 / std::sqrt(2.0);
    return {{{h, kIota * h}, {kIota * h, h}}};
}

struct BeamSplitterSpec {
    ModeId in1;
    std::optional<ModeId> in2;  // empty: vacuum port
    ModeId out1;
    ModeId out2;
    Matrix2 matrix = bs_matrix_final();

    void validate() const {
        if (in2 && *in2 == in1) throw Error(ErrorCode::InvalidSpec, "beam splitter inputs must be distinct");
        if (out1 == out2) throw Error(ErrorCode::InvalidSpec, "beam splitter outputs must be distinct");
        if (unitarity_error(matrix) > 1e-12) throw Error(ErrorCode::InvalidSpec, "beam splitter matrix is not unitary");
    }
};

struct MirrorSpec {
    ModeId mode;
    Complex phase{1.0, 0.0};

    void validate() const {
        if (std::abs(std::abs(phase) - 1.0) > 1e-12) {
            throw Error(ErrorCode::InvalidSpec, "mirror phase must have unit magnitude");
        }
    }
};

enum class ExpansionOrder { First, Exact };

/// Largest |q| accepted by the first-order expansion.
inline constexpr double kFirstOrderQLimit = 0.1;

struct DownConversionSpec {
    ModeId pump;
    ModeId signal_out;
    ModeId idler_out;
    Complex q;
    ExpansionOrder order = ExpansionOrder::First;

    void validate() const {
        if (pump == signal_out || pump == idler_out || signal_out == idler_out) {
            throw Error(ErrorCode::InvalidSpec, "down-conversion modes must be pairwise distinct");
        }
        if (order == ExpansionOrder::First && !(std::abs(q) < kFirstOrderQLimit)) {
            throw Error(ErrorCode::UnsupportedParam,
                        "|q| must be < 0.1 for the first-order down-conversion expansion");
        }
    }
};

namespace detail {

/// Substitutes a†_in[k] → Σ_o columns[k][o] a†_out[o] on every term. The
/// input modes are emptied first, so outputs may coincide with inputs.
inline QuantumState substitute(const QuantumState &state, const std::vector<std::size_t> &inputs,
                               const std::vector<std::size_t> &outputs,
                               const std::vector<std::vector<Complex>> &columns) {
    using Poly = std::map<std::vector<int>, Complex>;
    const auto &caps = state.cutoffs();
    QuantumState::TermMap terms;
    for (const auto &[basis, amp] : state.terms()) {
        FockBasisState rest = basis;
        Poly poly{{std::vector<int>(outputs.size(), 0), amp}};
        for (std::size_t k = 0; k < inputs.size(); ++k) {
            int n = basis[inputs[k]];
            rest[inputs[k]] = 0;
            for (int step = 0; step < n; ++step) {
                Poly next;
                for (const auto &[exps, c] : poly) {
                    for (std::size_t o = 0; o < outputs.size(); ++o) {
                        if (columns[k][o] == Complex{}) continue;
                        auto e = exps;
                        ++e[o];
                        next[e] += c * columns[k][o];
                    }
                }
                poly = std::move(next);
            }
            for (auto &[exps, c] : poly) c /= std::sqrt(factorial(n));
        }
        for (const auto &[exps, c] : poly) {
            if (c == Complex{}) continue;
            FockBasisState out = rest;
            Complex coeff = c;
            for (std::size_t o = 0; o < outputs.size(); ++o) {
                int p = out[outputs[o]];
                int total = p + exps[o];
                if (total > caps[outputs[o]]) {
                    throw Error(ErrorCode::CutoffExceeded, "mode '" + state.modes()[outputs[o]].name() +
                                                               "' would exceed its cutoff");
                }
                coeff *= std::sqrt(factorial(total) / factorial(p));
                out[outputs[o]] = total;
            }
            accumulate(terms, out, coeff);
        }
    }
    return state.with_terms(std::move(terms));
}

}  // namespace detail

inline QuantumState apply_beam_splitter(const QuantumState &state, const BeamSplitterSpec &spec) {
    spec.validate();
    const auto &modes = state.modes();
    std::vector<std::size_t> inputs{modes.require(spec.in1)};
    std::vector<std::vector<Complex>> columns{{spec.matrix[0][0], spec.matrix[1][0]}};
    if (spec.in2) {
        inputs.push_back(modes.require(*spec.in2));
        columns.push_back({spec.matrix[0][1], spec.matrix[1][1]});
    }
    std::vector<std::size_t> outputs{modes.require(spec.out1), modes.require(spec.out2)};
    return detail::substitute(state, inputs, outputs, columns);
}

inline QuantumState apply_mirror(const QuantumState &state, const MirrorSpec &spec) {
    spec.validate();
    std::size_t idx = state.modes().require(spec.mode);
    QuantumState::TermMap terms;
    for (const auto &[b, amp] : state.terms()) terms.emplace(b, amp * std::pow(spec.phase, b[idx]));
    return state.with_terms(std::move(terms));
}

/// Moves the photons of `from` into `to` (a†_from → phase·a†_to).
inline QuantumState relabel_mode(const QuantumState &state, const ModeId &from, const ModeId &to,
                                 Complex phase = 1.0) {
    const auto &modes = state.modes();
    return detail::substitute(state, {modes.require(from)}, {modes.require(to)}, {{phase}});
}

/// First-order down-conversion: ψ + q·a_F a_S† a_I† ψ − q*·a_F† a_S a_I ψ.
/// Not exactly unitary; the norm deviation is O(|q|²).
inline QuantumState apply_down_conversion_first_order(const QuantumState &state, const DownConversionSpec &spec) {
    spec.validate();
    QuantumState forward = apply_creation(
        apply_creation(apply_annihilation(state, spec.pump), spec.signal_out), spec.idler_out);
    QuantumState backward = apply_creation(
        apply_annihilation(apply_annihilation(state, spec.signal_out), spec.idler_out), spec.pump);
    return state + spec.q * forward - std::conj(spec.q) * backward;
}

/// exp(q a_F a_S† a_I† − q* a_F† a_S a_I) on the truncated space.
///
/// The generator conserves n_F + n_S and n_S − n_I, so it is block diagonal
/// over chains (f − j, s + j, i + j); each chain is exponentiated densely.
/// Transitions that would leave the cutoffs are dropped, which keeps every
/// block anti-Hermitian and the result unitary.
inline QuantumState apply_down_conversion_exact(const QuantumState &state, const DownConversionSpec &spec) {
    if (spec.pump == spec.signal_out || spec.pump == spec.idler_out || spec.signal_out == spec.idler_out) {
        throw Error(ErrorCode::InvalidSpec, "down-conversion modes must be pairwise distinct");
    }
    const auto &modes = state.modes();
    const std::size_t f = modes.require(spec.pump);
    const std::size_t s = modes.require(spec.signal_out);
    const std::size_t i = modes.require(spec.idler_out);
    const int cap_f = state.cutoffs()[f];
    const int cap_s = state.cutoffs()[s];
    const int cap_i = state.cutoffs()[i];

    // chain base (lowest pair occupation) -> amplitudes by position
    std::map<FockBasisState, std::map<int, Complex>> chains;
    for (const auto &[b, amp] : state.terms()) {
        FockBasisState base = b;
        int pos = 0;
        while (base[s] > 0 && base[i] > 0 && base[f] < cap_f) {
            --base[s];
            --base[i];
            ++base[f];
            ++pos;
        }
        chains[base][pos] += amp;
    }

    QuantumState::TermMap terms;
    for (const auto &[base, amps] : chains) {
        int length = 1;
        while (base[f] - length >= 0 && base[s] + length <= cap_s && base[i] + length <= cap_i) ++length;
        Eigen::MatrixXcd gen = Eigen::MatrixXcd::Zero(length, length);
        for (int j = 0; j + 1 < length; ++j) {
            double c = std::sqrt(static_cast<double>(base[f] - j) * (base[s] + j + 1) * (base[i] + j + 1));
            gen(j + 1, j) = spec.q * c;
            gen(j, j + 1) = -std::conj(spec.q) * c;
        }
        Eigen::VectorXcd in = Eigen::VectorXcd::Zero(length);
        for (const auto &[pos, amp] : amps) in(pos) = amp;
        Eigen::VectorXcd out = length == 1 ? in : Eigen::VectorXcd(gen.exp() * in);
        for (int j = 0; j < length; ++j) {
            FockBasisState b = base;
            b[f] -= j;
            b[s] += j;
            b[i] += j;
            detail::accumulate(terms, b, out(j));
        }
    }
    return state.with_terms(std::move(terms));
}

inline QuantumState apply_down_conversion(const QuantumState &state, const DownConversionSpec &spec) {
    if (spec.order == ExpansionOrder::Exact) return apply_down_conversion_exact(state, spec);
    return apply_down_conversion_first_order(state, spec);
}

}  // namespace hardyweave
