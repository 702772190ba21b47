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
 * Multimode bosonic Fock states and sparse superpositions over them.
 *
 * A QuantumState is an immutable map from occupation-number basis states to
 * complex amplitudes over a registered, ordered set of modes. Every operation
 * returns a new state; the empty term map is the zero vector and flows through
 * all linear operations.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <compare>
#include <functional>
#include <initializer_list>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "error.hpp"

namespace hardyweave {

using Complex = std::complex<double>;

/// The imaginary unit, written ι in the optics literature to keep `i` free
/// for the idler photon.
inline constexpr Complex kIota{0.0, 1.0};

inline constexpr int kDefaultCutoff = 3;
inline constexpr double kDefaultPruneThreshold = 1e-15;

/// Symbolic label of an optical mode.
class ModeId {
   public:
    ModeId() = default;
    ModeId(std::string name) : name_(std::move(name)) {}  // NOLINT: implicit by intent
    ModeId(const char *name) : name_(name) {}             // NOLINT
    ModeId(std::string_view name) : name_(name) {}        // NOLINT

    const std::string &name() const noexcept { return name_; }

    friend bool operator==(const ModeId &, const ModeId &) = default;
    friend auto operator<=>(const ModeId &, const ModeId &) = default;

   private:
    std::string name_;
};

/// Mode labels of the three-laser interferometer.
namespace mode {
inline const ModeId S_in{"S_in"};
inline const ModeId I_in{"I_in"};
inline const ModeId u_S{"u_S"};
inline const ModeId v_S{"v_S"};
inline const ModeId u_I{"u_I"};
inline const ModeId v_I{"v_I"};
inline const ModeId c_S{"c_S"};
inline const ModeId d_S{"d_S"};
inline const ModeId c_I{"c_I"};
inline const ModeId d_I{"d_I"};
inline const ModeId F{"F"};
}  // namespace mode

/// Ordered, immutable set of registered modes. Copies share storage.
class ModeSet {
   public:
    ModeSet() : data_(std::make_shared<const Data>()) {}

    static ModeSet from_names(const std::vector<ModeId> &names) {
        Data data;
        data.names = names;
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (!data.index.emplace(names[i].name(), i).second) {
                throw Error(ErrorCode::DuplicateMode, "duplicate mode '" + names[i].name() + "'");
            }
        }
        ModeSet out;
        out.data_ = std::make_shared<const Data>(std::move(data));
        return out;
    }

    std::size_t size() const noexcept { return data_->names.size(); }
    bool empty() const noexcept { return data_->names.empty(); }
    const std::vector<ModeId> &names() const noexcept { return data_->names; }
    const ModeId &operator[](std::size_t i) const { return data_->names.at(i); }

    std::optional<std::size_t> index_of(const ModeId &id) const {
        auto it = data_->index.find(id.name());
        if (it == data_->index.end()) return std::nullopt;
        return it->second;
    }

    bool contains(const ModeId &id) const { return index_of(id).has_value(); }

    /// Index of `id`, or UnregisteredMode.
    std::size_t require(const ModeId &id) const {
        if (auto idx = index_of(id)) return *idx;
        throw Error(ErrorCode::UnregisteredMode, "mode '" + id.name() + "' is not registered");
    }

    friend bool operator==(const ModeSet &a, const ModeSet &b) {
        return a.data_ == b.data_ || a.data_->names == b.data_->names;
    }

   private:
    struct Data {
        std::vector<ModeId> names;
        std::unordered_map<std::string, std::size_t> index;
    };
    std::shared_ptr<const Data> data_;
};

/// Registers a non-empty list of distinct mode names, preserving order.
inline ModeSet register_modes(const std::vector<ModeId> &names) {
    if (names.empty()) throw Error(ErrorCode::InvalidSpec, "mode list must be non-empty");
    return ModeSet::from_names(names);
}

/// The eleven modes of the interferometer, in canonical order.
inline ModeSet canonical_modes() {
    using namespace mode;
    return register_modes({S_in, I_in, u_S, v_S, u_I, v_I, c_S, d_S, c_I, d_I, F});
}

/// Occupation numbers over a mode set, ordered by mode registration order.
class FockBasisState {
   public:
    FockBasisState() = default;
    explicit FockBasisState(std::size_t num_modes) : occ_(num_modes, 0) {}
    explicit FockBasisState(std::vector<int> occupations) : occ_(std::move(occupations)) {}

    std::size_t size() const noexcept { return occ_.size(); }
    int operator[](std::size_t i) const { return occ_[i]; }
    int &operator[](std::size_t i) { return occ_[i]; }
    const std::vector<int> &occupations() const noexcept { return occ_; }

    int total() const {
        int sum = 0;
        for (int n : occ_) sum += n;
        return sum;
    }

    friend bool operator==(const FockBasisState &, const FockBasisState &) = default;
    friend auto operator<=>(const FockBasisState &, const FockBasisState &) = default;

   private:
    std::vector<int> occ_;
};

/// Sparse superposition of Fock basis states.
class QuantumState {
   public:
    using TermMap = std::map<FockBasisState, Complex>;

    QuantumState(ModeSet modes, std::vector<int> cutoffs, TermMap terms = {},
                 double prune_threshold = kDefaultPruneThreshold)
        : modes_(std::move(modes)),
          cutoffs_(std::move(cutoffs)),
          terms_(std::move(terms)),
          prune_threshold_(prune_threshold) {
        if (cutoffs_.size() != modes_.size()) {
            throw Error(ErrorCode::InvalidSpec, "cutoff list does not match mode set");
        }
        for (int c : cutoffs_) {
            if (c < 0) throw Error(ErrorCode::InvalidSpec, "negative cutoff");
        }
        if (prune_threshold_ < 0.0) throw Error(ErrorCode::InvalidSpec, "negative prune threshold");
        for (const auto &[basis, amp] : terms_) {
            if (basis.size() != modes_.size()) {
                throw Error(ErrorCode::InvalidSpec, "basis state does not match mode set");
            }
            for (std::size_t i = 0; i < basis.size(); ++i) {
                if (basis[i] < 0) throw Error(ErrorCode::InvalidSpec, "negative occupation");
                if (basis[i] > cutoffs_[i]) {
                    throw Error(ErrorCode::CutoffExceeded,
                                "occupation of '" + modes_[i].name() + "' exceeds cutoff");
                }
            }
            if (!std::isfinite(amp.real()) || !std::isfinite(amp.imag())) {
                throw Error(ErrorCode::InvalidSpec, "non-finite amplitude");
            }
        }
    }

    QuantumState(ModeSet modes, int cutoff = kDefaultCutoff)
        : QuantumState(modes, std::vector<int>(modes.size(), cutoff)) {}

    const ModeSet &modes() const noexcept { return modes_; }
    const std::vector<int> &cutoffs() const noexcept { return cutoffs_; }
    int cutoff(const ModeId &id) const { return cutoffs_[modes_.require(id)]; }
    const TermMap &terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool is_zero() const noexcept { return terms_.empty(); }
    double prune_threshold() const noexcept { return prune_threshold_; }

    /// Builds a basis state from (mode, count) pairs; unlisted modes are 0.
    FockBasisState basis(std::initializer_list<std::pair<ModeId, int>> occupations) const {
        return basis(std::vector<std::pair<ModeId, int>>(occupations));
    }

    FockBasisState basis(const std::vector<std::pair<ModeId, int>> &occupations) const {
        FockBasisState out(modes_.size());
        for (const auto &[id, n] : occupations) out[modes_.require(id)] += n;
        return out;
    }

    Complex amplitude(const FockBasisState &b) const {
        auto it = terms_.find(b);
        return it == terms_.end() ? Complex{} : it->second;
    }

    Complex amplitude(std::initializer_list<std::pair<ModeId, int>> occupations) const {
        return amplitude(basis(occupations));
    }

    /// Same modes and cutoffs, different terms.
    QuantumState with_terms(TermMap terms) const {
        return QuantumState(modes_, cutoffs_, std::move(terms), prune_threshold_);
    }

    /// Human-readable ket label, e.g. "u_S v_I" or "c_S^2"; "vac" for vacuum.
    std::string label(const FockBasisState &b) const {
        std::string out;
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (b[i] == 0) continue;
            if (!out.empty()) out += ' ';
            out += modes_[i].name();
            if (b[i] > 1) out += '^' + std::to_string(b[i]);
        }
        return out.empty() ? "vac" : out;
    }

   private:
    ModeSet modes_;
    std::vector<int> cutoffs_;
    TermMap terms_;
    double prune_threshold_;
};

namespace detail {

inline void accumulate(QuantumState::TermMap &terms, const FockBasisState &b, Complex amp) {
    auto [it, inserted] = terms.try_emplace(b, amp);
    if (!inserted) {
        it->second += amp;
        if (it->second == Complex{}) terms.erase(it);
    } else if (amp == Complex{}) {
        terms.erase(it);
    }
}

inline void require_same_space(const QuantumState &a, const QuantumState &b) {
    if (!(a.modes() == b.modes())) {
        throw Error(ErrorCode::InvalidSpec, "states live on different mode sets");
    }
    if (a.cutoffs() != b.cutoffs()) {
        throw Error(ErrorCode::InvalidSpec, "states have different cutoffs");
    }
}

inline double factorial(int n) {
    double out = 1.0;
    for (int k = 2; k <= n; ++k) out *= k;
    return out;
}

}  // namespace detail

/// Single-term state amplitude·|occupations> over `modes`.
inline QuantumState basis_ket(const ModeSet &modes, std::initializer_list<std::pair<ModeId, int>> occupations,
                              Complex amplitude = 1.0, int cutoff = kDefaultCutoff) {
    QuantumState empty(modes, cutoff);
    QuantumState::TermMap terms;
    detail::accumulate(terms, empty.basis(occupations), amplitude);
    return empty.with_terms(std::move(terms));
}

inline QuantumState vacuum(const ModeSet &modes, std::vector<int> cutoffs) {
    QuantumState::TermMap terms;
    terms.emplace(FockBasisState(modes.size()), Complex{1.0, 0.0});
    return QuantumState(modes, std::move(cutoffs), std::move(terms));
}

inline QuantumState vacuum(const ModeSet &modes, int cutoff = kDefaultCutoff) {
    return vacuum(modes, std::vector<int>(modes.size(), cutoff));
}

/// Unnormalized truncated coherent expansion Σ_{n≤n_max} aⁿ(n!)^{-1/2}|n> on
/// `target`, all other modes in vacuum.
inline QuantumState coherent_term_expansion(const ModeSet &modes, const ModeId &target, Complex amplitude,
                                            int n_max, std::vector<int> cutoffs) {
    std::size_t idx = modes.require(target);
    if (n_max < 0) throw Error(ErrorCode::InvalidSpec, "n_max must be non-negative");
    if (cutoffs.size() != modes.size()) throw Error(ErrorCode::InvalidSpec, "cutoff list does not match mode set");
    if (n_max > cutoffs[idx]) {
        throw Error(ErrorCode::CutoffExceeded, "n_max " + std::to_string(n_max) + " exceeds cutoff of '" +
                                                   target.name() + "'");
    }
    QuantumState::TermMap terms;
    Complex power{1.0, 0.0};
    for (int n = 0; n <= n_max; ++n) {
        FockBasisState b(modes.size());
        b[idx] = n;
        detail::accumulate(terms, b, power / std::sqrt(detail::factorial(n)));
        power *= amplitude;
    }
    return QuantumState(modes, std::move(cutoffs), std::move(terms));
}

inline QuantumState coherent_term_expansion(const ModeSet &modes, const ModeId &target, Complex amplitude,
                                            int n_max, int cutoff = kDefaultCutoff) {
    return coherent_term_expansion(modes, target, amplitude, n_max, std::vector<int>(modes.size(), cutoff));
}

/// Product state over the concatenated (disjoint) mode sets of `a` and `b`.
inline QuantumState tensor(const QuantumState &a, const QuantumState &b) {
    std::vector<ModeId> names = a.modes().names();
    for (const auto &id : b.modes().names()) {
        if (a.modes().contains(id)) {
            throw Error(ErrorCode::ModeCollision, "mode '" + id.name() + "' appears in both factors");
        }
        names.push_back(id);
    }
    std::vector<int> cutoffs = a.cutoffs();
    cutoffs.insert(cutoffs.end(), b.cutoffs().begin(), b.cutoffs().end());

    QuantumState::TermMap terms;
    for (const auto &[ba, amp_a] : a.terms()) {
        for (const auto &[bb, amp_b] : b.terms()) {
            std::vector<int> occ = ba.occupations();
            occ.insert(occ.end(), bb.occupations().begin(), bb.occupations().end());
            detail::accumulate(terms, FockBasisState(std::move(occ)), amp_a * amp_b);
        }
    }
    return QuantumState(ModeSet::from_names(names), std::move(cutoffs), std::move(terms),
                        std::min(a.prune_threshold(), b.prune_threshold()));
}

/// Re-expresses `state` over `target`, which must contain every mode of
/// `state`. Added modes are vacuum with `new_cutoff`; order follows `target`.
inline QuantumState extend(const QuantumState &state, const ModeSet &target, int new_cutoff = kDefaultCutoff) {
    std::vector<std::optional<std::size_t>> source(target.size());
    std::vector<int> cutoffs(target.size(), new_cutoff);
    for (std::size_t i = 0; i < state.modes().size(); ++i) {
        std::size_t t = target.require(state.modes()[i]);
        source[t] = i;
        cutoffs[t] = state.cutoffs()[i];
    }
    QuantumState::TermMap terms;
    for (const auto &[b, amp] : state.terms()) {
        FockBasisState out(target.size());
        for (std::size_t t = 0; t < target.size(); ++t) {
            if (source[t]) out[t] = b[*source[t]];
        }
        terms.emplace(std::move(out), amp);
    }
    return QuantumState(target, std::move(cutoffs), std::move(terms), state.prune_threshold());
}

/// Same state with one mode's cutoff replaced.
inline QuantumState with_cutoff(const QuantumState &state, const ModeId &id, int cutoff) {
    std::vector<int> cutoffs = state.cutoffs();
    cutoffs[state.modes().require(id)] = cutoff;
    return QuantumState(state.modes(), std::move(cutoffs), state.terms(), state.prune_threshold());
}

inline QuantumState apply_creation(const QuantumState &state, const ModeId &id) {
    std::size_t idx = state.modes().require(id);
    int cap = state.cutoffs()[idx];
    QuantumState::TermMap terms;
    for (const auto &[b, amp] : state.terms()) {
        FockBasisState out = b;
        int n = out[idx];
        if (n + 1 > cap) {
            throw Error(ErrorCode::CutoffExceeded, "creation on '" + id.name() + "' exceeds cutoff " +
                                                       std::to_string(cap));
        }
        out[idx] = n + 1;
        detail::accumulate(terms, out, amp * std::sqrt(static_cast<double>(n + 1)));
    }
    return state.with_terms(std::move(terms));
}

inline QuantumState apply_annihilation(const QuantumState &state, const ModeId &id) {
    std::size_t idx = state.modes().require(id);
    QuantumState::TermMap terms;
    for (const auto &[b, amp] : state.terms()) {
        int n = b[idx];
        if (n == 0) continue;
        FockBasisState out = b;
        out[idx] = n - 1;
        detail::accumulate(terms, out, amp * std::sqrt(static_cast<double>(n)));
    }
    return state.with_terms(std::move(terms));
}

inline QuantumState operator*(Complex scalar, const QuantumState &state) {
    QuantumState::TermMap terms;
    for (const auto &[b, amp] : state.terms()) detail::accumulate(terms, b, scalar * amp);
    return state.with_terms(std::move(terms));
}

inline QuantumState operator*(const QuantumState &state, Complex scalar) { return scalar * state; }

inline QuantumState operator+(const QuantumState &a, const QuantumState &b) {
    detail::require_same_space(a, b);
    QuantumState::TermMap terms = a.terms();
    for (const auto &[basis, amp] : b.terms()) detail::accumulate(terms, basis, amp);
    return a.with_terms(std::move(terms));
}

inline QuantumState operator-(const QuantumState &a, const QuantumState &b) { return a + (-1.0 * b); }

/// <a|b>, conjugate-linear in `a`.
inline Complex inner_product(const QuantumState &a, const QuantumState &b) {
    if (!(a.modes() == b.modes())) {
        throw Error(ErrorCode::InvalidSpec, "inner product of states on different mode sets");
    }
    Complex sum{};
    const auto &small = a.size() <= b.size() ? a : b;
    const auto &large = a.size() <= b.size() ? b : a;
    for (const auto &[basis, amp] : small.terms()) {
        auto it = large.terms().find(basis);
        if (it == large.terms().end()) continue;
        sum += &small == &a ? std::conj(amp) * it->second : std::conj(it->second) * amp;
    }
    return sum;
}

inline double norm(const QuantumState &state) {
    double sum = 0.0;
    for (const auto &[b, amp] : state.terms()) sum += std::norm(amp);
    return std::sqrt(sum);
}

inline QuantumState normalize(const QuantumState &state) {
    double n = norm(state);
    if (n == 0.0) throw Error(ErrorCode::ZeroNorm, "cannot normalize the zero state");
    return (1.0 / n) * state;
}

struct PruneResult {
    QuantumState state;
    double discarded_mass;  // Σ|amplitude|² of dropped terms
};

/// Drops every term with |amplitude| < threshold; retained amplitudes are
/// untouched.
inline PruneResult prune(const QuantumState &state, double threshold) {
    QuantumState::TermMap kept;
    double discarded = 0.0;
    for (const auto &[b, amp] : state.terms()) {
        if (std::abs(amp) < threshold) {
            discarded += std::norm(amp);
        } else {
            kept.emplace(b, amp);
        }
    }
    return {state.with_terms(std::move(kept)), discarded};
}

inline PruneResult prune(const QuantumState &state) { return prune(state, state.prune_threshold()); }

/// Keeps the terms whose basis state satisfies `keep`.
inline QuantumState project(const QuantumState &state, const std::function<bool(const FockBasisState &)> &keep) {
    QuantumState::TermMap kept;
    for (const auto &[b, amp] : state.terms()) {
        if (keep(b)) kept.emplace(b, amp);
    }
    return state.with_terms(std::move(kept));
}

/// Largest |a_k − b_k| over the union of both term maps.
inline double max_amplitude_difference(const QuantumState &a, const QuantumState &b) {
    if (!(a.modes() == b.modes())) {
        throw Error(ErrorCode::InvalidSpec, "states live on different mode sets");
    }
    double worst = 0.0;
    for (const auto &[basis, amp] : a.terms()) worst = std::max(worst, std::abs(amp - b.amplitude(basis)));
    for (const auto &[basis, amp] : b.terms()) {
        if (!a.terms().contains(basis)) worst = std::max(worst, std::abs(amp));
    }
    return worst;
}

/// Rotates `state` by a global phase so that, on the largest-magnitude term of
/// `reference` (first in basis order on ties), its phase matches the
/// reference's.
inline QuantumState align_global_phase(const QuantumState &state, const QuantumState &reference) {
    const FockBasisState *anchor = nullptr;
    double best = -1.0;
    for (const auto &[b, amp] : reference.terms()) {
        if (std::abs(amp) > best * (1.0 + 1e-12)) {
            best = std::abs(amp);
            anchor = &b;
        }
    }
    if (anchor == nullptr) return state;
    Complex have = state.amplitude(*anchor);
    if (have == Complex{}) return state;
    Complex want = reference.amplitude(*anchor);
    Complex rotation = (want / std::abs(want)) / (have / std::abs(have));
    return rotation * state;
}

}  // namespace hardyweave
