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
 * Noise ordering, conditional (post-click) states, the paradox check, and an
 * independent polynomial expansion of the post-crystal state.
 */

#pragma once

#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "fock.hpp"
#include "optics.hpp"
#include "pipeline.hpp"

namespace hardyweave {

/// Largest amplitude magnitudes per photon-number sector of the post-crystal
/// state (pump |0_F> slice), and their ratios to the pair sector.
struct NoiseReport {
    double pair_amp = 0.0;
    double triple_amp = 0.0;
    double two_pair_amp = 0.0;
    double ratio_triple = 0.0;
    double ratio_two_pair = 0.0;
};

inline NoiseReport noise_ratios(const LaserConfig &cfg, Complex q) {
    QuantumState state = run_crystal(run_input_splitters(build_initial_state(cfg)), q);
    const auto &modes = state.modes();
    const std::size_t f = modes.require(mode::F);
    const std::size_t us = modes.require(mode::u_S), vs = modes.require(mode::v_S);
    const std::size_t ui = modes.require(mode::u_I), vi = modes.require(mode::v_I);

    NoiseReport r;
    for (const auto &[b, amp] : state.terms()) {
        if (b[f] != 0) continue;
        int signal = b[us] + b[vs];
        int idler = b[ui] + b[vi];
        double mag = std::abs(amp);
        if (signal == 1 && idler == 1) {
            r.pair_amp = std::max(r.pair_amp, mag);
        } else if (signal + idler == 3) {
            r.triple_amp = std::max(r.triple_amp, mag);
        } else if (signal == 2 && idler == 2) {
            r.two_pair_amp = std::max(r.two_pair_amp, mag);
        }
    }
    auto ratio = [&](double x) {
        if (r.pair_amp > 0.0) return x / r.pair_amp;
        return x > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    };
    r.ratio_triple = ratio(r.triple_amp);
    r.ratio_two_pair = ratio(r.two_pair_amp);
    return r;
}

/// State of the remaining photons after one photon is registered in
/// `detected`: project on occupation 1, remove that photon, renormalize.
inline QuantumState conditional_state(const QuantumState &state, const ModeId &detected) {
    std::size_t idx = state.modes().require(detected);
    QuantumState::TermMap terms;
    for (const auto &[b, amp] : state.terms()) {
        if (b[idx] != 1) continue;
        FockBasisState rest = b;
        rest[idx] = 0;
        terms.emplace(std::move(rest), amp);
    }
    QuantumState projected = state.with_terms(std::move(terms));
    if (projected.is_zero()) {
        throw Error(ErrorCode::ZeroNorm, "detection in '" + detected.name() + "' has probability 0");
    }
    return normalize(projected);
}

struct ParadoxReport {
    double amp_uu = 0.0;    // |<u_S u_I|Φ>| before the final splitters
    double amp_dSvI = 0.0;  // |<d_S v_I|H>|, signal splitter only
    double amp_vSdI = 0.0;  // |<v_S d_I|H>|, idler splitter only
    double p_dd = 0.0;      // P(d_S, d_I) after both splitters
    // probability that the partner photon is on its u track given a d click
    double p_uI_given_dS = 0.0;
    double p_uS_given_dI = 0.0;
    bool verdict = false;
};

inline constexpr double kParadoxZeroTol = 1e-9;

inline ParadoxReport verify_hardy_paradox(const LaserConfig &cfg, Complex q, const PipelineOptions &options = {}) {
    PipelineReport report = run_full(cfg, q, options);
    const QuantumState &signal_only = report.stage(stage::kFinalSignalOnly);
    const QuantumState &idler_only = report.stage(stage::kFinalIdlerOnly);

    ParadoxReport r;
    r.amp_uu = report.pair_amplitude;
    r.amp_dSvI = std::abs(signal_only.amplitude({{mode::d_S, 1}, {mode::v_I, 1}}));
    r.amp_vSdI = std::abs(idler_only.amplitude({{mode::v_S, 1}, {mode::d_I, 1}}));
    auto dd = report.detection_table.find("d_S,d_I");
    r.p_dd = dd == report.detection_table.end() ? 0.0 : dd->second;

    QuantumState idler_partner = conditional_state(signal_only, mode::d_S);
    r.p_uI_given_dS = std::norm(idler_partner.amplitude({{mode::u_I, 1}}));
    QuantumState signal_partner = conditional_state(idler_only, mode::d_I);
    r.p_uS_given_dI = std::norm(signal_partner.amplitude({{mode::u_S, 1}}));

    r.verdict = r.amp_uu < kParadoxZeroTol && r.amp_dSvI < kParadoxZeroTol && r.amp_vSdI < kParadoxZeroTol &&
                r.p_dd > 0.0;
    return r;
}

/// Least-squares slope of log(y) against log(x).
inline double fit_loglog_slope(const std::vector<double> &xs, const std::vector<double> &ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw Error(ErrorCode::InvalidSpec, "slope fit needs at least two paired points");
    }
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        lx.push_back(std::log(xs[k]));
        ly.push_back(std::log(ys[k]));
    }
    double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sxy += (lx[k] - mx) * (ly[k] - my);
        sxx += (lx[k] - mx) * (lx[k] - mx);
    }
    return sxy / sxx;
}

struct ScanOptions {
    Complex q = kDefaultQ;
    Complex gamma{0.05, 0.0};  // used only when not maintaining the condition
    bool satisfy_condition5 = true;
    int pump_n_max = 3;
};

struct ScanPoint {
    LaserConfig cfg;
    Complex q;
    NoiseReport noise;
    double p_dd = std::numeric_limits<double>::quiet_NaN();  // NaN when the pipeline is gated
};

/// One point per alpha (beta = alpha). With satisfy_condition5, gamma is set
/// to alpha²/(2q). Points run concurrently; results keep grid order.
inline std::vector<ScanPoint> scan_alpha(const std::vector<double> &alphas, const ScanOptions &opts) {
    std::vector<std::future<ScanPoint>> jobs;
    for (double a : alphas) {
        jobs.push_back(std::async(std::launch::async, [a, opts] {
            ScanPoint pt;
            pt.q = opts.q;
            pt.cfg.alpha = a;
            pt.cfg.beta = a;
            pt.cfg.pump_n_max = opts.pump_n_max;
            pt.cfg.gamma = opts.satisfy_condition5 ? Complex(a * a) / (2.0 * opts.q) : opts.gamma;
            pt.noise = noise_ratios(pt.cfg, pt.q);
            try {
                PipelineReport report = run_full(pt.cfg, pt.q);
                auto it = report.detection_table.find("d_S,d_I");
                pt.p_dd = it == report.detection_table.end() ? 0.0 : it->second;
            } catch (const Error &e) {
                if (!is_physics_gate(e.code())) throw;
            }
            return pt;
        }));
    }
    std::vector<ScanPoint> out;
    for (auto &j : jobs) out.push_back(j.get());
    return out;
}

struct OracleTerm {
    std::vector<int> occupations;  // canonical mode order
    Complex amplitude;
};

namespace detail {

/// Polynomial in commuting creation operators acting on the vacuum:
/// Σ c_e Π (a_k†)^{e_k} |0>. Annihilation is differentiation.
class CreationPolynomial {
   public:
    using Map = std::map<std::vector<int>, Complex>;

    explicit CreationPolynomial(std::size_t num_modes) : num_modes_(num_modes) {}

    static CreationPolynomial constant(std::size_t num_modes, Complex c) {
        CreationPolynomial p(num_modes);
        p.add(std::vector<int>(num_modes, 0), c);
        return p;
    }

    void add(const std::vector<int> &exps, Complex c) {
        if (c == Complex{}) return;
        coeffs_[exps] += c;
    }

    const Map &coeffs() const { return coeffs_; }

    CreationPolynomial operator*(const CreationPolynomial &o) const {
        CreationPolynomial out(num_modes_);
        for (const auto &[ea, ca] : coeffs_) {
            for (const auto &[eb, cb] : o.coeffs_) {
                std::vector<int> e(num_modes_);
                for (std::size_t k = 0; k < num_modes_; ++k) e[k] = ea[k] + eb[k];
                out.add(e, ca * cb);
            }
        }
        return out;
    }

    CreationPolynomial operator+(const CreationPolynomial &o) const {
        CreationPolynomial out = *this;
        for (const auto &[e, c] : o.coeffs_) out.add(e, c);
        return out;
    }

    CreationPolynomial scaled(Complex s) const {
        CreationPolynomial out(num_modes_);
        for (const auto &[e, c] : coeffs_) out.add(e, s * c);
        return out;
    }

    CreationPolynomial times_creation(std::size_t k) const {
        CreationPolynomial out(num_modes_);
        for (const auto &[exps, c] : coeffs_) {
            std::vector<int> e = exps;
            ++e[k];
            out.add(e, c);
        }
        return out;
    }

    CreationPolynomial derivative(std::size_t k) const {
        CreationPolynomial out(num_modes_);
        for (const auto &[exps, c] : coeffs_) {
            if (exps[k] == 0) continue;
            std::vector<int> e = exps;
            Complex factor = static_cast<double>(e[k]);
            --e[k];
            out.add(e, factor * c);
        }
        return out;
    }

    /// Replaces a_from† by Σ weights[j]·a_to[j]† everywhere.
    CreationPolynomial substitute(std::size_t from, const std::vector<std::pair<std::size_t, Complex>> &image) const {
        CreationPolynomial out(num_modes_);
        for (const auto &[exps, c] : coeffs_) {
            std::vector<int> e = exps;
            int power = e[from];
            e[from] = 0;
            CreationPolynomial term(num_modes_);
            term.add(e, c);
            for (int p = 0; p < power; ++p) {
                CreationPolynomial next(num_modes_);
                for (const auto &[to, w] : image) next = next + term.times_creation(to).scaled(w);
                term = next;
            }
            out = out + term;
        }
        return out;
    }

   private:
    std::size_t num_modes_;
    Map coeffs_;
};

}  // namespace detail

/// Post-crystal state by direct expansion: the laser product written as a
/// polynomial in creation operators, the input splitters substituted into it,
/// and the first-order crystal operator applied by differentiation. Shares no
/// code with the ladder-operator simulator. Terms come out in canonical basis
/// order; amplitudes include the global normalization of the initial state.
inline std::vector<OracleTerm> oracle_expand_symbolic(const LaserConfig &cfg, Complex q) {
    using detail::CreationPolynomial;
    ModeSet modes = canonical_modes();
    const std::size_t n = modes.size();
    const std::size_t s_in = modes.require(mode::S_in), i_in = modes.require(mode::I_in);
    const std::size_t us = modes.require(mode::u_S), vs = modes.require(mode::v_S);
    const std::size_t ui = modes.require(mode::u_I), vi = modes.require(mode::v_I);
    const std::size_t f = modes.require(mode::F);

    auto linear = [&](std::size_t k, Complex c) {
        CreationPolynomial p = CreationPolynomial::constant(n, 1.0);
        std::vector<int> e(n, 0);
        e[k] = 1;
        p.add(e, c);
        return p;
    };
    // γⁿ(n!)^{-1/2}|n> = γⁿ/n! (a†)ⁿ|0>
    CreationPolynomial pump(n);
    Complex coeff{1.0, 0.0};
    double weight = 0.0;
    for (int k = 0; k <= cfg.pump_n_max; ++k) {
        std::vector<int> e(n, 0);
        e[f] = k;
        pump.add(e, coeff);
        weight += std::pow(std::abs(cfg.gamma), 2 * k) / std::tgamma(k + 1.0);
        coeff *= cfg.gamma / static_cast<double>(k + 1);
    }
    CreationPolynomial psi = linear(s_in, cfg.alpha) * linear(i_in, cfg.beta) * pump;

    const double h = 1.0 / std::sqrt(2.0);
    psi = psi.substitute(s_in, {{vs, h}, {us, kIota * h}});
    psi = psi.substitute(i_in, {{vi, h}, {ui, kIota * h}});

    CreationPolynomial created = psi.derivative(f).times_creation(us).times_creation(ui);
    CreationPolynomial absorbed = psi.derivative(us).derivative(ui).times_creation(f);
    psi = psi + created.scaled(q) + absorbed.scaled(-std::conj(q));

    double norm_factor =
        1.0 / std::sqrt((1.0 + std::norm(cfg.alpha)) * (1.0 + std::norm(cfg.beta)) * weight);
    std::vector<OracleTerm> out;
    for (const auto &[e, c] : psi.coeffs()) {
        double bosonic = 1.0;
        for (int k : e) bosonic *= std::sqrt(std::tgamma(k + 1.0));
        out.push_back({e, norm_factor * c * bosonic});
    }
    return out;
}

/// The oracle's term list as a QuantumState on the pipeline's modes and cutoffs.
inline QuantumState oracle_state(const LaserConfig &cfg, Complex q) {
    QuantumState::TermMap terms;
    for (const auto &t : oracle_expand_symbolic(cfg, q)) terms.emplace(FockBasisState(t.occupations), t.amplitude);
    return QuantumState(canonical_modes(), pipeline_cutoffs(cfg), std::move(terms));
}

}  // namespace hardyweave
