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


#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hardy_refs.hpp"
#include "hardyweave/analysis.hpp"
#include "test_support.hpp"

using namespace hardyweave;
namespace refs = hwtest::refs;

namespace {

Complex oracle_coefficient(const std::vector<OracleTerm> &terms, const QuantumState &shape,
                           std::initializer_list<std::pair<ModeId, int>> occ) {
    FockBasisState want = shape.basis(occ);
    for (const auto &t : terms) {
        if (t.occupations == want.occupations()) return t.amplitude;
    }
    return {};
}

LaserConfig condition5_cfg(double alpha, Complex q) { return LaserConfig{alpha, alpha, alpha * alpha / (2.0 * q), 3}; }

}  // namespace

TEST(NoiseRatios, AlphaPointOne) {
    NoiseReport r = noise_ratios(condition5_cfg(0.1, kDefaultQ), kDefaultQ);
    EXPECT_NEAR(r.ratio_triple, 0.1, 1e-9);
    EXPECT_NEAR(r.ratio_two_pair, 0.01, 1e-9);
    EXPECT_LT(r.ratio_triple, 0.1 * std::sqrt(2.0) * 1.01);
}

TEST(NoiseRatios, ScaleWithAlpha) {
    NoiseReport big = noise_ratios(condition5_cfg(0.1, kDefaultQ), kDefaultQ);
    NoiseReport small = noise_ratios(condition5_cfg(0.01, kDefaultQ), kDefaultQ);
    EXPECT_NEAR(big.ratio_triple / small.ratio_triple, 10.0, 1e-6);
    EXPECT_NEAR(big.ratio_two_pair / small.ratio_two_pair, 100.0, 1e-4);
}

TEST(NoiseRatios, NoDownConversion) {
    LaserConfig cfg{0.1, 0.1, 0.05, 3};
    NoiseReport r = noise_ratios(cfg, 0.0);
    QuantumState s = run_crystal(run_input_splitters(build_initial_state(cfg)), 0.0);
    EXPECT_NEAR(r.pair_amp, std::abs(s.amplitude({{mode::v_S, 1}, {mode::v_I, 1}})), 1e-15);
    EXPECT_EQ(r.triple_amp, 0.0);
    EXPECT_EQ(r.two_pair_amp, 0.0);
}

TEST(NoiseRatios, FittedSlopes) {
    std::vector<double> xs{0.2, 0.1, 0.05, 0.02}, triple, two_pair;
    for (double a : xs) {
        NoiseReport r = noise_ratios(condition5_cfg(a, kDefaultQ), kDefaultQ);
        triple.push_back(r.ratio_triple);
        two_pair.push_back(r.ratio_two_pair);
    }
    EXPECT_NEAR(fit_loglog_slope(xs, triple), 1.0, 0.01);
    EXPECT_NEAR(fit_loglog_slope(xs, two_pair), 2.0, 0.02);
}

TEST(FitLogLogSlope, ExactPowerLaws) {
    std::vector<double> xs{1, 2, 4, 8};
    EXPECT_NEAR(fit_loglog_slope(xs, {3, 6, 12, 24}), 1.0, 1e-12);
    EXPECT_NEAR(fit_loglog_slope(xs, {1, 8, 64, 512}), 3.0, 1e-12);
}

TEST(ScanAlpha, KeepsGridOrderAndCondition) {
    ScanOptions opts;
    std::vector<double> grid{0.2, 0.1, 0.05, 0.02};
    auto points = scan_alpha(grid, opts);
    ASSERT_EQ(points.size(), grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        EXPECT_DOUBLE_EQ(points[k].cfg.alpha.real(), grid[k]);
        EXPECT_NEAR(check_condition5(points[k].cfg, points[k].q), 0.0, 1e-12);
        EXPECT_NEAR(points[k].p_dd, 1.0 / 12, 1e-9);
    }
    opts.satisfy_condition5 = false;
    for (const auto &p : scan_alpha({0.2, 0.02}, opts)) EXPECT_TRUE(std::isnan(p.p_dd));
}

TEST(ConditionalState, SignalOnlyDetections) {
    QuantumState partner = conditional_state(refs::final_signal_only(), mode::d_S);
    ASSERT_EQ(partner.size(), 1u);
    EXPECT_NEAR(std::abs(partner.amplitude({{mode::u_I, 1}})), 1.0, 1e-12);

    QuantumState c = conditional_state(refs::final_signal_only(), mode::c_S);
    EXPECT_NEAR(std::norm(c.amplitude({{mode::v_I, 1}})), 0.8, 1e-12);
    EXPECT_NEAR(std::norm(c.amplitude({{mode::u_I, 1}})), 0.2, 1e-12);
    Complex rel = c.amplitude({{mode::v_I, 1}}) / c.amplitude({{mode::u_I, 1}});
    EXPECT_NEAR(std::abs(rel - Complex{0.0, -2.0}), 0.0, 1e-12);
}

TEST(ConditionalState, IdlerOnlyDetection) {
    QuantumState partner = conditional_state(refs::final_idler_only(), mode::d_I);
    ASSERT_EQ(partner.size(), 1u);
    EXPECT_NEAR(std::abs(partner.amplitude({{mode::u_S, 1}})), 1.0, 1e-12);
}

TEST(ConditionalState, UnitNormOrZeroNorm) {
    for (const ModeId &d : {mode::c_S, mode::d_S, mode::c_I, mode::d_I}) {
        EXPECT_NEAR(norm(conditional_state(refs::final_both(), d)), 1.0, 1e-12);
    }
    try {
        conditional_state(refs::hardy(), mode::c_S);
        FAIL() << "expected ZeroNorm";
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::ZeroNorm);
    }
}

TEST(Paradox, DefaultVerdict) {
    ParadoxReport r = verify_hardy_paradox(LaserConfig{}, kDefaultQ);
    EXPECT_TRUE(r.verdict);
    EXPECT_NEAR(r.p_dd, 1.0 / 12, 1e-9);
    EXPECT_LT(r.amp_uu, 1e-9);
    EXPECT_LT(r.amp_dSvI, 1e-9);
    EXPECT_LT(r.amp_vSdI, 1e-9);
    EXPECT_NEAR(r.p_uI_given_dS, 1.0, 1e-12);
    EXPECT_NEAR(r.p_uS_given_dI, 1.0, 1e-12);
}

TEST(Paradox, ViolationIsGated) {
    LaserConfig cfg;
    cfg.gamma *= 1.1;
    try {
        verify_hardy_paradox(cfg, kDefaultQ);
        FAIL() << "expected CancellationFailed";
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::CancellationFailed);
    }
}

TEST(Paradox, VerdictInvariantUnderPhaseRotation) {
    for (int k = 0; k < 20; ++k) {
        double phi = hwtest::uniform(0.0, 2 * std::numbers::pi);
        LaserConfig cfg;
        Complex rot = std::polar(1.0, phi);
        cfg.alpha *= rot;
        cfg.gamma *= rot;
        ParadoxReport r = verify_hardy_paradox(cfg, kDefaultQ);
        EXPECT_TRUE(r.verdict) << "phi=" << phi;
        EXPECT_NEAR(r.p_dd, 1.0 / 12, 1e-9);
    }
}

TEST(Oracle, PairCoefficientFromPumpAlone) {
    Complex q{1e-3, 5e-4}, gamma{0.3, -0.1};
    LaserConfig cfg{0.0, 0.0, gamma, 3};
    auto terms = oracle_expand_symbolic(cfg, q);
    QuantumState shape(canonical_modes());
    Complex vac = oracle_coefficient(terms, shape, {});
    Complex pair = oracle_coefficient(terms, shape, {{mode::u_S, 1}, {mode::u_I, 1}});
    EXPECT_NEAR(std::abs(pair / vac - q * gamma), 0.0, 1e-15);
}

TEST(Oracle, PumpDepletionCoefficient) {
    Complex q{1e-3, 5e-4}, alpha{0.1, 0.05}, beta{0.05, -0.1};
    LaserConfig cfg{alpha, beta, 0.0, 3};
    auto terms = oracle_expand_symbolic(cfg, q);
    QuantumState shape(canonical_modes());
    Complex vac = oracle_coefficient(terms, shape, {});
    Complex depleted = oracle_coefficient(terms, shape, {{mode::F, 1}});
    EXPECT_NEAR(std::abs(depleted / vac - std::conj(q) * alpha * beta / 2.0), 0.0, 1e-15);
}

TEST(Oracle, MatchesSimulatorOnRandomDraws) {
    for (int k = 0; k < 100; ++k) {
        auto d = hwtest::random_free_draw();
        QuantumState sim = run_crystal(run_input_splitters(build_initial_state(d.cfg)), d.q);
        QuantumState orc = oracle_state(d.cfg, d.q);
        double scale = 0.0;
        for (const auto &[b, amp] : orc.terms()) scale = std::max(scale, std::abs(amp));
        EXPECT_LE(max_amplitude_difference(sim, orc), 1e-12 * scale) << "draw " << k;
    }
}
