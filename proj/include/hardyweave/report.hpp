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
 * Machine-readable output records. Every record is
 * {"schema_version", "command", "inputs", "results"}; complex numbers are
 * {"re": x, "im": y}. No timestamps, so identical inputs give identical bytes.
 */

#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "fock.hpp"
#include "pipeline.hpp"

namespace hardyweave {

inline constexpr const char *kSchemaVersion = "1";

using Json = nlohmann::ordered_json;

inline Json to_json(Complex c) { return Json{{"re", c.real()}, {"im", c.imag()}}; }

/// Finite numbers as-is; NaN/inf become null.
inline Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Json to_json(const QuantumState &state) {
    Json terms = Json::array();
    for (const auto &[b, amp] : state.terms()) {
        Json occ = Json::object();
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (b[i] != 0) occ[state.modes()[i].name()] = b[i];
        }
        terms.push_back(Json{{"ket", state.label(b)}, {"occupations", occ}, {"amp", to_json(amp)}});
    }
    return terms;
}

inline Json to_json(const DetectionTable &table) {
    Json out = Json::object();
    for (const auto &[k, p] : table) out[k] = p;
    return out;
}

inline Json to_json(const ParadoxReport &r) {
    return Json{{"amp_uu", r.amp_uu},
                {"amp_dSvI", r.amp_dSvI},
                {"amp_vSdI", r.amp_vSdI},
                {"p_dd", r.p_dd},
                {"p_uI_given_dS", r.p_uI_given_dS},
                {"p_uS_given_dI", r.p_uS_given_dI},
                {"verdict", r.verdict}};
}

inline Json to_json(const NoiseReport &r) {
    return Json{{"pair_amp", r.pair_amp},
                {"triple_amp", r.triple_amp},
                {"two_pair_amp", r.two_pair_amp},
                {"ratio_triple", number_or_null(r.ratio_triple)},
                {"ratio_two_pair", number_or_null(r.ratio_two_pair)}};
}

inline Json error_json(const Error &e) {
    Json out{{"code", std::string(to_string(e.code()))}, {"message", e.detail()}};
    if (!e.stage().empty()) out["stage"] = e.stage();
    if (e.code() == ErrorCode::CancellationFailed) out["residual"] = number_or_null(e.value());
    return out;
}

inline Json make_record(const std::string &command, Json inputs, Json results) {
    return Json{{"schema_version", kSchemaVersion},
                {"command", command},
                {"inputs", std::move(inputs)},
                {"results", std::move(results)}};
}

/// Fixed-width "+0.123456789012-0.000000000000i".
inline std::string format_amplitude(Complex c, int digits = 12) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%+.*f%+.*fi", digits, c.real() == 0.0 ? 0.0 : c.real(), digits,
                  c.imag() == 0.0 ? 0.0 : c.imag());
    return buf;
}

inline std::string format_probability(double p, int digits = 12) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, p);
    return buf;
}

inline std::string format_state_text(const QuantumState &state, const std::string &indent = "  ") {
    std::string out;
    for (const auto &[b, amp] : state.terms()) {
        out += indent + format_amplitude(amp) + "  |" + state.label(b) + ">\n";
    }
    return out;
}

}  // namespace hardyweave
