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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hardyweave {

enum class ErrorCode {
    DuplicateMode,
    UnregisteredMode,
    ModeCollision,
    CutoffExceeded,
    ZeroNorm,
    InvalidSpec,
    InvalidConfig,
    EmptySelection,
    CancellationFailed,
    UnnormalizedInput,
    UnsupportedParam,
    FactorizationFailed,
    // circuit text diagnostics
    UnknownKeyword,
    UndeclaredMode,
    ArityMismatch,
    DuplicateProducer,
    BadNumberLiteral,
    DataflowOrder,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DuplicateMode: return "DuplicateMode";
        case ErrorCode::UnregisteredMode: return "UnregisteredMode";
        case ErrorCode::ModeCollision: return "ModeCollision";
        case ErrorCode::CutoffExceeded: return "CutoffExceeded";
        case ErrorCode::ZeroNorm: return "ZeroNorm";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::EmptySelection: return "EmptySelection";
        case ErrorCode::CancellationFailed: return "CancellationFailed";
        case ErrorCode::UnnormalizedInput: return "UnnormalizedInput";
        case ErrorCode::UnsupportedParam: return "UnsupportedParam";
        case ErrorCode::FactorizationFailed: return "FactorizationFailed";
        case ErrorCode::UnknownKeyword: return "UnknownKeyword";
        case ErrorCode::UndeclaredMode: return "UndeclaredMode";
        case ErrorCode::ArityMismatch: return "ArityMismatch";
        case ErrorCode::DuplicateProducer: return "DuplicateProducer";
        case ErrorCode::BadNumberLiteral: return "BadNumberLiteral";
        case ErrorCode::DataflowOrder: return "DataflowOrder";
    }
    return "Unknown";
}

/// Failures that stem from the physics gates rather than from bad input.
inline bool is_physics_gate(ErrorCode code) {
    return code == ErrorCode::CancellationFailed || code == ErrorCode::EmptySelection;
}

/// Base exception for every failure raised by the library.
///
/// `value()` carries a measured quantity when the failure has one (the
/// leftover amplitude for CancellationFailed); `stage()` names the pipeline
/// stage that raised it, when known.
class Error : public std::runtime_error {
   public:
    Error(ErrorCode code, const std::string &message, double value = 0.0)
        : std::runtime_error(message), code_(code), value_(value), detail_(message) {}

    ErrorCode code() const noexcept { return code_; }
    double value() const noexcept { return value_; }
    const std::string &stage() const noexcept { return stage_; }
    const std::string &detail() const noexcept { return detail_; }

    /// Copy of this error tagged with the stage that raised it.
    Error at_stage(const std::string &stage) const {
        Error out(code_, "stage '" + stage + "': " + detail_, value_);
        out.detail_ = detail_;
        out.stage_ = stage;
        return out;
    }

   private:
    ErrorCode code_;
    double value_;
    std::string detail_;
    std::string stage_;
};

}  // namespace hardyweave
