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
 * Line-oriented text format for optical circuits (`.circ`).
 *
 *     mode <name>
 *     laser <out> amp=<complex> [nmax=<int>]
 *     bs <in1> [<in2>] -> <out1> <out2> [matrix=input|final]
 *     mirror <in> -> <out> [phase=<complex>]
 *     crystal <pump> -> <signal> <idler> q=<complex> [order=1|exact]
 *     pinhole <in> -> <out>
 *     detector <in>
 *     constraint condition5 [tol=<real>]
 *
 * `#` starts a comment. Complex literals are written `a`, `bi`, `a+bi` or
 * `a-bi`. format_circuit() emits the canonical form; comments and blank
 * lines are not preserved.
 */

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "error.hpp"
#include "fock.hpp"

namespace hardyweave {

struct SourceSpan {
    int line = 1;
    int column = 1;
    int length = 1;
};

class ParseError : public Error {
   public:
    ParseError(ErrorCode code, const std::string &message, SourceSpan span)
        : Error(code, message), span_(span) {}

    const SourceSpan &span() const noexcept { return span_; }

   private:
    SourceSpan span_;
};

/// "file:line:column: error: message [Code]"
inline std::string format_diagnostic(std::string_view file, const ParseError &e) {
    std::ostringstream out;
    out << file << ':' << e.span().line << ':' << e.span().column << ": error: " << e.what() << " ["
        << to_string(e.code()) << ']';
    return out.str();
}

enum class ElementKind { Laser, BeamSplitter, Mirror, Crystal, Pinhole, Detector };

inline std::string_view keyword(ElementKind kind) {
    switch (kind) {
        case ElementKind::Laser: return "laser";
        case ElementKind::BeamSplitter: return "bs";
        case ElementKind::Mirror: return "mirror";
        case ElementKind::Crystal: return "crystal";
        case ElementKind::Pinhole: return "pinhole";
        case ElementKind::Detector: return "detector";
    }
    return "";
}

using ParamValue = std::variant<Complex, double, std::int64_t, std::string>;

struct ElementSpec {
    ElementKind kind;
    std::vector<ModeId> inputs;
    std::vector<ModeId> outputs;
    std::map<std::string, ParamValue> params;
    SourceSpan span;  // the keyword token; ignored by equality

    friend bool operator==(const ElementSpec &a, const ElementSpec &b) {
        return a.kind == b.kind && a.inputs == b.inputs && a.outputs == b.outputs && a.params == b.params;
    }
};

struct Constraint {
    std::string name;  // only "condition5" today
    double tol = 1e-9;
    SourceSpan span;

    friend bool operator==(const Constraint &a, const Constraint &b) {
        return a.name == b.name && a.tol == b.tol;
    }
};

struct Circuit {
    std::vector<ModeId> modes;
    std::vector<ElementSpec> elements;
    std::vector<Constraint> constraints;

    friend bool operator==(const Circuit &, const Circuit &) = default;

    std::size_t count(ElementKind kind) const {
        std::size_t n = 0;
        for (const auto &e : elements) n += e.kind == kind ? 1 : 0;
        return n;
    }
};

namespace dsl_detail {

struct Token {
    std::string_view text;
    SourceSpan span;
};

inline bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    auto head = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
    if (!head(s[0])) return false;
    for (char c : s.substr(1)) {
        if (!head(c) && !(c >= '0' && c <= '9')) return false;
    }
    return true;
}

inline std::optional<double> parse_real(std::string_view s) {
    if (!s.empty() && s[0] == '+') s.remove_prefix(1);
    if (s.empty() || s[0] == '+') return std::nullopt;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

}  // namespace dsl_detail

/// Parses `a`, `bi`, `a+bi`, `a-bi` (also `i`, `-i`, `a+i`).
inline std::optional<Complex> parse_complex(std::string_view s) {
    using dsl_detail::parse_real;
    if (s.empty()) return std::nullopt;
    if (s.back() != 'i') {
        auto re = parse_real(s);
        if (!re) return std::nullopt;
        return Complex{*re, 0.0};
    }
    s.remove_suffix(1);
    auto unit = [](std::string_view t) -> std::optional<double> {
        if (t.empty() || t == "+") return 1.0;
        if (t == "-") return -1.0;
        return parse_real(t);
    };
    for (std::size_t pos = s.size(); pos-- > 1;) {
        if ((s[pos] == '+' || s[pos] == '-') && s[pos - 1] != 'e' && s[pos - 1] != 'E') {
            auto re = parse_real(s.substr(0, pos));
            auto im = unit(s.substr(pos));
            if (!re || !im) return std::nullopt;
            return Complex{*re, *im};
        }
    }
    auto im = unit(s);
    if (!im) return std::nullopt;
    return Complex{0.0, *im};
}

/// Shortest round-trip decimal form of `x`.
inline std::string format_real(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

inline std::string format_complex(Complex c) {
    if (c.imag() == 0.0) return format_real(c.real());
    if (c.real() == 0.0) return format_real(c.imag()) + "i";
    std::string out = format_real(c.real());
    out += c.imag() < 0.0 ? "-" : "+";
    return out + format_real(std::abs(c.imag())) + "i";
}

inline std::string format_param(const ParamValue &v) {
    return std::visit(
        [](const auto &x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Complex>) return format_complex(x);
            else if constexpr (std::is_same_v<T, double>) return format_real(x);
            else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(x);
            else return x;
        },
        v);
}

namespace dsl_detail {

enum class ParamType { Complex, Real, Integer, Word };

inline ParamType param_type(std::string_view key) {
    if (key == "amp" || key == "phase" || key == "q") return ParamType::Complex;
    if (key == "tol") return ParamType::Real;
    if (key == "nmax") return ParamType::Integer;
    return ParamType::Word;
}

struct Line {
    Token keyword;
    std::vector<Token> lhs;  // positional tokens before "->" (or all, without an arrow)
    std::vector<Token> rhs;
    std::optional<Token> arrow;
    std::vector<std::pair<Token, Token>> params;  // key, value
};

inline std::vector<Token> tokenize(std::string_view line, int line_no) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        if (i >= line.size() || line[i] == '#') break;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' && line[i] != '#') ++i;
        out.push_back({line.substr(start, i - start),
                       {line_no, static_cast<int>(start) + 1, static_cast<int>(i - start)}});
    }
    return out;
}

inline Line split_line(const std::vector<Token> &tokens) {
    Line line{tokens.front(), {}, {}, std::nullopt, {}};
    for (std::size_t k = 1; k < tokens.size(); ++k) {
        const Token &t = tokens[k];
        auto eq = t.text.find('=');
        if (t.text == "->") {
            if (line.arrow) throw ParseError(ErrorCode::ArityMismatch, "more than one '->'", t.span);
            line.arrow = t;
        } else if (eq != std::string_view::npos) {
            Token key{t.text.substr(0, eq), {t.span.line, t.span.column, static_cast<int>(eq)}};
            Token value{t.text.substr(eq + 1),
                        {t.span.line, t.span.column + static_cast<int>(eq) + 1,
                         static_cast<int>(t.text.size() - eq - 1)}};
            if (key.text.empty() || value.text.empty()) {
                throw ParseError(ErrorCode::BadNumberLiteral, "malformed parameter '" + std::string(t.text) + "'",
                                 t.span);
            }
            key.span.length = std::max(1, key.span.length);
            value.span.length = std::max(1, value.span.length);
            line.params.emplace_back(key, value);
        } else if (line.arrow) {
            line.rhs.push_back(t);
        } else {
            line.lhs.push_back(t);
        }
    }
    return line;
}

inline std::map<std::string, ParamValue> parse_params(const Line &line) {
    std::map<std::string, ParamValue> out;
    for (const auto &[key, value] : line.params) {
        std::string k(key.text);
        if (out.contains(k)) throw ParseError(ErrorCode::ArityMismatch, "duplicate parameter '" + k + "'", key.span);
        switch (param_type(k)) {
            case ParamType::Complex: {
                auto c = parse_complex(value.text);
                if (!c) {
                    throw ParseError(ErrorCode::BadNumberLiteral,
                                     "bad complex literal '" + std::string(value.text) + "'", value.span);
                }
                out.emplace(k, *c);
                break;
            }
            case ParamType::Real: {
                auto r = parse_real(value.text);
                if (!r) {
                    throw ParseError(ErrorCode::BadNumberLiteral, "bad number '" + std::string(value.text) + "'",
                                     value.span);
                }
                out.emplace(k, *r);
                break;
            }
            case ParamType::Integer: {
                auto n = parse_int(value.text);
                if (!n) {
                    throw ParseError(ErrorCode::BadNumberLiteral, "bad integer '" + std::string(value.text) + "'",
                                     value.span);
                }
                out.emplace(k, *n);
                break;
            }
            case ParamType::Word: out.emplace(k, std::string(value.text)); break;
        }
    }
    return out;
}

struct Arity {
    int lhs_min, lhs_max, rhs;  // rhs < 0: no arrow allowed
};

inline Arity arity(ElementKind kind) {
    switch (kind) {
        case ElementKind::Laser: return {1, 1, -1};
        case ElementKind::BeamSplitter: return {1, 2, 2};
        case ElementKind::Mirror: return {1, 1, 1};
        case ElementKind::Crystal: return {1, 1, 2};
        case ElementKind::Pinhole: return {1, 1, 1};
        case ElementKind::Detector: return {1, 1, -1};
    }
    return {0, 0, -1};
}

inline std::optional<ElementKind> element_kind(std::string_view word) {
    for (auto kind : {ElementKind::Laser, ElementKind::BeamSplitter, ElementKind::Mirror, ElementKind::Crystal,
                      ElementKind::Pinhole, ElementKind::Detector}) {
        if (keyword(kind) == word) return kind;
    }
    return std::nullopt;
}

}  // namespace dsl_detail

/// Parses and validates circuit text. Throws ParseError carrying the span of
/// the offending token.
inline Circuit parse_circuit(std::string_view text) {
    using namespace dsl_detail;
    Circuit circuit;
    std::map<std::string, SourceSpan> declared;
    // mode references per element, kept for the dataflow pass
    struct Refs {
        std::vector<Token> inputs, outputs;
    };
    std::vector<Refs> refs;

    auto require_declared = [&](const Token &t) {
        if (!declared.contains(std::string(t.text))) {
            throw ParseError(ErrorCode::UndeclaredMode, "mode '" + std::string(t.text) + "' is not declared", t.span);
        }
        return ModeId(std::string(t.text));
    };

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        auto tokens = tokenize(raw, line_no);
        if (tokens.empty()) {
            if (end == text.size()) break;
            continue;
        }
        Line line = split_line(tokens);
        std::string_view word = line.keyword.text;

        if (word == "mode") {
            if (line.lhs.size() != 1 || line.arrow || !line.params.empty()) {
                throw ParseError(ErrorCode::ArityMismatch, "expected: mode <name>", line.keyword.span);
            }
            const Token &name = line.lhs[0];
            if (!is_identifier(name.text)) {
                throw ParseError(ErrorCode::UnknownKeyword, "invalid mode name '" + std::string(name.text) + "'",
                                 name.span);
            }
            if (!declared.emplace(std::string(name.text), name.span).second) {
                throw ParseError(ErrorCode::DuplicateMode, "mode '" + std::string(name.text) + "' declared twice",
                                 name.span);
            }
            circuit.modes.emplace_back(std::string(name.text));
        } else if (word == "constraint") {
            if (line.lhs.size() != 1 || line.arrow) {
                throw ParseError(ErrorCode::ArityMismatch, "expected: constraint condition5 [tol=<real>]",
                                 line.keyword.span);
            }
            if (line.lhs[0].text != "condition5") {
                throw ParseError(ErrorCode::UnknownKeyword,
                                 "unknown constraint '" + std::string(line.lhs[0].text) + "'", line.lhs[0].span);
            }
            Constraint c{"condition5", 1e-9, line.keyword.span};
            for (const auto &[key, value] : parse_params(line)) {
                if (key != "tol") {
                    auto at = std::find_if(line.params.begin(), line.params.end(),
                                           [&](const auto &kv) { return kv.first.text == key; });
                    throw ParseError(ErrorCode::UnknownKeyword, "unknown constraint parameter '" + key + "'",
                                     at->first.span);
                }
                c.tol = std::get<double>(value);
            }
            circuit.constraints.push_back(c);
        } else if (auto kind = element_kind(word)) {
            Arity a = arity(*kind);
            bool lhs_ok = static_cast<int>(line.lhs.size()) >= a.lhs_min &&
                          static_cast<int>(line.lhs.size()) <= a.lhs_max;
            bool rhs_ok = a.rhs < 0 ? !line.arrow : (line.arrow && static_cast<int>(line.rhs.size()) == a.rhs);
            if (!lhs_ok || !rhs_ok) {
                throw ParseError(ErrorCode::ArityMismatch,
                                 "wrong number of modes for '" + std::string(word) + "'", line.keyword.span);
            }
            ElementSpec element{*kind, {}, {}, parse_params(line), line.keyword.span};
            Refs r;
            if (*kind == ElementKind::Laser) {
                element.outputs.push_back(require_declared(line.lhs[0]));
                r.outputs.push_back(line.lhs[0]);
            } else {
                for (const auto &t : line.lhs) {
                    element.inputs.push_back(require_declared(t));
                    r.inputs.push_back(t);
                }
                for (const auto &t : line.rhs) {
                    element.outputs.push_back(require_declared(t));
                    r.outputs.push_back(t);
                }
            }
            circuit.elements.push_back(std::move(element));
            refs.push_back(std::move(r));
        } else {
            throw ParseError(ErrorCode::UnknownKeyword, "unknown keyword '" + std::string(word) + "'",
                             line.keyword.span);
        }
        if (end == text.size()) break;
    }

    // Producers. Laser, splitter and relabeling outputs originate a mode; a
    // crystal output or a pass-through element (in == out) joins a beam that
    // already exists, and only originates the mode if nothing produced it yet.
    std::map<std::string, std::size_t> producer;
    for (std::size_t i = 0; i < circuit.elements.size(); ++i) {
        const auto &e = circuit.elements[i];
        for (std::size_t k = 0; k < e.outputs.size(); ++k) {
            const std::string &name = e.outputs[k].name();
            bool pass_through = (e.kind == ElementKind::Mirror || e.kind == ElementKind::Pinhole) &&
                                e.inputs[0] == e.outputs[k];
            bool joins = e.kind == ElementKind::Crystal || pass_through;
            if (joins) {
                producer.try_emplace(name, i);
                continue;
            }
            if (!producer.emplace(name, i).second) {
                throw ParseError(ErrorCode::DuplicateProducer, "mode '" + name + "' already has a producer",
                                 refs[i].outputs[k].span);
            }
        }
        std::map<std::string, int> seen;
        for (std::size_t k = 0; k < e.outputs.size(); ++k) {
            if (++seen[e.outputs[k].name()] > 1) {
                throw ParseError(ErrorCode::DuplicateProducer, "element lists output '" + e.outputs[k].name() +
                                                                   "' twice",
                                 refs[i].outputs[k].span);
            }
        }
    }
    for (std::size_t i = 0; i < circuit.elements.size(); ++i) {
        const auto &e = circuit.elements[i];
        for (std::size_t k = 0; k < e.inputs.size(); ++k) {
            auto it = producer.find(e.inputs[k].name());
            if (it != producer.end() && it->second > i) {
                throw ParseError(ErrorCode::DataflowOrder,
                                 "mode '" + e.inputs[k].name() + "' is used before the element that produces it",
                                 refs[i].inputs[k].span);
            }
        }
    }
    return circuit;
}

/// Canonical text: modes, elements in order (params sorted by key), then
/// constraints.
inline std::string format_circuit(const Circuit &c) {
    std::ostringstream out;
    for (const auto &m : c.modes) out << "mode " << m.name() << '\n';
    if (!c.modes.empty() && (!c.elements.empty() || !c.constraints.empty())) out << '\n';
    for (const auto &e : c.elements) {
        out << keyword(e.kind);
        if (e.kind == ElementKind::Laser) {
            out << ' ' << e.outputs.at(0).name();
        } else {
            for (const auto &m : e.inputs) out << ' ' << m.name();
            if (!e.outputs.empty()) {
                out << " ->";
                for (const auto &m : e.outputs) out << ' ' << m.name();
            }
        }
        for (const auto &[key, value] : e.params) out << ' ' << key << '=' << format_param(value);
        out << '\n';
    }
    for (const auto &k : c.constraints) out << "constraint " << k.name << " tol=" << format_real(k.tol) << '\n';
    return out.str();
}

}  // namespace hardyweave
