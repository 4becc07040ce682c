/*
 * Copyright (C) 2026 The redkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Verification properties: an input box plus linear output constraints.
//
// Accepted VNNLIB subset: declare-const of X_i / Y_i (Real), input bounds
// (<= X_i c) / (>= X_i c) in either argument order (optionally grouped under
// one top-level and), and a single output assertion describing the
// counterexample region as either one comparison or (or (and cmp) ...) with
// one comparison per disjunct. Comparisons take linear terms over Y built
// from +, -, * by constants, numbers and Y_i. Each counterexample comparison
// becomes one constraint to prove.

#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "redkit/bound_engine.hpp"
#include "redkit/error.hpp"

namespace redkit {

/// Proof obligation c . y + d >= 0, or > 0 when strict.
struct LinearConstraint {
    Vector coeffs;
    double offset = 0.0;
    bool strict = true;

    double value(const Vector& y) const { return coeffs.dot(y) + offset; }
    bool holds(const Vector& y) const { return strict ? value(y) > 0.0 : value(y) >= 0.0; }
    /// Whether a lower bound on c . y + d establishes the constraint.
    bool proven_by(double lower_bound) const { return strict ? lower_bound > 0.0 : lower_bound >= 0.0; }

    bool operator==(const LinearConstraint& o) const {
        return coeffs == o.coeffs && offset == o.offset && strict == o.strict;
    }
};

struct PropertySpec {
    Box box;
    std::size_t output_width = 0;
    std::vector<LinearConstraint> constraints;  // all must hold
    std::optional<std::size_t> label;           // set for robustness specs built from a label

    bool holds(const Vector& y) const {
        for (const auto& c : constraints)
            if (!c.holds(y)) return false;
        return true;
    }
};

/// y[label] - y[j] > 0 for every j != label.
inline std::vector<LinearConstraint> robustness_margins(std::size_t output_width, std::size_t label) {
    require(label < output_width, "label " + std::to_string(label) + " out of range");
    std::vector<LinearConstraint> out;
    for (std::size_t j = 0; j < output_width; ++j) {
        if (j == label) continue;
        Vector c = Vector::Zero(static_cast<Eigen::Index>(output_width));
        c[static_cast<Eigen::Index>(label)] = 1.0;
        c[static_cast<Eigen::Index>(j)] = -1.0;
        out.push_back({std::move(c), 0.0, true});
    }
    return out;
}

inline PropertySpec robustness_spec(Box box, std::size_t output_width, std::size_t label) {
    PropertySpec spec{std::move(box), output_width, robustness_margins(output_width, label), label};
    return spec;
}

/// Per-coordinate [p - eps, p + eps], optionally intersected with [clip.first, clip.second].
inline Box epsilon_ball(const Vector& center, double eps, std::optional<std::pair<double, double>> clip = {}) {
    if (!(eps >= 0.0)) fail(ErrorKind::contract, "epsilon must be non-negative");
    Vector lo = center.array() - eps, hi = center.array() + eps;
    if (clip) {
        require(clip->first <= clip->second, "clip range is empty");
        lo = lo.cwiseMax(clip->first).cwiseMin(clip->second);
        hi = hi.cwiseMin(clip->second).cwiseMax(clip->first);
    }
    return Box(std::move(lo), std::move(hi));
}

/// Center vector from text: one value per line, or comma/whitespace separated.
/// A non-numeric first line (CSV header) is skipped.
inline Vector parse_center(std::string_view text) {
    auto tokens = [](std::string_view line) {
        std::vector<std::string> out;
        std::string tok;
        for (char ch : line) {
            if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
                if (!tok.empty()) out.push_back(std::move(tok));
                tok.clear();
            } else {
                tok.push_back(ch);
            }
        }
        if (!tok.empty()) out.push_back(std::move(tok));
        return out;
    };
    auto parse = [](const std::string& tok) -> std::optional<double> {
        double v = 0.0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size()) return std::nullopt;
        return v;
    };

    std::vector<double> vals;
    bool first_line = true;
    while (!text.empty()) {
        std::size_t eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        std::vector<std::string> toks = tokens(line);
        if (toks.empty()) continue;
        bool header = first_line && !parse(toks.front());
        first_line = false;
        if (header) continue;
        for (const std::string& t : toks) {
            std::optional<double> v = parse(t);
            if (!v) fail(ErrorKind::parse, "center file: not a number: '" + t + "'");
            vals.push_back(*v);
        }
    }
    if (vals.empty()) fail(ErrorKind::parse, "center file holds no values");
    return Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

namespace detail {

struct SExpr {
    std::string atom;  // empty for lists
    std::vector<SExpr> items;
    int line = 0;

    bool is_atom() const { return !atom.empty(); }
    std::string show() const {
        if (is_atom()) return atom;
        std::string s = "(";
        for (std::size_t i = 0; i < items.size(); ++i) s += (i ? " " : "") + items[i].show();
        return s + ")";
    }
};

[[noreturn]] inline void parse_error(int line, const std::string& msg) {
    fail(ErrorKind::parse, "vnnlib line " + std::to_string(line) + ": " + msg);
}

inline std::vector<SExpr> read_sexprs(std::string_view text) {
    std::vector<SExpr> top;
    std::vector<SExpr> stack;
    int line = 1;
    std::size_t i = 0;
    while (i < text.size()) {
        char ch = text[i];
        if (ch == '\n') {
            ++line;
            ++i;
        } else if (ch == ';') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (std::isspace(static_cast<unsigned char>(ch))) {
            ++i;
        } else if (ch == '(') {
            stack.push_back(SExpr{{}, {}, line});
            ++i;
        } else if (ch == ')') {
            if (stack.empty()) parse_error(line, "unbalanced ')'");
            SExpr done = std::move(stack.back());
            stack.pop_back();
            (stack.empty() ? top : stack.back().items).push_back(std::move(done));
            ++i;
        } else {
            std::size_t j = i;
            while (j < text.size() && text[j] != '(' && text[j] != ')' && text[j] != ';' &&
                   !std::isspace(static_cast<unsigned char>(text[j])))
                ++j;
            SExpr a{std::string(text.substr(i, j - i)), {}, line};
            if (stack.empty()) parse_error(line, "stray token '" + a.atom + "' outside an s-expression");
            stack.back().items.push_back(std::move(a));
            i = j;
        }
    }
    if (!stack.empty()) parse_error(stack.back().line, "unbalanced '('");
    return top;
}

inline std::optional<double> number(const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    if (b != e && *b == '+') ++b;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) return std::nullopt;
    return v;
}

/// "X_12" -> ('X', 12).
inline std::optional<std::pair<char, std::size_t>> variable(const std::string& s) {
    if (s.size() < 3 || (s[0] != 'X' && s[0] != 'Y') || s[1] != '_') return std::nullopt;
    std::size_t idx = 0;
    auto [p, ec] = std::from_chars(s.data() + 2, s.data() + s.size(), idx);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return std::make_pair(s[0], idx);
}

/// Linear term over Y: coefficient map plus constant.
struct LinearTerm {
    std::map<std::size_t, double> coeff;
    double constant = 0.0;
    bool has_input = false;

    LinearTerm& add(const LinearTerm& o, double scale) {
        for (auto [k, v] : o.coeff) coeff[k] += scale * v;
        constant += scale * o.constant;
        has_input = has_input || o.has_input;
        return *this;
    }
};

inline LinearTerm linear_term(const SExpr& e) {
    LinearTerm t;
    if (e.is_atom()) {
        if (auto v = number(e.atom)) {
            t.constant = *v;
        } else if (auto var = variable(e.atom)) {
            if (var->first == 'X') t.has_input = true;
            else t.coeff[var->second] = 1.0;
        } else {
            parse_error(e.line, "unknown symbol '" + e.atom + "'");
        }
        return t;
    }
    if (e.items.empty() || !e.items[0].is_atom()) parse_error(e.line, "unsupported term " + e.show());
    const std::string& op = e.items[0].atom;
    if (op == "+") {
        for (std::size_t i = 1; i < e.items.size(); ++i) t.add(linear_term(e.items[i]), 1.0);
    } else if (op == "-" && e.items.size() == 2) {
        t.add(linear_term(e.items[1]), -1.0);
    } else if (op == "-" && e.items.size() >= 3) {
        t.add(linear_term(e.items[1]), 1.0);
        for (std::size_t i = 2; i < e.items.size(); ++i) t.add(linear_term(e.items[i]), -1.0);
    } else if (op == "*" && e.items.size() == 3) {
        LinearTerm a = linear_term(e.items[1]), b = linear_term(e.items[2]);
        if (a.coeff.empty() && !a.has_input) t.add(b, a.constant);
        else if (b.coeff.empty() && !b.has_input) t.add(a, b.constant);
        else parse_error(e.line, "non-linear product " + e.show());
    } else {
        parse_error(e.line, "unsupported term " + e.show());
    }
    return t;
}

struct Comparison {
    std::string op;  // <=, >=, <, >
    const SExpr* lhs;
    const SExpr* rhs;
    int line;
};

inline std::optional<Comparison> comparison(const SExpr& e) {
    if (e.is_atom() || e.items.size() != 3 || !e.items[0].is_atom()) return std::nullopt;
    const std::string& op = e.items[0].atom;
    if (op != "<=" && op != ">=" && op != "<" && op != ">") return std::nullopt;
    return Comparison{op, &e.items[1], &e.items[2], e.line};
}

inline bool mentions(const SExpr& e, char kind) {
    if (e.is_atom()) {
        auto v = variable(e.atom);
        return v && v->first == kind;
    }
    for (const auto& i : e.items)
        if (mentions(i, kind)) return true;
    return false;
}

}  // namespace detail

/// Parses the supported VNNLIB subset. Errors carry the offending line.
inline PropertySpec parse_vnnlib(std::string_view text) {
    using namespace detail;
    std::vector<SExpr> top = read_sexprs(text);
    std::map<std::size_t, int> inputs, outputs;  // index -> declaration line
    std::map<std::size_t, double> lower, upper;
    const SExpr* output_assert = nullptr;

    auto input_bound = [&](const Comparison& c) {
        auto lv = c.lhs->is_atom() ? variable(c.lhs->atom) : std::nullopt;
        auto rv = c.rhs->is_atom() ? variable(c.rhs->atom) : std::nullopt;
        auto ln = c.lhs->is_atom() ? number(c.lhs->atom) : std::nullopt;
        auto rn = c.rhs->is_atom() ? number(c.rhs->atom) : std::nullopt;
        // Normalize to X_i op value.
        std::size_t idx;
        double val;
        bool is_upper;
        bool le = c.op == "<=" || c.op == "<";
        if (lv && lv->first == 'X' && rn) {
            idx = lv->second, val = *rn, is_upper = le;
        } else if (rv && rv->first == 'X' && ln) {
            idx = rv->second, val = *ln, is_upper = !le;
        } else {
            parse_error(c.line, "input constraints must compare one X_i with a constant");
        }
        if (!inputs.count(idx)) parse_error(c.line, "X_" + std::to_string(idx) + " is not declared");
        if (is_upper) {
            auto it = upper.find(idx);
            upper[idx] = it == upper.end() ? val : std::min(it->second, val);
        } else {
            auto it = lower.find(idx);
            lower[idx] = it == lower.end() ? val : std::max(it->second, val);
        }
    };

    for (const SExpr& e : top) {
        if (e.is_atom() || e.items.empty() || !e.items[0].is_atom()) parse_error(e.line, "expected a command");
        const std::string& cmd = e.items[0].atom;
        if (cmd == "declare-const") {
            if (e.items.size() != 3 || !e.items[1].is_atom() || !e.items[2].is_atom())
                parse_error(e.line, "malformed declare-const");
            auto var = variable(e.items[1].atom);
            if (!var) parse_error(e.line, "variables must be named X_i or Y_i, got '" + e.items[1].atom + "'");
            if (e.items[2].atom != "Real") parse_error(e.line, "only Real variables are supported");
            (var->first == 'X' ? inputs : outputs)[var->second] = e.line;
        } else if (cmd == "assert") {
            if (e.items.size() != 2) parse_error(e.line, "assert takes one argument");
            const SExpr& body = e.items[1];
            bool has_y = mentions(body, 'Y'), has_x = mentions(body, 'X');
            if (has_x && has_y) parse_error(e.line, "mixed input/output assertion is not supported: " + body.show());
            if (has_x) {
                if (auto c = comparison(body)) {
                    input_bound(*c);
                } else if (!body.is_atom() && !body.items.empty() && body.items[0].is_atom() &&
                           body.items[0].atom == "and") {
                    for (std::size_t i = 1; i < body.items.size(); ++i) {
                        auto ci = comparison(body.items[i]);
                        if (!ci) parse_error(body.items[i].line, "unsupported input constraint " + body.items[i].show());
                        input_bound(*ci);
                    }
                } else {
                    parse_error(e.line, "unsupported input assertion " + body.show());
                }
            } else if (has_y) {
                if (output_assert)
                    parse_error(e.line, "several output assertions form a conjunctive counterexample region; "
                                        "only one output assertion is supported");
                output_assert = &body;
            } else {
                parse_error(e.line, "assertion mentions no variable: " + body.show());
            }
        } else {
            parse_error(e.line, "unsupported command '" + cmd + "'");
        }
    }

    if (inputs.empty()) fail(ErrorKind::parse, "vnnlib: no input variables declared");
    const std::size_t n_in = inputs.rbegin()->first + 1;
    if (inputs.size() != n_in) fail(ErrorKind::parse, "vnnlib: input variables X_0..X_" + std::to_string(n_in - 1) + " are not all declared");
    const std::size_t n_out = outputs.empty() ? 0 : outputs.rbegin()->first + 1;
    if (outputs.size() != n_out) fail(ErrorKind::parse, "vnnlib: output variables Y_0..Y_" + std::to_string(n_out - 1) + " are not all declared");

    Vector lo(static_cast<Eigen::Index>(n_in)), hi(static_cast<Eigen::Index>(n_in));
    for (std::size_t i = 0; i < n_in; ++i) {
        bool has_lo = lower.count(i), has_hi = upper.count(i);
        if (!has_lo || !has_hi)
            parse_error(inputs[i], "X_" + std::to_string(i) + " has no " + (has_lo ? "upper" : "lower") + " bound");
        if (lower[i] > upper[i]) parse_error(inputs[i], "X_" + std::to_string(i) + " has an empty range");
        lo[static_cast<Eigen::Index>(i)] = lower[i];
        hi[static_cast<Eigen::Index>(i)] = upper[i];
    }

    PropertySpec spec{Box(lo, hi), n_out, {}, std::nullopt};
    if (!output_assert) return spec;

    // Each disjunct of the counterexample region is negated into one obligation.
    auto obligation = [&](const SExpr& e) {
        auto c = comparison(e);
        if (!c) parse_error(e.line, "unsupported output comparison " + e.show());
        LinearTerm t = linear_term(*c->lhs);
        t.add(linear_term(*c->rhs), -1.0);  // counterexample: t op 0
        for (auto [k, v] : t.coeff)
            if (k >= n_out) parse_error(c->line, "Y_" + std::to_string(k) + " is not declared");
        bool le = c->op == "<=" || c->op == "<";
        bool strict_cex = c->op == "<" || c->op == ">";
        double sign = le ? 1.0 : -1.0;  // t <= 0 is refuted by t > 0; t >= 0 by -t > 0
        LinearConstraint lc{Vector::Zero(static_cast<Eigen::Index>(n_out)), sign * t.constant + 0.0, !strict_cex};
        for (auto [k, v] : t.coeff) lc.coeffs[static_cast<Eigen::Index>(k)] = sign * v;
        spec.constraints.push_back(std::move(lc));
    };
    const SExpr& body = *output_assert;
    auto head = [](const SExpr& e) { return (!e.is_atom() && !e.items.empty() && e.items[0].is_atom()) ? e.items[0].atom : std::string(); };
    if (head(body) == "or") {
        for (std::size_t i = 1; i < body.items.size(); ++i) {
            const SExpr& d = body.items[i];
            if (head(d) == "and") {
                if (d.items.size() != 2)
                    parse_error(d.line, "conjunctions of several output comparisons are not supported: " + d.show());
                obligation(d.items[1]);
            } else {
                obligation(d);
            }
        }
    } else if (head(body) == "and") {
        if (body.items.size() != 2)
            parse_error(body.line, "conjunctions of several output comparisons are not supported: " + body.show());
        obligation(body.items[1]);
    } else {
        obligation(body);
    }
    return spec;
}

inline PropertySpec read_vnnlib(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::parse, "cannot open property file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_vnnlib(ss.str());
}

namespace detail {
inline std::string exact(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace detail

/// Emits the property in the same subset parse_vnnlib reads, with round-trip exact numbers.
inline std::string to_vnnlib(const PropertySpec& spec) {
    using detail::exact;
    std::ostringstream os;
    for (std::size_t i = 0; i < spec.box.size(); ++i) os << "(declare-const X_" << i << " Real)\n";
    for (std::size_t j = 0; j < spec.output_width; ++j) os << "(declare-const Y_" << j << " Real)\n";
    os << '\n';
    for (std::size_t i = 0; i < spec.box.size(); ++i) {
        auto k = static_cast<Eigen::Index>(i);
        os << "(assert (>= X_" << i << ' ' << exact(spec.box.lower[k]) << "))\n";
        os << "(assert (<= X_" << i << ' ' << exact(spec.box.upper[k]) << "))\n";
    }
    if (spec.constraints.empty()) return os.str();
    // Counterexample region: some obligation fails, i.e. c.y <= -d (or < -d).
    os << "\n(assert (or";
    for (const auto& c : spec.constraints) {
        std::string lhs = "(+";
        for (Eigen::Index j = 0; j < c.coeffs.size(); ++j)
            if (c.coeffs[j] != 0.0) lhs += " (* " + exact(c.coeffs[j]) + " Y_" + std::to_string(j) + ")";
        lhs += lhs == "(+" ? " 0)" : ")";
        os << "\n    (and (" << (c.strict ? "<=" : "<") << ' ' << lhs << ' ' << exact(-c.offset) << "))";
    }
    os << "\n))\n";
    return os.str();
}

}  // namespace redkit
