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

#include <gtest/gtest.h>

#include "redkit/spec_io.hpp"
#include "redkit/verify.hpp"
#include "support/fixtures.hpp"

using namespace redkit;
using namespace redkit::testing;

namespace {

const char* kBox = R"(
(declare-const X_0 Real)
(declare-const X_1 Real)
(declare-const Y_0 Real)
(declare-const Y_1 Real)
(assert (<= X_0 1))
(assert (>= X_0 -1))
(assert (<= X_1 1.0))
(assert (>= X_1 -1.0))
)";

ErrorKind kind_of(const std::string& text) {
    try {
        parse_vnnlib(text);
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::internal;
}

std::string message_of(const std::string& text) {
    try {
        parse_vnnlib(text);
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(SpecIo, InputBox) {
    PropertySpec s = parse_vnnlib(kBox);
    EXPECT_EQ(s.box.lower, Vector::Constant(2, -1));
    EXPECT_EQ(s.box.upper, Vector::Constant(2, 1));
    EXPECT_EQ(s.output_width, 2u);
    EXPECT_TRUE(s.constraints.empty());
}

TEST(SpecIo, NegatedRobustnessBecomesMargin) {
    PropertySpec s = parse_vnnlib(std::string(kBox) + "(assert (or (and (>= Y_1 Y_0))))");
    ASSERT_EQ(s.constraints.size(), 1u);
    Vector want(2);
    want << 1, -1;
    EXPECT_EQ(s.constraints[0].coeffs, want);
    EXPECT_EQ(s.constraints[0].offset, 0.0);
    EXPECT_TRUE(s.constraints[0].strict);
}

TEST(SpecIo, NegationMatchesEnumerationOnExample) {
    // Counterexample region y1 >= y0; the property holds at a point iff the point
    // is outside that region.
    PropertySpec s = parse_vnnlib(std::string(kBox) + "(assert (or (and (>= Y_1 Y_0))))");
    AffineChain c = example_chain();
    for (const Vector& a : sample_box(s.box, 2000, 3)) {
        Vector y = forward(c, a);
        EXPECT_EQ(s.holds(y), !(y[1] >= y[0]));
    }
}

TEST(SpecIo, OutputForms) {
    auto one = [](const std::string& atom) {
        PropertySpec s = parse_vnnlib(std::string(kBox) + "(assert " + atom + ")");
        return s.constraints.at(0);
    };
    LinearConstraint c = one("(<= Y_0 3)");  // cex y0 <= 3: prove y0 - 3 > 0
    EXPECT_EQ(c.coeffs[0], 1.0);
    EXPECT_EQ(c.offset, -3.0);
    EXPECT_TRUE(c.strict);
    c = one("(>= Y_1 -2)");  // prove -y1 - 2 > 0
    EXPECT_EQ(c.coeffs[1], -1.0);
    EXPECT_EQ(c.offset, -2.0);
    c = one("(< Y_0 Y_1)");  // prove y0 - y1 >= 0
    EXPECT_EQ(c.coeffs[0], 1.0);
    EXPECT_EQ(c.coeffs[1], -1.0);
    EXPECT_FALSE(c.strict);
    c = one("(<= (+ (* 2 Y_0) (- Y_1 1)) 0)");
    EXPECT_EQ(c.coeffs[0], 2.0);
    EXPECT_EQ(c.coeffs[1], 1.0);
    EXPECT_EQ(c.offset, -1.0);
}

TEST(SpecIo, SeveralDisjuncts) {
    PropertySpec s = parse_vnnlib(std::string(kBox) + "(assert (or (and (>= Y_1 Y_0)) (and (<= Y_0 -10))))");
    EXPECT_EQ(s.constraints.size(), 2u);
}

TEST(SpecIo, ErrorsNameTheProblem) {
    std::string missing = R"(
(declare-const X_0 Real)
(declare-const X_1 Real)
(declare-const X_2 Real)
(declare-const X_3 Real)
(assert (<= X_0 1)) (assert (>= X_0 0))
(assert (<= X_1 1)) (assert (>= X_1 0))
(assert (<= X_2 1)) (assert (>= X_2 0))
(assert (>= X_3 0))
)";
    EXPECT_EQ(kind_of(missing), ErrorKind::parse);
    EXPECT_NE(message_of(missing).find("X_3"), std::string::npos);
    EXPECT_NE(message_of(missing).find("upper"), std::string::npos);

    std::string multi = std::string(kBox) + "(assert (or (and (>= Y_1 Y_0) (>= Y_0 0))))";
    EXPECT_EQ(kind_of(multi), ErrorKind::parse);
    std::string two_asserts = std::string(kBox) + "(assert (>= Y_1 Y_0))\n(assert (>= Y_0 0))";
    EXPECT_NE(message_of(two_asserts).find("line"), std::string::npos);
    EXPECT_EQ(kind_of("(declare-const X_0 Real)\n(assert (<= X_0 1)\n"), ErrorKind::parse);
    EXPECT_EQ(kind_of(std::string(kBox) + "(check-sat)"), ErrorKind::parse);
    EXPECT_EQ(kind_of(std::string(kBox) + "(assert (>= Y_7 0))"), ErrorKind::parse);
}

TEST(SpecIo, RoundTrip) {
    PropertySpec s = parse_vnnlib(std::string(kBox) + "(assert (or (and (>= Y_1 Y_0)) (and (< (+ Y_0 0.1) 0.3))))");
    PropertySpec t = parse_vnnlib(to_vnnlib(s));
    EXPECT_EQ(t.box.lower, s.box.lower);
    EXPECT_EQ(t.box.upper, s.box.upper);
    EXPECT_EQ(t.output_width, s.output_width);
    EXPECT_EQ(t.constraints, s.constraints);

    PropertySpec r = robustness_spec(epsilon_ball(Vector::Constant(3, 0.1), 1.0 / 3.0), 4, 2);
    PropertySpec r2 = parse_vnnlib(to_vnnlib(r));
    EXPECT_EQ(r2.box.lower, r.box.lower);
    EXPECT_EQ(r2.constraints, r.constraints);
}

TEST(SpecIo, EpsilonBall) {
    Box b = epsilon_ball(Vector::Zero(2), 1.0);
    EXPECT_EQ(b.lower, Vector::Constant(2, -1));
    EXPECT_EQ(b.upper, Vector::Constant(2, 1));
    Box clipped = epsilon_ball(Vector::Constant(1, 0.5), 0.7, std::make_pair(0.0, 1.0));
    EXPECT_EQ(clipped.lower[0], 0.0);
    EXPECT_EQ(clipped.upper[0], 1.0);
    Box wide = epsilon_ball(Vector::Constant(784, 0.5), 0.02);
    EXPECT_TRUE(((wide.upper - wide.lower).array() - 0.04).abs().maxCoeff() < 1e-15);
    EXPECT_THROW(epsilon_ball(Vector::Zero(1), -0.1), Error);
}

TEST(SpecIo, RobustnessMargins) {
    auto m = robustness_margins(3, 1);
    ASSERT_EQ(m.size(), 2u);
    Vector y(3);
    y << 0.1, 0.5, 0.2;
    for (const auto& c : m) EXPECT_TRUE(c.holds(y));
    y[2] = 0.5;
    EXPECT_FALSE(m[1].holds(y));
    EXPECT_THROW(robustness_margins(3, 3), Error);
}

TEST(SpecIo, CenterFile) {
    EXPECT_EQ(parse_center("0.5\n0.25\n"), (Vector(2) << 0.5, 0.25).finished());
    EXPECT_EQ(parse_center("a,b,c\n1,2,3\n").size(), 3);
    EXPECT_THROW(parse_center("1,x,3"), Error);
    EXPECT_THROW(parse_center(""), Error);
}
