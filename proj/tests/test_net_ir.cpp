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

#include "redkit/net_ir.hpp"
#include "support/fixtures.hpp"

using namespace redkit;
using redkit::testing::example_chain;

TEST(NetIr, ChainRoundTripsThroughNetwork) {
    AffineChain c = example_chain();
    Network net = to_network(c);
    EXPECT_TRUE(validate(net).ok());
    EXPECT_TRUE(is_sequential(net));
    EXPECT_EQ(net.relu_neurons(), 5u);
    EXPECT_EQ(net.count(LayerKind::linear), 2u);
    AffineChain back = to_chain(net);
    ASSERT_EQ(back.affine.size(), 2u);
    EXPECT_EQ(back.affine[0].weight, c.affine[0].weight);
    EXPECT_EQ(back.affine[1].bias, c.affine[1].bias);
}

TEST(NetIr, ForwardMatchesHandComputation) {
    AffineChain c = example_chain();
    Vector a(2);
    a << 0.5, -0.25;
    // x3..x7 = -2.25, 3.25, 2.75, 2.25, -0.75
    Vector y = forward(c, a);
    EXPECT_DOUBLE_EQ(y[0], 0 - 3.25 + 2.75 + 2.25 - 0);
    EXPECT_DOUBLE_EQ(y[1], 0 + 3.25 + 2.75 + 2.25 + 0);
    EXPECT_EQ(forward(to_network(c), a), y);
}

TEST(NetIr, SumAddsPredecessors) {
    NetworkBuilder b;
    LayerId in = b.add_input(2);
    LayerId l1 = b.add_linear(in, Matrix::Identity(2, 2), Vector::Ones(2));
    LayerId l2 = b.add_linear(in, 2 * Matrix::Identity(2, 2), Vector::Zero(2));
    LayerId s = b.add_sum({l1, l2});
    b.set_output(s);
    Network net = b.build();
    EXPECT_TRUE(validate(net).ok());
    EXPECT_FALSE(is_sequential(net));
    Vector a(2);
    a << 1, -1;
    Vector y = forward(net, a);
    EXPECT_DOUBLE_EQ(y[0], 4);
    EXPECT_DOUBLE_EQ(y[1], -2);
    EXPECT_THROW(to_chain(net), Error);
}

TEST(NetIr, ValidationReportsProblems) {
    NetworkBuilder b;
    LayerId in = b.add_input(3);
    LayerId l = b.add_linear(in, Matrix::Zero(2, 3), Vector::Zero(2));
    b.layer(l).weight = Matrix::Zero(2, 4);
    Network net = b.build();
    ValidationReport r = validate(net);
    EXPECT_FALSE(r.ok());
    EXPECT_TRUE(r.mentions(l));
}

TEST(NetIr, SumWidthMismatchIsRejected) {
    NetworkBuilder b;
    LayerId in = b.add_input(2);
    LayerId l1 = b.add_linear(in, Matrix::Zero(3, 2), Vector::Zero(3));
    LayerId l2 = b.add_linear(in, Matrix::Zero(2, 2), Vector::Zero(2));
    LayerId s = b.add_sum({l1, l2});
    b.set_output(s);
    ValidationReport r = validate(b.build());
    EXPECT_FALSE(r.ok());
    EXPECT_TRUE(r.mentions(s));
}

TEST(NetIr, CycleIsStructuralError) {
    NetworkBuilder b;
    LayerId in = b.add_input(2);
    LayerId l1 = b.add_linear(in, Matrix::Identity(2, 2), Vector::Zero(2));
    LayerId r = b.add_relu(l1);
    LayerId l2 = b.add_linear(r, Matrix::Identity(2, 2), Vector::Zero(2));
    b.set_predecessors(l1, {l2});
    Network net = b.build();
    try {
        topo_order(net);
        FAIL() << "cycle not detected";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::structural);
    }
    EXPECT_FALSE(validate(net).ok());
}

TEST(NetIr, RedirectMovesOutputMarker) {
    NetworkBuilder b;
    LayerId in = b.add_input(1);
    LayerId l1 = b.add_linear(in, Matrix::Ones(1, 1), Vector::Zero(1));
    LayerId r = b.add_relu(l1);
    b.set_output(r);
    LayerId l2 = b.add_linear(l1, 3 * Matrix::Ones(1, 1), Vector::Zero(1));
    b.redirect_successors(l1, l2);
    EXPECT_EQ(b.predecessors(r), std::vector<LayerId>{l2});
    EXPECT_EQ(b.successors(l1), std::vector<LayerId>{l2});
}

TEST(NetIr, ComposeAppliesInnerFirst) {
    AffineMap inner{Matrix::Identity(2, 2) * 2, Vector::Ones(2)};
    Matrix w(1, 2);
    w << 1, -1;
    AffineMap outer{w, Vector::Constant(1, 5)};
    AffineMap c = compose(outer, inner);
    Vector x(2);
    x << 3, 7;
    EXPECT_DOUBLE_EQ(c(x)[0], outer(inner(x))[0]);
}

TEST(NetIr, TopoOrderRespectsArcs) {
    Network net = redkit::testing::residual_block(1).net;
    auto order = topo_order(net);
    ASSERT_EQ(order.size(), net.size());
    std::map<LayerId, std::size_t> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    for (auto [from, to] : net.arcs()) EXPECT_LT(pos[from], pos[to]);
}
