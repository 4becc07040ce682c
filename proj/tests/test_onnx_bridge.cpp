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

#include "redkit/equivalence.hpp"
#include "redkit/onnx_bridge.hpp"
#include "redkit/reducer.hpp"
#include "redkit/simplifier.hpp"
#include "support/fixtures.hpp"

using namespace redkit;
using namespace redkit::testing;

namespace {

std::vector<double> randn(std::size_t n, std::mt19937_64& rng, double scale = 0.3) {
    std::normal_distribution<double> d(0.0, scale);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

/// Max |import(model)(x) - reference(model)(x)| over random inputs.
double import_error(const std::string& bytes, std::size_t samples = 20, std::uint64_t seed = 0) {
    Network net = import_onnx(bytes).net;
    Box box = Box::uniform(net.input_width(), -1, 1);
    double worst = 0;
    for (const Vector& x : sample_box(box, samples, seed)) {
        std::vector<double> in(x.data(), x.data() + x.size());
        std::vector<double> want = run_reference(bytes, in);
        Vector got = forward(net, x);
        EXPECT_EQ(static_cast<std::size_t>(got.size()), want.size());
        for (std::size_t i = 0; i < want.size() && i < static_cast<std::size_t>(got.size()); ++i)
            worst = std::max(worst, std::abs(got[static_cast<Eigen::Index>(i)] - want[i]));
    }
    return worst;
}

ErrorKind import_kind(const std::string& bytes) {
    try {
        import_onnx(bytes);
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::internal;
}

void conv(OnnxGraph& g, const std::string& x, const std::string& y, std::int64_t ci, std::int64_t co, std::mt19937_64& rng,
          std::int64_t k = 3, std::int64_t stride = 1, std::int64_t pad = 1) {
    g.initializer(y + ".w", {co, ci, k, k}, randn(static_cast<std::size_t>(co * ci * k * k), rng));
    g.initializer(y + ".b", {co}, randn(static_cast<std::size_t>(co), rng, 0.1));
    auto* n = g.node("Conv", {x, y + ".w", y + ".b"}, {y});
    OnnxGraph::set_ints(n, "kernel_shape", {k, k});
    OnnxGraph::set_ints(n, "strides", {stride, stride});
    OnnxGraph::set_ints(n, "pads", {pad, pad, pad, pad});
}

}  // namespace

TEST(OnnxBridge, ImportsExampleNetwork) {
    ImportResult r = import_onnx(example_onnx());
    EXPECT_TRUE(r.report.ok());
    EXPECT_EQ(r.report.input_shape, (Shape{1, 2}));
    EXPECT_EQ(r.report.output_shape, (Shape{1, 2}));
    ASSERT_TRUE(is_sequential(r.net));
    AffineChain c = to_chain(r.net);
    EXPECT_EQ(c.affine[0].weight, example_chain().affine[0].weight);
    EXPECT_EQ(c.affine[1].weight, example_chain().affine[1].weight);
    EXPECT_EQ(c.affine[0].bias, example_chain().affine[0].bias);
    EXPECT_EQ(import_error(example_onnx()), 0.0);
}

TEST(OnnxBridge, ExportRoundTrip) {
    AffineChain c = random_chain({6, 20, 20, 3}, 4);
    std::string bytes = export_onnx(c);
    AffineChain back = to_chain(import_onnx(bytes).net);
    ASSERT_EQ(back.affine.size(), c.affine.size());
    for (std::size_t k = 0; k < c.affine.size(); ++k) {
        EXPECT_EQ(back.affine[k].weight, c.affine[k].weight);
        EXPECT_EQ(back.affine[k].bias, c.affine[k].bias);
    }
    EXPECT_LE(import_error(bytes), 1e-12);

    ExportOptions f32;
    f32.dtype = OnnxFloat::float32;
    AffineChain narrow = to_chain(import_onnx(export_onnx(c, f32)).net);
    EXPECT_LE(sample_equivalence(c, narrow, Box::uniform(6, -1, 1), 100, 0).max_abs_diff, 1e-5);
}

TEST(OnnxBridge, ExportLayout) {
    std::string bytes = export_onnx(example_chain());
    onnx::ModelProto m;
    ASSERT_TRUE(m.ParseFromString(bytes));
    EXPECT_EQ(m.opset_import(0).version(), 13);
    const auto& g = m.graph();
    ASSERT_EQ(g.node_size(), 3);
    EXPECT_EQ(g.node(0).name(), "red_linear_0");
    EXPECT_EQ(g.node(1).name(), "red_relu_0");
    EXPECT_EQ(g.node(2).name(), "red_linear_1");
    EXPECT_EQ(g.node(0).op_type(), "Gemm");
    EXPECT_EQ(g.input(0).name(), "input");
    EXPECT_EQ(g.output(0).name(), "output");
    EXPECT_EQ(g.initializer(0).data_type(), onnx::TensorProto::DOUBLE);

    // A fully reduced network exports as a single Gemm.
    AffineChain affine{{AffineMap::identity(3)}};
    onnx::ModelProto one;
    ASSERT_TRUE(one.ParseFromString(export_onnx(affine)));
    EXPECT_EQ(one.graph().node_size(), 1);
}

TEST(OnnxBridge, ConvPoolClassifier) {
    std::mt19937_64 rng(2);
    OnnxGraph g;
    g.input("x", {1, 2, 8, 8});
    conv(g, "x", "c1", 2, 4, rng);
    g.node("Relu", {"c1"}, {"r1"});
    auto* mp = g.node("MaxPool", {"r1"}, {"p1"});
    OnnxGraph::set_ints(mp, "kernel_shape", {2, 2});
    OnnxGraph::set_ints(mp, "strides", {2, 2});
    conv(g, "p1", "c2", 4, 3, rng, 3, 2, 1);
    g.node("Relu", {"c2"}, {"r2"});
    auto* fl = g.node("Flatten", {"r2"}, {"f"});
    OnnxGraph::set_int(fl, "axis", 1);
    g.initializer("fc.w", {5, 12}, randn(60, rng));
    g.initializer("fc.b", {5}, randn(5, rng));
    auto* fc = g.node("Gemm", {"f", "fc.w", "fc.b"}, {"y"});
    OnnxGraph::set_int(fc, "transB", 1);
    g.output("y");
    std::string bytes = g.bytes();
    ImportResult r = import_onnx(bytes);
    EXPECT_EQ(r.report.maxpool_gadgets, 4u * 4u * 4u * 3u);
    EXPECT_EQ(r.report.output_shape, (Shape{1, 5}));
    EXPECT_LE(import_error(bytes), 1e-12);

    Network seq = simplify(r.net);
    ASSERT_TRUE(is_sequential(seq));
    EXPECT_LE(sample_equivalence(r.net, seq, Box::uniform(128, -1, 1), 200, 1).max_abs_diff, 1e-9);
}

TEST(OnnxBridge, ResidualModelSimplifies) {
    std::mt19937_64 rng(3);
    OnnxGraph g;
    g.input("x", {1, 3, 4, 4});
    conv(g, "x", "c0", 3, 3, rng);
    g.node("Relu", {"c0"}, {"n1"});
    conv(g, "n1", "c1", 3, 3, rng);
    g.node("Relu", {"c1"}, {"n3"});
    conv(g, "n3", "c2", 3, 3, rng);
    conv(g, "n1", "c3", 3, 3, rng);
    g.node("Add", {"c2", "c3"}, {"s"});
    g.node("Relu", {"s"}, {"r"});
    g.node("GlobalAveragePool", {"r"}, {"gap"});
    g.node("Flatten", {"gap"}, {"f"});
    g.initializer("fc.w", {3, 2}, randn(6, rng));
    g.node("MatMul", {"f", "fc.w"}, {"y"});
    g.output("y");
    std::string bytes = g.bytes();
    EXPECT_LE(import_error(bytes), 1e-12);
    Network net = import_onnx(bytes).net;
    Network seq = simplify(net);
    ASSERT_TRUE(is_sequential(seq));
    Box box = Box::uniform(48, -1, 1);
    EXPECT_LE(sample_equivalence(net, seq, box, 500, 2).max_abs_diff, 1e-9);
    AffineChain c = to_chain(seq);
    AffineChain back = to_chain(import_onnx(export_onnx(c)).net);
    EXPECT_LE(sample_equivalence(c, back, box, 100, 3).max_abs_diff, 1e-12);
}

TEST(OnnxBridge, ElementwiseAndShapeOps) {
    std::mt19937_64 rng(5);
    OnnxGraph g;
    g.input("x", {1, 2, 3, 3});
    g.initializer("mean", {1, 2, 1, 1}, {0.5, -0.25});
    g.node("Sub", {"x", "mean"}, {"a"});
    g.initializer("scale", {2, 1, 1}, {2.0, 4.0});
    g.node("Div", {"a", "scale"}, {"b"});
    g.initializer("bn.s", {2}, {1.5, 0.5});
    g.initializer("bn.b", {2}, {0.1, -0.2});
    g.initializer("bn.m", {2}, {0.05, 0.0});
    g.initializer("bn.v", {2}, {0.9, 1.1});
    g.node("BatchNormalization", {"b", "bn.s", "bn.b", "bn.m", "bn.v"}, {"c"});
    auto* ap = g.node("AveragePool", {"c"}, {"d"});
    OnnxGraph::set_ints(ap, "kernel_shape", {2, 2});
    OnnxGraph::set_ints(ap, "pads", {1, 1, 0, 0});
    OnnxGraph::set_int(ap, "count_include_pad", 1);
    auto* tr = g.node("Transpose", {"d"}, {"e"});
    OnnxGraph::set_ints(tr, "perm", {0, 2, 3, 1});
    g.int_initializer("shape", {2}, {1, -1});
    g.node("Reshape", {"e", "shape"}, {"f"});
    g.initializer("k", {1, 18}, randn(18, rng));
    g.node("Mul", {"f", "k"}, {"h"});
    g.node("Relu", {"h"}, {"hr"});
    auto* cat = g.node("Concat", {"hr", "f"}, {"cat"});
    OnnxGraph::set_int(cat, "axis", 1);
    g.initializer("w", {36, 4}, randn(144, rng));
    g.node("MatMul", {"cat", "w"}, {"y"});
    g.output("y");
    std::string bytes = g.bytes();
    EXPECT_LE(import_error(bytes), 1e-6);  // weights stored as float32
}

TEST(OnnxBridge, ConstantFoldingFeedsReshape) {
    OnnxGraph g;
    g.input("x", {1, 2, 2});
    auto* c = g.node("Constant", {}, {"shape"});
    auto* a = c->add_attribute();
    a->set_name("value");
    a->set_type(onnx::AttributeProto::TENSOR);
    a->mutable_t()->set_data_type(onnx::TensorProto::INT64);
    a->mutable_t()->add_dims(2);
    a->mutable_t()->add_int64_data(1);
    a->mutable_t()->add_int64_data(4);
    g.node("Reshape", {"x", "shape"}, {"f"});
    g.node("Relu", {"f"}, {"y"});
    g.output("y");
    EXPECT_EQ(import_error(g.bytes()), 0.0);
    EXPECT_EQ(import_onnx(g.bytes()).report.output_shape, (Shape{1, 4}));
}

TEST(OnnxBridge, SplitIsExperimental) {
    OnnxGraph g;
    g.input("x", {1, 4});
    OnnxGraph::set_int(g.node("Split", {"x"}, {"a", "b"}), "axis", 1);
    g.node("Relu", {"a"}, {"ra"});
    g.node("Sub", {"ra", "b"}, {"y"});
    g.output("y");
    ImportResult r = import_onnx(g.bytes());
    EXPECT_EQ(r.report.experimental_ops, std::vector<std::string>{"Split"});
    Vector x(4);
    x << 1, -2, 3, 4;
    Vector y = forward(r.net, x);
    EXPECT_DOUBLE_EQ(y[0], 1 - 3);
    EXPECT_DOUBLE_EQ(y[1], 0 - 4);
}

TEST(OnnxBridge, UnsupportedOperatorsAreListed) {
    OnnxGraph g;
    g.input("x", {1, 3});
    g.node("Sigmoid", {"x"}, {"s"}, "act");
    g.node("Tanh", {"s"}, {"y"}, "act2");
    g.output("y");
    try {
        import_onnx(g.bytes());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::unsupported);
        std::string msg = e.what();
        EXPECT_NE(msg.find("Sigmoid (act)"), std::string::npos);
        EXPECT_NE(msg.find("Tanh (act2)"), std::string::npos);
    }
    ImportReport r = scan_onnx(g.bytes());
    EXPECT_EQ(r.unsupported_ops.size(), 2u);
}

TEST(OnnxBridge, NonlinearUsesAreRejected) {
    OnnxGraph g;
    g.input("x", {1, 3});
    g.node("Mul", {"x", "x"}, {"y"});
    g.output("y");
    EXPECT_EQ(import_kind(g.bytes()), ErrorKind::unsupported);
}

TEST(OnnxBridge, GarbageIsParseError) {
    EXPECT_EQ(import_kind(std::string("\x08\x96\x01garbage", 10)), ErrorKind::parse);
    EXPECT_THROW(load_onnx("/nonexistent/model.onnx"), Error);
}

TEST(OnnxBridge, IdentityGraphGetsLinear) {
    OnnxGraph g;
    g.input("x", {1, 3});
    g.node("Identity", {"x"}, {"y"});
    g.output("y");
    Network net = import_onnx(g.bytes()).net;
    EXPECT_TRUE(is_sequential(net));
    EXPECT_EQ(net.count(LayerKind::linear), 1u);
}
