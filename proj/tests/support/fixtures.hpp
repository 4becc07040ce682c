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

// Shared test networks.

#pragma once

#include <random>

#include "redkit/bound_engine.hpp"
#include "redkit/lowering.hpp"
#include "redkit/net_ir.hpp"
#include "support/onnx_model.hpp"

namespace redkit::testing {

/// Two inputs, five hidden ReLUs, two outputs; the worked example network.
inline AffineChain example_chain() {
    Matrix w1(5, 2);
    w1 << -1, -1,  //
        1, 1,      //
        1, -1,     //
        1, 1,      //
        -1, 1;
    Vector b1(5);
    b1 << -2, 3, 2, 2, 0;
    Matrix w2(2, 5);
    w2 << 1, -1, 1, 1, -1,  //
        1, 1, 1, 1, 1;
    return AffineChain{{{w1, Vector(b1)}, {w2, Vector::Zero(2)}}};
}

inline Box example_box() { return Box::uniform(2, -1.0, 1.0); }

inline std::string example_onnx() {
    AffineChain c = example_chain();
    OnnxGraph g;
    g.input("x", {1, 2});
    auto flat = [](const Matrix& m) {
        std::vector<double> v;
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) v.push_back(m(i, j));
        return v;
    };
    g.initializer("w1", {5, 2}, flat(c.affine[0].weight));
    g.initializer("b1", {5}, {-2, 3, 2, 2, 0});
    g.initializer("w2", {5, 2}, flat(c.affine[1].weight.transpose()));
    g.initializer("b2", {2}, {0, 0});
    auto* n1 = g.node("Gemm", {"x", "w1", "b1"}, {"h"});
    OnnxGraph::set_int(n1, "transB", 1);
    g.node("Relu", {"h"}, {"r"});
    g.node("Gemm", {"r", "w2", "b2"}, {"y"});
    g.output("y");
    return g.bytes();
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
    return m;
}

inline Vector random_vector(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
    return random_matrix(n, 1, rng, scale).col(0);
}

inline AffineChain random_chain(const std::vector<std::size_t>& widths, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    AffineChain c;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        auto r = static_cast<Eigen::Index>(widths[k + 1]), cols = static_cast<Eigen::Index>(widths[k]);
        c.affine.push_back({random_matrix(r, cols, rng, 1.0 / std::sqrt(static_cast<double>(cols))), random_vector(r, rng, 0.3)});
    }
    return c;
}

inline Tensor random_tensor(const Shape& s, std::mt19937_64& rng, double scale = 0.3) {
    Tensor t{s, std::vector<double>(static_cast<std::size_t>(numel(s)))};
    std::normal_distribution<double> n(0.0, scale);
    for (double& x : t.data) x = n(rng);
    return t;
}

/// Conv with 3x3 kernel, padding 1, as a Linear layer on a C x H x W map.
inline LayerId add_conv(NetworkBuilder& b, LayerId pred, std::int64_t c_in, std::int64_t c_out, std::int64_t hw,
                        std::mt19937_64& rng) {
    Tensor k = random_tensor({c_out, c_in, 3, 3}, rng);
    Conv2dParams p;
    p.pad_top = p.pad_left = p.pad_bottom = p.pad_right = 1;
    ConvLowering low = conv_to_matrix(k, random_vector(c_out, rng, 0.1), p, {c_in, hw, hw});
    return b.add_linear(pred, low.map.weight, low.map.bias);
}

/// Residual block: conv0 -> ReLU n1 -> conv1 -> ReLU -> conv2, plus conv3
/// from n1, added.
struct ResidualBlock {
    Network net;
    LayerId n1;
};

inline ResidualBlock residual_block(std::uint64_t seed, std::int64_t channels = 3, std::int64_t hw = 4) {
    std::mt19937_64 rng(seed);
    NetworkBuilder b;
    LayerId in = b.add_input(static_cast<std::size_t>(channels * hw * hw));
    LayerId c0 = add_conv(b, in, channels, channels, hw, rng);
    LayerId n1 = b.add_relu(c0);
    LayerId c1 = add_conv(b, n1, channels, channels, hw, rng);
    LayerId n3 = b.add_relu(c1);
    LayerId c2 = add_conv(b, n3, channels, channels, hw, rng);
    LayerId c3 = add_conv(b, n1, channels, channels, hw, rng);
    LayerId add = b.add_sum({c2, c3});
    b.set_output(add);
    return {b.build(), n1};
}

}  // namespace redkit::testing
