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

// Synthetic ReLU networks with planted stable neurons.
//
// Weights are Gaussian scaled by 1/sqrt(fan-in). Biases are chosen layer by
// layer from the interval bounds of the layer without bias: planted neurons
// are pushed to one side of zero with at least `margin` slack (a quarter of
// them active, the rest inactive), the others are centred so their interval
// straddles zero.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <vector>

#include "redkit/bound_engine.hpp"
#include "redkit/net_ir.hpp"

namespace redkit {

enum class PlantedClass { unplanted, activated, deactivated };

inline const char* to_string(PlantedClass c) {
    switch (c) {
        case PlantedClass::unplanted: return "unplanted";
        case PlantedClass::activated: return "activated";
        case PlantedClass::deactivated: return "deactivated";
    }
    return "?";
}

struct GeneratorConfig {
    std::size_t layers = 4;  // hidden ReLU layers
    std::size_t width = 64;
    std::size_t input_dim = 8;
    std::size_t output_dim = 10;
    double stable_fraction = 0.5;
    double margin = 0.5;
    double active_share = 0.25;  // of the planted neurons
    double box_radius = 1.0;     // box is [-r, r]^input_dim
    std::uint64_t seed = 0;
};

struct GeneratedNetwork {
    AffineChain chain;
    Box box;
    std::vector<std::vector<PlantedClass>> planted;  // per hidden layer, per neuron

    std::size_t planted_count() const {
        std::size_t n = 0;
        for (const auto& l : planted)
            n += static_cast<std::size_t>(std::count_if(l.begin(), l.end(), [](PlantedClass c) { return c != PlantedClass::unplanted; }));
        return n;
    }

    /// layer,neuron,class
    void write_sidecar(std::ostream& os) const {
        os << "layer,neuron,class\n";
        for (std::size_t k = 0; k < planted.size(); ++k)
            for (std::size_t i = 0; i < planted[k].size(); ++i) os << k << ',' << i << ',' << to_string(planted[k][i]) << '\n';
    }
};

inline GeneratedNetwork generate_network(const GeneratorConfig& cfg) {
    if (cfg.layers == 0 || cfg.width == 0 || cfg.input_dim == 0 || cfg.output_dim == 0)
        fail(ErrorKind::generation, "generator: layers, width, input and output dims must be positive");
    if (!(cfg.stable_fraction >= 0.0 && cfg.stable_fraction <= 1.0))
        fail(ErrorKind::generation, "generator: stable fraction must lie in [0, 1]");
    if (!(cfg.margin > 0.0)) fail(ErrorKind::generation, "generator: margin must be positive");
    if (!(cfg.box_radius > 0.0)) fail(ErrorKind::generation, "generator: box radius must be positive");

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> jitter(-0.25, 0.25);

    GeneratedNetwork g{{}, Box::uniform(cfg.input_dim, -cfg.box_radius, cfg.box_radius), {}};
    Vector lo = g.box.lower, hi = g.box.upper;
    auto planted_per_layer = static_cast<std::size_t>(std::lround(cfg.stable_fraction * static_cast<double>(cfg.width)));
    auto active_per_layer = static_cast<std::size_t>(std::lround(cfg.active_share * static_cast<double>(planted_per_layer)));

    std::size_t fan_in = cfg.input_dim;
    for (std::size_t k = 0; k <= cfg.layers; ++k) {
        const bool hidden = k < cfg.layers;
        const std::size_t rows = hidden ? cfg.width : cfg.output_dim;
        Matrix w(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(fan_in));
        const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = gauss(rng) * scale;

        Vector b = Vector::Zero(static_cast<Eigen::Index>(rows));
        if (!hidden) {
            for (Eigen::Index r = 0; r < b.size(); ++r) b[r] = 0.1 * gauss(rng);
            g.chain.affine.push_back({std::move(w), std::move(b)});
            break;
        }

        std::vector<std::size_t> order(rows);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<PlantedClass> cls(rows, PlantedClass::unplanted);
        for (std::size_t i = 0; i < planted_per_layer; ++i)
            cls[order[i]] = i < active_per_layer ? PlantedClass::activated : PlantedClass::deactivated;

        Bounds raw = detail::affine_range(w, Vector::Zero(w.rows()), lo, hi);
        for (Eigen::Index r = 0; r < b.size(); ++r) {
            double l0 = raw.lower[r], u0 = raw.upper[r], span = u0 - l0;
            switch (cls[static_cast<std::size_t>(r)]) {
                case PlantedClass::activated:
                case PlantedClass::deactivated:
                    if (cfg.margin > span)
                        fail(ErrorKind::generation, "generator: margin " + std::to_string(cfg.margin) +
                                                        " exceeds the pre-activation range " + std::to_string(span) +
                                                        " of layer " + std::to_string(k) + "; use a smaller margin");
                    b[r] = cls[static_cast<std::size_t>(r)] == PlantedClass::activated ? cfg.margin - l0 : -cfg.margin - u0;
                    break;
                case PlantedClass::unplanted:
                    b[r] = -0.5 * (l0 + u0) + jitter(rng) * span;
                    break;
            }
        }
        Bounds pre{raw.lower + b, raw.upper + b};
        lo = pre.lower.cwiseMax(0.0);
        hi = pre.upper.cwiseMax(0.0);
        g.chain.affine.push_back({std::move(w), std::move(b)});
        g.planted.push_back(std::move(cls));
        fan_in = rows;
    }
    return g;
}

}  // namespace redkit
