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

// Sampling-based equivalence checks between two networks on a box.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <random>
#include <vector>

#include "redkit/bound_engine.hpp"
#include "redkit/net_ir.hpp"
#include "redkit/parallel.hpp"

namespace redkit {

struct EquivReport {
    std::size_t samples = 0;
    double max_abs_diff = 0.0;
    std::size_t argmax_mismatches = 0;
    Vector worst_input;

    bool within(double tol) const { return max_abs_diff <= tol; }
};

using Evaluator = std::function<Vector(const Vector&)>;

inline Evaluator evaluator(const Network& net) {
    return [&net](const Vector& a) { return forward(net, a); };
}
inline Evaluator evaluator(const AffineChain& chain) {
    return [&chain](const Vector& a) { return forward(chain, a); };
}

/// First index of the largest entry.
inline Eigen::Index argmax(const Vector& v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

/// n uniform points from the box, drawn sequentially from one seeded stream.
inline std::vector<Vector> sample_box(const Box& box, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Vector> out(n, Vector(box.lower.size()));
    for (auto& v : out)
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = box.lower[i] + unit(rng) * (box.upper[i] - box.lower[i]);
    return out;
}

/// All 2^d box vertices for d <= 10, otherwise `limit` seeded random vertices.
inline std::vector<Vector> box_corners(const Box& box, std::uint64_t seed, std::size_t limit = 1024) {
    const auto d = static_cast<std::size_t>(box.size());
    std::vector<Vector> out;
    auto corner = [&](auto bit) {
        Vector v(box.lower.size());
        for (std::size_t i = 0; i < d; ++i) {
            auto k = static_cast<Eigen::Index>(i);
            v[k] = bit(i) ? box.upper[k] : box.lower[k];
        }
        return v;
    };
    if (d <= 10) {
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask)
            out.push_back(corner([mask](std::size_t i) { return (mask >> i) & 1U; }));
    } else {
        std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
        std::bernoulli_distribution coin(0.5);
        for (std::size_t c = 0; c < limit; ++c) {
            std::vector<bool> bits(d);
            for (std::size_t i = 0; i < d; ++i) bits[i] = coin(rng);
            out.push_back(corner([&bits](std::size_t i) { return bits[i]; }));
        }
    }
    return out;
}

/// Evaluates both functions on every point and aggregates the worst difference.
inline EquivReport compare_on(const Evaluator& a, const Evaluator& b, const std::vector<Vector>& points) {
    std::vector<double> diff(points.size());
    std::vector<char> mismatch(points.size());
    parallel_for(points.size(), [&](std::size_t i) {
        Vector ya = a(points[i]), yb = b(points[i]);
        require(ya.size() == yb.size(), "equivalence: output width mismatch");
        diff[i] = ya.size() == 0 ? 0.0 : (ya - yb).cwiseAbs().maxCoeff();
        if (std::isnan(diff[i])) diff[i] = std::numeric_limits<double>::infinity();
        mismatch[i] = ya.size() > 0 && argmax(ya) != argmax(yb);
    });
    EquivReport rep;
    rep.samples = points.size();
    std::size_t worst = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        rep.argmax_mismatches += static_cast<std::size_t>(mismatch[i]);
        if (diff[i] > diff[worst]) worst = i;
    }
    if (!points.empty()) {
        rep.max_abs_diff = diff[worst];
        rep.worst_input = points[worst];
    }
    return rep;
}

/// n seeded uniform samples plus the box corners.
inline EquivReport sample_equivalence(const Evaluator& a, const Evaluator& b, const Box& box, std::size_t n,
                                      std::uint64_t seed) {
    std::vector<Vector> points = sample_box(box, n, seed);
    for (Vector& c : box_corners(box, seed)) points.push_back(std::move(c));
    return compare_on(a, b, points);
}

inline EquivReport sample_equivalence(const Network& a, const Network& b, const Box& box, std::size_t n,
                                      std::uint64_t seed) {
    require(a.input_width() == box.size() && b.input_width() == box.size(), "equivalence: input width mismatch");
    require(a.output_width() == b.output_width(), "equivalence: output width mismatch");
    return sample_equivalence(evaluator(a), evaluator(b), box, n, seed);
}

inline EquivReport sample_equivalence(const AffineChain& a, const AffineChain& b, const Box& box, std::size_t n,
                                      std::uint64_t seed) {
    require(a.input_width() == box.size() && b.input_width() == box.size(), "equivalence: input width mismatch");
    require(a.output_width() == b.output_width(), "equivalence: output width mismatch");
    return sample_equivalence(evaluator(a), evaluator(b), box, n, seed);
}

inline constexpr std::size_t max_grid_width = 4;

/// Regular grid with `points_per_dim` points per coordinate, box corners included.
inline std::vector<Vector> box_grid(const Box& box, std::size_t points_per_dim) {
    const auto d = static_cast<std::size_t>(box.size());
    if (d > max_grid_width)
        fail(ErrorKind::contract, "grid check refused: input width " + std::to_string(d) + " exceeds " +
                                      std::to_string(max_grid_width) + " (use sample_equivalence)");
    require(points_per_dim >= 1, "grid needs at least one point per dimension");
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= points_per_dim;
    std::vector<Vector> out;
    out.reserve(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
        Vector v(box.lower.size());
        std::size_t rest = flat;
        for (std::size_t i = 0; i < d; ++i) {
            auto k = static_cast<Eigen::Index>(i);
            std::size_t step = rest % points_per_dim;
            rest /= points_per_dim;
            double t = points_per_dim == 1 ? 0.5 : static_cast<double>(step) / static_cast<double>(points_per_dim - 1);
            v[k] = step + 1 == points_per_dim && points_per_dim > 1 ? box.upper[k]
                                                                    : box.lower[k] + t * (box.upper[k] - box.lower[k]);
        }
        out.push_back(std::move(v));
    }
    return out;
}

inline EquivReport grid_equivalence(const Evaluator& a, const Evaluator& b, const Box& box,
                                    std::size_t points_per_dim) {
    return compare_on(a, b, box_grid(box, points_per_dim));
}

inline EquivReport grid_equivalence(const Network& a, const Network& b, const Box& box, std::size_t points_per_dim) {
    require(a.input_width() == box.size() && b.input_width() == box.size(), "equivalence: input width mismatch");
    require(a.output_width() == b.output_width(), "equivalence: output width mismatch");
    return grid_equivalence(evaluator(a), evaluator(b), box, points_per_dim);
}

}  // namespace redkit
