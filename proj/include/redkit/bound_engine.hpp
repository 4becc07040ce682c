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

// Sound pre-activation bounds for sequential ReLU networks over a box.
//
// Two propagators are provided:
//   * interval_forward: plain interval arithmetic, layer by layer.
//   * crown_backward:   backward linear bound propagation. Every layer's
//     bounds are obtained by substituting linear ReLU relaxations (built from
//     the already-computed bounds of earlier layers) back to the input and
//     concretizing over the box.
//
// Both accept an optional prior table. Entries of the prior are intersected
// with the freshly computed bounds layer by layer before they feed the next
// layer's relaxation, so a caller holding tighter bounds that are valid on the
// region of interest (e.g. a branch-and-bound subdomain) gets them reused.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "redkit/net_ir.hpp"

namespace redkit {

struct Box {
    Vector lower;
    Vector upper;

    Box() = default;
    Box(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
        require(lower.size() == upper.size(), "box bounds have different lengths");
        for (Eigen::Index i = 0; i < lower.size(); ++i)
            require(lower[i] <= upper[i], "box lower bound exceeds upper bound at index " + std::to_string(i));
    }

    static Box uniform(std::size_t n, double lo, double hi) {
        auto k = static_cast<Eigen::Index>(n);
        return Box(Vector::Constant(k, lo), Vector::Constant(k, hi));
    }

    std::size_t size() const { return static_cast<std::size_t>(lower.size()); }
    Vector center() const { return 0.5 * (lower + upper); }

    bool contains(const Vector& x) const {
        return x.size() == lower.size() && (x.array() >= lower.array()).all() &&
               (x.array() <= upper.array()).all();
    }
};

/// Elementwise bounds for one layer's outputs.
struct Bounds {
    Vector lower;
    Vector upper;

    std::size_t size() const { return static_cast<std::size_t>(lower.size()); }
    Vector width() const { return upper - lower; }

    static Bounds unknown(std::size_t n) {
        auto k = static_cast<Eigen::Index>(n);
        double inf = std::numeric_limits<double>::infinity();
        return {Vector::Constant(k, -inf), Vector::Constant(k, inf)};
    }

    /// Output range of ReLU applied to these pre-activations.
    Bounds clamped() const { return {lower.cwiseMax(0.0), upper.cwiseMax(0.0)}; }
};

/// One entry per affine layer of an AffineChain: entry k bounds the outputs of
/// affine[k], i.e. the pre-activations of the k-th ReLU layer (or the network
/// output for the last entry).
struct BoundsTable {
    std::vector<Bounds> layers;
    bool infeasible = false;  // prior and fresh bounds were disjoint somewhere

    const Bounds& output() const { return layers.back(); }
    std::size_t relu_layers() const { return layers.empty() ? 0 : layers.size() - 1; }
};

enum class BoundMethod { interval, crown };
enum class AlphaRule { adaptive, zero, one };

inline const char* to_string(BoundMethod m) { return m == BoundMethod::interval ? "interval" : "crown"; }

inline const char* to_string(AlphaRule a) {
    switch (a) {
        case AlphaRule::adaptive: return "adaptive";
        case AlphaRule::zero: return "zero";
        case AlphaRule::one: return "one";
    }
    return "?";
}

struct BoundOptions {
    BoundMethod method = BoundMethod::crown;
    AlphaRule alpha = AlphaRule::adaptive;
};

/// Linear lower and upper lines around ReLU on [l, u]:
///   lower_slope * x  <=  ReLU(x)  <=  upper_slope * x + upper_intercept.
struct ReluRelaxation {
    double lower_slope = 0.0;
    double upper_slope = 0.0;
    double upper_intercept = 0.0;
};

inline ReluRelaxation relax_relu(double l, double u, AlphaRule alpha) {
    if (u <= 0.0) return {0.0, 0.0, 0.0};
    if (l >= 0.0) return {1.0, 1.0, 0.0};
    double slope = u / (u - l);
    double a = 0.0;
    switch (alpha) {
        case AlphaRule::adaptive: a = u >= -l ? 1.0 : 0.0; break;
        case AlphaRule::zero: a = 0.0; break;
        case AlphaRule::one: a = 1.0; break;
    }
    return {a, slope, -slope * l};
}

namespace detail {

/// Exact range of W x + b for x in [lo, hi] (elementwise interval arithmetic).
inline Bounds affine_range(const Matrix& w, const Vector& b, const Vector& lo, const Vector& hi) {
    Matrix pos = w.cwiseMax(0.0);
    Matrix neg = w.cwiseMin(0.0);
    return {pos * lo + neg * hi + b, pos * hi + neg * lo + b};
}

inline void intersect(Bounds& fresh, const Bounds* prior, bool& infeasible) {
    if (!prior) return;
    require(prior->size() == fresh.size(), "prior bounds width mismatch");
    for (Eigen::Index i = 0; i < fresh.lower.size(); ++i) {
        double lo = std::max(fresh.lower[i], prior->lower[i]);
        double hi = std::min(fresh.upper[i], prior->upper[i]);
        if (lo > hi) {
            double scale = 1.0 + std::abs(lo) + std::abs(hi);
            if (lo - hi > 1e-9 * scale) infeasible = true;
            std::swap(lo, hi);
        }
        fresh.lower[i] = lo;
        fresh.upper[i] = hi;
    }
}

inline const Bounds* prior_at(const BoundsTable* prior, std::size_t k) {
    if (!prior || k >= prior->layers.size() || prior->layers[k].size() == 0) return nullptr;
    return &prior->layers[k];
}

}  // namespace detail

/// Bounds of `rows` (a linear map applied to the outputs of ReLU layer k-1, i.e.
/// a replacement for affine[k]) by backward substitution through affine[0..k-1].
/// `table` must hold bounds for affine[0..k-1].
inline Bounds crown_rows(const AffineChain& chain, const Box& box, std::size_t k, const Matrix& rows,
                         const Vector& bias, const BoundsTable& table, AlphaRule alpha) {
    if (k == 0) return detail::affine_range(rows, bias, box.lower, box.upper);

    Matrix lo_coef = rows, hi_coef = rows;
    Vector lo_const = bias, hi_const = bias;
    for (std::size_t j = k; j-- > 0;) {
        const Bounds& pre = table.layers[j];
        auto width = static_cast<Eigen::Index>(pre.size());
        Vector lo_slope(width), up_slope(width), up_icpt(width);
        for (Eigen::Index i = 0; i < width; ++i) {
            ReluRelaxation r = relax_relu(pre.lower[i], pre.upper[i], alpha);
            lo_slope[i] = r.lower_slope;
            up_slope[i] = r.upper_slope;
            up_icpt[i] = r.upper_intercept;
        }
        // Lower bound: positive coefficients take the lower line, negative the upper line.
        Matrix lo_pos = lo_coef.cwiseMax(0.0), lo_neg = lo_coef.cwiseMin(0.0);
        lo_const += lo_neg * up_icpt;
        lo_coef = lo_pos * lo_slope.asDiagonal();
        lo_coef += lo_neg * up_slope.asDiagonal();
        // Upper bound: mirror image.
        Matrix hi_pos = hi_coef.cwiseMax(0.0), hi_neg = hi_coef.cwiseMin(0.0);
        hi_const += hi_pos * up_icpt;
        hi_coef = hi_pos * up_slope.asDiagonal();
        hi_coef += hi_neg * lo_slope.asDiagonal();

        const AffineMap& a = chain.affine[j];
        lo_const += lo_coef * a.bias;
        hi_const += hi_coef * a.bias;
        lo_coef = lo_coef * a.weight;
        hi_coef = hi_coef * a.weight;
    }
    Bounds lower_side = detail::affine_range(lo_coef, lo_const, box.lower, box.upper);
    Bounds upper_side = detail::affine_range(hi_coef, hi_const, box.lower, box.upper);
    return {std::move(lower_side.lower), std::move(upper_side.upper)};
}

/// Interval rows: bounds of rows * ReLU(affine[k-1] ...) + bias using the
/// clamped interval of layer k-1 (or the box when k == 0).
inline Bounds interval_rows(const Box& box, std::size_t k, const Matrix& rows, const Vector& bias,
                            const BoundsTable& table) {
    if (k == 0) return detail::affine_range(rows, bias, box.lower, box.upper);
    Bounds in = table.layers[k - 1].clamped();
    return detail::affine_range(rows, bias, in.lower, in.upper);
}

inline BoundsTable interval_forward(const AffineChain& chain, const Box& box,
                                    const BoundsTable* prior = nullptr) {
    require(box.size() == chain.input_width(), "interval_forward: box width != input width");
    BoundsTable table;
    for (std::size_t k = 0; k < chain.affine.size(); ++k) {
        Bounds b = interval_rows(box, k, chain.affine[k].weight, chain.affine[k].bias, table);
        detail::intersect(b, detail::prior_at(prior, k), table.infeasible);
        table.layers.push_back(std::move(b));
    }
    return table;
}

inline BoundsTable crown_backward(const AffineChain& chain, const Box& box, AlphaRule alpha = AlphaRule::adaptive,
                                  const BoundsTable* prior = nullptr) {
    require(box.size() == chain.input_width(), "crown_backward: box width != input width");
    BoundsTable table;
    for (std::size_t k = 0; k < chain.affine.size(); ++k) {
        Bounds b = crown_rows(chain, box, k, chain.affine[k].weight, chain.affine[k].bias, table, alpha);
        detail::intersect(b, detail::prior_at(prior, k), table.infeasible);
        table.layers.push_back(std::move(b));
    }
    return table;
}

inline BoundsTable compute_bounds(const AffineChain& chain, const Box& box, const BoundOptions& opt,
                                  const BoundsTable* prior = nullptr) {
    return opt.method == BoundMethod::interval ? interval_forward(chain, box, prior)
                                               : crown_backward(chain, box, opt.alpha, prior);
}

/// Bounds of extra rows read off the outputs of the last ReLU layer, given a
/// table already holding bounds for every hidden layer.
inline Bounds bound_rows(const AffineChain& chain, const Box& box, std::size_t k, const Matrix& rows,
                         const Vector& bias, const BoundsTable& table, const BoundOptions& opt) {
    return opt.method == BoundMethod::interval ? interval_rows(box, k, rows, bias, table)
                                               : crown_rows(chain, box, k, rows, bias, table, opt.alpha);
}

/// Sound lower bound on min over the box of c . F(a). The row c is composed
/// with the output layer before bounding, so the margin is bounded as one
/// linear function of the last hidden layer.
inline double margin_lower_bound(const AffineChain& chain, const Box& box, const Vector& c,
                                 const BoundOptions& opt, const BoundsTable* hidden = nullptr) {
    require(static_cast<std::size_t>(c.size()) == chain.output_width(), "margin: c length != output width");
    const std::size_t last = chain.affine.size() - 1;
    BoundsTable local;
    const BoundsTable* table = hidden;
    if (!table) {
        AffineChain prefix{std::vector<AffineMap>(chain.affine.begin(), chain.affine.begin() + last)};
        if (last > 0) local = compute_bounds(prefix, box, opt);
        table = &local;
    }
    Matrix row = c.transpose() * chain.affine[last].weight;
    Vector bias = Vector::Constant(1, c.dot(chain.affine[last].bias));
    return bound_rows(chain, box, last, row, bias, *table, opt).lower[0];
}

// Network-level conveniences.

inline BoundsTable interval_forward(const Network& net, const Box& box) {
    return interval_forward(to_chain(net), box);
}

inline BoundsTable crown_backward(const Network& net, const Box& box, AlphaRule alpha = AlphaRule::adaptive) {
    return crown_backward(to_chain(net), box, alpha);
}

inline double margin_lower_bound(const Network& net, const Box& box, const Vector& c, const BoundOptions& opt) {
    return margin_lower_bound(to_chain(net), box, c, opt);
}

}  // namespace redkit
