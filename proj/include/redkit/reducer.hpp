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

// Stable-neuron reduction.
//
// For one ReLU layer Y between affine layers X (V -> Y, weight M1, bias B1)
// and Z (Y -> Z, weight M2, bias B2):
//
//   * deactivated neurons (pre-activation always <= 0) contribute nothing and
//     are dropped together with their X rows and Z columns;
//   * activated neurons (pre-activation always >= 0) act as the identity, so
//     their contribution to Z is the affine map
//         M2[:,A] M1[A,:] v + M2[:,A] B1[A]
//     of V's output. That map has n = |Z| rows and is re-inserted as n merged
//     neurons whose bias is raised by a shift s >= 0 that keeps them provably
//     active over V's output range; Z takes the merged neurons through an
//     identity block and subtracts s again. With no unstable neurons left
//     the merged layer is affine and folds into its neighbours.
//
// Layers are processed from the last hidden layer back to the first, so the
// bounds computed once on the input network stay valid for every layer that
// has not been touched yet.

#pragma once

#include <algorithm>
#include <chrono>
#include <functional>
#include <numeric>
#include <ostream>
#include <vector>

#include "redkit/bound_engine.hpp"
#include "redkit/net_ir.hpp"

namespace redkit {

struct LayerPartition {
    std::vector<std::size_t> deactivated;
    std::vector<std::size_t> activated;
    std::vector<std::size_t> unstable;

    std::size_t width() const { return deactivated.size() + activated.size() + unstable.size(); }
    std::size_t stable() const { return deactivated.size() + activated.size(); }
};

/// Neurons with u <= tol are deactivated, then those with l >= -tol are
/// activated, the rest unstable. Any tolerance other than 0 trades soundness
/// for a larger reduction.
inline LayerPartition classify_layer(const Bounds& pre, double tol = 0.0) {
    LayerPartition part;
    for (std::size_t i = 0; i < pre.size(); ++i) {
        auto k = static_cast<Eigen::Index>(i);
        if (pre.upper[k] <= tol)
            part.deactivated.push_back(i);
        else if (pre.lower[k] >= -tol)
            part.activated.push_back(i);
        else
            part.unstable.push_back(i);
    }
    return part;
}

/// Partition of every ReLU layer (all table entries but the output).
inline std::vector<LayerPartition> classify(const BoundsTable& table, double tol = 0.0) {
    std::vector<LayerPartition> out;
    for (std::size_t k = 0; k < table.relu_layers(); ++k) out.push_back(classify_layer(table.layers[k], tol));
    return out;
}

/// Everything needed to rebuild one X -> Y -> Z segment.
struct ReductionPlan {
    Matrix merge_weight;      // M2[:,A] * M1[A,:]          (n x q)
    Vector merge_offset;      // M2[:,A] * B1[A]            (n)
    Vector shift;             // s >= 0                     (n)
    Vector merge_bias;        // merge_offset + s           (n)
    Matrix identity_out;      // identity                   (n x n)
    Matrix kept_weight;       // M1[kept,:]
    Vector kept_bias;         // B1[kept]
    Matrix out_weight_kept;   // M2[:,kept]
    Vector out_bias;          // B2 - s
    std::vector<std::size_t> kept;  // unstable (and unmerged activated) rows, ascending
    bool merged = false;
    std::size_t q = 0, m = 0, k = 0, n = 0;
};

/// Lower/upper bounds of rows * v + bias over the region the reduction must hold on.
using RowBounder = std::function<Bounds(const Matrix& rows, const Vector& bias)>;

/// Result of reducing one segment: new X and Z, pre-activation bounds of the
/// new Y (merged rows first, then kept rows) and, per new neuron, the index
/// of the old neuron it continues (-1 for merged neurons).
struct LayerReduction {
    AffineMap x;
    AffineMap z;
    Bounds pre;
    std::vector<std::ptrdiff_t> source;
    ReductionPlan plan;
};

namespace detail {

inline Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
    return out;
}

inline Matrix take_cols(const Matrix& m, const std::vector<std::size_t>& idx) {
    Matrix out(m.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = m.col(static_cast<Eigen::Index>(idx[i]));
    return out;
}

inline Vector take(const Vector& v, const std::vector<std::size_t>& idx) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(idx[i])];
    return out;
}

}  // namespace detail

/// Merging replaces |A| neurons by n = |Z| neurons; it only pays when |A| > n.
inline bool merge_shrinks(const LayerPartition& part, std::size_t n) { return part.activated.size() > n; }

inline ReductionPlan plan_layer(const AffineMap& x, const AffineMap& z, const LayerPartition& part, bool merge,
                                const RowBounder& bound_rows) {
    require(x.rows() == z.cols(), "reduce_layer: X rows != Z columns");
    require(part.width() == x.rows(), "reduce_layer: partition does not cover the layer");

    ReductionPlan plan;
    plan.q = x.cols();
    plan.m = x.rows();
    plan.n = z.rows();
    plan.merged = merge && !part.activated.empty();
    plan.k = plan.merged ? part.activated.size() : 0;

    if (plan.merged) {
        plan.kept = part.unstable;
    } else {
        plan.kept = part.unstable;
        plan.kept.insert(plan.kept.end(), part.activated.begin(), part.activated.end());
        std::sort(plan.kept.begin(), plan.kept.end());
    }
    plan.kept_weight = detail::take_rows(x.weight, plan.kept);
    plan.kept_bias = detail::take(x.bias, plan.kept);
    plan.out_weight_kept = detail::take_cols(z.weight, plan.kept);

    auto n = static_cast<Eigen::Index>(plan.n);
    if (plan.merged) {
        Matrix m2a = detail::take_cols(z.weight, part.activated);
        plan.merge_weight = m2a * detail::take_rows(x.weight, part.activated);
        plan.merge_offset = m2a * detail::take(x.bias, part.activated);
        Bounds range = bound_rows(plan.merge_weight, plan.merge_offset);
        plan.shift = (-range.lower).cwiseMax(0.0);
        plan.merge_bias = plan.merge_offset + plan.shift;
        plan.identity_out = Matrix::Identity(n, n);
        plan.out_bias = z.bias - plan.shift;
    } else {
        plan.merge_weight = Matrix(0, static_cast<Eigen::Index>(plan.q));
        plan.merge_offset = plan.shift = plan.merge_bias = Vector(0);
        plan.identity_out = Matrix(n, 0);
        plan.out_bias = z.bias;
    }
    return plan;
}

/// Rebuilds X -> Y -> Z for a given partition. `v_range` is the output range
/// of layer V (the box when V is the input); `y_pre` the known pre-activation
/// bounds of Y. `merge` selects whether activated neurons are folded into
/// merged neurons or kept in place. `bound_rows` overrides how merged rows
/// are bounded when choosing the shift (default: interval over v_range).
inline LayerReduction reduce_layer(const Bounds& v_range, const AffineMap& x, const Bounds& y_pre, const AffineMap& z,
                                   const LayerPartition& part, bool merge, RowBounder bound_rows = {}) {
    require(v_range.size() == x.cols(), "reduce_layer: V range width != X columns");
    require(y_pre.size() == x.rows(), "reduce_layer: Y bounds width != X rows");
    if (!bound_rows)
        bound_rows = [&](const Matrix& rows, const Vector& bias) {
            return detail::affine_range(rows, bias, v_range.lower, v_range.upper);
        };

    LayerReduction red;
    red.plan = plan_layer(x, z, part, merge, bound_rows);
    const ReductionPlan& p = red.plan;
    auto nm = static_cast<Eigen::Index>(p.merged ? p.n : 0);
    auto nk = static_cast<Eigen::Index>(p.kept.size());
    auto q = static_cast<Eigen::Index>(p.q);

    red.x.weight.resize(nm + nk, q);
    red.x.bias.resize(nm + nk);
    red.z.weight.resize(static_cast<Eigen::Index>(p.n), nm + nk);
    red.pre.lower.resize(nm + nk);
    red.pre.upper.resize(nm + nk);
    if (nm > 0) {
        Bounds range = bound_rows(p.merge_weight, p.merge_offset);
        red.x.weight.topRows(nm) = p.merge_weight;
        red.x.bias.head(nm) = p.merge_bias;
        red.z.weight.leftCols(nm) = p.identity_out;
        red.pre.lower.head(nm) = range.lower + p.shift;
        red.pre.upper.head(nm) = range.upper + p.shift;
        red.source.assign(static_cast<std::size_t>(nm), -1);
    }
    red.x.weight.bottomRows(nk) = p.kept_weight;
    red.x.bias.tail(nk) = p.kept_bias;
    red.z.weight.rightCols(nk) = p.out_weight_kept;
    red.z.bias = p.out_bias;
    red.pre.lower.tail(nk) = detail::take(y_pre.lower, p.kept);
    red.pre.upper.tail(nk) = detail::take(y_pre.upper, p.kept);
    for (std::size_t i : p.kept) red.source.push_back(static_cast<std::ptrdiff_t>(i));
    return red;
}

// ---------------------------------------------------------------------------
// Whole-network reduction

enum class ShiftBound { interval, crown };

struct ReduceOptions {
    BoundOptions bounds;                       // how stability is detected
    ShiftBound shift = ShiftBound::interval;   // how merged-neuron shifts are bounded
    std::vector<std::size_t> force_merge_layers;  // merge activated neurons here even if it grows the layer
};

struct LayerReport {
    std::size_t layer = 0;
    std::size_t width_before = 0;
    std::size_t n_deactivated = 0;
    std::size_t n_activated = 0;
    std::size_t n_unstable = 0;
    std::size_t width_after = 0;
    bool merged = false;
    bool merge_skipped = false;  // activated neurons kept because merging would not shrink the layer
};

struct ReductionReport {
    std::vector<LayerReport> layers;
    std::size_t relu_before = 0;
    std::size_t relu_after = 0;
    double seconds = 0.0;

    double ratio() const {
        return relu_after == 0 ? static_cast<double>(relu_before == 0 ? 1 : relu_before)
                               : static_cast<double>(relu_before) / static_cast<double>(relu_after);
    }

    void write_csv(std::ostream& os) const {
        os << "layer,width_before,n_deactivated,n_activated,n_unstable,width_after\n";
        for (const auto& l : layers)
            os << l.layer << ',' << l.width_before << ',' << l.n_deactivated << ',' << l.n_activated << ','
               << l.n_unstable << ',' << l.width_after << '\n';
        os << "total," << relu_before << ",,,," << relu_after << '\n';
        os << "# ratio," << ratio() << '\n';
        os << "# seconds," << seconds << '\n';
    }
};

/// Per reduced affine layer: which affine layer of the input chain it comes
/// from and, per output row, the input row it continues (-1 for new rows).
struct RowProvenance {
    std::size_t affine_index = 0;
    std::vector<std::ptrdiff_t> rows;
};

struct ReductionResult {
    AffineChain chain;
    ReductionReport report;
    BoundsTable bounds;  // valid pre-activation bounds for `chain`
    std::vector<RowProvenance> provenance;
};

/// Composes affine layers across ReLU layers that are empty or flagged as
/// acting as the identity (every neuron known active).
inline void fold_affine_relu_layers(ReductionResult& res, std::vector<char> identity = {}) {
    auto& aff = res.chain.affine;
    identity.resize(aff.size(), 0);
    for (std::size_t k = 0; k + 1 < aff.size();) {
        if (aff[k].rows() != 0 && !identity[k]) {
            ++k;
            continue;
        }
        aff[k + 1] = compose(aff[k + 1], aff[k]);
        auto at = static_cast<std::ptrdiff_t>(k);
        aff.erase(aff.begin() + at);
        identity.erase(identity.begin() + at);
        res.bounds.layers.erase(res.bounds.layers.begin() + at);
        res.provenance.erase(res.provenance.begin() + at);
    }
}

/// Reduces every ReLU layer for the given bounds and partitions.
inline ReductionResult reduce_with_partitions(const AffineChain& chain, const Box& box, const BoundsTable& table,
                                              const std::vector<LayerPartition>& parts, const ReduceOptions& opt) {
    const std::size_t relu_layers = chain.relu_layers();
    require(parts.size() == relu_layers, "reduce: one partition per ReLU layer required");
    require(table.layers.size() >= relu_layers, "reduce: bounds table does not cover every ReLU layer");

    ReductionResult res;
    res.chain = chain;
    res.bounds.layers = table.layers;
    res.bounds.layers.resize(chain.affine.size(), Bounds{});
    res.bounds.layers.back() = table.layers.size() == chain.affine.size() ? table.output() : Bounds{};
    for (std::size_t k = 0; k < chain.affine.size(); ++k) {
        RowProvenance p{k, std::vector<std::ptrdiff_t>(chain.affine[k].rows())};
        std::iota(p.rows.begin(), p.rows.end(), 0);
        res.provenance.push_back(std::move(p));
    }
    res.report.relu_before = chain.relu_neurons();
    res.report.layers.resize(relu_layers);
    std::vector<char> identity(relu_layers, 0);

    for (std::size_t r = relu_layers; r-- > 0;) {
        const LayerPartition& part = parts[r];
        Bounds v_range = r == 0 ? Bounds{box.lower, box.upper} : table.layers[r - 1].clamped();
        const std::size_t n = res.chain.affine[r + 1].rows();
        bool forced = std::find(opt.force_merge_layers.begin(), opt.force_merge_layers.end(), r) !=
                      opt.force_merge_layers.end();
        // No unstable neurons: the merged rows are non-negative, so the ReLU
        // layer acts as the identity and folds into its neighbours.
        const bool affine = part.unstable.empty() && !part.activated.empty();
        bool merge = forced || affine || merge_shrinks(part, n);
        identity[r] = affine;

        RowBounder bounder;
        if (opt.shift == ShiftBound::crown && r > 0)
            bounder = [&, r](const Matrix& rows, const Vector& bias) {
                return crown_rows(chain, box, r, rows, bias, table, opt.bounds.alpha);
            };
        LayerReduction red =
            reduce_layer(v_range, res.chain.affine[r], table.layers[r], res.chain.affine[r + 1], part, merge, bounder);

        res.chain.affine[r] = std::move(red.x);
        res.chain.affine[r + 1] = std::move(red.z);
        res.bounds.layers[r] = std::move(red.pre);
        res.provenance[r].rows = std::move(red.source);

        LayerReport& rep = res.report.layers[r];
        rep.layer = r;
        rep.width_before = part.width();
        rep.n_deactivated = part.deactivated.size();
        rep.n_activated = part.activated.size();
        rep.n_unstable = part.unstable.size();
        rep.width_after = affine ? 0 : res.chain.affine[r].rows();
        rep.merged = red.plan.merged;
        rep.merge_skipped = !merge && !part.activated.empty();
    }
    fold_affine_relu_layers(res, std::move(identity));
    res.report.relu_after = res.chain.relu_neurons();
    return res;
}

/// Bounds once with `opt.bounds`, classifies, reduces last-to-first.
inline ReductionResult reduce_network(const AffineChain& chain, const Box& box, const ReduceOptions& opt = {}) {
    auto start = std::chrono::steady_clock::now();
    BoundsTable table = compute_bounds(chain, box, opt.bounds);
    ReductionResult res = reduce_with_partitions(chain, box, table, classify(table), opt);
    res.report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

inline std::pair<Network, ReductionReport> reduce_network(const Network& net, const Box& box,
                                                         const ReduceOptions& opt = {}) {
    ReductionResult res = reduce_network(to_chain(net), box, opt);
    return {to_network(res.chain), std::move(res.report)};
}

/// Composes Linear -> Linear pairs (the first having no other successor) until none remain.
inline Network collapse_adjacent_linear(const Network& net) {
    NetworkBuilder b(net);
    bool changed = true;
    while (changed) {
        changed = false;
        for (LayerId id : b.ids()) {
            if (!b.contains(id) || b.layer(id).kind != LayerKind::linear) continue;
            const auto& preds = b.predecessors(id);
            if (preds.size() != 1) continue;
            LayerId p = preds[0];
            if (b.layer(p).kind != LayerKind::linear || b.successors(p).size() != 1) continue;
            const Layer& inner = b.layer(p);
            Layer& outer = b.layer(id);
            AffineMap fused = compose({outer.weight, outer.bias}, {inner.weight, inner.bias});
            LayerId grand = b.predecessors(p)[0];
            outer.weight = std::move(fused.weight);
            outer.bias = std::move(fused.bias);
            b.set_predecessors(id, {grand});
            b.remove(p);
            changed = true;
        }
    }
    return b.build();
}

}  // namespace redkit
