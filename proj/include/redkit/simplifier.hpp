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

// DAG -> sequential Linear/ReLU chain.
//
// The graph is first rewritten so every Sum is fed only by Linear layers that
// feed nothing else (a "block"), and every Linear belongs to a block. Blocks
// are then eliminated from the output backwards: the block closest to the
// output is normalized (Linears reading another block are composed through
// it; Linears reading the same layer are added), and either replaced by its
// single Linear or, when it reads several layers, fused with the ReLU layers
// feeding only it into Linear -> ReLU -> (new block upstream). Layers routed
// through the new ReLU without one (inputs and shared ReLUs) get a bias shift
// that keeps them non-negative; the shift is undone in the downstream Linear.

#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "redkit/bound_engine.hpp"
#include "redkit/net_ir.hpp"
#include "redkit/reducer.hpp"

namespace redkit {

struct SumLinearBlockView {
    LayerId sum;
    std::vector<LayerId> linears;
};

struct ConstructionPlan {
    std::vector<LayerId> blocked_relus;
    std::vector<LayerId> passthrough;
    Matrix new_linear_weight;
    Vector new_linear_bias;
    Vector passthrough_shift;
};

struct SimplifyStats {
    std::size_t original_layers = 0;
    std::size_t construction_steps = 0;
    std::size_t normalizations = 0;
    std::size_t linearizations = 0;
    bool used_input_passthrough = false;
};

struct SimplifyOptions {
    std::optional<Box> input_box;
    /// Called with a snapshot after every rewrite step; intended for tests.
    std::function<void(const Network&, std::string_view step)> on_step;
    /// Called with each construction plan as it is applied.
    std::function<void(const ConstructionPlan&)> on_construction;
};

namespace detail {

inline bool is_kind(const NetworkBuilder& b, LayerId id, LayerKind k) { return b.layer(id).kind == k; }

inline std::map<std::uint32_t, std::vector<LayerId>> successor_map(const NetworkBuilder& b) {
    std::map<std::uint32_t, std::vector<LayerId>> out;
    for (LayerId id : b.ids()) {
        out[id.value];
        for (LayerId p : b.predecessors(id)) out[p.value].push_back(id);
    }
    return out;
}

/// True if `id` is a Linear whose one and only outgoing arc ends at `sum`.
inline bool exclusive_linear(const NetworkBuilder& b, LayerId id, LayerId sum) {
    if (!is_kind(b, id, LayerKind::linear)) return false;
    auto succ = b.successors(id);
    return succ.size() == 1 && succ[0] == sum;
}

inline Matrix selector(std::size_t total, std::size_t offset, std::size_t width) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(width));
    m.block(static_cast<Eigen::Index>(offset), 0, static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(width))
        .setIdentity();
    return m;
}

}  // namespace detail

inline SumLinearBlockView block_of(const NetworkBuilder& b, LayerId sum) {
    return {sum, b.predecessors(sum)};
}

inline bool is_normalized(const NetworkBuilder& b, const SumLinearBlockView& block) {
    std::set<std::uint32_t> seen;
    for (LayerId l : block.linears) {
        LayerId p = b.predecessors(l).front();
        if (b.layer(p).kind == LayerKind::sum) return false;
        if (!seen.insert(p.value).second) return false;
    }
    return true;
}

/// Rewrites the graph so every Sum is fed by exclusive Linears and every
/// Linear feeds exactly one Sum.
inline void initialize_blocks(NetworkBuilder& b) {
    for (LayerId id : b.ids()) {
        if (!detail::is_kind(b, id, LayerKind::sum)) continue;
        std::vector<LayerId> preds = b.predecessors(id);
        std::set<std::uint32_t> used;
        for (LayerId& p : preds) {
            bool ok = detail::exclusive_linear(b, p, id) && used.insert(p.value).second;
            if (!ok) p = b.add_linear(p, Matrix::Identity(b.width(p), b.width(p)), Vector::Zero(b.width(p)));
        }
        b.set_predecessors(id, std::move(preds));
    }
    for (LayerId id : b.ids()) {
        if (!detail::is_kind(b, id, LayerKind::linear)) continue;
        auto succ = b.successors(id);
        if (succ.size() == 1 && detail::is_kind(b, succ[0], LayerKind::sum)) continue;
        LayerId sum = b.add_sum({id});
        b.redirect_successors(id, sum);
    }
}

inline Network initialization(const Network& net) {
    NetworkBuilder b(net);
    initialize_blocks(b);
    return b.build();
}

/// The block from which no other block is reachable. The graph has one output
/// and single-predecessor Linear/ReLU layers, so it is unique.
inline std::optional<LayerId> last_block(const NetworkBuilder& b) {
    auto succ = detail::successor_map(b);
    std::vector<LayerId> last;
    for (LayerId id : b.ids()) {
        if (!detail::is_kind(b, id, LayerKind::sum)) continue;
        std::vector<LayerId> stack = succ[id.value];
        std::set<std::uint32_t> seen;
        bool reaches = false;
        while (!stack.empty() && !reaches) {
            LayerId cur = stack.back();
            stack.pop_back();
            if (!seen.insert(cur.value).second) continue;
            if (detail::is_kind(b, cur, LayerKind::sum)) reaches = true;
            for (LayerId n : succ[cur.value]) stack.push_back(n);
        }
        if (!reaches) last.push_back(id);
    }
    if (last.empty()) return std::nullopt;
    if (last.size() > 1)
        fail(ErrorKind::internal, "simplify: " + std::to_string(last.size()) + " candidate last blocks; graph has several sinks");
    return last.front();
}

/// Composes Linears that read another block through it, then adds Linears
/// that share a predecessor. Consumed blocks left without successors are removed.
inline void normalize_block(NetworkBuilder& b, LayerId sum) {
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<LayerId> preds = b.predecessors(sum);
        for (std::size_t j = 0; j < preds.size(); ++j) {
            LayerId lin = preds[j];
            LayerId inner = b.predecessors(lin).front();
            if (!detail::is_kind(b, inner, LayerKind::sum)) continue;

            const Matrix outer_w = b.layer(lin).weight;
            const Vector outer_b = b.layer(lin).bias;
            std::vector<LayerId> inner_lins = b.predecessors(inner);
            std::vector<LayerId> fresh;
            for (std::size_t i = 0; i < inner_lins.size(); ++i) {
                const Layer& li = b.layer(inner_lins[i]);
                Vector bias = outer_w * li.bias;
                if (i == 0) bias += outer_b;
                fresh.push_back(b.add_linear(b.predecessors(inner_lins[i]).front(), outer_w * li.weight, bias));
            }
            preds.erase(preds.begin() + static_cast<std::ptrdiff_t>(j));
            preds.insert(preds.begin() + static_cast<std::ptrdiff_t>(j), fresh.begin(), fresh.end());
            b.set_predecessors(sum, preds);
            b.remove(lin);
            if (b.successors(inner).empty()) {
                for (LayerId l : inner_lins) b.remove(l);
                b.remove(inner);
            }
            changed = true;
            break;
        }
    }

    std::vector<LayerId> preds = b.predecessors(sum);
    std::vector<LayerId> kept;
    std::map<std::uint32_t, LayerId> by_source;
    for (LayerId lin : preds) {
        LayerId src = b.predecessors(lin).front();
        auto it = by_source.find(src.value);
        if (it == by_source.end()) {
            by_source.emplace(src.value, lin);
            kept.push_back(lin);
            continue;
        }
        Layer& into = b.layer(it->second);
        into.weight += b.layer(lin).weight;
        into.bias += b.layer(lin).bias;
        b.remove(lin);
    }
    b.set_predecessors(sum, kept);
}

/// Blocked ReLUs and passthrough layers of a normalized block, plus the
/// weights of the replacement Linear. Needs `box` only if the input layer is
/// a passthrough.
inline ConstructionPlan plan_construction(const NetworkBuilder& b, LayerId sum, const std::optional<Box>& box) {
    ConstructionPlan plan;
    std::map<std::uint32_t, LayerId> linear_of;
    for (LayerId lin : b.predecessors(sum)) {
        LayerId p = b.predecessors(lin).front();
        linear_of.emplace(p.value, lin);
        auto succ = b.successors(p);
        if (detail::is_kind(b, p, LayerKind::relu) && succ.size() == 1 && succ[0] == lin)
            plan.blocked_relus.push_back(p);
        else
            plan.passthrough.push_back(p);
    }
    if (plan.blocked_relus.empty())
        fail(ErrorKind::internal, "simplify: block " + to_string(sum) + " has no blocked ReLU layer");
    std::sort(plan.blocked_relus.begin(), plan.blocked_relus.end());
    std::sort(plan.passthrough.begin(), plan.passthrough.end());

    std::size_t total = 0;
    for (LayerId r : plan.blocked_relus) total += b.width(r);
    for (LayerId p : plan.passthrough) total += b.width(p);
    const std::size_t out = b.width(sum);

    plan.new_linear_weight.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(total));
    plan.new_linear_bias = Vector::Zero(static_cast<Eigen::Index>(out));
    plan.passthrough_shift = Vector::Zero(static_cast<Eigen::Index>(total));
    Eigen::Index col = 0;
    auto place = [&](LayerId src, bool passthrough) {
        const Layer& lin = b.layer(linear_of.at(src.value));
        auto w = static_cast<Eigen::Index>(b.width(src));
        plan.new_linear_weight.middleCols(col, w) = lin.weight;
        plan.new_linear_bias += lin.bias;
        if (passthrough && b.layer(src).kind == LayerKind::input) {
            if (!box)
                fail(ErrorKind::construction, "simplify: the input layer must pass through a ReLU layer; "
                                              "an input box is required to shift it non-negative (pass --center/--eps or --vnnlib)");
            require(static_cast<Eigen::Index>(box->size()) == w, "simplify: input box width mismatch");
            plan.passthrough_shift.segment(col, w) = (-box->lower).cwiseMax(0.0);
        } else if (passthrough) {
            require(b.layer(src).kind == LayerKind::relu,
                    "simplify: passthrough layer " + to_string(src) + " is neither ReLU nor input; normalize first");
        }
        col += w;
    };
    for (LayerId r : plan.blocked_relus) place(r, false);
    for (LayerId p : plan.passthrough) place(p, true);
    plan.new_linear_bias -= plan.new_linear_weight * plan.passthrough_shift;
    return plan;
}

/// Replaces a normalized multi-input block and its blocked ReLUs with
/// new block -> ReLU -> Linear.
inline ConstructionPlan linear_layer_construction(NetworkBuilder& b, LayerId sum, const std::optional<Box>& box) {
    ConstructionPlan plan = plan_construction(b, sum, box);
    const auto total = static_cast<std::size_t>(plan.passthrough_shift.size());

    std::vector<LayerId> selectors;
    std::size_t offset = 0;
    auto add_selector = [&](LayerId src, bool passthrough) {
        std::size_t w = b.width(src);
        Vector bias = Vector::Zero(static_cast<Eigen::Index>(total));
        if (passthrough)
            bias.segment(static_cast<Eigen::Index>(offset), static_cast<Eigen::Index>(w)) =
                plan.passthrough_shift.segment(static_cast<Eigen::Index>(offset), static_cast<Eigen::Index>(w));
        selectors.push_back(b.add_linear(src, detail::selector(total, offset, w), bias));
        offset += w;
    };
    for (LayerId r : plan.blocked_relus) add_selector(b.predecessors(r).front(), false);
    for (LayerId p : plan.passthrough) add_selector(p, true);

    LayerId new_sum = b.add_sum(selectors);
    LayerId relu = b.add_relu(new_sum);
    LayerId lin = b.add_linear(relu, plan.new_linear_weight, plan.new_linear_bias);
    b.redirect_successors(sum, lin);

    for (LayerId l : b.predecessors(sum)) b.remove(l);
    b.remove(sum);
    for (LayerId r : plan.blocked_relus) b.remove(r);
    return plan;
}

/// Replaces a single-Linear block by that Linear.
inline void linearize(NetworkBuilder& b, LayerId sum) {
    const auto& preds = b.predecessors(sum);
    require(preds.size() == 1, "linearize: block " + to_string(sum) + " has more than one Linear");
    LayerId lin = preds.front();
    b.redirect_successors(sum, lin);
    b.remove(sum);
}

/// Folds ReLU(ReLU(x)) and Linear(Linear(x)), and pads the chain with
/// identity Linears so it starts and ends with one.
inline Network canonicalize(const Network& net) {
    NetworkBuilder b(net);
    for (LayerId id : b.ids()) {
        if (!b.contains(id) || !detail::is_kind(b, id, LayerKind::relu)) continue;
        LayerId p = b.predecessors(id).front();
        if (!detail::is_kind(b, p, LayerKind::relu)) continue;
        b.redirect_successors(id, p);
        b.remove(id);
    }
    auto identity_after = [&](LayerId p) {
        std::size_t w = b.width(p);
        return b.add_linear(p, Matrix::Identity(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(w)),
                            Vector::Zero(static_cast<Eigen::Index>(w)));
    };
    for (LayerId s : b.successors(b.input())) {
        if (!detail::is_kind(b, s, LayerKind::relu)) continue;
        LayerId id = identity_after(b.input());
        b.set_predecessors(s, {id});
    }
    LayerId out = b.output();
    if (!detail::is_kind(b, out, LayerKind::linear)) b.set_output(identity_after(out));
    return collapse_adjacent_linear(b.build());
}

/// Algorithm driver: initialization, then normalize/construct/linearize the
/// last block until none is left.
inline Network simplify(const Network& net, const SimplifyOptions& opt = {}, SimplifyStats* stats = nullptr) {
    ValidationReport report = validate(net);
    if (!report.ok()) fail(ErrorKind::structural, "simplify: invalid network: " + report.summary());

    SimplifyStats local;
    SimplifyStats& st = stats ? *stats : local;
    st = SimplifyStats{};
    st.original_layers = net.size();

    NetworkBuilder b(net);
    auto emit = [&](std::string_view step) {
        if (opt.on_step) opt.on_step(b.build(), step);
    };
    initialize_blocks(b);
    emit("initialization");

    while (auto sum = last_block(b)) {
        normalize_block(b, *sum);
        ++st.normalizations;
        emit("normalization");
        if (b.predecessors(*sum).size() > 1) {
            ConstructionPlan plan = linear_layer_construction(b, *sum, opt.input_box);
            for (LayerId p : plan.passthrough)
                if (b.layer(p).kind == LayerKind::input) st.used_input_passthrough = true;
            if (opt.on_construction) opt.on_construction(plan);
            ++st.construction_steps;
            if (st.construction_steps > st.original_layers)
                fail(ErrorKind::internal, "simplify: construction step count exceeded the layer count");
            emit("construction");
        } else {
            linearize(b, *sum);
            ++st.linearizations;
            emit("linearization");
        }
    }

    Network out = canonicalize(b.build());
    if (!is_sequential(out)) fail(ErrorKind::internal, "simplify: result is not a Linear/ReLU chain");
    return out;
}

}  // namespace redkit
