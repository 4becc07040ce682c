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

// Computation-graph IR for ReLU networks.
//
// A Network is an immutable DAG of Input, Linear, ReLU and Sum layers with a
// single input and a single output. NetworkBuilder is the only way to make or
// rewrite one; every transformation in the toolkit reads a Network, edits a
// builder seeded from it, and returns a fresh Network.
//
// AffineChain is the flat view of a sequential network
//   Input -> Linear -> ReLU -> Linear -> ... -> ReLU -> Linear
// stored as the list of affine maps. The bound engine, reducer, verifier and
// exporter all work on that view.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "redkit/error.hpp"

namespace redkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct LayerId {
    std::uint32_t value = 0;

    friend auto operator<=>(LayerId, LayerId) = default;
};

inline std::string to_string(LayerId id) { return "L" + std::to_string(id.value); }

enum class LayerKind { input, linear, relu, sum };

inline const char* to_string(LayerKind kind) {
    switch (kind) {
        case LayerKind::input: return "Input";
        case LayerKind::linear: return "Linear";
        case LayerKind::relu: return "ReLU";
        case LayerKind::sum: return "Sum";
    }
    return "?";
}

struct Layer {
    LayerId id;
    LayerKind kind = LayerKind::input;
    std::size_t width = 0;
    Matrix weight;  // Linear only: width x predecessor width
    Vector bias;    // Linear only: width
};

class NetworkBuilder;

class Network {
  public:
    Network() = default;

    std::span<const Layer> layers() const { return layers_; }
    std::size_t size() const { return layers_.size(); }

    bool contains(LayerId id) const { return find(id) != npos; }

    const Layer& layer(LayerId id) const { return layers_[index_of(id)]; }

    /// Predecessors in arc insertion order (the Sum evaluation order).
    std::span<const LayerId> predecessors(LayerId id) const { return preds_[index_of(id)]; }

    /// Successors, one entry per arc, ascending by successor id.
    std::span<const LayerId> successors(LayerId id) const { return succs_[index_of(id)]; }

    std::vector<std::pair<LayerId, LayerId>> arcs() const {
        std::vector<std::pair<LayerId, LayerId>> out;
        for (std::size_t i = 0; i < layers_.size(); ++i)
            for (LayerId p : preds_[i]) out.emplace_back(p, layers_[i].id);
        return out;
    }

    LayerId input() const { return input_; }
    LayerId output() const { return output_; }
    std::size_t input_width() const { return layer(input_).width; }
    std::size_t output_width() const { return layer(output_).width; }

    std::size_t count(LayerKind kind) const {
        return static_cast<std::size_t>(std::count_if(
            layers_.begin(), layers_.end(), [kind](const Layer& l) { return l.kind == kind; }));
    }

    /// Total number of ReLU neurons.
    std::size_t relu_neurons() const {
        std::size_t n = 0;
        for (const Layer& l : layers_)
            if (l.kind == LayerKind::relu) n += l.width;
        return n;
    }

  private:
    friend class NetworkBuilder;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    std::size_t find(LayerId id) const {
        auto it = std::lower_bound(layers_.begin(), layers_.end(), id,
                                   [](const Layer& l, LayerId v) { return l.id < v; });
        if (it == layers_.end() || it->id != id) return npos;
        return static_cast<std::size_t>(it - layers_.begin());
    }

    std::size_t index_of(LayerId id) const {
        std::size_t i = find(id);
        if (i == npos) fail(ErrorKind::contract, "unknown layer " + to_string(id));
        return i;
    }

    std::vector<Layer> layers_;  // ascending id
    std::vector<std::vector<LayerId>> preds_;
    std::vector<std::vector<LayerId>> succs_;
    LayerId input_;
    LayerId output_;
};

/// Mutable graph under construction or rewrite.
class NetworkBuilder {
  public:
    NetworkBuilder() = default;

    explicit NetworkBuilder(const Network& net) : input_(net.input_), output_(net.output_), last_(net.output_) {
        for (std::size_t i = 0; i < net.layers_.size(); ++i) {
            nodes_.emplace(net.layers_[i].id.value, Node{net.layers_[i], net.preds_[i]});
            next_ = std::max(next_, net.layers_[i].id.value + 1);
        }
    }

    LayerId add_input(std::size_t width) {
        LayerId id = add_layer(LayerKind::input, width, {}, {}, {});
        input_ = id;
        return id;
    }

    LayerId add_linear(LayerId pred, Matrix weight, Vector bias) {
        std::size_t width = static_cast<std::size_t>(weight.rows());
        return add_layer(LayerKind::linear, width, std::move(weight), std::move(bias), {pred});
    }

    LayerId add_relu(LayerId pred) { return add_layer(LayerKind::relu, width(pred), {}, {}, {pred}); }

    LayerId add_sum(std::vector<LayerId> preds) {
        require(!preds.empty(), "Sum layer needs at least one predecessor");
        std::size_t w = width(preds.front());
        return add_layer(LayerKind::sum, w, {}, {}, std::move(preds));
    }

    /// Raw insertion with no consistency checks; validate() reports problems.
    LayerId add_layer(LayerKind kind, std::size_t width, Matrix weight, Vector bias,
                      std::vector<LayerId> preds) {
        LayerId id{next_++};
        nodes_.emplace(id.value, Node{Layer{id, kind, width, std::move(weight), std::move(bias)},
                                      std::move(preds)});
        last_ = id;
        return id;
    }

    bool contains(LayerId id) const { return nodes_.count(id.value) != 0; }

    Layer& layer(LayerId id) { return node(id).layer; }
    const Layer& layer(LayerId id) const { return node(id).layer; }
    std::size_t width(LayerId id) const { return node(id).layer.width; }

    const std::vector<LayerId>& predecessors(LayerId id) const { return node(id).preds; }
    void set_predecessors(LayerId id, std::vector<LayerId> preds) { node(id).preds = std::move(preds); }

    /// One entry per arc, ascending by successor id.
    std::vector<LayerId> successors(LayerId id) const {
        std::vector<LayerId> out;
        for (const auto& [key, n] : nodes_)
            for (LayerId p : n.preds)
                if (p == id) out.push_back(n.layer.id);
        return out;
    }

    /// Points every arc leaving `from` at `to` instead; moves the output marker too.
    void redirect_successors(LayerId from, LayerId to) {
        for (auto& [key, n] : nodes_) {
            if (n.layer.id == to) continue;
            for (LayerId& p : n.preds)
                if (p == from) p = to;
        }
        if (output_ && *output_ == from) output_ = to;
    }

    void remove(LayerId id) { nodes_.erase(id.value); }

    std::vector<LayerId> ids() const {
        std::vector<LayerId> out;
        out.reserve(nodes_.size());
        for (const auto& [key, n] : nodes_) out.push_back(n.layer.id);
        return out;
    }

    LayerId input() const { return input_; }
    /// The explicitly set output, or the most recently added layer.
    LayerId output() const { return output_.value_or(last_); }
    void set_input(LayerId id) { input_ = id; }
    void set_output(LayerId id) { output_ = id; }

    Network build() const {
        Network net;
        net.input_ = input_;
        net.output_ = output();
        net.layers_.reserve(nodes_.size());
        for (const auto& [key, n] : nodes_) {
            net.layers_.push_back(n.layer);
            net.preds_.push_back(n.preds);
        }
        net.succs_.assign(net.layers_.size(), {});
        for (std::size_t i = 0; i < net.layers_.size(); ++i)
            for (LayerId p : net.preds_[i]) {
                std::size_t j = net.find(p);
                if (j != Network::npos) net.succs_[j].push_back(net.layers_[i].id);
            }
        return net;
    }

  private:
    struct Node {
        Layer layer;
        std::vector<LayerId> preds;
    };

    Node& node(LayerId id) {
        auto it = nodes_.find(id.value);
        if (it == nodes_.end()) fail(ErrorKind::contract, "unknown layer " + to_string(id));
        return it->second;
    }
    const Node& node(LayerId id) const {
        auto it = nodes_.find(id.value);
        if (it == nodes_.end()) fail(ErrorKind::contract, "unknown layer " + to_string(id));
        return it->second;
    }

    std::map<std::uint32_t, Node> nodes_;
    std::uint32_t next_ = 0;
    LayerId input_;
    std::optional<LayerId> output_;
    LayerId last_;
};

// ---------------------------------------------------------------------------
// Validation and traversal

struct ValidationIssue {
    LayerId layer;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool ok() const { return issues.empty(); }

    bool mentions(LayerId id) const {
        return std::any_of(issues.begin(), issues.end(),
                           [id](const ValidationIssue& i) { return i.layer == id; });
    }

    std::string summary() const {
        std::ostringstream os;
        for (const auto& i : issues) os << to_string(i.layer) << ": " << i.message << "\n";
        return os.str();
    }
};

namespace detail {

// Kahn's algorithm with an ascending-id ready queue. Returns the order and,
// if the graph has a cycle, one arc lying on it.
struct TopoResult {
    std::vector<LayerId> order;
    std::optional<std::pair<LayerId, LayerId>> back_arc;
};

inline TopoResult kahn(const Network& net) {
    std::map<LayerId, std::size_t> indegree;
    for (const Layer& l : net.layers()) {
        std::size_t d = 0;
        for (LayerId p : net.predecessors(l.id))
            if (net.contains(p)) ++d;
        indegree[l.id] = d;
    }
    std::priority_queue<LayerId, std::vector<LayerId>, std::greater<>> ready;
    for (const auto& [id, d] : indegree)
        if (d == 0) ready.push(id);

    TopoResult result;
    while (!ready.empty()) {
        LayerId id = ready.top();
        ready.pop();
        result.order.push_back(id);
        for (LayerId s : net.successors(id))
            if (--indegree[s] == 0) ready.push(s);
    }
    if (result.order.size() == net.size()) return result;

    // Walk predecessors inside the stuck set until a layer repeats.
    std::map<LayerId, bool> stuck;
    for (const auto& [id, d] : indegree)
        if (d > 0) stuck[id] = true;
    LayerId cur = stuck.begin()->first;
    std::map<LayerId, int> seen;
    while (!seen.count(cur)) {
        seen[cur] = 1;
        for (LayerId p : net.predecessors(cur))
            if (stuck.count(p)) {
                if (seen.count(p)) {
                    result.back_arc = std::make_pair(p, cur);
                    return result;
                }
                cur = p;
                break;
            }
    }
    result.back_arc = std::make_pair(cur, cur);
    return result;
}

inline bool all_finite(const Layer& l) {
    return l.weight.allFinite() && l.bias.allFinite();
}

}  // namespace detail

/// Every layer appears after all of its predecessors; ties go to the smaller id.
inline std::vector<LayerId> topo_order(const Network& net) {
    auto result = detail::kahn(net);
    if (result.back_arc) {
        auto [from, to] = *result.back_arc;
        fail(ErrorKind::structural,
             "cycle detected through arc " + to_string(from) + " -> " + to_string(to));
    }
    return std::move(result.order);
}

inline ValidationReport validate(const Network& net) {
    ValidationReport report;
    auto issue = [&](LayerId id, std::string msg) { report.issues.push_back({id, std::move(msg)}); };

    if (net.size() == 0) {
        issue(LayerId{}, "network has no layers");
        return report;
    }
    if (!net.contains(net.input())) {
        issue(net.input(), "input layer is missing");
        return report;
    }
    if (!net.contains(net.output())) {
        issue(net.output(), "output layer is missing");
        return report;
    }

    std::size_t inputs = 0;
    for (const Layer& l : net.layers()) {
        auto preds = net.predecessors(l.id);
        for (LayerId p : preds)
            if (!net.contains(p)) issue(l.id, "arc from unknown layer " + to_string(p));

        auto pred_width = [&](std::size_t i) -> std::optional<std::size_t> {
            if (i >= preds.size() || !net.contains(preds[i])) return std::nullopt;
            return net.layer(preds[i]).width;
        };

        switch (l.kind) {
            case LayerKind::input:
                ++inputs;
                if (!preds.empty()) issue(l.id, "input layer has predecessors");
                if (l.id != net.input()) issue(l.id, "more than one input layer");
                break;
            case LayerKind::linear:
                if (preds.size() != 1) {
                    issue(l.id, "Linear layer must have exactly one predecessor");
                    break;
                }
                if (static_cast<std::size_t>(l.weight.rows()) != l.width ||
                    static_cast<std::size_t>(l.bias.size()) != l.width)
                    issue(l.id, "Linear weight rows / bias length differ from layer width");
                if (auto w = pred_width(0); w && static_cast<std::size_t>(l.weight.cols()) != *w)
                    issue(l.id, "Linear weight columns differ from predecessor width");
                if (!detail::all_finite(l)) issue(l.id, "non-finite weight or bias entry");
                break;
            case LayerKind::relu:
                if (preds.size() != 1) {
                    issue(l.id, "ReLU layer must have exactly one predecessor");
                    break;
                }
                if (auto w = pred_width(0); w && *w != l.width)
                    issue(l.id, "ReLU width differs from predecessor width");
                break;
            case LayerKind::sum:
                if (preds.empty()) issue(l.id, "Sum layer has no predecessors");
                for (std::size_t i = 0; i < preds.size(); ++i)
                    if (auto w = pred_width(i); w && *w != l.width)
                        issue(l.id, "Sum predecessor " + to_string(preds[i]) + " has mismatched width");
                break;
        }
        if (l.kind != LayerKind::input && preds.empty() && l.kind != LayerKind::sum)
            issue(l.id, "non-input layer without predecessors");
    }
    if (inputs == 0) issue(net.input(), "network has no input layer");
    if (net.layer(net.input()).kind != LayerKind::input) issue(net.input(), "designated input is not an Input layer");
    if (!net.successors(net.output()).empty())
        issue(net.output(), "output layer has successors; output must be the unique sink");

    auto topo = detail::kahn(net);
    if (topo.back_arc) {
        issue(topo.back_arc->second, "cycle through arc " + to_string(topo.back_arc->first) + " -> " +
                                         to_string(topo.back_arc->second));
        return report;
    }

    // Reachability both ways.
    std::map<LayerId, bool> from_input, to_output;
    std::vector<LayerId> stack{net.input()};
    while (!stack.empty()) {
        LayerId id = stack.back();
        stack.pop_back();
        if (from_input[id]) continue;
        from_input[id] = true;
        for (LayerId s : net.successors(id)) stack.push_back(s);
    }
    stack = {net.output()};
    while (!stack.empty()) {
        LayerId id = stack.back();
        stack.pop_back();
        if (to_output[id]) continue;
        to_output[id] = true;
        for (LayerId p : net.predecessors(id))
            if (net.contains(p)) stack.push_back(p);
    }
    for (const Layer& l : net.layers()) {
        if (!from_input[l.id]) issue(l.id, "layer is not reachable from the input");
        if (!to_output[l.id]) issue(l.id, "layer does not reach the output");
    }
    return report;
}

/// Exact evaluation of F(a), layer by layer in topological order.
inline Vector forward(const Network& net, const Vector& a) {
    require(static_cast<std::size_t>(a.size()) == net.input_width(),
            "forward: input length " + std::to_string(a.size()) + " != input width " +
                std::to_string(net.input_width()));
    std::map<LayerId, Vector> values;
    for (LayerId id : topo_order(net)) {
        const Layer& l = net.layer(id);
        auto preds = net.predecessors(id);
        switch (l.kind) {
            case LayerKind::input: values[id] = a; break;
            case LayerKind::linear: values[id] = l.weight * values.at(preds[0]) + l.bias; break;
            case LayerKind::relu: values[id] = values.at(preds[0]).cwiseMax(0.0); break;
            case LayerKind::sum: {
                Vector acc = Vector::Zero(static_cast<Eigen::Index>(l.width));
                for (LayerId p : preds) acc += values.at(p);
                values[id] = std::move(acc);
                break;
            }
        }
    }
    return values.at(net.output());
}

// ---------------------------------------------------------------------------
// Sequential view

struct AffineMap {
    Matrix weight;
    Vector bias;

    std::size_t rows() const { return static_cast<std::size_t>(weight.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(weight.cols()); }

    Vector operator()(const Vector& x) const { return weight * x + bias; }

    static AffineMap identity(std::size_t n) {
        auto k = static_cast<Eigen::Index>(n);
        return {Matrix::Identity(k, k), Vector::Zero(k)};
    }
};

/// outer(inner(x)) as one map.
inline AffineMap compose(const AffineMap& outer, const AffineMap& inner) {
    return {outer.weight * inner.weight, outer.weight * inner.bias + outer.bias};
}

/// affine[0] -> ReLU -> affine[1] -> ... -> ReLU -> affine[n-1].
struct AffineChain {
    std::vector<AffineMap> affine;

    std::size_t input_width() const { return affine.front().cols(); }
    std::size_t output_width() const { return affine.back().rows(); }
    std::size_t relu_layers() const { return affine.empty() ? 0 : affine.size() - 1; }

    std::vector<std::size_t> relu_widths() const {
        std::vector<std::size_t> out;
        for (std::size_t k = 0; k + 1 < affine.size(); ++k) out.push_back(affine[k].rows());
        return out;
    }

    std::size_t relu_neurons() const {
        std::size_t n = 0;
        for (std::size_t w : relu_widths()) n += w;
        return n;
    }
};

inline Vector forward(const AffineChain& chain, const Vector& a) {
    require(static_cast<std::size_t>(a.size()) == chain.input_width(), "forward: input width mismatch");
    Vector x = chain.affine.front()(a);
    for (std::size_t k = 1; k < chain.affine.size(); ++k) x = chain.affine[k](x.cwiseMax(0.0));
    return x;
}

/// True for Input -> Linear -> (ReLU -> Linear)* with every layer on one chain.
inline bool is_sequential(const Network& net) {
    if (!validate(net).ok()) return false;
    LayerId cur = net.input();
    LayerKind expect = LayerKind::linear;
    std::size_t visited = 1;
    while (cur != net.output()) {
        auto succ = net.successors(cur);
        if (succ.size() != 1) return false;
        cur = succ[0];
        const Layer& l = net.layer(cur);
        if (l.kind != expect || net.predecessors(cur).size() != 1) return false;
        expect = expect == LayerKind::linear ? LayerKind::relu : LayerKind::linear;
        ++visited;
    }
    return visited == net.size() && net.layer(cur).kind == LayerKind::linear;
}

inline AffineChain to_chain(const Network& net) {
    if (!is_sequential(net))
        fail(ErrorKind::contract,
             "network is not sequential (expected Input -> Linear -> (ReLU -> Linear)*); run simplify first");
    AffineChain chain;
    LayerId cur = net.input();
    while (cur != net.output()) {
        cur = net.successors(cur)[0];
        const Layer& l = net.layer(cur);
        if (l.kind == LayerKind::linear) chain.affine.push_back({l.weight, l.bias});
    }
    return chain;
}

inline Network to_network(const AffineChain& chain) {
    require(!chain.affine.empty(), "empty affine chain");
    NetworkBuilder b;
    LayerId cur = b.add_input(chain.input_width());
    for (std::size_t k = 0; k < chain.affine.size(); ++k) {
        if (k > 0) cur = b.add_relu(cur);
        cur = b.add_linear(cur, chain.affine[k].weight, chain.affine[k].bias);
    }
    b.set_output(cur);
    return b.build();
}

}  // namespace redkit
