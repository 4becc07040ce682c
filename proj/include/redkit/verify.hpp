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

// Bound-propagation verifier: a one-shot margin check and a depth-first
// ReLU-splitting search whose subproblems are reduced networks.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "redkit/bound_engine.hpp"
#include "redkit/equivalence.hpp"
#include "redkit/reducer.hpp"
#include "redkit/spec_io.hpp"

namespace redkit {

enum class VerifyStatus { verified, unknown, timed_out };

inline const char* to_string(VerifyStatus s) {
    switch (s) {
        case VerifyStatus::verified: return "verified";
        case VerifyStatus::unknown: return "unknown";
        case VerifyStatus::timed_out: return "timeout";
    }
    return "?";
}

struct Verdict {
    VerifyStatus status = VerifyStatus::unknown;
    std::size_t splits_used = 0;
    double wall_time = 0.0;
    /// Smallest constraint lower bound seen at the root (incomplete check) or
    /// over the leaves that were closed (search).
    double bound_achieved = -std::numeric_limits<double>::infinity();
    std::size_t leaves = 0;
};

struct VerifyOptions {
    BoundOptions bounds;
    double timeout_s = 60.0;
    std::size_t max_splits = std::numeric_limits<std::size_t>::max();
};

namespace detail {

inline void check_spec(const AffineChain& chain, const PropertySpec& spec) {
    require(spec.box.size() == chain.input_width(), "property input width != network input width");
    require(spec.constraints.empty() || spec.output_width == chain.output_width(),
            "property output width != network output width");
}

struct MarginCheck {
    bool proven = true;
    double worst = std::numeric_limits<double>::infinity();
};

/// Bounds every constraint with `table` holding the hidden-layer bounds.
inline MarginCheck check_margins(const AffineChain& chain, const PropertySpec& spec, const BoundOptions& opt,
                                 const BoundsTable& table) {
    MarginCheck out;
    for (const auto& c : spec.constraints) {
        double lb = margin_lower_bound(chain, spec.box, c.coeffs, opt, &table) + c.offset;
        out.worst = std::min(out.worst, lb);
        if (!c.proven_by(lb)) out.proven = false;
    }
    return out;
}

}  // namespace detail

/// Verified iff every constraint's margin lower bound establishes it.
inline Verdict verify_incomplete(const AffineChain& chain, const PropertySpec& spec, const BoundOptions& opt = {}) {
    detail::check_spec(chain, spec);
    auto start = std::chrono::steady_clock::now();
    Verdict v;
    BoundsTable table = compute_bounds(chain, spec.box, opt);
    auto m = detail::check_margins(chain, spec, opt, table);
    v.status = m.proven ? VerifyStatus::verified : VerifyStatus::unknown;
    v.bound_achieved = m.worst;
    v.leaves = 1;
    v.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return v;
}

/// Unstable neuron with the widest pre-activation interval; ties go to the
/// lowest (layer, index).
struct SplitChoice {
    std::size_t layer = 0;
    std::size_t neuron = 0;
};

inline std::optional<SplitChoice> choose_split(const BoundsTable& table) {
    std::optional<SplitChoice> best;
    double best_width = -1.0;
    for (std::size_t k = 0; k < table.relu_layers(); ++k) {
        const Bounds& b = table.layers[k];
        for (Eigen::Index i = 0; i < b.lower.size(); ++i) {
            if (!(b.lower[i] < 0.0 && b.upper[i] > 0.0)) continue;
            double w = b.upper[i] - b.lower[i];
            if (w > best_width) {
                best_width = w;
                best = SplitChoice{k, static_cast<std::size_t>(i)};
            }
        }
    }
    return best;
}

/// Depth-first search over ReLU splits. A node is a network equal to the
/// original on its subdomain together with pre-activation bounds valid
/// there; splitting one unstable neuron yields two reduced networks, one with
/// the neuron removed and one with it merged as always active.
inline Verdict bab_verify(const AffineChain& chain, const PropertySpec& spec, const VerifyOptions& opt = {}) {
    detail::check_spec(chain, spec);
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };

    Verdict v;
    v.bound_achieved = std::numeric_limits<double>::infinity();
    struct Node {
        AffineChain chain;
        BoundsTable prior;
    };
    std::vector<Node> stack;
    stack.push_back({chain, {}});

    ReduceOptions red_opt;
    red_opt.bounds = opt.bounds;

    while (!stack.empty()) {
        if (elapsed() > opt.timeout_s) {
            v.status = VerifyStatus::timed_out;
            v.wall_time = elapsed();
            return v;
        }
        Node node = std::move(stack.back());
        stack.pop_back();

        BoundsTable table = compute_bounds(node.chain, spec.box, opt.bounds, node.prior.layers.empty() ? nullptr : &node.prior);
        if (table.infeasible) {  // split constraints contradict: empty subdomain
            ++v.leaves;
            continue;
        }
        auto m = detail::check_margins(node.chain, spec, opt.bounds, table);
        if (m.proven) {
            ++v.leaves;
            v.bound_achieved = std::min(v.bound_achieved, m.worst);
            continue;
        }
        auto split = choose_split(table);
        if (!split || v.splits_used >= opt.max_splits) {
            v.status = VerifyStatus::unknown;
            v.bound_achieved = std::min(v.bound_achieved, m.worst);
            v.wall_time = elapsed();
            return v;
        }
        ++v.splits_used;

        std::vector<LayerPartition> parts = classify(table);
        LayerPartition& p = parts[split->layer];
        p.unstable.erase(std::find(p.unstable.begin(), p.unstable.end(), split->neuron));

        // Active branch pushed first so the inactive branch is explored first.
        LayerPartition active = p, inactive = p;
        active.activated.push_back(split->neuron);
        std::sort(active.activated.begin(), active.activated.end());
        inactive.deactivated.push_back(split->neuron);
        std::sort(inactive.deactivated.begin(), inactive.deactivated.end());

        for (const LayerPartition* branch : {&active, &inactive}) {
            parts[split->layer] = *branch;
            ReduceOptions o = red_opt;
            if (branch == &active) o.force_merge_layers.push_back(split->layer);
            ReductionResult r = reduce_with_partitions(node.chain, spec.box, table, parts, o);
            stack.push_back({std::move(r.chain), std::move(r.bounds)});
        }
    }
    v.status = VerifyStatus::verified;
    if (v.leaves == 0) v.bound_achieved = 0.0;
    v.wall_time = elapsed();
    return v;
}

/// Searches a grid (or, above the grid width limit, seeded samples and
/// corners) for an input violating the property. Returns the first one found.
inline std::optional<Vector> find_counterexample(const AffineChain& chain, const PropertySpec& spec,
                                                 std::size_t points = 10000, std::uint64_t seed = 0) {
    std::vector<Vector> candidates;
    const std::size_t d = spec.box.size();
    std::size_t per_dim = d == 0 ? 1 : static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(points), 1.0 / static_cast<double>(d)) + 1e-9));
    if (d <= max_grid_width && per_dim >= 2) {
        candidates = box_grid(spec.box, per_dim);
    } else {
        candidates = sample_box(spec.box, points, seed);
        for (Vector& c : box_corners(spec.box, seed)) candidates.push_back(std::move(c));
    }
    std::vector<char> bad(candidates.size(), 0);
    parallel_for(candidates.size(), [&](std::size_t i) { bad[i] = !spec.holds(forward(chain, candidates[i])); });
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (bad[i]) return candidates[i];
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Original-vs-reduced timing

struct BenchRun {
    Verdict verdict;
    std::vector<double> times;
    double median_time = 0.0;
};

struct BenchResult {
    BenchRun original;
    BenchRun reduced;
    double speedup = 1.0;  // median original / median reduced
    bool agree = true;     // same verdict, or the reduced network strictly stronger
};

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Runs the same search on both networks `repeats` times each.
inline BenchResult bench_pair(const AffineChain& original, const AffineChain& reduced, const PropertySpec& spec,
                              std::size_t repeats, const VerifyOptions& opt = {}, double equiv_tol = 1e-6) {
    require(repeats > 0, "bench: repeats must be positive");
    EquivReport eq = sample_equivalence(original, reduced, spec.box, 1000, 0);
    if (!eq.within(equiv_tol))
        fail(ErrorKind::contract, "bench: networks differ on the box (max diff " + std::to_string(eq.max_abs_diff) + ")");

    auto run = [&](const AffineChain& c) {
        BenchRun r;
        for (std::size_t i = 0; i < repeats; ++i) {
            auto t0 = std::chrono::steady_clock::now();
            Verdict v = bab_verify(c, spec, opt);
            r.times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            if (i == 0) r.verdict = v;
            else if (v.status != VerifyStatus::timed_out && r.verdict.status != VerifyStatus::timed_out &&
                     (v.status != r.verdict.status || v.splits_used != r.verdict.splits_used))
                fail(ErrorKind::internal, "bench: verifier is not deterministic");
        }
        r.median_time = median(r.times);
        return r;
    };
    BenchResult out;
    out.original = run(original);
    out.reduced = run(reduced);
    out.speedup = out.reduced.median_time > 0.0 ? out.original.median_time / out.reduced.median_time : 1.0;
    out.agree = out.original.verdict.status == out.reduced.verdict.status ||
                out.reduced.verdict.status == VerifyStatus::verified;
    return out;
}

}  // namespace redkit
