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

// Linear lowerings of tensor operators: dense convolution matrices, index
// selectors and pairwise-max trees for pooling.

#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "redkit/net_ir.hpp"

namespace redkit {

using Shape = std::vector<std::int64_t>;

inline std::int64_t numel(const Shape& s) {
    return std::accumulate(s.begin(), s.end(), std::int64_t{1}, std::multiplies<>());
}

inline std::string to_string(const Shape& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
    return out + "]";
}

/// Dense row-major tensor.
struct Tensor {
    Shape shape;
    std::vector<double> data;

    std::int64_t size() const { return numel(shape); }
    double at(std::initializer_list<std::int64_t> idx) const {
        std::int64_t flat = 0;
        std::size_t d = 0;
        for (std::int64_t i : idx) flat = flat * shape[d++] + i;
        return data[static_cast<std::size_t>(flat)];
    }
};

struct Conv2dParams {
    std::int64_t stride_h = 1, stride_w = 1;
    std::int64_t pad_top = 0, pad_left = 0, pad_bottom = 0, pad_right = 0;
    std::int64_t dilation_h = 1, dilation_w = 1;
    std::int64_t groups = 1;
};

/// Output spatial size of a sliding window.
inline std::int64_t window_out(std::int64_t in, std::int64_t k, std::int64_t stride, std::int64_t pad_lo,
                               std::int64_t pad_hi, std::int64_t dilation, bool ceil_mode = false) {
    std::int64_t span = dilation * (k - 1) + 1;
    std::int64_t num = in + pad_lo + pad_hi - span;
    if (num < 0) return 0;
    if (!ceil_mode) return num / stride + 1;
    std::int64_t out = (num + stride - 1) / stride + 1;
    // The last window must start inside the input or the leading padding.
    if ((out - 1) * stride >= in + pad_lo) --out;
    return out;
}

struct ConvLowering {
    AffineMap map;
    Shape output_shape;  // (C_out, H_out, W_out)
};

/// conv(x) = M . flatten(x) + B for an input of shape (C, H, W) and a kernel
/// of shape (C_out, C / groups, kH, kW); flattening is row-major.
inline ConvLowering conv_to_matrix(const Tensor& kernel, const Vector& bias, const Conv2dParams& p,
                                   const Shape& input_shape) {
    require(input_shape.size() == 3, "conv_to_matrix: input shape must be (C, H, W)");
    require(kernel.shape.size() == 4, "conv_to_matrix: kernel must be (C_out, C_in/groups, kH, kW)");
    const std::int64_t c_in = input_shape[0], h = input_shape[1], w = input_shape[2];
    const std::int64_t c_out = kernel.shape[0], c_grp = kernel.shape[1], kh = kernel.shape[2], kw = kernel.shape[3];
    require(p.groups >= 1 && c_in % p.groups == 0 && c_out % p.groups == 0, "conv_to_matrix: channels not divisible by groups");
    require(c_grp == c_in / p.groups, "conv_to_matrix: kernel channel count does not match input");
    require(bias.size() == 0 || bias.size() == c_out, "conv_to_matrix: bias length != output channels");
    require(p.stride_h > 0 && p.stride_w > 0 && p.dilation_h > 0 && p.dilation_w > 0, "conv_to_matrix: strides and dilations must be positive");
    const std::int64_t ho = window_out(h, kh, p.stride_h, p.pad_top, p.pad_bottom, p.dilation_h);
    const std::int64_t wo = window_out(w, kw, p.stride_w, p.pad_left, p.pad_right, p.dilation_w);
    if (ho <= 0 || wo <= 0) fail(ErrorKind::contract, "conv_to_matrix: non-positive output size");

    const std::int64_t out_per_group = c_out / p.groups;
    ConvLowering out;
    out.output_shape = {c_out, ho, wo};
    out.map.weight = Matrix::Zero(c_out * ho * wo, c_in * h * w);
    out.map.bias = Vector::Zero(c_out * ho * wo);
    for (std::int64_t co = 0; co < c_out; ++co) {
        const std::int64_t g = co / out_per_group;
        for (std::int64_t oy = 0; oy < ho; ++oy)
            for (std::int64_t ox = 0; ox < wo; ++ox) {
                const std::int64_t row = (co * ho + oy) * wo + ox;
                if (bias.size() > 0) out.map.bias[row] = bias[co];
                for (std::int64_t ci = 0; ci < c_grp; ++ci)
                    for (std::int64_t ky = 0; ky < kh; ++ky) {
                        const std::int64_t iy = oy * p.stride_h - p.pad_top + ky * p.dilation_h;
                        if (iy < 0 || iy >= h) continue;
                        for (std::int64_t kx = 0; kx < kw; ++kx) {
                            const std::int64_t ix = ox * p.stride_w - p.pad_left + kx * p.dilation_w;
                            if (ix < 0 || ix >= w) continue;
                            const std::int64_t col = ((g * c_grp + ci) * h + iy) * w + ix;
                            out.map.weight(row, col) += kernel.at({co, ci, ky, kx});
                        }
                    }
            }
    }
    return out;
}

/// Matrix with out[i] = x[src[i]] (rows with src[i] < 0 stay zero).
inline Matrix selector_matrix(const std::vector<std::int64_t>& src, std::int64_t in_width) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(src.size()), in_width);
    for (std::size_t i = 0; i < src.size(); ++i)
        if (src[i] >= 0) m(static_cast<Eigen::Index>(i), src[i]) = 1.0;
    return m;
}

struct PoolParams {
    std::int64_t kernel_h = 1, kernel_w = 1;
    std::int64_t stride_h = 1, stride_w = 1;
    std::int64_t pad_top = 0, pad_left = 0, pad_bottom = 0, pad_right = 0;
    std::int64_t dilation_h = 1, dilation_w = 1;
    bool ceil_mode = false;
};

struct PoolWindows {
    std::vector<std::vector<std::size_t>> windows;  // flat input indices, padding excluded
    Shape output_shape;                             // (C, H_out, W_out)
};

/// Per output position of a 2-D pool over (C, H, W), the covered input
/// indices in row-major window order.
inline PoolWindows pool_windows(const Shape& input_shape, const PoolParams& p) {
    require(input_shape.size() == 3, "pool: input shape must be (C, H, W)");
    const std::int64_t c = input_shape[0], h = input_shape[1], w = input_shape[2];
    const std::int64_t ho = window_out(h, p.kernel_h, p.stride_h, p.pad_top, p.pad_bottom, p.dilation_h, p.ceil_mode);
    const std::int64_t wo = window_out(w, p.kernel_w, p.stride_w, p.pad_left, p.pad_right, p.dilation_w, p.ceil_mode);
    if (ho <= 0 || wo <= 0) fail(ErrorKind::contract, "pool: non-positive output size");
    PoolWindows out;
    out.output_shape = {c, ho, wo};
    for (std::int64_t ch = 0; ch < c; ++ch)
        for (std::int64_t oy = 0; oy < ho; ++oy)
            for (std::int64_t ox = 0; ox < wo; ++ox) {
                std::vector<std::size_t> win;
                for (std::int64_t ky = 0; ky < p.kernel_h; ++ky) {
                    std::int64_t iy = oy * p.stride_h - p.pad_top + ky * p.dilation_h;
                    if (iy < 0 || iy >= h) continue;
                    for (std::int64_t kx = 0; kx < p.kernel_w; ++kx) {
                        std::int64_t ix = ox * p.stride_w - p.pad_left + kx * p.dilation_w;
                        if (ix < 0 || ix >= w) continue;
                        win.push_back(static_cast<std::size_t>((ch * h + iy) * w + ix));
                    }
                }
                if (win.empty()) fail(ErrorKind::contract, "pool: window covers only padding");
                out.windows.push_back(std::move(win));
            }
    return out;
}

/// Appends layers computing out[j] = max over windows[j] of pred's output,
/// using max(x, y) = ReLU(x - y) + y. Windows are reduced pairwise left to
/// right, one tree level per ReLU layer, all windows in parallel. Each level
/// is Linear(x - y) -> ReLU -> Linear, summed with a Linear passing y and
/// any unpaired element. Returns the final layer; `gadgets` counts pairs.
inline LayerId lower_max(NetworkBuilder& b, LayerId pred, const std::vector<std::vector<std::size_t>>& windows,
                         std::size_t* gadgets = nullptr) {
    std::int64_t width = static_cast<std::int64_t>(b.width(pred));
    std::vector<std::vector<std::int64_t>> slots;
    for (const auto& win : windows) {
        require(!win.empty(), "lower_max: empty window");
        std::vector<std::int64_t> s;
        for (std::size_t i : win) {
            require(static_cast<std::int64_t>(i) < width, "lower_max: window index out of range");
            s.push_back(static_cast<std::int64_t>(i));
        }
        slots.push_back(std::move(s));
    }
    std::size_t pairs_total = 0;
    LayerId cur = pred;
    auto deepest = [&] {
        std::size_t m = 0;
        for (const auto& s : slots) m = std::max(m, s.size());
        return m;
    };
    while (deepest() > 1) {
        std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
        // New layer layout: one entry per pair, then carried entries.
        std::vector<std::int64_t> carried;
        std::vector<std::vector<std::pair<bool, std::int64_t>>> plan(slots.size());
        for (std::size_t j = 0; j < slots.size(); ++j) {
            const auto& s = slots[j];
            for (std::size_t i = 0; i + 1 < s.size(); i += 2) {
                plan[j].push_back({true, static_cast<std::int64_t>(pairs.size())});
                pairs.push_back({s[i], s[i + 1]});
            }
            if (s.size() % 2) {
                plan[j].push_back({false, static_cast<std::int64_t>(carried.size())});
                carried.push_back(s.back());
            }
        }
        const auto np = static_cast<Eigen::Index>(pairs.size());
        const auto nc = static_cast<Eigen::Index>(carried.size());
        Matrix diff = Matrix::Zero(np, width);
        Matrix pass = Matrix::Zero(np + nc, width);
        for (Eigen::Index i = 0; i < np; ++i) {
            diff(i, pairs[static_cast<std::size_t>(i)].first) += 1.0;
            diff(i, pairs[static_cast<std::size_t>(i)].second) -= 1.0;
            pass(i, pairs[static_cast<std::size_t>(i)].second) = 1.0;
        }
        for (Eigen::Index i = 0; i < nc; ++i) pass(np + i, carried[static_cast<std::size_t>(i)]) = 1.0;
        Matrix up = Matrix::Zero(np + nc, np);
        up.topRows(np).setIdentity();

        LayerId d = b.add_linear(cur, diff, Vector::Zero(np));
        LayerId r = b.add_relu(d);
        LayerId u = b.add_linear(r, up, Vector::Zero(np + nc));
        LayerId y = b.add_linear(cur, pass, Vector::Zero(np + nc));
        cur = b.add_sum({u, y});
        width = np + nc;
        pairs_total += pairs.size();
        for (std::size_t j = 0; j < slots.size(); ++j) {
            slots[j].clear();
            for (auto [is_pair, k] : plan[j]) slots[j].push_back(is_pair ? k : np + k);
        }
    }
    if (gadgets) *gadgets = pairs_total;
    std::vector<std::int64_t> final_src;
    for (const auto& s : slots) final_src.push_back(s.front());
    bool identity = static_cast<std::int64_t>(final_src.size()) == width;
    for (std::size_t i = 0; identity && i < final_src.size(); ++i) identity = final_src[i] == static_cast<std::int64_t>(i);
    if (identity && cur != pred) return cur;
    return b.add_linear(cur, selector_matrix(final_src, width), Vector::Zero(static_cast<Eigen::Index>(final_src.size())));
}

}  // namespace redkit
