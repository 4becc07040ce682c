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

#include "redkit/onnx_bridge.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "onnx.pb.h"

namespace redkit {

namespace {

// ---------------------------------------------------------------------------
// Tensors and shapes

Tensor tensor_from_proto(const onnx::TensorProto& t) {
    Tensor out;
    out.shape.assign(t.dims().begin(), t.dims().end());
    const auto n = static_cast<std::size_t>(numel(out.shape));
    out.data.resize(n);
    const std::string& raw = t.raw_data();
    auto from_raw = [&](auto sample) {
        using T = decltype(sample);
        if (raw.size() != n * sizeof(T))
            fail(ErrorKind::parse, "tensor '" + t.name() + "': raw data size does not match its shape");
        for (std::size_t i = 0; i < n; ++i) {
            T v;
            std::memcpy(&v, raw.data() + i * sizeof(T), sizeof(T));
            out.data[i] = static_cast<double>(v);
        }
    };
    auto from_field = [&](const auto& field) {
        if (static_cast<std::size_t>(field.size()) != n)
            fail(ErrorKind::parse, "tensor '" + t.name() + "': element count does not match its shape");
        for (std::size_t i = 0; i < n; ++i) out.data[i] = static_cast<double>(field.Get(static_cast<int>(i)));
    };
    switch (t.data_type()) {
        case onnx::TensorProto::FLOAT:
            raw.empty() ? from_field(t.float_data()) : from_raw(float{});
            break;
        case onnx::TensorProto::DOUBLE:
            raw.empty() ? from_field(t.double_data()) : from_raw(double{});
            break;
        case onnx::TensorProto::INT64:
            raw.empty() ? from_field(t.int64_data()) : from_raw(std::int64_t{});
            break;
        case onnx::TensorProto::INT32:
            raw.empty() ? from_field(t.int32_data()) : from_raw(std::int32_t{});
            break;
        case onnx::TensorProto::INT8:
            raw.empty() ? from_field(t.int32_data()) : from_raw(std::int8_t{});
            break;
        case onnx::TensorProto::UINT8:
            raw.empty() ? from_field(t.int32_data()) : from_raw(std::uint8_t{});
            break;
        case onnx::TensorProto::BOOL:
            raw.empty() ? from_field(t.int32_data()) : from_raw(std::uint8_t{});
            break;
        default:
            fail(ErrorKind::unsupported, "tensor '" + t.name() + "' has unsupported element type " +
                                             std::to_string(t.data_type()));
    }
    return out;
}

std::vector<std::int64_t> strides_of(const Shape& s) {
    std::vector<std::int64_t> st(s.size(), 1);
    for (std::size_t d = s.size(); d-- > 1;) st[d - 1] = st[d] * s[d];
    return st;
}

Shape broadcast_shape(const Shape& a, const Shape& b) {
    std::size_t r = std::max(a.size(), b.size());
    Shape out(r);
    for (std::size_t i = 0; i < r; ++i) {
        std::int64_t da = i < r - a.size() ? 1 : a[i - (r - a.size())];
        std::int64_t db = i < r - b.size() ? 1 : b[i - (r - b.size())];
        if (da != db && da != 1 && db != 1)
            fail(ErrorKind::unsupported, "shapes " + to_string(a) + " and " + to_string(b) + " do not broadcast");
        out[i] = std::max(da, db);
    }
    return out;
}

/// For every element of `out` (row-major), the index of the element of a
/// tensor shaped `in` that broadcasting reads.
std::vector<std::int64_t> broadcast_src(const Shape& in, const Shape& out) {
    const std::size_t r = out.size(), off = r - in.size();
    auto in_st = strides_of(in);
    std::vector<std::int64_t> src(static_cast<std::size_t>(numel(out)));
    std::vector<std::int64_t> idx(r, 0);
    for (std::size_t flat = 0; flat < src.size(); ++flat) {
        std::int64_t s = 0;
        for (std::size_t d = off; d < r; ++d)
            if (in[d - off] != 1) s += idx[d] * in_st[d - off];
        src[flat] = s;
        for (std::size_t d = r; d-- > 0;) {
            if (++idx[d] < out[d]) break;
            idx[d] = 0;
        }
    }
    return src;
}

std::int64_t norm_axis(std::int64_t axis, std::size_t rank) {
    std::int64_t r = static_cast<std::int64_t>(rank);
    if (axis < 0) axis += r;
    if (axis < 0 || axis >= std::max<std::int64_t>(r, 1)) fail(ErrorKind::unsupported, "axis out of range");
    return axis;
}

Tensor iota(const Shape& s, double base = 0.0) {
    Tensor t{s, std::vector<double>(static_cast<std::size_t>(numel(s)))};
    for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] = base + static_cast<double>(i);
    return t;
}

Tensor transpose(const Tensor& t, const std::vector<std::int64_t>& perm) {
    Shape out_shape(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) out_shape[i] = t.shape[static_cast<std::size_t>(perm[i])];
    auto in_st = strides_of(t.shape);
    Tensor out{out_shape, std::vector<double>(t.data.size())};
    std::vector<std::int64_t> idx(perm.size(), 0);
    for (std::size_t flat = 0; flat < out.data.size(); ++flat) {
        std::int64_t s = 0;
        for (std::size_t d = 0; d < perm.size(); ++d) s += idx[d] * in_st[static_cast<std::size_t>(perm[d])];
        out.data[flat] = t.data[static_cast<std::size_t>(s)];
        for (std::size_t d = perm.size(); d-- > 0;) {
            if (++idx[d] < out_shape[d]) break;
            idx[d] = 0;
        }
    }
    return out;
}

/// Elements with index in [begin, end) along `axis`, stepping by `step`.
Tensor slice_axis(const Tensor& t, std::int64_t axis, std::int64_t begin, std::int64_t end, std::int64_t step) {
    std::size_t a = static_cast<std::size_t>(axis);
    std::vector<std::int64_t> keep;
    if (step > 0)
        for (std::int64_t i = begin; i < end; i += step) keep.push_back(i);
    else
        for (std::int64_t i = begin; i > end; i += step) keep.push_back(i);
    Shape out_shape = t.shape;
    out_shape[a] = static_cast<std::int64_t>(keep.size());
    std::int64_t outer = 1, inner = 1;
    for (std::size_t d = 0; d < a; ++d) outer *= t.shape[d];
    for (std::size_t d = a + 1; d < t.shape.size(); ++d) inner *= t.shape[d];
    Tensor out{out_shape, {}};
    out.data.reserve(static_cast<std::size_t>(numel(out_shape)));
    for (std::int64_t o = 0; o < outer; ++o)
        for (std::int64_t k : keep)
            for (std::int64_t i = 0; i < inner; ++i)
                out.data.push_back(t.data[static_cast<std::size_t>((o * t.shape[a] + k) * inner + i)]);
    return out;
}

Tensor concat(const std::vector<Tensor>& parts, std::int64_t axis) {
    std::size_t a = static_cast<std::size_t>(axis);
    Shape out_shape = parts.front().shape;
    out_shape[a] = 0;
    for (const auto& p : parts) {
        if (p.shape.size() != out_shape.size()) fail(ErrorKind::unsupported, "Concat: rank mismatch");
        for (std::size_t d = 0; d < out_shape.size(); ++d)
            if (d != a && p.shape[d] != parts.front().shape[d]) fail(ErrorKind::unsupported, "Concat: shape mismatch");
        out_shape[a] += p.shape[a];
    }
    std::int64_t outer = 1, inner = 1;
    for (std::size_t d = 0; d < a; ++d) outer *= out_shape[d];
    for (std::size_t d = a + 1; d < out_shape.size(); ++d) inner *= out_shape[d];
    Tensor out{out_shape, {}};
    for (std::int64_t o = 0; o < outer; ++o)
        for (const auto& p : parts) {
            std::int64_t chunk = p.shape[a] * inner;
            auto first = p.data.begin() + o * chunk;
            out.data.insert(out.data.end(), first, first + chunk);
        }
    return out;
}

Tensor gather(const Tensor& data, const Tensor& indices, std::int64_t axis) {
    std::size_t a = static_cast<std::size_t>(axis);
    Shape out_shape(data.shape.begin(), data.shape.begin() + static_cast<std::ptrdiff_t>(a));
    out_shape.insert(out_shape.end(), indices.shape.begin(), indices.shape.end());
    out_shape.insert(out_shape.end(), data.shape.begin() + static_cast<std::ptrdiff_t>(a) + 1, data.shape.end());
    std::int64_t outer = 1, inner = 1;
    for (std::size_t d = 0; d < a; ++d) outer *= data.shape[d];
    for (std::size_t d = a + 1; d < data.shape.size(); ++d) inner *= data.shape[d];
    Tensor out{out_shape, {}};
    for (std::int64_t o = 0; o < outer; ++o)
        for (double fi : indices.data) {
            auto k = static_cast<std::int64_t>(fi);
            if (k < 0) k += data.shape[a];
            if (k < 0 || k >= data.shape[a]) fail(ErrorKind::unsupported, "Gather: index out of range");
            for (std::int64_t i = 0; i < inner; ++i)
                out.data.push_back(data.data[static_cast<std::size_t>((o * data.shape[a] + k) * inner + i)]);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Attributes

const onnx::AttributeProto* find_attr(const onnx::NodeProto& n, const std::string& name) {
    for (const auto& a : n.attribute())
        if (a.name() == name) return &a;
    return nullptr;
}
std::int64_t attr_int(const onnx::NodeProto& n, const std::string& name, std::int64_t dflt) {
    const auto* a = find_attr(n, name);
    return a ? a->i() : dflt;
}
double attr_float(const onnx::NodeProto& n, const std::string& name, double dflt) {
    const auto* a = find_attr(n, name);
    return a ? static_cast<double>(a->f()) : dflt;
}
std::string attr_string(const onnx::NodeProto& n, const std::string& name, const std::string& dflt) {
    const auto* a = find_attr(n, name);
    return a ? a->s() : dflt;
}
std::optional<std::vector<std::int64_t>> attr_ints(const onnx::NodeProto& n, const std::string& name) {
    const auto* a = find_attr(n, name);
    if (!a) return std::nullopt;
    return std::vector<std::int64_t>(a->ints().begin(), a->ints().end());
}

// ---------------------------------------------------------------------------
// Importer

const std::vector<std::string> kSupported = {
    "Gemm", "MatMul", "Conv", "BatchNormalization", "Add", "Sub", "Mul", "Div", "Concat", "Split",
    "Slice", "Gather", "Reshape", "Flatten", "Squeeze", "Unsqueeze", "Transpose", "Identity", "Dropout",
    "Relu", "MaxPool", "AveragePool", "GlobalAveragePool", "Constant", "Shape", "Cast"};

struct Value {
    bool is_const = false;
    Tensor tensor;      // constant data
    LayerId layer{};    // variable data
    Shape shape;        // variable shape (constants use tensor.shape)

    const Shape& dims() const { return is_const ? tensor.shape : shape; }
};

class Importer {
  public:
    explicit Importer(const onnx::ModelProto& m) : model_(m) {}

    ImportResult run() {
        const auto& g = model_.graph();
        std::set<std::string> init_names;
        for (const auto& t : g.initializer()) {
            init_names.insert(t.name());
            Value v;
            v.is_const = true;
            v.tensor = tensor_from_proto(t);
            values_[t.name()] = std::move(v);
        }
        std::vector<const onnx::ValueInfoProto*> inputs;
        for (const auto& vi : g.input())
            if (!init_names.count(vi.name())) inputs.push_back(&vi);
        if (inputs.size() != 1)
            fail(ErrorKind::unsupported, "model must have exactly one graph input tensor (found " + std::to_string(inputs.size()) + ")");
        if (g.output_size() != 1)
            fail(ErrorKind::unsupported, "model must have exactly one graph output tensor (found " + std::to_string(g.output_size()) + ")");

        Shape in_shape;
        for (const auto& d : inputs[0]->type().tensor_type().shape().dim())
            in_shape.push_back(d.has_dim_value() && d.dim_value() > 0 ? d.dim_value() : 1);
        if (in_shape.empty()) fail(ErrorKind::unsupported, "graph input has no static shape");
        report_.input_shape = in_shape;
        Value in;
        in.layer = b_.add_input(static_cast<std::size_t>(numel(in_shape)));
        in.shape = in_shape;
        values_[inputs[0]->name()] = in;

        std::set<std::string> seen;
        for (const auto& n : g.node()) {
            if (std::find(kSupported.begin(), kSupported.end(), n.op_type()) == kSupported.end() || !n.domain().empty())
                report_.unsupported_ops.push_back(n.op_type() + " (" + node_name(n) + ")");
        }
        if (!report_.ok()) throw_unsupported();

        for (const auto& n : g.node()) {
            try {
                convert(n);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::unsupported) throw;
                report_.unsupported_ops.push_back(n.op_type() + " (" + node_name(n) + "): " + e.what());
                throw_unsupported();
            }
            if (seen.insert(n.op_type()).second) report_.supported_ops.push_back(n.op_type());
        }

        const std::string& out_name = g.output(0).name();
        auto it = values_.find(out_name);
        if (it == values_.end()) fail(ErrorKind::parse, "graph output '" + out_name + "' is never produced");
        if (it->second.is_const) fail(ErrorKind::unsupported, "graph output does not depend on the input");
        report_.output_shape = it->second.shape;
        LayerId out = it->second.layer;
        if (out == b_.input() || !b_.successors(out).empty()) {
            auto w = static_cast<Eigen::Index>(b_.width(out));
            out = b_.add_linear(out, Matrix::Identity(w, w), Vector::Zero(w));
        }
        b_.set_output(out);
        prune(out);
        Network net = b_.build();
        ValidationReport vr = validate(net);
        if (!vr.ok()) fail(ErrorKind::internal, "import produced an invalid graph: " + vr.summary());
        return {std::move(net), std::move(report_)};
    }

  private:
    static std::string node_name(const onnx::NodeProto& n) {
        return n.name().empty() ? (n.output_size() ? n.output(0) : std::string("?")) : n.name();
    }

    [[noreturn]] void throw_unsupported() {
        std::string msg = "unsupported model; offending nodes:";
        for (const auto& s : report_.unsupported_ops) msg += "\n  " + s;
        fail(ErrorKind::unsupported, msg);
    }

    const Value& in(const onnx::NodeProto& n, int i) {
        if (i >= n.input_size() || n.input(i).empty())
            fail(ErrorKind::unsupported, "missing input " + std::to_string(i));
        auto it = values_.find(n.input(i));
        if (it == values_.end()) fail(ErrorKind::parse, "value '" + n.input(i) + "' used before definition");
        return it->second;
    }
    bool has_in(const onnx::NodeProto& n, int i) const { return i < n.input_size() && !n.input(i).empty(); }
    const Tensor& const_in(const onnx::NodeProto& n, int i) {
        const Value& v = in(n, i);
        if (!v.is_const) fail(ErrorKind::unsupported, "input " + std::to_string(i) + " must be a constant");
        return v.tensor;
    }

    void set_const(const onnx::NodeProto& n, Tensor t, int out = 0) {
        Value v;
        v.is_const = true;
        v.tensor = std::move(t);
        values_[n.output(out)] = std::move(v);
    }
    void set_var(const onnx::NodeProto& n, LayerId id, Shape s, int out = 0) {
        require(numel(s) == static_cast<std::int64_t>(b_.width(id)), "internal: shape/width mismatch");
        Value v;
        v.layer = id;
        v.shape = std::move(s);
        values_[n.output(out)] = std::move(v);
    }

    LayerId linear(LayerId pred, Matrix w, Vector bias) { return b_.add_linear(pred, std::move(w), std::move(bias)); }

    /// Applies a pure index rearrangement `f` (defined on tensors) to a variable.
    void rearrange(const onnx::NodeProto& n, const Value& v, const std::function<Tensor(const Tensor&)>& f, int out = 0) {
        if (v.is_const) return set_const(n, f(v.tensor), out);
        Tensor idx = f(iota(v.shape));
        std::vector<std::int64_t> src(idx.data.begin(), idx.data.end());
        auto width = numel(v.shape);
        bool identity = static_cast<std::int64_t>(src.size()) == width;
        for (std::size_t i = 0; identity && i < src.size(); ++i) identity = src[i] == static_cast<std::int64_t>(i);
        LayerId id = identity ? v.layer
                              : linear(v.layer, selector_matrix(src, width), Vector::Zero(static_cast<Eigen::Index>(src.size())));
        set_var(n, id, idx.shape, out);
    }

    void convert(const onnx::NodeProto& n) {
        const std::string& op = n.op_type();
        if (op == "Identity" || op == "Dropout" || op == "Cast") {
            values_[n.output(0)] = in(n, 0);
        } else if (op == "Constant") {
            constant(n);
        } else if (op == "Shape") {
            Shape s = in(n, 0).dims();
            std::int64_t r = static_cast<std::int64_t>(s.size());
            std::int64_t start = attr_int(n, "start", 0), end = attr_int(n, "end", r);
            if (start < 0) start += r;
            if (end < 0) end += r;
            start = std::clamp<std::int64_t>(start, 0, r);
            end = std::clamp<std::int64_t>(end, start, r);
            Tensor t{{end - start}, {}};
            for (std::int64_t i = start; i < end; ++i) t.data.push_back(static_cast<double>(s[static_cast<std::size_t>(i)]));
            set_const(n, std::move(t));
        } else if (op == "Gemm") {
            gemm(n);
        } else if (op == "MatMul") {
            matmul(n);
        } else if (op == "Conv") {
            conv(n);
        } else if (op == "BatchNormalization") {
            batchnorm(n);
        } else if (op == "Add" || op == "Sub" || op == "Mul" || op == "Div") {
            elementwise(n);
        } else if (op == "Relu") {
            const Value& v = in(n, 0);
            if (v.is_const) {
                Tensor t = v.tensor;
                for (double& x : t.data) x = std::max(0.0, x);
                set_const(n, std::move(t));
            } else {
                set_var(n, b_.add_relu(v.layer), v.shape);
            }
        } else if (op == "Reshape") {
            reshape(n);
        } else if (op == "Flatten") {
            const Value& v = in(n, 0);
            Shape s = v.dims();
            std::int64_t axis = attr_int(n, "axis", 1);
            if (axis < 0) axis += static_cast<std::int64_t>(s.size());
            std::int64_t lead = 1, rest = 1;
            for (std::size_t d = 0; d < s.size(); ++d) (static_cast<std::int64_t>(d) < axis ? lead : rest) *= s[d];
            relabel(n, v, {lead, rest});
        } else if (op == "Squeeze") {
            squeeze(n);
        } else if (op == "Unsqueeze") {
            unsqueeze(n);
        } else if (op == "Transpose") {
            const Value& v = in(n, 0);
            std::vector<std::int64_t> perm;
            if (auto p = attr_ints(n, "perm")) perm = *p;
            else for (std::size_t d = v.dims().size(); d-- > 0;) perm.push_back(static_cast<std::int64_t>(d));
            rearrange(n, v, [&](const Tensor& t) { return transpose(t, perm); });
        } else if (op == "Concat") {
            concat_node(n);
        } else if (op == "Split") {
            split(n);
        } else if (op == "Slice") {
            slice(n);
        } else if (op == "Gather") {
            const Value& v = in(n, 0);
            const Tensor& idx = const_in(n, 1);
            std::int64_t axis = norm_axis(attr_int(n, "axis", 0), v.dims().size());
            rearrange(n, v, [&](const Tensor& t) { return gather(t, idx, axis); });
        } else if (op == "MaxPool") {
            maxpool(n);
        } else if (op == "AveragePool") {
            avgpool(n);
        } else if (op == "GlobalAveragePool") {
            global_avgpool(n);
        } else {
            fail(ErrorKind::unsupported, "operator not supported");
        }
    }

    void relabel(const onnx::NodeProto& n, const Value& v, Shape s) {
        if (numel(s) != numel(v.dims())) fail(ErrorKind::unsupported, "reshape changes the element count");
        if (v.is_const) {
            Tensor t = v.tensor;
            t.shape = std::move(s);
            set_const(n, std::move(t));
        } else {
            set_var(n, v.layer, std::move(s));
        }
    }

    void constant(const onnx::NodeProto& n) {
        if (const auto* a = find_attr(n, "value")) return set_const(n, tensor_from_proto(a->t()));
        if (const auto* a = find_attr(n, "value_float")) return set_const(n, Tensor{{}, {static_cast<double>(a->f())}});
        if (const auto* a = find_attr(n, "value_int")) return set_const(n, Tensor{{}, {static_cast<double>(a->i())}});
        if (const auto* a = find_attr(n, "value_floats"))
            return set_const(n, Tensor{{a->floats_size()}, std::vector<double>(a->floats().begin(), a->floats().end())});
        if (const auto* a = find_attr(n, "value_ints"))
            return set_const(n, Tensor{{a->ints_size()}, std::vector<double>(a->ints().begin(), a->ints().end())});
        fail(ErrorKind::unsupported, "Constant without a supported value attribute");
    }

    void gemm(const onnx::NodeProto& n) {
        const Value& a = in(n, 0);
        const Tensor& bt = const_in(n, 1);
        if (a.is_const) fail(ErrorKind::unsupported, "Gemm with a constant first operand");
        double alpha = attr_float(n, "alpha", 1.0), beta = attr_float(n, "beta", 1.0);
        bool trans_a = attr_int(n, "transA", 0) != 0, trans_b = attr_int(n, "transB", 0) != 0;
        if (a.shape.size() != 2 || bt.shape.size() != 2) fail(ErrorKind::unsupported, "Gemm operands must be 2-D");
        std::int64_t m = trans_a ? a.shape[1] : a.shape[0];
        std::int64_t k = trans_a ? a.shape[0] : a.shape[1];
        if (trans_a && m != 1) fail(ErrorKind::unsupported, "Gemm with transA and more than one row");
        std::int64_t kb = trans_b ? bt.shape[1] : bt.shape[0], nn = trans_b ? bt.shape[0] : bt.shape[1];
        if (k != kb) fail(ErrorKind::unsupported, "Gemm inner dimensions differ");
        Matrix w(nn, k);  // y_row = w * a_row
        for (std::int64_t i = 0; i < nn; ++i)
            for (std::int64_t j = 0; j < k; ++j)
                w(i, j) = alpha * (trans_b ? bt.at({i, j}) : bt.at({j, i}));
        Vector bias = Vector::Zero(m * nn);
        if (has_in(n, 2)) {
            const Tensor& c = const_in(n, 2);
            auto src = broadcast_src(c.shape, {m, nn});
            for (std::size_t i = 0; i < src.size(); ++i)
                bias[static_cast<Eigen::Index>(i)] = beta * c.data[static_cast<std::size_t>(src[i])];
        }
        Matrix full = Matrix::Zero(m * nn, m * k);
        for (std::int64_t r = 0; r < m; ++r) full.block(r * nn, r * k, nn, k) = w;
        set_var(n, linear(a.layer, std::move(full), std::move(bias)), {m, nn});
    }

    void matmul(const onnx::NodeProto& n) {
        const Value& a = in(n, 0);
        const Value& bv = in(n, 1);
        if (a.is_const && bv.is_const) {
            fail(ErrorKind::unsupported, "MatMul of two constants is not folded");
        }
        if (!a.is_const && !bv.is_const) fail(ErrorKind::unsupported, "MatMul of two variable tensors is not linear");
        if (!a.is_const) {
            // var [..., M, K] x const [K, N] (or [K])
            const Tensor& b = bv.tensor;
            if (b.shape.empty() || b.shape.size() > 2) fail(ErrorKind::unsupported, "MatMul constant must be 1-D or 2-D");
            Shape as = a.shape;
            bool a_vec = as.size() == 1;
            if (a_vec) as.insert(as.begin(), 1);
            std::int64_t k = as.back(), nn = b.shape.size() == 2 ? b.shape[1] : 1;
            if (b.shape[0] != k) fail(ErrorKind::unsupported, "MatMul inner dimensions differ");
            std::int64_t rows = numel(as) / k;
            Matrix w = Matrix::Zero(rows * nn, rows * k);
            for (std::int64_t r = 0; r < rows; ++r)
                for (std::int64_t i = 0; i < nn; ++i)
                    for (std::int64_t j = 0; j < k; ++j) w(r * nn + i, r * k + j) = b.data[static_cast<std::size_t>(j * nn + i)];
            Shape out(as.begin(), as.end() - 1);
            if (b.shape.size() == 2) out.push_back(nn);
            if (a_vec) out.erase(out.begin());
            set_var(n, linear(a.layer, std::move(w), Vector::Zero(rows * nn)), out);
            return;
        }
        // const [M, K] x var [K, N] (or [K])
        const Tensor& c = a.tensor;
        if (c.shape.size() != 2) fail(ErrorKind::unsupported, "MatMul constant left operand must be 2-D");
        std::int64_t m = c.shape[0], k = c.shape[1];
        Shape bs = bv.shape;
        if (bs.empty() || bs.size() > 2 || bs[0] != k) fail(ErrorKind::unsupported, "MatMul variable right operand must be [K] or [K, N]");
        std::int64_t nn = bs.size() == 2 ? bs[1] : 1;
        Matrix w = Matrix::Zero(m * nn, k * nn);
        for (std::int64_t i = 0; i < m; ++i)
            for (std::int64_t j = 0; j < nn; ++j)
                for (std::int64_t t = 0; t < k; ++t) w(i * nn + j, t * nn + j) = c.at({i, t});
        Shape out = bs.size() == 2 ? Shape{m, nn} : Shape{m};
        set_var(n, linear(bv.layer, std::move(w), Vector::Zero(m * nn)), out);
    }

    /// Spatial (C, H, W) view of a [1, C, H, W] variable.
    static Shape spatial(const Value& v, const char* op) {
        if (v.is_const) fail(ErrorKind::unsupported, std::string(op) + " on a constant");
        if (v.shape.size() != 4 || v.shape[0] != 1)
            fail(ErrorKind::unsupported, std::string(op) + " expects a [1, C, H, W] input, got " + to_string(v.shape));
        return {v.shape[1], v.shape[2], v.shape[3]};
    }

    /// Resolves auto_pad into explicit (top, left, bottom, right).
    static std::array<std::int64_t, 4> pads_for(const onnx::NodeProto& n, const Shape& chw, std::int64_t kh, std::int64_t kw,
                                                std::int64_t sh, std::int64_t sw, std::int64_t dh, std::int64_t dw) {
        std::string mode = attr_string(n, "auto_pad", "NOTSET");
        std::array<std::int64_t, 4> p{0, 0, 0, 0};
        if (mode == "NOTSET") {
            if (auto v = attr_ints(n, "pads")) {
                if (v->size() != 4) fail(ErrorKind::unsupported, "only 2-D pads are supported");
                p = {(*v)[0], (*v)[1], (*v)[2], (*v)[3]};
            }
        } else if (mode == "SAME_UPPER" || mode == "SAME_LOWER") {
            auto total = [](std::int64_t in, std::int64_t k, std::int64_t s, std::int64_t d) {
                std::int64_t out = (in + s - 1) / s;
                return std::max<std::int64_t>(0, (out - 1) * s + d * (k - 1) + 1 - in);
            };
            std::int64_t th = total(chw[1], kh, sh, dh), tw = total(chw[2], kw, sw, dw);
            bool upper = mode == "SAME_UPPER";
            p = {upper ? th / 2 : th - th / 2, upper ? tw / 2 : tw - tw / 2, upper ? th - th / 2 : th / 2, upper ? tw - tw / 2 : tw / 2};
        } else if (mode != "VALID") {
            fail(ErrorKind::unsupported, "auto_pad " + mode);
        }
        return p;
    }

    void conv(const onnx::NodeProto& n) {
        const Value& x = in(n, 0);
        Shape chw = spatial(x, "Conv");
        const Tensor& k = const_in(n, 1);
        if (k.shape.size() != 4) fail(ErrorKind::unsupported, "only 2-D convolutions are supported");
        Vector bias;
        if (has_in(n, 2)) {
            const Tensor& bt = const_in(n, 2);
            bias = Eigen::Map<const Vector>(bt.data.data(), static_cast<Eigen::Index>(bt.data.size()));
        }
        Conv2dParams p;
        auto strides = attr_ints(n, "strides").value_or(std::vector<std::int64_t>{1, 1});
        auto dil = attr_ints(n, "dilations").value_or(std::vector<std::int64_t>{1, 1});
        if (strides.size() != 2 || dil.size() != 2) fail(ErrorKind::unsupported, "only 2-D convolutions are supported");
        p.stride_h = strides[0], p.stride_w = strides[1];
        p.dilation_h = dil[0], p.dilation_w = dil[1];
        p.groups = attr_int(n, "group", 1);
        auto pads = pads_for(n, chw, k.shape[2], k.shape[3], p.stride_h, p.stride_w, p.dilation_h, p.dilation_w);
        p.pad_top = pads[0], p.pad_left = pads[1], p.pad_bottom = pads[2], p.pad_right = pads[3];
        ConvLowering low = conv_to_matrix(k, bias, p, chw);
        Shape out{1};
        out.insert(out.end(), low.output_shape.begin(), low.output_shape.end());
        set_var(n, linear(x.layer, std::move(low.map.weight), std::move(low.map.bias)), out);
    }

    void batchnorm(const onnx::NodeProto& n) {
        const Value& x = in(n, 0);
        if (x.is_const || x.shape.size() < 2) fail(ErrorKind::unsupported, "BatchNormalization expects a [N, C, ...] variable");
        if (attr_int(n, "training_mode", 0) != 0) fail(ErrorKind::unsupported, "training-mode BatchNormalization");
        const Tensor &scale = const_in(n, 1), &shift = const_in(n, 2), &mean = const_in(n, 3), &var = const_in(n, 4);
        double eps = attr_float(n, "epsilon", 1e-5);
        std::int64_t c = x.shape[1], inner = 1;
        for (std::size_t d = 2; d < x.shape.size(); ++d) inner *= x.shape[d];
        std::int64_t total = numel(x.shape);
        Vector diag(total), bias(total);
        for (std::int64_t i = 0; i < total; ++i) {
            auto ch = static_cast<std::size_t>((i / inner) % c);
            double a = scale.data[ch] / std::sqrt(var.data[ch] + eps);
            diag[i] = a;
            bias[i] = shift.data[ch] - mean.data[ch] * a;
        }
        set_var(n, linear(x.layer, diag.asDiagonal(), std::move(bias)), x.shape);
    }

    void elementwise(const onnx::NodeProto& n) {
        const std::string& op = n.op_type();
        const Value& a = in(n, 0);
        const Value& b = in(n, 1);
        Shape out = broadcast_shape(a.dims(), b.dims());
        const auto width = numel(out);
        if (a.is_const && b.is_const) {
            Tensor t{out, std::vector<double>(static_cast<std::size_t>(width))};
            auto sa = broadcast_src(a.dims(), out), sb = broadcast_src(b.dims(), out);
            for (std::size_t i = 0; i < t.data.size(); ++i) {
                double x = a.tensor.data[static_cast<std::size_t>(sa[i])], y = b.tensor.data[static_cast<std::size_t>(sb[i])];
                t.data[i] = op == "Add" ? x + y : op == "Sub" ? x - y : op == "Mul" ? x * y : x / y;
            }
            return set_const(n, std::move(t));
        }
        auto spread = [&](const Value& v, double scale) {
            auto src = broadcast_src(v.dims(), out);
            Matrix m = selector_matrix(src, numel(v.dims()));
            return Matrix(scale * m);
        };
        if (!a.is_const && !b.is_const) {
            if (op == "Mul" || op == "Div")
                fail(ErrorKind::unsupported, op + " of two variable tensors is not linear");
            LayerId la = linear(a.layer, spread(a, 1.0), Vector::Zero(width));
            LayerId lb = linear(b.layer, spread(b, op == "Sub" ? -1.0 : 1.0), Vector::Zero(width));
            return set_var(n, b_.add_sum({la, lb}), out);
        }
        const Value& var = a.is_const ? b : a;
        const Value& cst = a.is_const ? a : b;
        auto sc = broadcast_src(cst.dims(), out);
        Vector c(width);
        for (std::int64_t i = 0; i < width; ++i) c[i] = cst.tensor.data[static_cast<std::size_t>(sc[static_cast<std::size_t>(i)])];
        Matrix w = spread(var, 1.0);
        Vector bias = Vector::Zero(width);
        if (op == "Add") {
            bias = c;
        } else if (op == "Sub") {
            if (a.is_const) {
                w = -w;
                bias = c;
            } else {
                bias = -c;
            }
        } else if (op == "Mul") {
            w = c.asDiagonal() * w;
        } else {  // Div
            if (a.is_const) fail(ErrorKind::unsupported, "division by a variable tensor is not linear");
            w = c.cwiseInverse().asDiagonal() * w;
        }
        set_var(n, linear(var.layer, std::move(w), std::move(bias)), out);
    }

    std::vector<std::int64_t> ints_from(const onnx::NodeProto& n, int input, const char* attr) {
        if (has_in(n, input)) {
            const Tensor& t = const_in(n, input);
            return {t.data.begin(), t.data.end()};
        }
        return attr_ints(n, attr).value_or(std::vector<std::int64_t>{});
    }

    void reshape(const onnx::NodeProto& n) {
        const Value& v = in(n, 0);
        const Tensor& st = const_in(n, 1);
        Shape s;
        std::int64_t known = 1, infer = -1;
        for (std::size_t i = 0; i < st.data.size(); ++i) {
            auto d = static_cast<std::int64_t>(st.data[i]);
            if (d == 0 && attr_int(n, "allowzero", 0) == 0) d = v.dims().at(i);
            if (d == -1) {
                infer = static_cast<std::int64_t>(i);
                d = 1;
            } else {
                known *= d;
            }
            s.push_back(d);
        }
        if (infer >= 0) s[static_cast<std::size_t>(infer)] = known == 0 ? 0 : numel(v.dims()) / known;
        relabel(n, v, s);
    }

    void squeeze(const onnx::NodeProto& n) {
        const Value& v = in(n, 0);
        Shape s = v.dims();
        auto axes = ints_from(n, 1, "axes");
        for (auto& a : axes) a = norm_axis(a, s.size());
        Shape out;
        for (std::size_t d = 0; d < s.size(); ++d) {
            bool listed = std::find(axes.begin(), axes.end(), static_cast<std::int64_t>(d)) != axes.end();
            if ((axes.empty() && s[d] == 1) || (listed && s[d] == 1)) continue;
            if (listed) fail(ErrorKind::unsupported, "Squeeze of a dimension larger than 1");
            out.push_back(s[d]);
        }
        relabel(n, v, out);
    }

    void unsqueeze(const onnx::NodeProto& n) {
        const Value& v = in(n, 0);
        Shape s = v.dims();
        auto axes = ints_from(n, 1, "axes");
        std::size_t rank = s.size() + axes.size();
        for (auto& a : axes) a = norm_axis(a, rank);
        std::sort(axes.begin(), axes.end());
        for (std::int64_t a : axes) s.insert(s.begin() + a, 1);
        relabel(n, v, s);
    }

    void concat_node(const onnx::NodeProto& n) {
        std::vector<const Value*> parts;
        for (int i = 0; i < n.input_size(); ++i) parts.push_back(&in(n, i));
        std::int64_t axis = norm_axis(attr_int(n, "axis", 0), parts.front()->dims().size());
        bool all_const = std::all_of(parts.begin(), parts.end(), [](const Value* v) { return v->is_const; });
        std::vector<Tensor> vals, idx;
        std::int64_t base = 0;
        for (const Value* p : parts) {
            if (p->is_const) {
                vals.push_back(p->tensor);
                idx.push_back(Tensor{p->tensor.shape, std::vector<double>(p->tensor.data.size(), -1.0)});
            } else {
                vals.push_back(Tensor{p->shape, std::vector<double>(static_cast<std::size_t>(numel(p->shape)), 0.0)});
                idx.push_back(iota(p->shape, static_cast<double>(base)));
                base += numel(p->shape);
            }
        }
        Tensor value = concat(vals, axis);
        if (all_const) return set_const(n, std::move(value));
        Tensor where = concat(idx, axis);
        const auto width = static_cast<Eigen::Index>(value.data.size());
        std::vector<LayerId> linears;
        base = 0;
        bool bias_placed = false;
        for (const Value* p : parts) {
            if (p->is_const) continue;
            std::int64_t w = numel(p->shape);
            Matrix m = Matrix::Zero(width, w);
            for (Eigen::Index i = 0; i < width; ++i) {
                auto s = static_cast<std::int64_t>(where.data[static_cast<std::size_t>(i)]);
                if (s >= base && s < base + w) m(i, s - base) = 1.0;
            }
            Vector bias = Vector::Zero(width);
            if (!bias_placed) {
                bias = Eigen::Map<const Vector>(value.data.data(), width);
                bias_placed = true;
            }
            linears.push_back(linear(p->layer, std::move(m), std::move(bias)));
            base += w;
        }
        LayerId out = linears.size() == 1 ? linears.front() : b_.add_sum(linears);
        set_var(n, out, value.shape);
    }

    void split(const onnx::NodeProto& n) {
        const Value& v = in(n, 0);
        Shape s = v.dims();
        std::int64_t axis = norm_axis(attr_int(n, "axis", 0), s.size());
        auto sizes = ints_from(n, 1, "split");
        if (sizes.empty()) {
            std::int64_t parts = n.output_size();
            if (s[static_cast<std::size_t>(axis)] % parts != 0) fail(ErrorKind::unsupported, "Split into unequal parts without sizes");
            sizes.assign(static_cast<std::size_t>(parts), s[static_cast<std::size_t>(axis)] / parts);
        }
        if (static_cast<int>(sizes.size()) != n.output_size()) fail(ErrorKind::unsupported, "Split sizes do not match outputs");
        std::int64_t begin = 0;
        for (int o = 0; o < n.output_size(); ++o) {
            std::int64_t end = begin + sizes[static_cast<std::size_t>(o)];
            rearrange(n, v, [&](const Tensor& t) { return slice_axis(t, axis, begin, end, 1); }, o);
            begin = end;
        }
        if (std::find(report_.experimental_ops.begin(), report_.experimental_ops.end(), "Split") == report_.experimental_ops.end())
            report_.experimental_ops.push_back("Split");
    }

    void slice(const onnx::NodeProto& n) {
        const Value& v = in(n, 0);
        Shape s = v.dims();
        auto starts = ints_from(n, 1, "starts"), ends = ints_from(n, 2, "ends");
        auto axes = ints_from(n, 3, "axes");
        auto steps = ints_from(n, 4, "steps");
        if (axes.empty())
            for (std::size_t i = 0; i < starts.size(); ++i) axes.push_back(static_cast<std::int64_t>(i));
        if (steps.empty()) steps.assign(starts.size(), 1);
        rearrange(n, v, [&](const Tensor& t0) {
            Tensor t = t0;
            for (std::size_t i = 0; i < starts.size(); ++i) {
                std::int64_t ax = norm_axis(axes[i], t.shape.size());
                std::int64_t dim = t.shape[static_cast<std::size_t>(ax)], st = steps[i];
                if (st == 0) fail(ErrorKind::unsupported, "Slice step 0");
                std::int64_t b = starts[i], e = ends[i];
                if (b < 0) b += dim;
                if (e < 0) e += dim;
                if (st > 0) {
                    b = std::clamp<std::int64_t>(b, 0, dim);
                    e = std::clamp<std::int64_t>(e, 0, dim);
                } else {
                    b = std::clamp<std::int64_t>(b, 0, dim - 1);
                    e = std::clamp<std::int64_t>(e, -1, dim - 1);
                }
                t = slice_axis(t, ax, b, e, st);
            }
            return t;
        });
    }

    PoolParams pool_params(const onnx::NodeProto& n, const Shape& chw) {
        auto k = attr_ints(n, "kernel_shape");
        if (!k || k->size() != 2) fail(ErrorKind::unsupported, "only 2-D pooling is supported");
        PoolParams p;
        p.kernel_h = (*k)[0], p.kernel_w = (*k)[1];
        auto strides = attr_ints(n, "strides").value_or(std::vector<std::int64_t>{1, 1});
        auto dil = attr_ints(n, "dilations").value_or(std::vector<std::int64_t>{1, 1});
        p.stride_h = strides.at(0), p.stride_w = strides.at(1);
        p.dilation_h = dil.at(0), p.dilation_w = dil.at(1);
        p.ceil_mode = attr_int(n, "ceil_mode", 0) != 0;
        auto pads = pads_for(n, chw, p.kernel_h, p.kernel_w, p.stride_h, p.stride_w, p.dilation_h, p.dilation_w);
        p.pad_top = pads[0], p.pad_left = pads[1], p.pad_bottom = pads[2], p.pad_right = pads[3];
        return p;
    }

    void maxpool(const onnx::NodeProto& n) {
        const Value& x = in(n, 0);
        Shape chw = spatial(x, "MaxPool");
        if (n.output_size() > 1 && !n.output(1).empty()) fail(ErrorKind::unsupported, "MaxPool indices output");
        PoolWindows pw = pool_windows(chw, pool_params(n, chw));
        std::size_t gadgets = 0;
        LayerId out = lower_max(b_, x.layer, pw.windows, &gadgets);
        report_.maxpool_gadgets += gadgets;
        Shape s{1};
        s.insert(s.end(), pw.output_shape.begin(), pw.output_shape.end());
        set_var(n, out, s);
    }

    void avgpool(const onnx::NodeProto& n) {
        const Value& x = in(n, 0);
        Shape chw = spatial(x, "AveragePool");
        PoolParams p = pool_params(n, chw);
        bool include_pad = attr_int(n, "count_include_pad", 0) != 0;
        PoolWindows pw = pool_windows(chw, p);
        Matrix w = Matrix::Zero(static_cast<Eigen::Index>(pw.windows.size()), numel(chw));
        const double full = static_cast<double>(p.kernel_h * p.kernel_w);
        for (std::size_t j = 0; j < pw.windows.size(); ++j)
            for (std::size_t i : pw.windows[j])
                w(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
                    1.0 / (include_pad ? full : static_cast<double>(pw.windows[j].size()));
        Shape s{1};
        s.insert(s.end(), pw.output_shape.begin(), pw.output_shape.end());
        set_var(n, linear(x.layer, std::move(w), Vector::Zero(static_cast<Eigen::Index>(pw.windows.size()))), s);
    }

    void global_avgpool(const onnx::NodeProto& n) {
        const Value& x = in(n, 0);
        if (x.is_const || x.shape.size() < 3 || x.shape[0] != 1) fail(ErrorKind::unsupported, "GlobalAveragePool expects [1, C, ...]");
        std::int64_t c = x.shape[1], inner = numel(x.shape) / c;
        Matrix w = Matrix::Zero(c, c * inner);
        for (std::int64_t ch = 0; ch < c; ++ch) w.block(ch, ch * inner, 1, inner).setConstant(1.0 / static_cast<double>(inner));
        Shape s{1, c};
        for (std::size_t d = 2; d < x.shape.size(); ++d) s.push_back(1);
        set_var(n, linear(x.layer, std::move(w), Vector::Zero(c)), s);
    }

    /// Drops layers that do not reach the output (dead branches, unused selectors).
    void prune(LayerId out) {
        std::set<std::uint32_t> live{out.value};
        std::vector<LayerId> stack{out};
        while (!stack.empty()) {
            LayerId cur = stack.back();
            stack.pop_back();
            for (LayerId p : b_.predecessors(cur))
                if (live.insert(p.value).second) stack.push_back(p);
        }
        if (!live.count(b_.input().value)) fail(ErrorKind::unsupported, "graph output does not depend on the input");
        for (LayerId id : b_.ids())
            if (!live.count(id.value)) b_.remove(id);
    }

    const onnx::ModelProto& model_;
    NetworkBuilder b_;
    std::map<std::string, Value> values_;
    ImportReport report_;
};

onnx::ModelProto parse_model(std::string_view bytes) {
    onnx::ModelProto m;
    if (!m.ParseFromArray(bytes.data(), static_cast<int>(bytes.size())))
        fail(ErrorKind::parse, "input is not a valid ONNX model");
    if (!m.has_graph()) fail(ErrorKind::parse, "ONNX model has no graph");
    return m;
}

}  // namespace

const std::vector<std::string>& supported_onnx_ops() { return kSupported; }

ImportReport scan_onnx(std::string_view bytes) {
    onnx::ModelProto m = parse_model(bytes);
    ImportReport r;
    std::set<std::string> seen;
    for (const auto& n : m.graph().node()) {
        bool ok = n.domain().empty() && std::find(kSupported.begin(), kSupported.end(), n.op_type()) != kSupported.end();
        if (!ok) r.unsupported_ops.push_back(n.op_type() + " (" + (n.name().empty() ? n.output(0) : n.name()) + ")");
        else if (seen.insert(n.op_type()).second) r.supported_ops.push_back(n.op_type());
    }
    return r;
}

ImportResult import_onnx(std::string_view bytes) {
    onnx::ModelProto m = parse_model(bytes);
    return Importer(m).run();
}

ImportResult load_onnx(const std::string& path) { return import_onnx(read_file(path)); }

// ---------------------------------------------------------------------------
// Export

namespace {

void fill_tensor(onnx::TensorProto* t, const std::string& name, const Shape& dims, const double* data, std::size_t n,
                 OnnxFloat dtype) {
    t->set_name(name);
    for (auto d : dims) t->add_dims(d);
    if (dtype == OnnxFloat::float64) {
        t->set_data_type(onnx::TensorProto::DOUBLE);
        t->set_raw_data(std::string(reinterpret_cast<const char*>(data), n * sizeof(double)));
    } else {
        t->set_data_type(onnx::TensorProto::FLOAT);
        std::vector<float> f(data, data + n);
        t->set_raw_data(std::string(reinterpret_cast<const char*>(f.data()), n * sizeof(float)));
    }
}

void set_io(onnx::ValueInfoProto* v, const std::string& name, std::int64_t width, OnnxFloat dtype) {
    v->set_name(name);
    auto* tt = v->mutable_type()->mutable_tensor_type();
    tt->set_elem_type(dtype == OnnxFloat::float64 ? onnx::TensorProto::DOUBLE : onnx::TensorProto::FLOAT);
    tt->mutable_shape()->add_dim()->set_dim_value(1);
    tt->mutable_shape()->add_dim()->set_dim_value(width);
}

}  // namespace

std::string export_onnx(const AffineChain& chain, const ExportOptions& opt) {
    require(!chain.affine.empty(), "export: empty network");
    onnx::ModelProto m;
    m.set_ir_version(7);
    m.set_producer_name("redkit");
    auto* opset = m.add_opset_import();
    opset->set_domain("");
    opset->set_version(13);
    auto* g = m.mutable_graph();
    g->set_name("reduced");
    set_io(g->add_input(), "input", static_cast<std::int64_t>(chain.input_width()), opt.dtype);
    set_io(g->add_output(), "output", static_cast<std::int64_t>(chain.output_width()), opt.dtype);

    std::string cur = "input";
    for (std::size_t k = 0; k < chain.affine.size(); ++k) {
        if (k > 0) {
            auto* relu = g->add_node();
            std::string name = "red_relu_" + std::to_string(k - 1);
            relu->set_op_type("Relu");
            relu->set_name(name);
            relu->add_input(cur);
            relu->add_output(name);
            cur = name;
        }
        const AffineMap& a = chain.affine[k];
        std::string name = "red_linear_" + std::to_string(k);
        // Row-major copy of W (out x in) for Gemm with transB = 1.
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w = a.weight;
        fill_tensor(g->add_initializer(), name + ".weight", {static_cast<std::int64_t>(a.rows()), static_cast<std::int64_t>(a.cols())},
                    w.data(), static_cast<std::size_t>(w.size()), opt.dtype);
        fill_tensor(g->add_initializer(), name + ".bias", {static_cast<std::int64_t>(a.rows())}, a.bias.data(),
                    static_cast<std::size_t>(a.bias.size()), opt.dtype);
        auto* gemm = g->add_node();
        gemm->set_op_type("Gemm");
        gemm->set_name(name);
        gemm->add_input(cur);
        gemm->add_input(name + ".weight");
        gemm->add_input(name + ".bias");
        std::string out = k + 1 == chain.affine.size() ? "output" : name;
        gemm->add_output(out);
        auto* tb = gemm->add_attribute();
        tb->set_name("transB");
        tb->set_type(onnx::AttributeProto::INT);
        tb->set_i(1);
        cur = out;
    }
    std::string bytes;
    if (!m.SerializeToString(&bytes)) fail(ErrorKind::internal, "export: serialization failed");
    return bytes;
}

std::string export_onnx(const Network& net, const ExportOptions& opt) { return export_onnx(to_chain(net), opt); }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::parse, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::contract, "cannot write '" + path + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorKind::contract, "failed writing '" + path + "'");
}

}  // namespace redkit
