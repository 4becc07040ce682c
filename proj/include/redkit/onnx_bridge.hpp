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

// ONNX import into the layer graph and fully-connected ONNX export.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "redkit/lowering.hpp"
#include "redkit/net_ir.hpp"

namespace redkit {

struct ImportReport {
    std::vector<std::string> supported_ops;    // distinct op types converted
    std::vector<std::string> unsupported_ops;  // "OpType (node name)"
    std::vector<std::string> experimental_ops; // converted, but with a less-tested encoding
    Shape input_shape;
    Shape output_shape;
    std::string flattening_order = "row-major";
    std::size_t maxpool_gadgets = 0;

    bool ok() const { return unsupported_ops.empty(); }
};

struct ImportResult {
    Network net;
    ImportReport report;
};

/// Op types the importer understands (a node may still be rejected for its
/// operands, e.g. Mul of two variable tensors).
const std::vector<std::string>& supported_onnx_ops();

/// Lists op support without converting. Throws a parse error on bad bytes.
ImportReport scan_onnx(std::string_view bytes);

/// Converts a serialized model. Throws ErrorKind::unsupported listing every
/// offending node, ErrorKind::parse for malformed files.
ImportResult import_onnx(std::string_view bytes);
ImportResult load_onnx(const std::string& path);

enum class OnnxFloat { float32, float64 };

struct ExportOptions {
    OnnxFloat dtype = OnnxFloat::float64;
};

/// Gemm/Relu model named red_linear_{i} / red_relu_{i}, input "input" of
/// shape [1, n], output "output". The network must be sequential.
std::string export_onnx(const AffineChain& chain, const ExportOptions& opt = {});
std::string export_onnx(const Network& net, const ExportOptions& opt = {});

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace redkit
