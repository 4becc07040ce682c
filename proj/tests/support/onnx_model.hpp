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

// Small helpers for building ONNX models in tests, plus a reference
// evaluator written directly against ONNX operator semantics (no lowering).

#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "onnx.pb.h"

namespace redkit::testing {

using Dims = std::vector<std::int64_t>;

class OnnxGraph {
  public:
    explicit OnnxGraph(bool float64 = false);

    void input(const std::string& name, const Dims& dims);
    void output(const std::string& name);
    void initializer(const std::string& name, const Dims& dims, const std::vector<double>& data);
    void int_initializer(const std::string& name, const Dims& dims, const std::vector<std::int64_t>& data);
    onnx::NodeProto* node(const std::string& op, std::initializer_list<std::string> inputs,
                          std::initializer_list<std::string> outputs, const std::string& name = {});

    static void set_int(onnx::NodeProto* n, const std::string& key, std::int64_t v);
    static void set_ints(onnx::NodeProto* n, const std::string& key, const std::vector<std::int64_t>& v);
    static void set_float(onnx::NodeProto* n, const std::string& key, double v);
    static void set_string(onnx::NodeProto* n, const std::string& key, const std::string& v);

    std::string bytes() const;
    onnx::ModelProto& model() { return model_; }

  private:
    onnx::ModelProto model_;
    bool float64_;
};

/// Runs the model on a single flat input (row-major in the graph input's
/// shape) and returns the flattened graph output.
std::vector<double> run_reference(const std::string& bytes, const std::vector<double>& input);

}  // namespace redkit::testing
