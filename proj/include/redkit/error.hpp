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

#pragma once

#include <stdexcept>
#include <string>

namespace redkit {

/// Which subsystem raised an error. The CLI maps each kind to an exit code.
enum class ErrorKind {
    contract,      // caller broke a precondition (dimension mismatch, wrong shape)
    structural,    // graph is malformed (cycle, dangling arc)
    parse,         // property or center file could not be parsed
    unsupported,   // ONNX model uses operators outside the supported set
    construction,  // simplifier cannot proceed without more information
    generation,    // synthetic network generator rejected its parameters
    internal,      // an invariant the code relies on did not hold
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::contract: return "contract violation";
        case ErrorKind::structural: return "structural error";
        case ErrorKind::parse: return "parse error";
        case ErrorKind::unsupported: return "unsupported model";
        case ErrorKind::construction: return "construction error";
        case ErrorKind::generation: return "generation error";
        case ErrorKind::internal: return "internal invariant breach";
    }
    return "error";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

inline void require(bool condition, const std::string& what) {
    if (!condition) fail(ErrorKind::contract, what);
}

}  // namespace redkit
