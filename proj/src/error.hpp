/*
Copyright 2026 The umbilic authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace umb {

enum class ErrorKind {
    kSyntax,    // malformed expression text; offset() points at the byte
    kConfig,    // invalid or unknown configuration
    kDomain,    // function evaluated outside its domain (ln, sqrt, division)
    kNumeric,   // iteration failed to converge, degenerate data, etc.
    kInternal,  // violated internal precondition; indicates a bug
};

/// Single exception type for the whole library. The kind decides the
/// process exit code at the CLI boundary (config/syntax -> 2, the rest -> 3).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, std::ptrdiff_t offset = -1)
        : std::runtime_error(message), _kind(kind), _offset(offset) {}

    ErrorKind kind() const noexcept { return _kind; }

    /// Byte offset into the source text for kSyntax errors, -1 otherwise.
    std::ptrdiff_t offset() const noexcept { return _offset; }

private:
    ErrorKind _kind;
    std::ptrdiff_t _offset;
};

} // namespace umb
