// Copyright 2026 The musex Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace musex {

/// Raised when a file cannot be read, written or decoded.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Raised when a computation produces a non-finite or otherwise unusable result.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string &message)
{
    if (!condition) {
        throw std::invalid_argument(message);
    }
}

} // namespace detail

} // namespace musex
