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

#include <musex/concealment.hpp>

#include <string>

namespace musex::io {

/// Reads an 8-bit grayscale PNG; color inputs are converted to gray.
Image read_png(const std::string &path);

/// Writes an 8-bit grayscale PNG.
void write_png(const std::string &path, const Image &image);

/// Detects PGM (P5) or PNG from the file signature.
Image read_image(const std::string &path);

} // namespace musex::io
