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

// Binary 8-bit PGM (P5).

#include "concealment.hpp"
#include "errors.hpp"

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace musex::pgm {

namespace detail {

inline void skip_space_and_comments(std::istream &in)
{
    for (;;) {
        const int c = in.peek();
        if (c == '#') {
            std::string ignored;
            std::getline(in, ignored);
        } else if (c != EOF && std::isspace(c)) {
            in.get();
        } else {
            return;
        }
    }
}

inline std::size_t read_header_number(std::istream &in)
{
    skip_space_and_comments(in);
    std::size_t value = 0;
    if (!(in >> value)) {
        throw IoError("pgm: malformed header");
    }
    return value;
}

} // namespace detail

inline Image read(std::istream &in)
{
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5') {
        throw IoError("pgm: not a binary P5 file");
    }
    const std::size_t cols = detail::read_header_number(in);
    const std::size_t rows = detail::read_header_number(in);
    const std::size_t maxval = detail::read_header_number(in);
    if (rows == 0 || cols == 0) {
        throw IoError("pgm: empty image");
    }
    if (maxval != 255) {
        throw IoError("pgm: only 8-bit images (maxval 255) are supported");
    }
    // Exactly one whitespace byte separates the header from the raster.
    if (!std::isspace(in.get())) {
        throw IoError("pgm: malformed header");
    }
    std::vector<std::uint8_t> pixels(rows * cols);
    in.read(reinterpret_cast<char *>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(pixels.size())) {
        throw IoError("pgm: truncated raster");
    }
    return Image(rows, cols, std::move(pixels));
}

inline void write(std::ostream &out, const Image &image)
{
    out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
    const auto values = image.values();
    out.write(reinterpret_cast<const char *>(values.data()), static_cast<std::streamsize>(values.size()));
    if (!out) {
        throw IoError("pgm: write failed");
    }
}

inline Image read_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    return read(in);
}

inline void write_file(const std::string &path, const Image &image)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    write(out, image);
}

/// Masks are stored as images: 0 = Lost, anything else = Support.
inline Grid<Sample> mask_from_image(const Image &image)
{
    Grid<Sample> mask(image.rows(), image.cols(), Sample::Support);
    for (std::size_t i = 0; i < image.size(); ++i) {
        mask[i] = image[i] == 0 ? Sample::Lost : Sample::Support;
    }
    return mask;
}

inline Image image_from_mask(const Grid<Sample> &mask)
{
    Image image(mask.rows(), mask.cols(), 255);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        image[i] = mask[i] == Sample::Lost ? 0 : 255;
    }
    return image;
}

} // namespace musex::pgm
