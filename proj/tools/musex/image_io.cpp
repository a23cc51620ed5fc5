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

#include "image_io.hpp"

#include <musex/errors.hpp>
#include <musex/pgm.hpp>

#include <png.h>

#include <array>
#include <cstring>
#include <fstream>
#include <vector>

namespace musex::io {

Image read_png(const std::string &path)
{
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw IoError("png: cannot read " + path + ": " + image.message);
    }
    image.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
        const std::string message = image.message;
        png_image_free(&image);
        throw IoError("png: cannot decode " + path + ": " + message);
    }
    return Image(image.height, image.width, std::move(pixels));
}

void write_png(const std::string &path, const Image &img)
{
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.cols());
    image.height = static_cast<png_uint_32>(img.rows());
    image.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.c_str(), 0, img.values().data(), 0, nullptr)) {
        throw IoError("png: cannot write " + path + ": " + image.message);
    }
}

Image read_image(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::array<unsigned char, 8> signature{};
    in.read(reinterpret_cast<char *>(signature.data()), signature.size());
    if (in.gcount() >= 2 && signature[0] == 'P' && signature[1] == '5') {
        in.seekg(0);
        return pgm::read(in);
    }
    static constexpr std::array<unsigned char, 8> png_magic{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (in.gcount() == 8 && signature == png_magic) {
        return read_png(path);
    }
    throw IoError("unrecognized image format: " + path);
}

} // namespace musex::io
