// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gvr/image.hpp"

#include "gvr/error.hpp"
#include "gvr/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace gvr {

std::vector<std::byte> encode_png(const RgbImage& image) {
    if (image.empty()) {
        throw DomainError("encode_png: empty image");
    }
    std::vector<std::uint8_t> pixels(image.data.size());
    std::transform(image.data.begin(), image.data.end(), pixels.begin(), [](float v) {
        return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
    });

    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width);
    png.height = static_cast<png_uint_32>(image.height);
    png.format = PNG_FORMAT_RGB;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&png, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
        throw IoError(std::string("encode_png: ") + png.message);
    }
    std::vector<std::byte> out(size);
    if (!png_image_write_to_memory(&png, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
        throw IoError(std::string("encode_png: ") + png.message);
    }
    out.resize(size);
    return out;
}

RgbImage decode_png(std::span<const std::byte> bytes) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
        throw ParseError(std::string("decode_png: ") + png.message);
    }
    png.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(png));
    if (!png_image_finish_read(&png, nullptr, pixels.data(), 0, nullptr)) {
        png_image_free(&png);
        throw ParseError(std::string("decode_png: ") + png.message);
    }
    RgbImage image(static_cast<int>(png.width), static_cast<int>(png.height));
    std::transform(pixels.begin(), pixels.end(), image.data.begin(),
                   [](std::uint8_t v) { return static_cast<float>(v) / 255.0f; });
    return image;
}

void write_png(const RgbImage& image, const std::string& path) { io::write_file(path, encode_png(image)); }

RgbImage read_png(const std::string& path) { return decode_png(io::read_file(path)); }

} // namespace gvr
