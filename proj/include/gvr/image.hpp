// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gvr {

/// Row-major H x W x 3 image with channels in [0,1]. Background is black.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0.0f) {}

    bool empty() const noexcept { return width <= 0 || height <= 0; }
    std::size_t offset(int x, int y) const noexcept { return (static_cast<std::size_t>(y) * width + x) * 3; }

    Eigen::Vector3f pixel(int x, int y) const {
        const std::size_t o = offset(x, y);
        return {data[o], data[o + 1], data[o + 2]};
    }
    void set_pixel(int x, int y, const Eigen::Vector3f& c) {
        const std::size_t o = offset(x, y);
        data[o] = c.x();
        data[o + 1] = c.y();
        data[o + 2] = c.z();
    }

    friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// Row-major H x W depth along the camera z axis. 0 marks "no coverage".
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<float> values;

    DepthMap() = default;
    DepthMap(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0.0f) {}

    float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    float& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }

    friend bool operator==(const DepthMap&, const DepthMap&) = default;
};

/// 8-bit RGB PNG. Channels are rounded to the nearest of 256 levels.
std::vector<std::byte> encode_png(const RgbImage& image);
RgbImage decode_png(std::span<const std::byte> png);

void write_png(const RgbImage& image, const std::string& path);
RgbImage read_png(const std::string& path);

} // namespace gvr
