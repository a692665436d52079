// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gvr/camera.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace gvr {

/// Inclusive pixel bounding box.
struct PixelBox {
    int x0 = 0;
    int y0 = 0;
    int x1 = -1;
    int y1 = -1;

    int width() const noexcept { return x1 - x0 + 1; }
    int height() const noexcept { return y1 - y0 + 1; }
    bool contains(PixelLocation p) const noexcept { return p.u >= x0 && p.u <= x1 && p.v >= y0 && p.v <= y1; }

    friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

/// Row-major H x W boolean mask with a cached popcount.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height);
    BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

    /// Every pixel set.
    static BinaryMask full(int width, int height);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t area() const noexcept { return area_; }
    bool empty() const noexcept { return area_ == 0; }

    bool test(int x, int y) const { return bits_[index(x, y)] != 0; }
    void set(int x, int y, bool value = true);

    /// True when the nearest pixel to `px` is inside the mask.
    bool contains(PixelLocation px) const;

    /// Tight box around set pixels; an inverted box when empty.
    PixelBox bbox() const;

    /// Mean pixel coordinate of set pixels. Throws DomainError when empty.
    PixelLocation center_of_mass() const;

    /// Row-major index of the first set pixel, or area-independent sentinel
    /// `width*height` when empty.
    std::size_t first_set() const;

    BinaryMask crop(const PixelBox& box) const;

    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
    std::size_t area_ = 0;
};

/// Row-major run lengths alternating background/foreground, starting with
/// background (the first run may be zero).
struct RleMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint32_t> runs;

    friend bool operator==(const RleMask&, const RleMask&) = default;
};

RleMask encode_rle(const BinaryMask& mask);
/// Throws ParseError when runs do not sum to width*height.
BinaryMask decode_rle(const RleMask& rle);

/// {"w": int, "h": int, "runs": [int...]}
nlohmann::json rle_to_json(const RleMask& rle);
RleMask rle_from_json(const nlohmann::json& j);

} // namespace gvr
