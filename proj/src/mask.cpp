// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gvr/mask.hpp"

#include "gvr/error.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>

namespace gvr {

BinaryMask::BinaryMask(int width, int height)
    : width_(width), height_(height), bits_(static_cast<std::size_t>(width) * height, 0) {
    if (width < 0 || height < 0) {
        throw DomainError("mask dimensions must be non-negative");
    }
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
    if (bits_.size() != static_cast<std::size_t>(width) * height) {
        throw DomainError(fmt::format("mask: {} bits for a {}x{} mask", bits_.size(), width, height));
    }
    for (auto& b : bits_) {
        b = b ? 1 : 0;
    }
    area_ = static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BinaryMask BinaryMask::full(int width, int height) {
    return BinaryMask(width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 1));
}

void BinaryMask::set(int x, int y, bool value) {
    auto& b = bits_[index(x, y)];
    if (value && !b) {
        ++area_;
    } else if (!value && b) {
        --area_;
    }
    b = value ? 1 : 0;
}

bool BinaryMask::contains(PixelLocation px) const {
    const PixelIndex p = nearest_pixel(px);
    return p.x >= 0 && p.x < width_ && p.y >= 0 && p.y < height_ && test(p.x, p.y);
}

PixelBox BinaryMask::bbox() const {
    PixelBox box{width_, height_, -1, -1};
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            if (bits_[index(x, y)]) {
                box.x0 = std::min(box.x0, x);
                box.y0 = std::min(box.y0, y);
                box.x1 = std::max(box.x1, x);
                box.y1 = std::max(box.y1, y);
            }
        }
    }
    return box;
}

PixelLocation BinaryMask::center_of_mass() const {
    if (area_ == 0) {
        throw DomainError("center_of_mass: empty mask");
    }
    double su = 0.0, sv = 0.0;
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            if (bits_[index(x, y)]) {
                su += x;
                sv += y;
            }
        }
    }
    return {su / static_cast<double>(area_), sv / static_cast<double>(area_)};
}

std::size_t BinaryMask::first_set() const {
    const auto it = std::find(bits_.begin(), bits_.end(), std::uint8_t{1});
    return static_cast<std::size_t>(it - bits_.begin());
}

BinaryMask BinaryMask::crop(const PixelBox& box) const {
    if (box.x0 < 0 || box.y0 < 0 || box.x1 >= width_ || box.y1 >= height_ || box.width() <= 0 ||
        box.height() <= 0) {
        throw DomainError("mask crop box outside mask");
    }
    BinaryMask out(box.width(), box.height());
    for (int y = box.y0; y <= box.y1; ++y) {
        for (int x = box.x0; x <= box.x1; ++x) {
            if (test(x, y)) {
                out.set(x - box.x0, y - box.y0);
            }
        }
    }
    return out;
}

RleMask encode_rle(const BinaryMask& mask) {
    RleMask rle{mask.width(), mask.height(), {}};
    std::uint8_t current = 0;
    std::uint32_t run = 0;
    for (const std::uint8_t b : mask.bits()) {
        if (b != current) {
            rle.runs.push_back(run);
            run = 0;
            current = b;
        }
        ++run;
    }
    rle.runs.push_back(run);
    return rle;
}

BinaryMask decode_rle(const RleMask& rle) {
    if (rle.width < 0 || rle.height < 0) {
        throw ParseError("rle: negative dimensions");
    }
    const std::size_t total = static_cast<std::size_t>(rle.width) * rle.height;
    std::vector<std::uint8_t> bits;
    bits.reserve(total);
    std::uint8_t value = 0;
    for (const std::uint32_t run : rle.runs) {
        if (bits.size() + run > total) {
            throw ParseError(fmt::format("rle: runs exceed {}x{} pixels", rle.width, rle.height));
        }
        bits.insert(bits.end(), run, value);
        value ^= 1;
    }
    if (bits.size() != total) {
        throw ParseError(fmt::format("rle: runs cover {} of {} pixels", bits.size(), total));
    }
    return BinaryMask(rle.width, rle.height, std::move(bits));
}

nlohmann::json rle_to_json(const RleMask& rle) { return {{"w", rle.width}, {"h", rle.height}, {"runs", rle.runs}}; }

RleMask rle_from_json(const nlohmann::json& j) {
    try {
        return {j.at("w").get<int>(), j.at("h").get<int>(), j.at("runs").get<std::vector<std::uint32_t>>()};
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("rle: ") + e.what());
    }
}

} // namespace gvr
