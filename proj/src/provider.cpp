// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gvr/provider.hpp"

#include "gvr/error.hpp"
#include "gvr/message_provider.hpp"
#include "gvr/mock_provider.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace gvr {

namespace {

void require_image(const RgbImage& image, const char* op) {
    if (image.empty()) {
        throw DomainError(fmt::format("{}: empty image", op));
    }
}

void check_mask_dims(const Provider& p, const BinaryMask& m, const RgbImage& image, const char* op) {
    if (m.width() != image.width || m.height() != image.height) {
        throw ProviderError(p.identity(), fmt::format("{} returned a {}x{} mask for a {}x{} image", op, m.width(),
                                                      m.height(), image.width, image.height));
    }
}

} // namespace

std::vector<BinaryMask> Provider::segment_all(const RgbImage& image) {
    require_image(image, "segment_all");
    std::vector<BinaryMask> masks = do_segment_all(image);
    for (const auto& m : masks) {
        check_mask_dims(*this, m, image, "segment_all");
    }
    std::erase_if(masks, [](const BinaryMask& m) { return m.empty(); });
    std::stable_sort(masks.begin(), masks.end(), [](const BinaryMask& a, const BinaryMask& b) {
        return a.area() != b.area() ? a.area() > b.area() : a.first_set() < b.first_set();
    });
    return masks;
}

std::optional<BinaryMask> Provider::segment_point(const RgbImage& image, PixelLocation px) {
    require_image(image, "segment_point");
    const PixelIndex p = nearest_pixel(px);
    if (!std::isfinite(px.u) || !std::isfinite(px.v) || p.x < 0 || p.x >= image.width || p.y < 0 ||
        p.y >= image.height) {
        throw DomainError(fmt::format("segment_point: ({}, {}) outside {}x{} image", px.u, px.v, image.width,
                                      image.height));
    }
    auto mask = do_segment_point(image, px);
    if (mask) {
        check_mask_dims(*this, *mask, image, "segment_point");
        if (!mask->contains(px)) {
            throw ProviderError(identity(), "segment_point returned a mask that does not contain the prompt point");
        }
    }
    return mask;
}

std::optional<BinaryMask> Provider::segment_text(const RgbImage& image, std::string_view query) {
    require_image(image, "segment_text");
    if (query.empty()) {
        throw DomainError("segment_text: empty query");
    }
    auto mask = do_segment_text(image, query);
    if (mask) {
        check_mask_dims(*this, *mask, image, "segment_text");
        if (mask->empty()) {
            return std::nullopt;
        }
    }
    return mask;
}

SemanticVector Provider::embed_patch(const RgbImage& image, const BinaryMask& mask) {
    require_image(image, "embed_patch");
    if (mask.width() != image.width || mask.height() != image.height) {
        throw DomainError("embed_patch: mask dimensions do not match the image");
    }
    if (mask.empty()) {
        throw DomainError("embed_patch: empty mask");
    }
    auto [patch, patch_mask] = masked_crop(image, mask);
    return do_embed_patch(patch, patch_mask);
}

SemanticVector Provider::embed_text(std::string_view query) {
    if (query.empty()) {
        throw DomainError("embed_text: empty query");
    }
    return do_embed_text(query);
}

std::pair<RgbImage, BinaryMask> masked_crop(const RgbImage& image, const BinaryMask& mask) {
    const PixelBox box = mask.bbox();
    BinaryMask cropped = mask.crop(box);
    RgbImage patch(box.width(), box.height());
    for (int y = 0; y < box.height(); ++y) {
        for (int x = 0; x < box.width(); ++x) {
            if (cropped.test(x, y)) {
                patch.set_pixel(x, y, image.pixel(x + box.x0, y + box.y0));
            }
        }
    }
    return {std::move(patch), std::move(cropped)};
}

std::unique_ptr<Provider> make_provider(std::string_view spec, const ProviderSettings& settings) {
    const auto colon = spec.find(':');
    const std::string_view kind = spec.substr(0, colon);
    const std::string arg = colon == std::string_view::npos ? std::string() : std::string(spec.substr(colon + 1));
    if (kind == "mock") {
        const std::string registry_path = !arg.empty() ? arg : settings.registry_path;
        MockRegistry registry = registry_path.empty() ? MockRegistry::palette_names() : MockRegistry::load(registry_path);
        MockOptions options;
        options.dim = settings.dim;
        return std::make_unique<MockProvider>(std::move(registry), options);
    }
    if (kind == "files" && !arg.empty()) {
        return std::make_unique<FileProvider>(arg);
    }
    if (kind == "proc" && !arg.empty()) {
        return std::make_unique<ProcessProvider>(arg);
    }
    throw ValidationError(fmt::format("unknown provider spec '{}' (expected mock, files:DIR or proc:CMD)", spec));
}

} // namespace gvr
