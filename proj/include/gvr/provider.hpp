// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gvr/camera.hpp"
#include "gvr/image.hpp"
#include "gvr/mask.hpp"
#include "gvr/semantic.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gvr {

/// The three foundation-model capabilities the engine consumes: class-agnostic
/// segmentation, text-prompted segmentation and joint image/text embedding.
///
/// Public calls check preconditions and normalize results (mask ordering,
/// dimensions, point containment) before and after delegating to the
/// backend, so every backend satisfies the same contract.
class Provider {
public:
    virtual ~Provider() = default;

    /// Backend identity as given on the command line ("mock", "proc:...").
    virtual std::string identity() const = 0;

    /// True when the backend accepts concurrent calls. Callers serialize
    /// otherwise.
    virtual bool thread_safe() const { return false; }

    /// All object masks, ordered by descending area, ties by first set pixel.
    std::vector<BinaryMask> segment_all(const RgbImage& image);

    /// Mask of the object under `px`, or nullopt on background. Throws
    /// DomainError when `px` is outside the image.
    std::optional<BinaryMask> segment_point(const RgbImage& image, PixelLocation px);

    std::optional<BinaryMask> segment_text(const RgbImage& image, std::string_view query);

    /// Embeds the tight bounding-box crop of `mask` with out-of-mask pixels
    /// zeroed.
    SemanticVector embed_patch(const RgbImage& image, const BinaryMask& mask);

    SemanticVector embed_text(std::string_view query);

protected:
    virtual std::vector<BinaryMask> do_segment_all(const RgbImage& image) = 0;
    virtual std::optional<BinaryMask> do_segment_point(const RgbImage& image, PixelLocation px) = 0;
    virtual std::optional<BinaryMask> do_segment_text(const RgbImage& image, std::string_view query) = 0;
    /// Receives the masked crop and the matching cropped mask.
    virtual SemanticVector do_embed_patch(const RgbImage& patch, const BinaryMask& patch_mask) = 0;
    virtual SemanticVector do_embed_text(std::string_view query) = 0;
};

/// Masked tight crop: pixels outside `mask` are zeroed. Returns the crop and
/// the mask restricted to it.
std::pair<RgbImage, BinaryMask> masked_crop(const RgbImage& image, const BinaryMask& mask);

struct ProviderSettings {
    int dim = kDefaultEmbeddingDim;
    /// Mock phrase registry (JSON file); empty uses palette color names.
    std::string registry_path;
};

/// Builds a backend from a spec string: "mock", "mock:REGISTRY.json",
/// "files:DIR" or "proc:CMD".
std::unique_ptr<Provider> make_provider(std::string_view spec, const ProviderSettings& settings = {});

} // namespace gvr
