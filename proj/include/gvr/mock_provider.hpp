// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gvr/provider.hpp"

#include <Eigen/Core>

#include <map>
#include <string>
#include <vector>

namespace gvr {

struct PaletteColor {
    std::string name;
    Eigen::Vector3f rgb;
};

/// Flat object colors the mock can tell apart. Index = color id = semantic
/// basis index.
const std::vector<PaletteColor>& mock_palette();

/// Color id for a palette name; -1 when unknown.
int palette_id(std::string_view name);

/// Phrase -> color id lookup used by the mock's text capabilities.
class MockRegistry {
public:
    MockRegistry() = default;

    /// Every palette color registered under its own name ("red" -> red).
    static MockRegistry palette_names();

    /// JSON object {"phrase": "color name", ...}.
    static MockRegistry load(const std::string& path);
    static MockRegistry from_json_text(std::string_view text);
    std::string to_json_text() const;

    /// Throws DomainError for unknown colors.
    void add(std::string phrase, std::string_view color_name);

    /// -1 when not registered.
    int color_of(std::string_view phrase) const;

    const std::map<std::string, int, std::less<>>& entries() const noexcept { return phrases_; }

private:
    std::map<std::string, int, std::less<>> phrases_;
};

struct MockOptions {
    int dim = kDefaultEmbeddingDim;
    /// Pixels whose brightest channel is below this are background.
    float background_floor = 0.15f;
    /// segment_all drops components smaller than this (pixels).
    std::size_t min_area = 16;
};

/// Deterministic stand-in for the foundation models. Pixels are classified to
/// the palette color with the closest RGB direction; objects are 4-connected
/// components of one color class. Embeddings are basis vectors indexed by
/// color id, so retrieval is exactly verifiable.
class MockProvider final : public Provider {
public:
    explicit MockProvider(MockRegistry registry, MockOptions options = {});

    std::string identity() const override { return "mock"; }
    bool thread_safe() const override { return true; }

    const MockRegistry& registry() const noexcept { return registry_; }
    const MockOptions& options() const noexcept { return options_; }

    /// Color class per pixel, -1 for background.
    std::vector<int> classify(const RgbImage& image) const;

    /// Basis index reserved for patches with no recognizable color.
    int unknown_index() const noexcept { return options_.dim - 1; }

protected:
    std::vector<BinaryMask> do_segment_all(const RgbImage& image) override;
    std::optional<BinaryMask> do_segment_point(const RgbImage& image, PixelLocation px) override;
    std::optional<BinaryMask> do_segment_text(const RgbImage& image, std::string_view query) override;
    SemanticVector do_embed_patch(const RgbImage& patch, const BinaryMask& patch_mask) override;
    SemanticVector do_embed_text(std::string_view query) override;

private:
    MockRegistry registry_;
    MockOptions options_;
};

} // namespace gvr
