// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gvr/camera.hpp"
#include "gvr/image.hpp"
#include "gvr/mask.hpp"
#include "gvr/renderer.hpp"
#include "gvr/scene.hpp"
#include "gvr/semantic.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gvr {

class Provider;

inline constexpr int kBookVersion = 1;

/// One segmented object patch of one view.
struct PatchEntry {
    int view_id = 0;
    int patch_id = 0;
    SemanticVector vector;
    /// Mask center of mass, rounded half-up to the nearest pixel.
    PixelLocation centroid;
    PixelBox bbox;
    BinaryMask mask;

    friend bool operator==(const PatchEntry&, const PatchEntry&) = default;
};

/// Ragged per-view table of patch embeddings.
struct SemanticVectorBook {
    int dim = kDefaultEmbeddingDim;
    std::vector<std::vector<PatchEntry>> views;

    std::size_t size() const noexcept { return views.size(); }
    std::size_t patch_count() const noexcept;
    /// Dense view ids, matching patch ids, dimensions, unit vectors,
    /// centroid inside bbox. Throws ValidationError.
    void validate() const;

    friend bool operator==(const SemanticVectorBook&, const SemanticVectorBook&) = default;
};

struct DepthBook {
    std::vector<DepthMap> maps;

    std::size_t size() const noexcept { return maps.size(); }
    friend bool operator==(const DepthBook&, const DepthBook&) = default;
};

/// Everything `prepare` produces for one scene.
struct KnowledgeBooks {
    SemanticVectorBook svb;
    DepthBook depth;
    /// Empty when the book directory carries no cameras.json.
    std::vector<CameraModel> cameras;
};

/// Builds the patch entry for `mask` of view `view_id`.
PatchEntry make_patch_entry(int view_id, int patch_id, SemanticVector vector, BinaryMask mask);

/// segment_all then embed_patch per mask, per view. Provider failures are
/// rethrown as ProviderError naming the view.
SemanticVectorBook build_svb(const std::vector<RgbImage>& views, Provider& provider);

DepthBook build_depth_book(const std::vector<CameraModel>& cams, const GaussianScene& scene,
                           const RenderOptions& options = {});

/// Checks that every depth map matches its camera and that view ids are dense.
void check_alignment(const SemanticVectorBook& svb, const DepthBook& db, const std::vector<CameraModel>& cams);

/// Image file name for a view inside an images directory.
std::string view_image_name(int view_id);

void save_books(const KnowledgeBooks& books, const std::string& dir);
/// Throws VersionError, CorruptionError (checksum, truncation, bad header),
/// ValidationError (schema, dimension different from `expected_dim`).
KnowledgeBooks load_books(const std::string& dir, std::optional<int> expected_dim = std::nullopt);

std::vector<std::byte> encode_depth(const DepthMap& map);
DepthMap decode_depth(std::span<const std::byte> bytes);

} // namespace gvr
