// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gvr/books.hpp"
#include "gvr/camera.hpp"
#include "gvr/semantic.hpp"

#include <optional>
#include <vector>

namespace gvr {

/// Best-matching patch of one view.
struct ViewHit {
    int view_id = 0;
    int patch_id = 0;
    double score = 0.0;
    PixelLocation loc2d;
    std::optional<WorldPoint> loc3d;
};

struct VoteResult {
    WorldPoint location = WorldPoint::Zero();
    std::vector<int> supporters;
    /// Every other hit view, localized or not.
    std::vector<int> rejected;
};

/// Argmax cosine per view (ties: lower patch id). Views without patches are
/// omitted. Throws DomainError on dimension mismatch.
std::vector<ViewHit> score_views(const SemanticVector& query, const SemanticVectorBook& svb);

/// The min(k, n) best hits by descending score, ties by lower view id.
std::vector<ViewHit> select_top_k_views(std::vector<ViewHit> hits, int k);

/// Depth at the nearest pixel of `px`; when that pixel is uncovered, the
/// median of the covered 8-neighbours. None when nothing is covered.
std::optional<double> sample_depth(const DepthMap& map, PixelLocation px);

/// Back-projects each hit through its view's depth map and camera.
std::vector<ViewHit> localize_hits(std::vector<ViewHit> hits, const DepthBook& db,
                                   const std::vector<CameraModel>& cams);

/// Largest epsilon-connected component of the localized hits (ties: greater
/// summed score, then lowest view id); location is its centroid.
/// Invariant to the order of `hits`. Throws GroundingError without evidence.
VoteResult stereo_vote(const std::vector<ViewHit>& hits, double epsilon);

} // namespace gvr
