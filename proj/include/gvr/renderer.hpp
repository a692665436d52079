// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gvr/camera.hpp"
#include "gvr/flags.hpp"
#include "gvr/image.hpp"
#include "gvr/scene.hpp"

#include <vector>

namespace gvr {

/// Accumulated alpha a pixel needs before its depth counts as covered.
inline constexpr float kDepthAlphaFloor = 0.5f;
/// Compositing stops before transmittance would drop below this.
inline constexpr float kTransmittanceFloor = 1e-4f;
/// Per-splat alpha ceiling.
inline constexpr float kMaxSplatAlpha = 0.99f;
/// Splat contributions below this alpha are skipped.
inline constexpr float kMinSplatAlpha = 1.0f / 255.0f;
/// Added to the diagonal of every projected 2D covariance (low-pass filter, in px^2).
inline constexpr double kCovarianceDilation = 0.3;
/// Tile edge in pixels.
inline constexpr int kTileSize = 16;

struct RenderOptions {
    /// Worker threads over pixel tiles; 0 picks the hardware concurrency.
    /// Output is bit-identical for every value.
    int workers = 0;
};

/// Everything a single compositing pass produces.
struct RenderOutput {
    RgbImage rgb;
    DepthMap depth;
    /// Accumulated opacity per pixel, 1 - final transmittance.
    std::vector<float> alpha;
};

/// Projected screen-space footprint of one Gaussian. Exposed for tests.
struct Splat {
    std::uint32_t index = 0;
    float u = 0.0f;
    float v = 0.0f;
    float depth = 0.0f;
    /// Inverse 2D covariance (a, b, c) of [[a, b], [b, c]].
    float conic_a = 0.0f;
    float conic_b = 0.0f;
    float conic_c = 0.0f;
    float opacity = 0.0f;
    float radius = 0.0f;
    Eigen::Vector3f color = Eigen::Vector3f::Zero();
};

/// Projects primitive i; returns false when it is culled (behind the camera,
/// degenerate, or its 3-sigma footprint misses the image).
bool project_splat(const GaussianScene& scene, std::size_t i, const CameraModel& cam, Splat& out);

/// Splats every primitive (restricted to `subset` when given) front to back in
/// order of center depth, ties by primitive index. A splat covers the pixels
/// whose centers lie within `radius` of (u, v) along both image axes.
RenderOutput render(const CameraModel& cam, const GaussianScene& scene, const TargetFlags* subset = nullptr,
                    const RenderOptions& options = {});

RgbImage render_rgb(const CameraModel& cam, const GaussianScene& scene, const TargetFlags* subset = nullptr,
                    const RenderOptions& options = {});

/// Alpha-weighted expected depth; pixels with accumulated alpha below
/// kDepthAlphaFloor hold 0.
DepthMap render_depth(const CameraModel& cam, const GaussianScene& scene, const RenderOptions& options = {});

} // namespace gvr
