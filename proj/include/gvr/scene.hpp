// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gvr/flags.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gvr {

/// Degree-3 spherical harmonics, 16 coefficients x 3 channels, stored in the
/// exported order: f_dc_0..2 followed by f_rest_0..44 (channel-major).
inline constexpr int kShCoefficients = 48;

/// 3 position + 4 rotation + 3 scale + 1 opacity + 48 SH.
inline constexpr int kAttributesPerGaussian = 59;

/// Zeroth-order SH basis constant; color = 0.5 + kShC0 * f_dc.
inline constexpr float kShC0 = 0.28209479177387814f;

using ShCoefficients = std::array<float, kShCoefficients>;

/// A 3D Gaussian Splatting scene in activated form: linear scales, opacity in
/// [0,1] and unit quaternions (w, x, y, z). Structure-of-arrays layout.
struct GaussianScene {
    std::vector<Eigen::Vector3f> positions;
    std::vector<Eigen::Vector4f> rotations;
    std::vector<Eigen::Vector3f> scales;
    std::vector<float> opacities;
    std::vector<ShCoefficients> sh;

    std::size_t size() const noexcept { return positions.size(); }
    bool empty() const noexcept { return positions.empty(); }

    void reserve(std::size_t n);

    /// Appends a primitive with a flat view-independent RGB color in [0,1].
    void add(const Eigen::Vector3f& position, const Eigen::Vector4f& rotation_wxyz, const Eigen::Vector3f& scale,
             float opacity, const Eigen::Vector3f& rgb);

    /// Degree-0 color of primitive i, clamped to [0,1].
    Eigen::Vector3f base_color(std::size_t i) const;

    /// Throws ValidationError naming the first offending primitive.
    void validate() const;

    /// Axis-aligned bounds of the primitive centers. Empty box for an empty scene.
    Eigen::AlignedBox3d bounds() const;

    /// Copy holding only the primitives set in `flags`, in index order.
    GaussianScene select(const TargetFlags& flags) const;

    friend bool operator==(const GaussianScene&, const GaussianScene&) = default;
};

/// Parses a binary little-endian PLY with the reference 3DGS vertex layout.
/// Log-scales are exponentiated, opacity logits pass through a sigmoid,
/// quaternions are normalized and normals are dropped.
GaussianScene load_scene(std::span<const std::byte> payload);
GaussianScene load_scene_file(const std::string& path);

/// Writes the same layout back (log-scales, opacity logits, zero normals).
std::vector<std::byte> save_scene(const GaussianScene& scene);
void save_scene_file(const GaussianScene& scene, const std::string& path);

/// Property names in the required order.
const std::vector<std::string>& ply_property_names();

} // namespace gvr
