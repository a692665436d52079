// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gvr {

/// Points closer to the camera plane than this are treated as behind the camera.
inline constexpr double kDepthEpsilon = 1e-6;

/// Tolerance on orthonormality and determinant of camera rotations.
inline constexpr double kRotationTolerance = 1e-6;

using WorldPoint = Eigen::Vector3d;

/// Continuous pixel coordinates. Pixel centers sit on integer coordinates,
/// origin top-left, u to the right, v downward.
struct PixelLocation {
    double u = 0.0;
    double v = 0.0;

    friend bool operator==(const PixelLocation&, const PixelLocation&) = default;
};

/// Integer pixel address (column x, row y).
struct PixelIndex {
    int x = 0;
    int y = 0;

    friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
};

/// Nearest integer pixel, rounding halves up on both axes.
PixelIndex nearest_pixel(PixelLocation px) noexcept;

/// Pinhole camera with a world-to-camera rigid pose. Camera frame: +x right,
/// +y down, +z along the optical axis.
struct CameraModel {
    int id = 0;
    int width = 0;
    int height = 0;
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    /// Throws ValidationError on non-positive intrinsics, a principal point
    /// outside the image or a rotation that is not a proper rotation.
    void validate() const;

    Eigen::Vector3d to_camera(const WorldPoint& p) const { return rotation * p + translation; }
    WorldPoint to_world(const Eigen::Vector3d& p_cam) const {
        return rotation.transpose() * (p_cam - translation);
    }

    /// Camera center in world coordinates.
    WorldPoint center() const { return -(rotation.transpose() * translation); }

    /// Unit optical axis in world coordinates.
    Eigen::Vector3d forward() const { return rotation.row(2).transpose(); }

    bool contains(PixelLocation px) const noexcept {
        return px.u >= 0.0 && px.u < width && px.v >= 0.0 && px.v < height;
    }
    bool contains(PixelIndex px) const noexcept {
        return px.x >= 0 && px.x < width && px.y >= 0 && px.y < height;
    }

    /// Square-pixel intrinsics from a vertical field of view; principal point at
    /// (width/2, height/2).
    static CameraModel with_fov(int width, int height, double vertical_fov_deg);

    /// Places the camera at `eye` looking at `target`. Image "up" follows `up`
    /// unless the view direction is parallel to it, in which case camera-x is
    /// aligned with world-x projected onto the image plane (world-y if that is
    /// degenerate too).
    CameraModel looking_at(const WorldPoint& eye, const WorldPoint& target,
                           const Eigen::Vector3d& up) const;
};

struct Projection {
    PixelLocation pixel;
    double depth = 0.0;
};

/// Pinhole projection. Returns nullopt when the point is behind the camera
/// (camera-frame z <= kDepthEpsilon).
std::optional<Projection> project_point(const WorldPoint& p, const CameraModel& cam);

/// Inverse of `project_point` for a known depth. Throws DomainError when
/// depth <= 0 or the pixel is not finite.
WorldPoint back_project(PixelLocation px, double depth, const CameraModel& cam);

/// Parses the JSON camera manifest. Order is preserved.
std::vector<CameraModel> load_cameras(std::string_view json_text);
std::vector<CameraModel> load_cameras_file(const std::string& path);

std::string save_cameras(const std::vector<CameraModel>& cams);

/// Right-handed rotation that takes world vectors into the camera frame, given
/// the camera's forward direction and a reference "right" hint.
Eigen::Matrix3d rotation_from_axes(const Eigen::Vector3d& forward, const Eigen::Vector3d& right_hint);

} // namespace gvr
