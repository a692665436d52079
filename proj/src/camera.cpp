// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gvr/camera.hpp"

#include "gvr/error.hpp"

#include <Eigen/Geometry>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace gvr {

using json = nlohmann::json;

PixelIndex nearest_pixel(PixelLocation px) noexcept {
    return {static_cast<int>(std::floor(px.u + 0.5)), static_cast<int>(std::floor(px.v + 0.5))};
}

void CameraModel::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
        throw ValidationError(fmt::format("camera {}: focal lengths must be positive (fx={}, fy={})", id, fx, fy));
    }
    if (width <= 0 || height <= 0) {
        throw ValidationError(fmt::format("camera {}: image size must be positive ({}x{})", id, width, height));
    }
    if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
        throw ValidationError(fmt::format("camera {}: principal point ({}, {}) outside {}x{} image", id, cx, cy,
                                          width, height));
    }
    if (!rotation.allFinite() || !translation.allFinite()) {
        throw ValidationError(fmt::format("camera {}: pose contains non-finite values", id));
    }
    const double orth_err = (rotation * rotation.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (orth_err > kRotationTolerance) {
        throw ValidationError(fmt::format("camera {}: rotation not orthonormal (max |RR^T - I| = {:.3g})", id, orth_err));
    }
    const double det = rotation.determinant();
    if (std::abs(det - 1.0) > kRotationTolerance) {
        throw ValidationError(fmt::format("camera {}: rotation determinant {:.6f}, reflections are not allowed", id, det));
    }
}

CameraModel CameraModel::with_fov(int width, int height, double vertical_fov_deg) {
    CameraModel cam;
    cam.width = width;
    cam.height = height;
    const double half = vertical_fov_deg * std::numbers::pi / 360.0;
    cam.fy = 0.5 * height / std::tan(half);
    cam.fx = cam.fy;
    cam.cx = 0.5 * width;
    cam.cy = 0.5 * height;
    return cam;
}

Eigen::Matrix3d rotation_from_axes(const Eigen::Vector3d& forward, const Eigen::Vector3d& right_hint) {
    const Eigen::Vector3d z = forward.normalized();
    const Eigen::Vector3d x = (right_hint - right_hint.dot(z) * z).normalized();
    const Eigen::Vector3d y = z.cross(x);
    Eigen::Matrix3d r;
    r.row(0) = x.transpose();
    r.row(1) = y.transpose();
    r.row(2) = z.transpose();
    return r;
}

CameraModel CameraModel::looking_at(const WorldPoint& eye, const WorldPoint& target,
                                    const Eigen::Vector3d& up) const {
    const Eigen::Vector3d z = (target - eye).normalized();
    Eigen::Vector3d right = z.cross(up);
    if (right.norm() < 1e-9) {
        // Looking along the up axis: roll from world-x, else world-y.
        right = Eigen::Vector3d::UnitX() - z.x() * z;
        if (right.norm() < 1e-6) {
            right = Eigen::Vector3d::UnitY() - z.y() * z;
        }
    }
    CameraModel cam = *this;
    cam.rotation = rotation_from_axes(z, right);
    cam.translation = -(cam.rotation * eye);
    return cam;
}

std::optional<Projection> project_point(const WorldPoint& p, const CameraModel& cam) {
    const Eigen::Vector3d q = cam.to_camera(p);
    if (!(q.z() > kDepthEpsilon)) {
        return std::nullopt;
    }
    return Projection{{cam.fx * q.x() / q.z() + cam.cx, cam.fy * q.y() / q.z() + cam.cy}, q.z()};
}

WorldPoint back_project(PixelLocation px, double depth, const CameraModel& cam) {
    if (!(depth > 0.0) || !std::isfinite(depth)) {
        throw DomainError(fmt::format("back_project: depth must be positive and finite, got {}", depth));
    }
    if (!std::isfinite(px.u) || !std::isfinite(px.v)) {
        throw DomainError("back_project: pixel location is not finite");
    }
    const Eigen::Vector3d q((px.u - cam.cx) * depth / cam.fx, (px.v - cam.cy) * depth / cam.fy, depth);
    return cam.to_world(q);
}

namespace {

template <typename T>
T required(const json& entry, const char* key, std::size_t index) {
    if (!entry.contains(key)) {
        throw ParseError(fmt::format("camera entry {}: missing field '{}'", index, key));
    }
    try {
        return entry.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(fmt::format("camera entry {}: field '{}': {}", index, key, e.what()));
    }
}

} // namespace

std::vector<CameraModel> load_cameras(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("camera manifest: ") + e.what());
    }
    if (!doc.is_array()) {
        throw ParseError("camera manifest: top level must be an array");
    }
    std::vector<CameraModel> cams;
    cams.reserve(doc.size());
    std::set<int> seen;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const json& e = doc[i];
        CameraModel cam;
        cam.id = required<int>(e, "id", i);
        cam.width = required<int>(e, "width", i);
        cam.height = required<int>(e, "height", i);
        cam.fx = required<double>(e, "fx", i);
        cam.fy = required<double>(e, "fy", i);
        cam.cx = required<double>(e, "cx", i);
        cam.cy = required<double>(e, "cy", i);
        const auto rot = required<std::vector<double>>(e, "rotation", i);
        const auto trans = required<std::vector<double>>(e, "translation", i);
        if (rot.size() != 9 || trans.size() != 3) {
            throw ParseError(fmt::format("camera entry {}: rotation needs 9 values and translation 3", i));
        }
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                cam.rotation(r, c) = rot[static_cast<std::size_t>(3 * r + c)];
            }
            cam.translation(r) = trans[static_cast<std::size_t>(r)];
        }
        if (!seen.insert(cam.id).second) {
            throw ValidationError(fmt::format("camera manifest: duplicate view id {}", cam.id));
        }
        cam.validate();
        cams.push_back(cam);
    }
    return cams;
}

std::vector<CameraModel> load_cameras_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open camera manifest " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return load_cameras(ss.str());
}

std::string save_cameras(const std::vector<CameraModel>& cams) {
    json doc = json::array();
    for (const auto& cam : cams) {
        std::vector<double> rot(9);
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                rot[static_cast<std::size_t>(3 * r + c)] = cam.rotation(r, c);
            }
        }
        doc.push_back({{"id", cam.id},
                       {"width", cam.width},
                       {"height", cam.height},
                       {"fx", cam.fx},
                       {"fy", cam.fy},
                       {"cx", cam.cx},
                       {"cy", cam.cy},
                       {"rotation", rot},
                       {"translation", {cam.translation.x(), cam.translation.y(), cam.translation.z()}}});
    }
    return doc.dump(2);
}

} // namespace gvr
