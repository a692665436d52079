// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gvr/books.hpp"
#include "gvr/camera.hpp"
#include "gvr/flags.hpp"
#include "gvr/image.hpp"
#include "gvr/mock_provider.hpp"
#include "gvr/renderer.hpp"
#include "gvr/scene.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace gvr {

enum class ShapeKind { kCube, kSphere, kCylinder };

std::string_view shape_name(ShapeKind shape) noexcept;
ShapeKind parse_shape(std::string_view name);

/// One object resting on the ground plane z = 0.
struct ObjectSpec {
    ShapeKind shape = ShapeKind::kCube;
    /// Palette color name.
    std::string color = "red";
    /// Registered query phrase; defaults to "<color> <shape>".
    std::string phrase;
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    /// Cube side or sphere/cylinder diameter.
    double size = 0.4;
    /// Cylinder height; defaults to `size`.
    double height = 0.0;
    /// Rotation about z in degrees.
    double yaw = 0.0;
    /// Surface Gaussians; 0 picks a count from the surface area (300..3000).
    int gaussians = 0;
};

struct SynthSpec {
    std::vector<ObjectSpec> objects;
    double ground_extent = 3.0;
    /// Total Gaussians including the ground.
    int total_gaussians = 100000;
    int views = 20;
    int image_size = 512;
    double fov = 60.0;
    double camera_distance = 3.5;
    /// Minimum clearance between object footprints.
    double min_gap = 0.05;
};

SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::json synth_spec_to_json(const SynthSpec& spec);

/// Random tabletop layout: object count, shapes, distinct colors, sizes and
/// positions drawn from `seed`.
SynthSpec random_synth_spec(std::uint64_t seed, int min_objects = 3, int max_objects = 6,
                            int min_gaussians = 50000, int max_gaussians = 150000, int views = 20);

struct SynthScene {
    SynthSpec spec;
    GaussianScene scene;
    std::vector<CameraModel> cameras;
    std::vector<RgbImage> views;
    /// Ground-truth flags per object, aligned with spec.objects.
    std::vector<TargetFlags> targets;
    std::vector<std::string> phrases;
    MockRegistry registry;
};

/// Builds the scene described by a SceneSpec. Objects closer than min_gap raise ValidationError.
SynthScene synth_scene(const SynthSpec& spec, std::uint64_t seed, bool render_views = true,
                       const RenderOptions& options = {});

/// Writes scene.ply, cameras.json, images/, gt/<k>.flags, registry.json,
/// spec.json and cases.json (books expected in DIR/books).
void write_synth(const SynthScene& synth, const std::string& dir);

/// Rotates the vectors of a `fraction` of all patches by a random angle in
/// [0, max_angle_deg] towards a random orthogonal direction.
void perturb_book(SemanticVectorBook& svb, double fraction, double max_angle_deg, std::uint64_t seed);

} // namespace gvr
