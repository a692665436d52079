// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gvr/synth.hpp"

#include "gvr/error.hpp"
#include "gvr/io.hpp"

#include <Eigen/Geometry>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

namespace gvr {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr double kSurfaceDensity = 6000.0;
constexpr int kMinObjectGaussians = 300;
constexpr int kMaxObjectGaussians = 3000;
constexpr float kObjectOpacity = 0.95f;
constexpr float kGroundOpacity = 0.9f;
constexpr float kColorGain = 0.9f;
constexpr float kFlatness = 0.3f;
constexpr double kCameraTargetHeight = 0.15;

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

double object_height(const ObjectSpec& o) {
    switch (o.shape) {
    case ShapeKind::kCube:
        return o.size;
    case ShapeKind::kSphere:
        return o.size;
    case ShapeKind::kCylinder:
        return o.height > 0.0 ? o.height : o.size;
    }
    return o.size;
}

/// Radius of a circle enclosing the footprint.
double footprint_radius(const ObjectSpec& o) {
    return o.shape == ShapeKind::kCube ? o.size * std::numbers::sqrt2 / 2.0 : o.size / 2.0;
}

/// Visible surface area (the face resting on the ground excluded).
double surface_area(const ObjectSpec& o) {
    const double r = o.size / 2.0;
    switch (o.shape) {
    case ShapeKind::kCube:
        return 5.0 * o.size * o.size;
    case ShapeKind::kSphere:
        return 4.0 * std::numbers::pi * r * r;
    case ShapeKind::kCylinder:
        return 2.0 * std::numbers::pi * r * object_height(o) + std::numbers::pi * r * r;
    }
    return 0.0;
}

int object_gaussians(const ObjectSpec& o) {
    if (o.gaussians > 0) {
        return o.gaussians;
    }
    const int n = static_cast<int>(std::lround(kSurfaceDensity * surface_area(o)));
    return std::clamp(n, kMinObjectGaussians, kMaxObjectGaussians);
}

/// True when (x, y) lies where the ground is hidden under an object.
bool under_object(const ObjectSpec& o, double x, double y) {
    const Eigen::Vector2d d(x - o.center.x(), y - o.center.y());
    switch (o.shape) {
    case ShapeKind::kCube: {
        const double a = -deg2rad(o.yaw);
        const Eigen::Vector2d l(std::cos(a) * d.x() - std::sin(a) * d.y(), std::sin(a) * d.x() + std::cos(a) * d.y());
        return std::abs(l.x()) <= o.size / 2.0 && std::abs(l.y()) <= o.size / 2.0;
    }
    case ShapeKind::kSphere:
        return d.norm() <= 0.7 * o.size / 2.0;
    case ShapeKind::kCylinder:
        return d.norm() <= o.size / 2.0;
    }
    return false;
}

struct SurfaceSample {
    Eigen::Vector3d point;
    Eigen::Vector3d normal;
};

SurfaceSample sample_surface(const ObjectSpec& o, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double r = o.size / 2.0;
    SurfaceSample s;
    switch (o.shape) {
    case ShapeKind::kCube: {
        const int face = std::min(4, static_cast<int>(uni(rng) * 5.0));
        const double a = uni(rng) * o.size - r;
        const double b = uni(rng) * o.size - r;
        // Faces: +x, -x, +y, -y, top.
        switch (face) {
        case 0:
            s = {{r, a, b + r}, {1, 0, 0}};
            break;
        case 1:
            s = {{-r, a, b + r}, {-1, 0, 0}};
            break;
        case 2:
            s = {{a, r, b + r}, {0, 1, 0}};
            break;
        case 3:
            s = {{a, -r, b + r}, {0, -1, 0}};
            break;
        default:
            s = {{a, b, o.size}, {0, 0, 1}};
            break;
        }
        break;
    }
    case ShapeKind::kSphere: {
        const double z = 2.0 * uni(rng) - 1.0;
        const double phi = 2.0 * std::numbers::pi * uni(rng);
        const double q = std::sqrt(std::max(0.0, 1.0 - z * z));
        s.normal = {q * std::cos(phi), q * std::sin(phi), z};
        s.point = r * s.normal + Eigen::Vector3d(0, 0, r);
        break;
    }
    case ShapeKind::kCylinder: {
        const double h = object_height(o);
        const double side = 2.0 * std::numbers::pi * r * h;
        const double top = std::numbers::pi * r * r;
        const double phi = 2.0 * std::numbers::pi * uni(rng);
        if (uni(rng) * (side + top) < side) {
            s.normal = {std::cos(phi), std::sin(phi), 0.0};
            s.point = r * s.normal + Eigen::Vector3d(0, 0, uni(rng) * h);
        } else {
            const double rho = r * std::sqrt(uni(rng));
            s = {{rho * std::cos(phi), rho * std::sin(phi), h}, {0, 0, 1}};
        }
        break;
    }
    }
    const Eigen::Matrix3d yaw = Eigen::AngleAxisd(deg2rad(o.yaw), Eigen::Vector3d::UnitZ()).toRotationMatrix();
    s.point = yaw * s.point + Eigen::Vector3d(o.center.x(), o.center.y(), 0.0);
    s.normal = yaw * s.normal;
    return s;
}

Eigen::Vector4f quat_from_normal(const Eigen::Vector3d& n) {
    const Eigen::Quaterniond q = Eigen::Quaterniond::FromTwoVectors(Eigen::Vector3d::UnitZ(), n);
    return Eigen::Vector4f(static_cast<float>(q.w()), static_cast<float>(q.x()), static_cast<float>(q.y()),
                           static_cast<float>(q.z()));
}

Eigen::Vector3f palette_rgb(const std::string& name) {
    const int id = palette_id(name);
    if (id < 0) {
        throw ValidationError(fmt::format("synth: unknown color '{}'", name));
    }
    return mock_palette()[static_cast<std::size_t>(id)].rgb * kColorGain;
}

std::vector<CameraModel> synth_cameras(const SynthSpec& spec) {
    std::vector<CameraModel> cams;
    const CameraModel base = CameraModel::with_fov(spec.image_size, spec.image_size, spec.fov);
    const WorldPoint target(0.0, 0.0, kCameraTargetHeight);
    const int ring = (spec.views + 1) / 2;
    const int arc = spec.views - ring;
    for (int i = 0; i < spec.views; ++i) {
        const bool on_ring = i < ring;
        const int k = on_ring ? i : i - ring;
        const int count = on_ring ? ring : arc;
        const double elevation = deg2rad(on_ring ? 20.0 : 45.0);
        const double azimuth = 2.0 * std::numbers::pi * (k + (on_ring ? 0.0 : 0.5)) / count;
        const Eigen::Vector3d dir(std::cos(elevation) * std::cos(azimuth), std::cos(elevation) * std::sin(azimuth),
                                  std::sin(elevation));
        CameraModel cam = base.looking_at(target + spec.camera_distance * dir, target, Eigen::Vector3d::UnitZ());
        cam.id = i;
        cams.push_back(cam);
    }
    return cams;
}

} // namespace

std::string_view shape_name(ShapeKind shape) noexcept {
    switch (shape) {
    case ShapeKind::kCube:
        return "cube";
    case ShapeKind::kSphere:
        return "sphere";
    case ShapeKind::kCylinder:
        return "cylinder";
    }
    return "cube";
}

ShapeKind parse_shape(std::string_view name) {
    for (const ShapeKind s : {ShapeKind::kCube, ShapeKind::kSphere, ShapeKind::kCylinder}) {
        if (shape_name(s) == name) {
            return s;
        }
    }
    throw ParseError(fmt::format("unknown shape '{}' (expected cube, sphere or cylinder)", name));
}

SynthSpec synth_spec_from_json(const json& j) {
    SynthSpec spec;
    try {
        for (const auto& jo : j.at("objects")) {
            ObjectSpec o;
            o.shape = parse_shape(jo.at("shape").get<std::string>());
            o.color = jo.at("color").get<std::string>();
            o.phrase = jo.value("phrase", std::string());
            const auto c = jo.at("center").get<std::vector<double>>();
            if (c.size() != 2) {
                throw ParseError("synth spec: object center needs [x, y]");
            }
            o.center = {c[0], c[1]};
            o.size = jo.value("size", o.size);
            o.height = jo.value("height", o.height);
            o.yaw = jo.value("yaw", o.yaw);
            o.gaussians = jo.value("gaussians", o.gaussians);
            spec.objects.push_back(std::move(o));
        }
        spec.ground_extent = j.value("ground_extent", spec.ground_extent);
        spec.total_gaussians = j.value("total_gaussians", spec.total_gaussians);
        spec.views = j.value("views", spec.views);
        spec.image_size = j.value("image_size", spec.image_size);
        spec.fov = j.value("fov", spec.fov);
        spec.camera_distance = j.value("camera_distance", spec.camera_distance);
        spec.min_gap = j.value("min_gap", spec.min_gap);
    } catch (const json::exception& e) {
        throw ParseError(std::string("synth spec: ") + e.what());
    }
    return spec;
}

json synth_spec_to_json(const SynthSpec& spec) {
    json objects = json::array();
    for (const auto& o : spec.objects) {
        objects.push_back({{"shape", shape_name(o.shape)},
                           {"color", o.color},
                           {"phrase", o.phrase},
                           {"center", {o.center.x(), o.center.y()}},
                           {"size", o.size},
                           {"height", o.height},
                           {"yaw", o.yaw},
                           {"gaussians", o.gaussians}});
    }
    return {{"objects", objects},
            {"ground_extent", spec.ground_extent},
            {"total_gaussians", spec.total_gaussians},
            {"views", spec.views},
            {"image_size", spec.image_size},
            {"fov", spec.fov},
            {"camera_distance", spec.camera_distance},
            {"min_gap", spec.min_gap}};
}

SynthSpec random_synth_spec(std::uint64_t seed, int min_objects, int max_objects, int min_gaussians,
                            int max_gaussians, int views) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    SynthSpec spec;
    spec.views = views;
    spec.total_gaussians = std::uniform_int_distribution<int>(min_gaussians, max_gaussians)(rng);

    std::vector<std::string> colors;
    for (const auto& c : mock_palette()) {
        if (c.name != "gray") {
            colors.push_back(c.name);
        }
    }
    max_objects = std::min<int>(max_objects, static_cast<int>(colors.size()));
    std::shuffle(colors.begin(), colors.end(), rng);
    const int n = std::uniform_int_distribution<int>(min_objects, max_objects)(rng);
    const double half = spec.ground_extent / 3.0;
    for (int i = 0; i < n; ++i) {
        ObjectSpec o;
        o.shape = static_cast<ShapeKind>(std::uniform_int_distribution<int>(0, 2)(rng));
        o.color = colors[static_cast<std::size_t>(i)];
        o.size = 0.25 + 0.25 * uni(rng);
        o.yaw = 90.0 * uni(rng);
        if (o.shape == ShapeKind::kCylinder) {
            o.height = o.size * (0.8 + 0.8 * uni(rng));
        }
        for (int attempt = 0;; ++attempt) {
            if (attempt > 1000) {
                throw DomainError("random synth spec: could not place objects");
            }
            o.center = {(2.0 * uni(rng) - 1.0) * half, (2.0 * uni(rng) - 1.0) * half};
            bool clear = true;
            for (const auto& other : spec.objects) {
                const double gap = (o.center - other.center).norm() - footprint_radius(o) - footprint_radius(other);
                clear = clear && gap >= 3.0 * spec.min_gap;
            }
            if (clear) {
                break;
            }
        }
        spec.objects.push_back(std::move(o));
    }
    return spec;
}

SynthScene synth_scene(const SynthSpec& spec, std::uint64_t seed, bool render_views, const RenderOptions& options) {
    if (spec.objects.empty()) {
        throw ValidationError("synth: at least one object is required");
    }
    if (spec.views < 1 || spec.image_size < 1 || !(spec.ground_extent > 0.0)) {
        throw ValidationError("synth: views, image size and ground extent must be positive");
    }
    for (std::size_t i = 0; i < spec.objects.size(); ++i) {
        const auto& a = spec.objects[i];
        if (!(a.size > 0.0)) {
            throw ValidationError(fmt::format("synth: object {} has non-positive size", i));
        }
        for (std::size_t j = 0; j < i; ++j) {
            const auto& b = spec.objects[j];
            const double gap = (a.center - b.center).norm() - footprint_radius(a) - footprint_radius(b);
            if (gap < spec.min_gap) {
                throw ValidationError(
                    fmt::format("synth: objects {} and {} overlap (clearance {:.3f} < {:.3f})", j, i, gap, spec.min_gap));
            }
        }
    }

    SynthScene out;
    out.spec = spec;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    int object_total = 0;
    for (auto& o : out.spec.objects) {
        if (o.phrase.empty()) {
            o.phrase = fmt::format("{} {}", o.color, shape_name(o.shape));
        }
        object_total += object_gaussians(o);
    }
    const int ground_count = spec.total_gaussians - object_total;
    if (ground_count < 0) {
        throw ValidationError("synth: total_gaussians is smaller than the object Gaussians");
    }
    out.scene.reserve(static_cast<std::size_t>(spec.total_gaussians));

    for (const auto& o : out.spec.objects) {
        out.registry.add(o.phrase, o.color);
        out.phrases.push_back(o.phrase);
        const int n = object_gaussians(o);
        const float sigma = static_cast<float>(0.7 * std::sqrt(surface_area(o) / n));
        const Eigen::Vector3f rgb = palette_rgb(o.color);
        const std::size_t first = out.scene.size();
        for (int k = 0; k < n; ++k) {
            const SurfaceSample s = sample_surface(o, rng);
            out.scene.add(s.point.cast<float>(), quat_from_normal(s.normal),
                          Eigen::Vector3f(sigma, sigma, kFlatness * sigma), kObjectOpacity, rgb);
        }
        out.targets.emplace_back(0);
        out.targets.back() = TargetFlags(first + static_cast<std::size_t>(n));
        for (std::size_t i = first; i < out.scene.size(); ++i) {
            out.targets.back().set(i);
        }
    }

    // Ground: jittered grid over the free area, then trimmed to the budget.
    const double extent = spec.ground_extent;
    std::vector<Eigen::Vector3f> ground;
    if (ground_count > 0) {
        double free_fraction = 1.0;
        for (const auto& o : out.spec.objects) {
            free_fraction -= std::numbers::pi * footprint_radius(o) * footprint_radius(o) / (extent * extent);
        }
        const int cells = std::max(1, static_cast<int>(std::ceil(std::sqrt(ground_count / std::max(free_fraction, 0.1)))));
        const double step = extent / cells;
        for (int gy = 0; gy < cells; ++gy) {
            for (int gx = 0; gx < cells; ++gx) {
                const double x = -extent / 2 + (gx + uni(rng)) * step;
                const double y = -extent / 2 + (gy + uni(rng)) * step;
                const bool hidden = std::any_of(out.spec.objects.begin(), out.spec.objects.end(),
                                                [&](const ObjectSpec& o) { return under_object(o, x, y); });
                if (!hidden) {
                    ground.emplace_back(static_cast<float>(x), static_cast<float>(y), 0.0f);
                }
            }
        }
        std::shuffle(ground.begin(), ground.end(), rng);
        if (ground.size() > static_cast<std::size_t>(ground_count)) {
            ground.resize(static_cast<std::size_t>(ground_count));
        }
        const float sigma = static_cast<float>(0.8 * extent * std::sqrt(free_fraction / ground.size()));
        const Eigen::Vector3f gray = palette_rgb("gray") / kColorGain;
        for (const auto& p : ground) {
            out.scene.add(p, Eigen::Vector4f(1, 0, 0, 0), Eigen::Vector3f(sigma, sigma, kFlatness * sigma),
                          kGroundOpacity, gray);
        }
    }
    for (auto& t : out.targets) {
        TargetFlags full(out.scene.size());
        for (const auto i : t.indices()) {
            full.set(i);
        }
        t = std::move(full);
    }

    out.cameras = synth_cameras(spec);
    if (render_views) {
        out.views.reserve(out.cameras.size());
        for (const auto& cam : out.cameras) {
            out.views.push_back(render_rgb(cam, out.scene, nullptr, options));
        }
    }
    return out;
}

void write_synth(const SynthScene& synth, const std::string& dir) {
    const fs::path root(dir);
    fs::create_directories(root / "images");
    fs::create_directories(root / "gt");
    save_scene_file(synth.scene, (root / "scene.ply").string());
    io::write_text_file((root / "cameras.json").string(), save_cameras(synth.cameras));
    for (std::size_t i = 0; i < synth.views.size(); ++i) {
        write_png(synth.views[i], (root / "images" / view_image_name(static_cast<int>(i))).string());
    }
    json cases = json::array();
    for (std::size_t k = 0; k < synth.targets.size(); ++k) {
        const std::string flags = fmt::format("gt/{}.flags", k);
        save_flags_file(synth.targets[k], (root / flags).string());
        cases.push_back({{"query", synth.phrases[k]}, {"scene", "scene.ply"}, {"books", "books"}, {"gt_flags", flags}});
    }
    io::write_text_file((root / "registry.json").string(), synth.registry.to_json_text());
    io::write_text_file((root / "spec.json").string(), synth_spec_to_json(synth.spec).dump(2));
    const json suite = {{"provider", "mock:registry.json"}, {"cases", cases}};
    io::write_text_file((root / "cases.json").string(), suite.dump(2));
}

void perturb_book(SemanticVectorBook& svb, double fraction, double max_angle_deg, std::uint64_t seed) {
    std::vector<PatchEntry*> entries;
    for (auto& view : svb.views) {
        for (auto& e : view) {
            entries.push_back(&e);
        }
    }
    std::mt19937_64 rng(seed);
    std::shuffle(entries.begin(), entries.end(), rng);
    const auto count = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(entries.size())));
    std::uniform_real_distribution<double> angle(0.0, deg2rad(max_angle_deg));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t k = 0; k < std::min(count, entries.size()); ++k) {
        const auto src = entries[k]->vector.values();
        Eigen::VectorXd v(static_cast<Eigen::Index>(src.size()));
        for (std::size_t i = 0; i < src.size(); ++i) {
            v[static_cast<Eigen::Index>(i)] = src[i];
        }
        Eigen::VectorXd u(v.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            u[i] = normal(rng);
        }
        u -= u.dot(v) * v;
        u.normalize();
        const double theta = angle(rng);
        const Eigen::VectorXd w = std::cos(theta) * v + std::sin(theta) * u;
        std::vector<float> values(src.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            values[i] = static_cast<float>(w[static_cast<Eigen::Index>(i)]);
        }
        entries[k]->vector = SemanticVector(std::move(values));
    }
}

} // namespace gvr
