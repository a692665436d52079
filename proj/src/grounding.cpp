// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gvr/grounding.hpp"

#include "gvr/error.hpp"
#include "gvr/io.hpp"
#include "gvr/provider.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <numbers>

namespace gvr {

using json = nlohmann::json;

// -----------------------------------------------------------------------------
//  Config
// -----------------------------------------------------------------------------

void GroundingConfig::validate() const {
    const auto fail = [](const std::string& what) { throw ValidationError("config: " + what); };
    if (k_views < 1) {
        fail(fmt::format("k_views must be >= 1, got {}", k_views));
    }
    if (k_ring < 1) {
        fail(fmt::format("k_ring must be >= 1, got {}", k_ring));
    }
    if (!(theta_vir > -90.0 && theta_vir < 90.0)) {
        fail(fmt::format("theta_vir must lie in (-90, 90), got {}", theta_vir));
    }
    if (!(d_vir_factor > 0.0)) {
        fail("d_vir_factor must be positive");
    }
    if (!(epsilon_frac > 0.0)) {
        fail("epsilon_frac must be positive");
    }
    if (dim < 1) {
        fail("c must be positive");
    }
    if (image_width < 1 || image_height < 1) {
        fail("image size must be positive");
    }
    if (!(fov > 0.0 && fov < 180.0)) {
        fail(fmt::format("fov must lie in (0, 180), got {}", fov));
    }
    if (!up.allFinite() || up.norm() < 1e-9) {
        fail("up must be a non-zero vector");
    }
    if (!(bev_height_factor > 0.0)) {
        fail("bev_height_factor must be positive");
    }
}

GroundingConfig config_from_json(const json& j) {
    if (!j.is_object()) {
        throw ParseError("config: expected a JSON object");
    }
    GroundingConfig c;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "k_views") {
                c.k_views = value.get<int>();
            } else if (key == "vote_all_views") {
                c.vote_all_views = value.get<bool>();
            } else if (key == "k_ring") {
                c.k_ring = value.get<int>();
            } else if (key == "theta_vir") {
                c.theta_vir = value.get<double>();
            } else if (key == "d_vir_factor") {
                c.d_vir_factor = value.get<double>();
            } else if (key == "epsilon_frac") {
                c.epsilon_frac = value.get<double>();
            } else if (key == "c") {
                c.dim = value.get<int>();
            } else if (key == "image_width") {
                c.image_width = value.get<int>();
            } else if (key == "image_height") {
                c.image_height = value.get<int>();
            } else if (key == "fov") {
                c.fov = value.get<double>();
            } else if (key == "up") {
                const auto u = value.get<std::vector<double>>();
                if (u.size() != 3) {
                    throw ParseError("config: up needs 3 values");
                }
                c.up = {u[0], u[1], u[2]};
            } else if (key == "estimate_up") {
                c.estimate_up = value.get<bool>();
            } else if (key == "bev_height_factor") {
                c.bev_height_factor = value.get<double>();
            } else if (key == "use_rfl") {
                c.use_rfl = value.get<bool>();
            } else if (key == "use_smfi") {
                c.use_smfi = value.get<bool>();
            } else if (key == "workers") {
                c.workers = value.get<int>();
            } else {
                throw ValidationError(fmt::format("config: unknown key '{}'", key));
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    c.up.normalize();
    c.validate();
    return c;
}

GroundingConfig load_config_file(const std::string& path) {
    try {
        return config_from_json(json::parse(io::read_text_file(path)));
    } catch (const json::parse_error& e) {
        throw ParseError(fmt::format("config {}: {}", path, e.what()));
    }
}

json config_to_json(const GroundingConfig& c) {
    return {{"k_views", c.k_views},
            {"vote_all_views", c.vote_all_views},
            {"k_ring", c.k_ring},
            {"theta_vir", c.theta_vir},
            {"d_vir_factor", c.d_vir_factor},
            {"epsilon_frac", c.epsilon_frac},
            {"c", c.dim},
            {"image_width", c.image_width},
            {"image_height", c.image_height},
            {"fov", c.fov},
            {"up", {c.up.x(), c.up.y(), c.up.z()}},
            {"estimate_up", c.estimate_up},
            {"bev_height_factor", c.bev_height_factor},
            {"use_rfl", c.use_rfl},
            {"use_smfi", c.use_smfi},
            {"workers", c.workers}};
}

// -----------------------------------------------------------------------------
//  Virtual cameras
// -----------------------------------------------------------------------------

namespace {

/// World-x projected onto the plane orthogonal to up, world-y if degenerate.
Eigen::Vector3d horizontal_axis(const Eigen::Vector3d& up) {
    Eigen::Vector3d x = Eigen::Vector3d::UnitX() - up.x() * up;
    if (x.norm() < 1e-6) {
        x = Eigen::Vector3d::UnitY() - up.y() * up;
    }
    return x.normalized();
}

} // namespace

CameraModel make_bev_camera(const WorldPoint& l3d, const Eigen::Vector3d& up, double height, int width,
                            int image_height, double fov) {
    if (!(height > 0.0) || !std::isfinite(height)) {
        throw DomainError(fmt::format("BEV height must be positive, got {}", height));
    }
    const Eigen::Vector3d u = up.normalized();
    CameraModel cam = CameraModel::with_fov(width, image_height, fov);
    cam.rotation = rotation_from_axes(-u, horizontal_axis(u));
    cam.translation = -(cam.rotation * (l3d + height * u));
    return cam;
}

double bev_height_for(const Eigen::AlignedBox3d& bounds, const WorldPoint& l3d, const Eigen::Vector3d& up,
                      double factor, int width, int height, double fov) {
    const Eigen::Vector3d u = up.normalized();
    const CameraModel probe = make_bev_camera(l3d, u, 1.0, width, height, fov);
    const Eigen::Vector3d ax = probe.rotation.row(0).transpose();
    const Eigen::Vector3d ay = probe.rotation.row(1).transpose();
    const double half_u = std::max(probe.cx - 1.0, 1.0);
    const double half_v = std::max(probe.cy - 1.0, 1.0);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double needed = 0.0;
    for (int k = 0; k < 8; ++k) {
        const WorldPoint corner = bounds.corner(static_cast<Eigen::AlignedBox3d::CornerType>(k));
        const Eigen::Vector3d d = corner - l3d;
        const double a = d.dot(u);
        lo = std::min(lo, a);
        hi = std::max(hi, a);
        needed = std::max(needed, a + std::abs(d.dot(ax)) * probe.fx / half_u);
        needed = std::max(needed, a + std::abs(d.dot(ay)) * probe.fy / half_v);
    }
    const double extent = hi - lo;
    const double h = std::max(factor * extent, needed);
    return h > 0.0 ? h : 1.0;
}

std::vector<CameraModel> make_virtual_ring(const WorldPoint& l3d, int k, double d_vir, double theta_vir,
                                           const Eigen::Vector3d& up, int width, int height, double fov) {
    if (k < 1) {
        throw DomainError(fmt::format("virtual ring needs k >= 1, got {}", k));
    }
    if (!(d_vir > 0.0) || !std::isfinite(d_vir)) {
        throw DomainError(fmt::format("virtual ring needs d_vir > 0, got {}", d_vir));
    }
    const Eigen::Vector3d u = up.normalized();
    const Eigen::Vector3d e1 = horizontal_axis(u);
    const Eigen::Vector3d e2 = u.cross(e1);
    const double pitch = theta_vir * std::numbers::pi / 180.0;
    const CameraModel base = CameraModel::with_fov(width, height, fov);
    std::vector<CameraModel> ring;
    ring.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const double yaw = 2.0 * std::numbers::pi * i / k;
        const Eigen::Vector3d dir =
            std::cos(pitch) * (std::cos(yaw) * e1 + std::sin(yaw) * e2) + std::sin(pitch) * u;
        CameraModel cam = base.looking_at(l3d + d_vir * dir, l3d, u);
        cam.id = i;
        ring.push_back(cam);
    }
    return ring;
}

Eigen::Vector3d estimate_up_vector(const std::vector<CameraModel>& cams, const Eigen::Vector3d& hint) {
    if (cams.size() < 3) {
        throw DomainError("estimating up needs at least 3 cameras");
    }
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& c : cams) {
        mean += c.center();
    }
    mean /= static_cast<double>(cams.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& c : cams) {
        const Eigen::Vector3d d = c.center() - mean;
        cov += d * d.transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    Eigen::Vector3d n = solver.eigenvectors().col(0).normalized();
    return n.dot(hint) < 0.0 ? Eigen::Vector3d(-n) : n;
}

// -----------------------------------------------------------------------------
//  Segmentation stages
// -----------------------------------------------------------------------------

BinaryMask bev_coarse_mask(const GaussianScene& scene, const WorldPoint& l3d, const CameraModel& bev_camera,
                           Provider& provider, const RenderOptions& options) {
    bev_camera.validate();
    const auto proj = project_point(l3d, bev_camera);
    if (!proj || !bev_camera.contains(nearest_pixel(proj->pixel))) {
        throw GroundingError("bev", "target location is not visible from the BEV camera");
    }
    const RgbImage image = render_rgb(bev_camera, scene, nullptr, options);
    auto mask = provider.segment_point(image, proj->pixel);
    if (!mask) {
        throw GroundingError("bev", "BEV point hit background");
    }
    return std::move(*mask);
}

TargetFlags frustum_filter(const BinaryMask& mask, const CameraModel& cam, const GaussianScene& scene,
                           const TargetFlags* within) {
    if (mask.width() != cam.width || mask.height() != cam.height) {
        throw DomainError(fmt::format("frustum filter: {}x{} mask for a {}x{} camera", mask.width(), mask.height(),
                                      cam.width, cam.height));
    }
    if (within && within->size() != scene.size()) {
        throw DomainError("frustum filter: candidate flags do not match the scene");
    }
    TargetFlags out(scene.size());
    for (std::size_t i = 0; i < scene.size(); ++i) {
        if (within && !within->test(i)) {
            continue;
        }
        const auto proj = project_point(scene.positions[i].cast<double>(), cam);
        if (!proj) {
            continue;
        }
        const PixelIndex p = nearest_pixel(proj->pixel);
        if (cam.contains(p) && mask.test(p.x, p.y)) {
            out.set(i);
        }
    }
    return out;
}

double target_width(const BinaryMask& bev_mask, const CameraModel& bev_camera, const WorldPoint& l3d) {
    if (bev_mask.empty()) {
        throw DomainError("target width of an empty mask");
    }
    const double depth = bev_camera.to_camera(l3d).z();
    if (!(depth > 0.0)) {
        throw DomainError("target lies behind the BEV camera");
    }
    const PixelBox box = bev_mask.bbox();
    return std::max(box.width() * depth / bev_camera.fx, box.height() * depth / bev_camera.fy);
}

SmfiResult smfi_refine(const TargetFlags& coarse, const GaussianScene& scene, std::string_view query,
                       const std::vector<CameraModel>& ring, Provider& provider, const RenderOptions& options) {
    SmfiResult r;
    r.flags = coarse;
    r.mask_areas.assign(ring.size(), 0);
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const RgbImage image = render_rgb(ring[i], scene, &coarse, options);
        const auto mask = provider.segment_text(image, query);
        if (!mask) {
            r.skipped.push_back(static_cast<int>(i));
            continue;
        }
        r.mask_areas[i] = mask->area();
        r.flags &= frustum_filter(*mask, ring[i], scene, &coarse);
    }
    return r;
}

// -----------------------------------------------------------------------------
//  Pipeline
// -----------------------------------------------------------------------------

namespace {

class StageClock {
public:
    explicit StageClock(std::map<std::string, double>& sink) : sink_(sink) {}
    void lap(const std::string& stage) {
        const auto now = std::chrono::steady_clock::now();
        sink_[stage] += std::chrono::duration<double>(now - last_).count();
        last_ = now;
    }

private:
    std::map<std::string, double>& sink_;
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

WorldPoint centroid_of(const GaussianScene& scene, const TargetFlags& flags) {
    WorldPoint sum = WorldPoint::Zero();
    std::size_t n = 0;
    for (std::size_t i = 0; i < scene.size(); ++i) {
        if (flags.test(i)) {
            sum += scene.positions[i].cast<double>();
            ++n;
        }
    }
    return n == 0 ? sum : WorldPoint(sum / static_cast<double>(n));
}

} // namespace

GroundingResult ground(std::string_view query, const GaussianScene& scene, const KnowledgeBooks& books,
                       const std::vector<CameraModel>& cams, Provider& provider, const GroundingConfig& config) {
    config.validate();
    if (scene.empty()) {
        throw DomainError("cannot ground a query in an empty scene");
    }
    check_alignment(books.svb, books.depth, cams);
    if (books.svb.dim != config.dim) {
        throw ValidationError(
            fmt::format("books hold {}-dimensional embeddings, config expects {}", books.svb.dim, config.dim));
    }
    if (cams.empty()) {
        throw ValidationError("grounding needs the view cameras");
    }

    GroundingResult result;
    auto& diag = result.diagnostics;
    StageClock clock(diag.timings);
    const RenderOptions render_options{config.workers};
    const Eigen::AlignedBox3d bounds = scene.bounds();
    const Eigen::Vector3d up = config.estimate_up ? estimate_up_vector(cams, config.up) : config.up.normalized();
    diag.epsilon = config.epsilon_frac * bounds.diagonal().norm();
    diag.rig.up = up;
    diag.rig.theta_vir = config.theta_vir;

    BinaryMask bev_mask;
    WorldPoint ring_center;
    if (config.use_rfl) {
        const SemanticVector q = provider.embed_text(query);
        if (q.dim() != books.svb.dim) {
            throw DomainError(fmt::format("query embedding has dimension {}, books hold {}", q.dim(), books.svb.dim));
        }
        clock.lap("embed");
        auto hits = score_views(q, books.svb);
        if (!config.vote_all_views) {
            hits = select_top_k_views(std::move(hits), config.k_views);
        }
        diag.hits = localize_hits(std::move(hits), books.depth, cams);
        clock.lap("retrieve");
        diag.vote = stereo_vote(diag.hits, diag.epsilon);
        result.location = diag.vote.location;
        clock.lap("vote");

        diag.rig.bev_height = bev_height_for(bounds, result.location, up, config.bev_height_factor,
                                             config.image_width, config.image_height, config.fov);
        diag.rig.bev_camera = make_bev_camera(result.location, up, diag.rig.bev_height, config.image_width,
                                              config.image_height, config.fov);
        bev_mask = bev_coarse_mask(scene, result.location, diag.rig.bev_camera, provider, render_options);
        ring_center = result.location;
    } else {
        const WorldPoint center = bounds.center();
        diag.rig.bev_height = bev_height_for(bounds, center, up, config.bev_height_factor, config.image_width,
                                             config.image_height, config.fov);
        diag.rig.bev_camera =
            make_bev_camera(center, up, diag.rig.bev_height, config.image_width, config.image_height, config.fov);
        const RgbImage image = render_rgb(diag.rig.bev_camera, scene, nullptr, render_options);
        auto mask = provider.segment_text(image, query);
        if (!mask) {
            throw GroundingError("bev", "query not found in the BEV");
        }
        bev_mask = std::move(*mask);
    }
    diag.bev_mask_area = bev_mask.area();
    clock.lap("bev");

    diag.coarse = frustum_filter(bev_mask, diag.rig.bev_camera, scene);
    diag.coarse_count = diag.coarse.count();
    if (diag.coarse_count == 0) {
        throw GroundingError("frustum", "BEV mask selects no Gaussians");
    }
    if (!config.use_rfl) {
        ring_center = centroid_of(scene, diag.coarse);
        result.location = ring_center;
    }
    clock.lap("coarse");

    if (config.use_smfi) {
        diag.target_width = target_width(bev_mask, diag.rig.bev_camera, ring_center);
        diag.rig.d_vir = config.d_vir_factor * diag.target_width;
        diag.rig.ring = make_virtual_ring(ring_center, config.k_ring, diag.rig.d_vir, config.theta_vir, up,
                                          config.image_width, config.image_height, config.fov);
        SmfiResult smfi = smfi_refine(diag.coarse, scene, query, diag.rig.ring, provider, render_options);
        diag.ring_mask_areas = std::move(smfi.mask_areas);
        diag.skipped_ring_views = std::move(smfi.skipped);
        if (diag.skipped_ring_views.size() == diag.rig.ring.size()) {
            diag.warnings.push_back("no ring view matched the query; keeping the coarse result");
        }
        result.flags = std::move(smfi.flags);
    } else {
        result.flags = diag.coarse;
    }
    diag.refined_count = result.flags.count();
    clock.lap("smfi");
    return result;
}

json diagnostics_to_json(const GroundingDiagnostics& d) {
    const auto point = [](const WorldPoint& p) { return json::array({p.x(), p.y(), p.z()}); };
    json hits = json::array();
    for (const auto& h : d.hits) {
        json jh = {{"view_id", h.view_id},
                   {"patch_id", h.patch_id},
                   {"score", h.score},
                   {"loc2d", {h.loc2d.u, h.loc2d.v}}};
        jh["loc3d"] = h.loc3d ? point(*h.loc3d) : json(nullptr);
        hits.push_back(std::move(jh));
    }
    return {{"vote",
             {{"location", point(d.vote.location)}, {"supporters", d.vote.supporters}, {"rejected", d.vote.rejected}}},
            {"hits", hits},
            {"epsilon", d.epsilon},
            {"target_width", d.target_width},
            {"bev_height", d.rig.bev_height},
            {"d_vir", d.rig.d_vir},
            {"up", point(d.rig.up)},
            {"bev_mask_area", d.bev_mask_area},
            {"coarse_count", d.coarse_count},
            {"refined_count", d.refined_count},
            {"ring_mask_areas", d.ring_mask_areas},
            {"skipped_ring_views", d.skipped_ring_views},
            {"warnings", d.warnings},
            {"timings", d.timings}};
}

} // namespace gvr
