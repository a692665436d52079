// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gvr/books.hpp"
#include "gvr/camera.hpp"
#include "gvr/flags.hpp"
#include "gvr/mask.hpp"
#include "gvr/renderer.hpp"
#include "gvr/retrieval.hpp"
#include "gvr/scene.hpp"

#include <nlohmann/json_fwd.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gvr {

class Provider;

struct GroundingConfig {
    /// Views entering the vote.
    int k_views = 8;
    bool vote_all_views = false;
    int k_ring = 4;
    double theta_vir = 30.0;
    double d_vir_factor = 3.0;
    /// Vote radius as a fraction of the scene bounding-box diagonal.
    double epsilon_frac = 0.02;
    int dim = kDefaultEmbeddingDim;
    int image_width = 512;
    int image_height = 512;
    double fov = 60.0;
    Eigen::Vector3d up = Eigen::Vector3d::UnitZ();
    /// Replace `up` by the normal of the camera-center plane.
    bool estimate_up = false;
    double bev_height_factor = 4.0;
    /// When false, the BEV looks at the scene center and is segmented by text.
    bool use_rfl = true;
    /// When false, the coarse frustum-filter result is final.
    bool use_smfi = true;
    int workers = 0;

    void validate() const;
};

GroundingConfig config_from_json(const nlohmann::json& j);
GroundingConfig load_config_file(const std::string& path);
nlohmann::json config_to_json(const GroundingConfig& config);

struct VirtualRig {
    CameraModel bev_camera;
    std::vector<CameraModel> ring;
    double d_vir = 0.0;
    double theta_vir = 0.0;
    Eigen::Vector3d up = Eigen::Vector3d::UnitZ();
    double bev_height = 0.0;
};

struct GroundingDiagnostics {
    VoteResult vote;
    /// Hits that entered the vote, localized.
    std::vector<ViewHit> hits;
    double epsilon = 0.0;
    double target_width = 0.0;
    std::size_t bev_mask_area = 0;
    std::size_t coarse_count = 0;
    std::size_t refined_count = 0;
    /// Per ring view; 0 for skipped views.
    std::vector<std::size_t> ring_mask_areas;
    std::vector<int> skipped_ring_views;
    std::vector<std::string> warnings;
    /// Stage name -> seconds.
    std::map<std::string, double> timings;
    TargetFlags coarse;
    VirtualRig rig;
};

struct GroundingResult {
    TargetFlags flags;
    WorldPoint location = WorldPoint::Zero();
    GroundingDiagnostics diagnostics;
};

/// Camera at l3d + height * up looking along -up. Roll aligns camera-x with
/// world-x projected onto the plane orthogonal to up (world-y if degenerate).
CameraModel make_bev_camera(const WorldPoint& l3d, const Eigen::Vector3d& up, double height, int width,
                            int image_height, double fov);

/// Height above l3d: factor x the scene's extent along up, raised until every
/// scene bounding-box corner lands inside the BEV image.
double bev_height_for(const Eigen::AlignedBox3d& bounds, const WorldPoint& l3d, const Eigen::Vector3d& up,
                      double factor, int width, int height, double fov);

/// Segments the BEV render at the projection of l3d. Throws GroundingError
/// when the point hits background.
BinaryMask bev_coarse_mask(const GaussianScene& scene, const WorldPoint& l3d, const CameraModel& bev_camera,
                           Provider& provider, const RenderOptions& options = {});

/// Flags Gaussians (all, or those set in `within`) whose centers lie in front
/// of the camera and whose nearest pixel is in bounds and set in the mask.
TargetFlags frustum_filter(const BinaryMask& mask, const CameraModel& cam, const GaussianScene& scene,
                           const TargetFlags* within = nullptr);

/// k cameras at distance d_vir from l3d, pitched theta_vir degrees above the
/// plane orthogonal to up, yaws 360 * i / k, all looking at l3d.
std::vector<CameraModel> make_virtual_ring(const WorldPoint& l3d, int k, double d_vir, double theta_vir,
                                           const Eigen::Vector3d& up, int width, int height, double fov);

/// World-space width of a BEV mask on the plane through l3d orthogonal to up.
double target_width(const BinaryMask& bev_mask, const CameraModel& bev_camera, const WorldPoint& l3d);

struct SmfiResult {
    TargetFlags flags;
    std::vector<std::size_t> mask_areas;
    std::vector<int> skipped;
};

/// Intersection of per-ring-view frustum filters of the coarse set. Views with
/// no text match are skipped; if all are skipped the coarse set is returned.
SmfiResult smfi_refine(const TargetFlags& coarse, const GaussianScene& scene, std::string_view query,
                       const std::vector<CameraModel>& ring, Provider& provider, const RenderOptions& options = {});

/// Normal of the least-squares plane through the camera centers, signed to
/// agree with `hint`.
Eigen::Vector3d estimate_up_vector(const std::vector<CameraModel>& cams, const Eigen::Vector3d& hint);

/// Full pipeline: retrieval, vote, BEV mask, coarse filter, ring refinement.
GroundingResult ground(std::string_view query, const GaussianScene& scene, const KnowledgeBooks& books,
                       const std::vector<CameraModel>& cams, Provider& provider, const GroundingConfig& config = {});

nlohmann::json diagnostics_to_json(const GroundingDiagnostics& d);

} // namespace gvr
