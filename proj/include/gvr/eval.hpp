// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gvr/flags.hpp"
#include "gvr/grounding.hpp"
#include "gvr/mask.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gvr {

class Provider;

inline constexpr double kDefaultCorrectIou = 0.5;

/// |a & b| / |a | b|; two empty sets score 1. Throws DomainError on size mismatch.
double iou(const TargetFlags& a, const TargetFlags& b);
double iou(const BinaryMask& a, const BinaryMask& b);

struct ViewMask {
    int view_id = 0;
    BinaryMask mask;
};

struct EvalCase {
    std::string query;
    std::string scene_path;
    std::string books_path;
    std::optional<TargetFlags> gt_flags;
    std::vector<ViewMask> gt_masks;
};

struct CaseResult {
    std::string query;
    double iou = 0.0;
    bool correct = false;
    std::optional<std::string> error;
    double seconds = 0.0;
};

struct EvalReport {
    std::vector<CaseResult> cases;
    /// Percent of cases with IoU >= threshold.
    double acc = 0.0;
    /// Mean IoU in [0, 1].
    double miou = 0.0;
    double threshold = kDefaultCorrectIou;
};

EvalReport summarize(std::vector<CaseResult> cases, double threshold = kDefaultCorrectIou);

/// Mean IoU between the rendered target subset (alpha >= 0.5) and per-view
/// ground-truth masks.
double mask_iou(const TargetFlags& predicted, const GaussianScene& scene, const std::vector<CameraModel>& cams,
                const std::vector<ViewMask>& gt_masks, const RenderOptions& options = {});

/// Grounds one case against an already loaded scene and books. Grounding and
/// provider failures are recorded as IoU 0.
CaseResult run_case(const EvalCase& c, const GaussianScene& scene, const KnowledgeBooks& books, Provider& provider,
                    const GroundingConfig& config, double threshold = kDefaultCorrectIou);

struct EvalSuite {
    std::vector<EvalCase> cases;
    std::string provider = "mock";
    GroundingConfig config;
    double threshold = kDefaultCorrectIou;
};

/// Reads a cases file; relative paths resolve against its directory.
EvalSuite load_suite(const std::string& path);

/// Loads each referenced scene and book once and runs every case.
EvalReport evaluate(const EvalSuite& suite, Provider& provider);

nlohmann::json report_to_json(const EvalReport& report);

} // namespace gvr
