// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gvr/eval.hpp"

#include "gvr/error.hpp"
#include "gvr/io.hpp"
#include "gvr/provider.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <map>

namespace gvr {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

double ratio(std::size_t inter, std::size_t uni) {
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

} // namespace

double iou(const TargetFlags& a, const TargetFlags& b) {
    if (a.size() != b.size()) {
        throw DomainError(fmt::format("iou: flag lengths differ ({} vs {})", a.size(), b.size()));
    }
    std::size_t inter = 0;
    std::size_t uni = 0;
    const auto ra = a.raw();
    const auto rb = b.raw();
    for (std::size_t i = 0; i < ra.size(); ++i) {
        inter += (ra[i] & rb[i]);
        uni += (ra[i] | rb[i]);
    }
    return ratio(inter, uni);
}

double iou(const BinaryMask& a, const BinaryMask& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw DomainError(fmt::format("iou: mask sizes differ ({}x{} vs {}x{})", a.width(), a.height(), b.width(),
                                      b.height()));
    }
    std::size_t inter = 0;
    std::size_t uni = 0;
    const auto ra = a.bits();
    const auto rb = b.bits();
    for (std::size_t i = 0; i < ra.size(); ++i) {
        inter += (ra[i] & rb[i]);
        uni += (ra[i] | rb[i]);
    }
    return ratio(inter, uni);
}

EvalReport summarize(std::vector<CaseResult> cases, double threshold) {
    EvalReport r;
    r.threshold = threshold;
    std::size_t correct = 0;
    double sum = 0.0;
    for (auto& c : cases) {
        c.correct = !c.error && c.iou >= threshold;
        correct += c.correct ? 1 : 0;
        sum += c.iou;
    }
    if (!cases.empty()) {
        r.acc = 100.0 * static_cast<double>(correct) / static_cast<double>(cases.size());
        r.miou = sum / static_cast<double>(cases.size());
    }
    r.cases = std::move(cases);
    return r;
}

double mask_iou(const TargetFlags& predicted, const GaussianScene& scene, const std::vector<CameraModel>& cams,
                const std::vector<ViewMask>& gt_masks, const RenderOptions& options) {
    if (gt_masks.empty()) {
        throw DomainError("mask iou: no ground-truth masks");
    }
    double sum = 0.0;
    for (const auto& gt : gt_masks) {
        if (gt.view_id < 0 || static_cast<std::size_t>(gt.view_id) >= cams.size()) {
            throw DomainError(fmt::format("mask iou: unknown view {}", gt.view_id));
        }
        const auto& cam = cams[static_cast<std::size_t>(gt.view_id)];
        const RenderOutput out = render(cam, scene, &predicted, options);
        BinaryMask rendered(cam.width, cam.height);
        for (int y = 0; y < cam.height; ++y) {
            for (int x = 0; x < cam.width; ++x) {
                if (out.alpha[static_cast<std::size_t>(y) * cam.width + x] >= kDepthAlphaFloor) {
                    rendered.set(x, y);
                }
            }
        }
        sum += iou(rendered, gt.mask);
    }
    return sum / static_cast<double>(gt_masks.size());
}

CaseResult run_case(const EvalCase& c, const GaussianScene& scene, const KnowledgeBooks& books, Provider& provider,
                    const GroundingConfig& config, double threshold) {
    CaseResult r;
    r.query = c.query;
    const auto start = std::chrono::steady_clock::now();
    try {
        const GroundingResult g = ground(c.query, scene, books, books.cameras, provider, config);
        r.iou = c.gt_flags ? iou(g.flags, *c.gt_flags)
                           : mask_iou(g.flags, scene, books.cameras, c.gt_masks, RenderOptions{config.workers});
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::kGrounding && e.kind() != ErrorKind::kProvider) {
            throw;
        }
        r.iou = 0.0;
        r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.correct = !r.error && r.iou >= threshold;
    return r;
}

EvalSuite load_suite(const std::string& path) {
    json doc;
    try {
        doc = json::parse(io::read_text_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError(fmt::format("cases {}: {}", path, e.what()));
    }
    const fs::path base = fs::path(path).parent_path();
    const auto resolve = [&](const std::string& p) {
        const fs::path fp(p);
        return (fp.is_absolute() ? fp : base / fp).lexically_normal().string();
    };

    EvalSuite suite;
    try {
        if (doc.contains("provider")) {
            std::string spec = doc.at("provider").get<std::string>();
            const auto colon = spec.find(':');
            if (colon != std::string::npos && (spec.starts_with("mock:") || spec.starts_with("files:"))) {
                spec = spec.substr(0, colon + 1) + resolve(spec.substr(colon + 1));
            }
            suite.provider = spec;
        }
        if (doc.contains("config")) {
            suite.config = config_from_json(doc.at("config"));
        }
        if (doc.contains("threshold")) {
            suite.threshold = doc.at("threshold").get<double>();
        }
        for (const auto& jc : doc.at("cases")) {
            EvalCase c;
            c.query = jc.at("query").get<std::string>();
            c.scene_path = resolve(jc.at("scene").get<std::string>());
            c.books_path = resolve(jc.at("books").get<std::string>());
            const bool has_flags = jc.contains("gt_flags");
            const bool has_masks = jc.contains("gt_masks");
            if (has_flags == has_masks) {
                throw ValidationError(
                    fmt::format("case '{}': give exactly one of gt_flags and gt_masks", c.query));
            }
            if (has_flags) {
                c.gt_flags = load_flags_file(resolve(jc.at("gt_flags").get<std::string>()));
            } else {
                for (const auto& jm : jc.at("gt_masks")) {
                    c.gt_masks.push_back({jm.at("view_id").get<int>(), decode_rle(rle_from_json(jm.at("mask")))});
                }
            }
            suite.cases.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw ParseError(fmt::format("cases {}: {}", path, e.what()));
    }
    return suite;
}

EvalReport evaluate(const EvalSuite& suite, Provider& provider) {
    std::map<std::string, GaussianScene> scenes;
    std::map<std::string, KnowledgeBooks> books;
    std::vector<CaseResult> results;
    results.reserve(suite.cases.size());
    for (const auto& c : suite.cases) {
        auto sit = scenes.find(c.scene_path);
        if (sit == scenes.end()) {
            sit = scenes.emplace(c.scene_path, load_scene_file(c.scene_path)).first;
        }
        auto bit = books.find(c.books_path);
        if (bit == books.end()) {
            bit = books.emplace(c.books_path, load_books(c.books_path, suite.config.dim)).first;
        }
        if (c.gt_flags && c.gt_flags->size() != sit->second.size()) {
            throw ValidationError(fmt::format("case '{}': ground truth holds {} flags for {} Gaussians", c.query,
                                              c.gt_flags->size(), sit->second.size()));
        }
        results.push_back(run_case(c, sit->second, bit->second, provider, suite.config, suite.threshold));
    }
    return summarize(std::move(results), suite.threshold);
}

json report_to_json(const EvalReport& report) {
    json cases = json::array();
    for (const auto& c : report.cases) {
        json jc = {{"query", c.query}, {"iou", c.iou}, {"correct", c.correct}, {"seconds", c.seconds}};
        if (c.error) {
            jc["error"] = *c.error;
        }
        cases.push_back(std::move(jc));
    }
    return {{"acc", report.acc},
            {"miou", report.miou},
            {"miou_percent", 100.0 * report.miou},
            {"threshold", report.threshold},
            {"count", report.cases.size()},
            {"cases", cases}};
}

} // namespace gvr
