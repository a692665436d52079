// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

// gvr: prepare knowledge books, ground text queries, evaluate, synthesize scenes.

#include "gvr/books.hpp"
#include "gvr/error.hpp"
#include "gvr/eval.hpp"
#include "gvr/grounding.hpp"
#include "gvr/io.hpp"
#include "gvr/protocol.hpp"
#include "gvr/provider.hpp"
#include "gvr/synth.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct CommonOptions {
    std::string provider = "mock";
    std::string registry;
    std::string config;
    int workers = 0;
};

gvr::GroundingConfig read_config(const CommonOptions& o) {
    gvr::GroundingConfig c = o.config.empty() ? gvr::GroundingConfig{} : gvr::load_config_file(o.config);
    if (o.workers > 0) {
        c.workers = o.workers;
    }
    return c;
}

std::unique_ptr<gvr::Provider> open_provider(const CommonOptions& o, int dim) {
    gvr::ProviderSettings settings;
    settings.dim = dim;
    settings.registry_path = o.registry;
    return gvr::make_provider(o.provider, settings);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--provider", o.provider, "mock[:REGISTRY], files:DIR or proc:CMD");
    cmd->add_option("--registry", o.registry, "Phrase -> color registry for the mock provider");
    cmd->add_option("--config", o.config, "Grounding config (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--workers", o.workers, "Render threads (0 = all cores)");
}

// -----------------------------------------------------------------------------

struct PrepareArgs {
    CommonOptions common;
    std::string scene;
    std::string cameras;
    std::string images;
    std::string out;
};

int run_prepare(const PrepareArgs& a) {
    const auto t0 = std::chrono::steady_clock::now();
    const gvr::GroundingConfig config = read_config(a.common);
    const gvr::GaussianScene scene = gvr::load_scene_file(a.scene);
    std::vector<gvr::CameraModel> cams = gvr::load_cameras_file(a.cameras);
    std::sort(cams.begin(), cams.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
    for (std::size_t i = 0; i < cams.size(); ++i) {
        if (cams[i].id != static_cast<int>(i)) {
            throw gvr::ValidationError("camera ids must be dense 0..n-1");
        }
    }
    if (cams.empty()) {
        throw gvr::ValidationError("camera manifest is empty");
    }
    const gvr::RenderOptions render_options{config.workers};

    std::vector<gvr::RgbImage> views;
    views.reserve(cams.size());
    for (const auto& cam : cams) {
        if (a.images.empty()) {
            views.push_back(gvr::render_rgb(cam, scene, nullptr, render_options));
            continue;
        }
        gvr::RgbImage img = gvr::read_png((fs::path(a.images) / gvr::view_image_name(cam.id)).string());
        if (img.width != cam.width || img.height != cam.height) {
            throw gvr::ValidationError(fmt::format("image for view {} is {}x{}, camera expects {}x{}", cam.id,
                                                   img.width, img.height, cam.width, cam.height));
        }
        views.push_back(std::move(img));
    }

    auto provider = open_provider(a.common, config.dim);
    gvr::KnowledgeBooks books;
    books.svb = gvr::build_svb(views, *provider);
    if (books.svb.dim != config.dim) {
        throw gvr::ValidationError(
            fmt::format("provider embeds into {} dimensions, config expects {}", books.svb.dim, config.dim));
    }
    books.depth = gvr::build_depth_book(cams, scene, render_options);
    books.cameras = cams;
    gvr::save_books(books, a.out);
    fmt::print("prepared {} views, {} patches, c={} in {:.2f} s -> {}\n", books.svb.size(), books.svb.patch_count(),
               books.svb.dim, seconds_since(t0), a.out);
    return 0;
}

// -----------------------------------------------------------------------------

struct QueryArgs {
    CommonOptions common;
    std::string scene;
    std::string books;
    std::string cameras;
    std::string text;
    std::string out;
};

gvr::RgbImage overlay(const gvr::GaussianScene& scene, const gvr::TargetFlags& flags, const gvr::CameraModel& cam,
                      const gvr::RenderOptions& options) {
    gvr::RgbImage base = gvr::render_rgb(cam, scene, nullptr, options);
    const gvr::RenderOutput target = gvr::render(cam, scene, &flags, options);
    const Eigen::Vector3f highlight(0.1f, 1.0f, 0.3f);
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            const float a = 0.65f * target.alpha[static_cast<std::size_t>(y) * cam.width + x];
            base.set_pixel(x, y, (1.0f - a) * base.pixel(x, y) + a * highlight);
        }
    }
    return base;
}

int run_query(const QueryArgs& a) {
    const auto t0 = std::chrono::steady_clock::now();
    const gvr::GroundingConfig config = read_config(a.common);
    const gvr::GaussianScene scene = gvr::load_scene_file(a.scene);
    gvr::KnowledgeBooks books = gvr::load_books(a.books, config.dim);
    if (!a.cameras.empty()) {
        books.cameras = gvr::load_cameras_file(a.cameras);
    }
    auto provider = open_provider(a.common, config.dim);
    const double load_s = seconds_since(t0);

    const auto tq = std::chrono::steady_clock::now();
    const gvr::GroundingResult result = gvr::ground(a.text, scene, books, books.cameras, *provider, config);
    const double query_s = seconds_since(tq);

    const fs::path out(a.out);
    fs::create_directories(out);
    gvr::save_flags_file(result.flags, (out / "target.flags").string());
    gvr::save_scene_file(scene.select(result.flags), (out / "target.ply").string());

    std::vector<gvr::CameraModel> poses = result.diagnostics.rig.ring;
    if (poses.size() != 4) {
        const double d = std::max(result.diagnostics.rig.d_vir, 0.1 * scene.bounds().diagonal().norm());
        poses = gvr::make_virtual_ring(result.location, 4, d, config.theta_vir, result.diagnostics.rig.up,
                                       config.image_width, config.image_height, config.fov);
    }
    const gvr::RenderOptions render_options{config.workers};
    for (std::size_t i = 0; i < poses.size(); ++i) {
        gvr::write_png(overlay(scene, result.flags, poses[i], render_options),
                       (out / fmt::format("overlay_{}.png", i)).string());
    }

    json doc = {{"query", a.text},
                {"location", {result.location.x(), result.location.y(), result.location.z()}},
                {"count", result.flags.count()},
                {"gaussians", scene.size()},
                {"seconds", {{"load", load_s}, {"query", query_s}}},
                {"diagnostics", gvr::diagnostics_to_json(result.diagnostics)}};
    gvr::io::write_text_file((out / "result.json").string(), doc.dump(2));
    for (const auto& w : result.diagnostics.warnings) {
        fmt::print(stderr, "warning: {}\n", w);
    }
    fmt::print("'{}': {} of {} Gaussians at ({:.3f}, {:.3f}, {:.3f}) in {:.3f} s -> {}\n", a.text,
               result.flags.count(), scene.size(), result.location.x(), result.location.y(), result.location.z(),
               query_s, a.out);
    return 0;
}

// -----------------------------------------------------------------------------

struct EvalArgs {
    CommonOptions common;
    bool provider_set = false;
    std::string cases;
    std::string out;
};

int run_eval(const EvalArgs& a) {
    gvr::EvalSuite suite = gvr::load_suite(a.cases);
    if (!a.common.config.empty()) {
        suite.config = read_config(a.common);
    } else if (a.common.workers > 0) {
        suite.config.workers = a.common.workers;
    }
    CommonOptions provider_opts = a.common;
    if (!a.provider_set) {
        provider_opts.provider = suite.provider;
    }
    auto provider = open_provider(provider_opts, suite.config.dim);
    const gvr::EvalReport report = gvr::evaluate(suite, *provider);
    gvr::io::write_text_file(a.out, gvr::report_to_json(report).dump(2));
    fmt::print("{} cases: Acc {:.1f}%  mIoU {:.1f}% -> {}\n", report.cases.size(), report.acc, 100.0 * report.miou,
               a.out);
    return 0;
}

// -----------------------------------------------------------------------------

struct SynthArgs {
    std::string spec;
    std::uint64_t seed = 7;
    std::string out;
    int views = 20;
    int workers = 0;
};

int run_synth(const SynthArgs& a) {
    const gvr::SynthSpec spec = a.spec.empty()
                                    ? gvr::random_synth_spec(a.seed, 3, 6, 50000, 150000, a.views)
                                    : gvr::synth_spec_from_json(json::parse(gvr::io::read_text_file(a.spec)));
    const gvr::SynthScene s = gvr::synth_scene(spec, a.seed, true, gvr::RenderOptions{a.workers});
    gvr::write_synth(s, a.out);
    fmt::print("synthesized {} objects, {} Gaussians, {} views -> {}\n", s.targets.size(), s.scene.size(),
               s.cameras.size(), a.out);
    return 0;
}

// -----------------------------------------------------------------------------

int run_serve(const CommonOptions& o, int dim) {
    auto provider = open_provider(o, dim);
    std::ios::sync_with_stdio(false);
    gvr::serve(*provider, std::cin, std::cout);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ground text queries in 3D Gaussian splatting scenes"};
    app.require_subcommand(1);

    PrepareArgs prep;
    auto* prepare = app.add_subcommand("prepare", "Build the semantic vector and depth books of a scene");
    prepare->add_option("--scene", prep.scene, "Gaussian scene (PLY)")->required()->check(CLI::ExistingFile);
    prepare->add_option("--cameras", prep.cameras, "Camera manifest (JSON)")->required()->check(CLI::ExistingFile);
    prepare->add_option("--images", prep.images, "View images NNNN.png (rendered from the scene if omitted)")
        ->check(CLI::ExistingDirectory);
    prepare->add_option("--out", prep.out, "Book directory")->required();
    add_common(prepare, prep.common);

    QueryArgs q;
    auto* query = app.add_subcommand("query", "Ground a text query");
    query->add_option("--scene", q.scene, "Gaussian scene (PLY)")->required()->check(CLI::ExistingFile);
    query->add_option("--books", q.books, "Book directory")->required()->check(CLI::ExistingDirectory);
    query->add_option("--cameras", q.cameras, "Camera manifest, if the books carry none")->check(CLI::ExistingFile);
    query->add_option("--text", q.text, "Query text")->required();
    query->add_option("--out", q.out, "Output directory")->required();
    add_common(query, q.common);

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "Evaluate a case list");
    eval->add_option("--cases", ev.cases, "Cases file (JSON)")->required()->check(CLI::ExistingFile);
    eval->add_option("--out", ev.out, "Report (JSON)")->required();
    add_common(eval, ev.common);

    SynthArgs sy;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic tabletop scene with ground truth");
    synth->add_option("--spec", sy.spec, "Scene spec (JSON); random layout if omitted")->check(CLI::ExistingFile);
    synth->add_option("--seed", sy.seed, "Random seed");
    synth->add_option("--views", sy.views, "Views of a random layout");
    synth->add_option("--out", sy.out, "Output directory")->required();
    synth->add_option("--workers", sy.workers, "Render threads (0 = all cores)");

    CommonOptions sv;
    int serve_dim = gvr::kDefaultEmbeddingDim;
    auto* serve = app.add_subcommand("serve", "Serve a provider over stdin/stdout (newline-delimited JSON)");
    serve->add_option("--provider", sv.provider, "mock[:REGISTRY] or files:DIR");
    serve->add_option("--registry", sv.registry, "Phrase -> color registry for the mock provider");
    serve->add_option("--dim", serve_dim, "Embedding dimension");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    ev.provider_set = eval->count("--provider") > 0;

    try {
        if (*prepare) {
            return run_prepare(prep);
        }
        if (*query) {
            return run_query(q);
        }
        if (*eval) {
            return run_eval(ev);
        }
        if (*synth) {
            return run_synth(sy);
        }
        if (*serve) {
            return run_serve(sv, serve_dim);
        }
    } catch (const gvr::Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return gvr::exit_code_for(e.kind());
    } catch (const json::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 1;
}
