// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gvr/books.hpp"
#include "gvr/error.hpp"
#include "gvr/eval.hpp"
#include "gvr/io.hpp"
#include "gvr/mock_provider.hpp"
#include "gvr/synth.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <set>

namespace gvr {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

TargetFlags flags_of(std::size_t n, std::initializer_list<std::size_t> set) {
    TargetFlags f(n);
    for (const std::size_t i : set) {
        f.set(i);
    }
    return f;
}

TEST(Iou, Flags) {
    EXPECT_EQ(iou(flags_of(6, {1, 2}), flags_of(6, {1, 2})), 1.0);
    EXPECT_EQ(iou(flags_of(6, {1, 2}), flags_of(6, {3, 4})), 0.0);
    EXPECT_EQ(iou(TargetFlags(6), TargetFlags(6)), 1.0);
    EXPECT_THROW(iou(TargetFlags(6), TargetFlags(5)), DomainError);
    const std::size_t n = 50;
    TargetFlags a(6 * n);
    TargetFlags b(6 * n);
    for (std::size_t i = 0; i < 2 * n; ++i) {
        a.set(i);
        b.set(i + n);
    }
    EXPECT_NEAR(iou(a, b), 1.0 / 3.0, 1e-15);
    EXPECT_EQ(iou(a, b), iou(b, a));
}

TEST(Iou, Masks) {
    BinaryMask a(4, 4);
    BinaryMask b(4, 4);
    a.set(0, 0);
    a.set(1, 0);
    b.set(1, 0);
    b.set(2, 0);
    EXPECT_NEAR(iou(a, b), 1.0 / 3.0, 1e-15);
    EXPECT_EQ(iou(BinaryMask(4, 4), BinaryMask(4, 4)), 1.0);
    EXPECT_THROW(iou(a, BinaryMask(4, 3)), DomainError);
}

CaseResult result(double v, bool error = false) {
    CaseResult c;
    c.iou = v;
    if (error) {
        c.error = "boom";
    }
    return c;
}

TEST(Summarize, Arithmetic) {
    std::vector<CaseResult> ten(10, result(1.0));
    EvalReport all = summarize(ten);
    EXPECT_EQ(all.acc, 100.0);
    EXPECT_EQ(all.miou, 1.0);

    ten[3] = result(0.0, true);
    EvalReport one_bad = summarize(ten);
    EXPECT_DOUBLE_EQ(one_bad.acc, 90.0);
    EXPECT_FALSE(one_bad.cases[3].correct);

    EvalReport mixed = summarize({result(1.0), result(0.4)});
    EXPECT_DOUBLE_EQ(mixed.acc, 50.0);
    EXPECT_DOUBLE_EQ(mixed.miou, 0.7);
    EvalReport swapped = summarize({result(0.4), result(1.0)});
    EXPECT_EQ(swapped.acc, mixed.acc);
    EXPECT_EQ(swapped.miou, mixed.miou);

    EXPECT_EQ(summarize({result(0.5)}).acc, 100.0);
    EXPECT_EQ(summarize({result(0.5)}, 0.6).acc, 0.0);
    const json j = report_to_json(mixed);
    EXPECT_EQ(j["cases"].size(), 2u);
}

SynthSpec two_object_spec() {
    SynthSpec spec;
    spec.total_gaussians = 20000;
    spec.views = 10;
    spec.image_size = 128;
    spec.objects = {{ShapeKind::kCube, "red", "", {-0.4, 0.0}, 0.4},
                    {ShapeKind::kSphere, "blue", "", {0.4, 0.2}, 0.4}};
    return spec;
}

TEST(Synth, DeterministicForSeed) {
    const SynthScene a = synth_scene(two_object_spec(), 7);
    const SynthScene b = synth_scene(two_object_spec(), 7);
    EXPECT_TRUE(a.scene == b.scene);
    EXPECT_EQ(a.targets, b.targets);
    ASSERT_EQ(a.views.size(), b.views.size());
    for (std::size_t i = 0; i < a.views.size(); ++i) {
        EXPECT_EQ(a.views[i], b.views[i]);
    }
    const SynthScene c = synth_scene(two_object_spec(), 8);
    EXPECT_FALSE(a.scene == c.scene);
}

TEST(Synth, GroundTruthPartitionAndCounts) {
    const SynthScene s = synth_scene(two_object_spec(), 7);
    EXPECT_EQ(s.scene.size(), 20000u);
    ASSERT_EQ(s.targets.size(), 2u);
    EXPECT_EQ(s.phrases, (std::vector<std::string>{"red cube", "blue sphere"}));
    EXPECT_EQ(s.registry.color_of("red cube"), palette_id("red"));
    EXPECT_EQ((s.targets[0] & s.targets[1]).count(), 0u);
    for (const auto& t : s.targets) {
        EXPECT_GE(t.count(), 300u);
        EXPECT_LE(t.count(), 3000u);
    }
    EXPECT_EQ(s.cameras.size(), 10u);
    for (std::size_t i = 0; i < s.cameras.size(); ++i) {
        EXPECT_EQ(s.cameras[i].id, static_cast<int>(i));
    }
}

TEST(Synth, BothObjectsVisibleFromMostCameras) {
    const SynthScene s = synth_scene(two_object_spec(), 7);
    MockProvider mock(s.registry, MockOptions{16});
    int both = 0;
    for (std::size_t v = 0; v < s.views.size(); ++v) {
        const CameraModel& cam = s.cameras[v];
        const auto classes = mock.classify(s.views[v]);
        bool all_seen = true;
        for (std::size_t k = 0; k < s.targets.size(); ++k) {
            const int color = s.registry.color_of(s.phrases[k]);
            std::size_t projected = 0;
            for (std::size_t i = 0; i < s.scene.size(); ++i) {
                if (!s.targets[k].test(i)) {
                    continue;
                }
                const auto p = project_point(s.scene.positions[i].cast<double>(), cam);
                if (!p || !cam.contains(p->pixel)) {
                    continue;
                }
                const PixelIndex px = nearest_pixel(p->pixel);
                projected += classes[static_cast<std::size_t>(px.y) * cam.width + px.x] == color ? 1 : 0;
            }
            all_seen = all_seen && projected > 0;
        }
        both += all_seen ? 1 : 0;
    }
    EXPECT_GE(both, static_cast<int>(std::ceil(0.8 * static_cast<double>(s.views.size()))));
}

TEST(Synth, OverlapAndSpecErrors) {
    SynthSpec spec = two_object_spec();
    spec.objects[1].center = {-0.3, 0.0};
    EXPECT_THROW(synth_scene(spec, 1, false), ValidationError);
    SynthSpec empty = two_object_spec();
    empty.objects.clear();
    EXPECT_THROW(synth_scene(empty, 1, false), Error);
    EXPECT_THROW(parse_shape("torus"), ParseError);
    const SynthSpec back = synth_spec_from_json(synth_spec_to_json(two_object_spec()));
    EXPECT_EQ(back.objects.size(), 2u);
    EXPECT_EQ(back.objects[1].shape, ShapeKind::kSphere);
    EXPECT_EQ(back.image_size, 128);
}

TEST(Synth, RandomSpecsRespectRanges) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const SynthSpec s = random_synth_spec(seed);
        EXPECT_GE(s.objects.size(), 3u);
        EXPECT_LE(s.objects.size(), 6u);
        EXPECT_GE(s.total_gaussians, 50000);
        EXPECT_LE(s.total_gaussians, 150000);
        EXPECT_EQ(s.views, 20);
        std::set<std::string> colors;
        for (const auto& o : s.objects) {
            colors.insert(o.color);
        }
        EXPECT_EQ(colors.size(), s.objects.size());
        EXPECT_EQ(synth_spec_to_json(random_synth_spec(seed)), synth_spec_to_json(s));
    }
}

TEST(PerturbBook, AnglesAndFractionBounded) {
    SemanticVectorBook svb;
    svb.dim = 32;
    for (int v = 0; v < 10; ++v) {
        std::vector<PatchEntry> view;
        for (int p = 0; p < 10; ++p) {
            BinaryMask m(4, 4);
            m.set(1, 1);
            view.push_back(make_patch_entry(v, p, SemanticVector::basis(32, (v + p) % 32), m));
        }
        svb.views.push_back(view);
    }
    SemanticVectorBook noisy = svb;
    perturb_book(noisy, 0.3, 20.0, 11);
    std::size_t changed = 0;
    for (std::size_t v = 0; v < svb.size(); ++v) {
        for (std::size_t p = 0; p < svb.views[v].size(); ++p) {
            const double c = cosine(svb.views[v][p].vector, noisy.views[v][p].vector);
            const double angle = std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi;
            EXPECT_LE(angle, 20.0 + 1e-3);
            changed += noisy.views[v][p].vector == svb.views[v][p].vector ? 0 : 1;
        }
    }
    EXPECT_EQ(changed, 30u);
    EXPECT_NO_THROW(noisy.validate());
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(GVR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class Cli : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir = new testing::TempDir("cli");
        json spec = synth_spec_to_json(two_object_spec());
        io::write_text_file(dir->file("spec.json"), spec.dump());
        io::write_text_file(dir->file("config.json"),
                            json{{"c", 64}, {"image_width", 128}, {"image_height", 128}}.dump());
    }
    static void TearDownTestSuite() { delete dir; }

    static std::string p(const std::string& name) { return dir->file(name); }

    static testing::TempDir* dir;
};

testing::TempDir* Cli::dir = nullptr;

TEST_F(Cli, FullPipelineAndExitCodes) {
    ASSERT_EQ(run_cli("synth --spec " + p("spec.json") + " --seed 7 --out " + p("scene")), 0);
    for (const char* f : {"scene/scene.ply", "scene/cameras.json", "scene/images/0000.png", "scene/gt/0.flags",
                          "scene/registry.json", "scene/cases.json"}) {
        EXPECT_TRUE(fs::exists(p(f))) << f;
    }
    const std::string prep_args = "prepare --scene " + p("scene/scene.ply") + " --cameras " +
                                  p("scene/cameras.json") + " --images " + p("scene/images") +
                                  " --provider mock:" + p("scene/registry.json") + " --config " + p("config.json");
    ASSERT_EQ(run_cli(prep_args + " --out " + p("scene/books")), 0);
    EXPECT_TRUE(fs::exists(p("scene/books/manifest.json")));

    const std::string query_args = "query --scene " + p("scene/scene.ply") + " --books " + p("scene/books") +
                                   " --provider mock:" + p("scene/registry.json") + " --config " +
                                   p("config.json");
    ASSERT_EQ(run_cli(query_args + " --text 'red cube' --out " + p("out")), 0);
    for (const char* f : {"out/target.flags", "out/target.ply", "out/overlay_0.png", "out/overlay_3.png",
                          "out/result.json"}) {
        EXPECT_TRUE(fs::exists(p(f))) << f;
    }
    const TargetFlags got = decode_flags(io::read_file(p("out/target.flags")));
    const TargetFlags gt = decode_flags(io::read_file(p("scene/gt/0.flags")));
    EXPECT_GE(iou(got, gt), 0.9);
    const GaussianScene subset = load_scene_file(p("out/target.ply"));
    EXPECT_EQ(subset.size(), got.count());

    json suite = json::parse(io::read_text_file(p("scene/cases.json")));
    suite["config"] = json{{"c", 64}, {"image_width", 128}, {"image_height", 128}};
    io::write_text_file(p("scene/cases64.json"), suite.dump());
    ASSERT_EQ(run_cli("eval --cases " + p("scene/cases64.json") + " --out " + p("report.json")), 0);
    const json report = json::parse(io::read_text_file(p("report.json")));
    EXPECT_EQ(report["acc"], 100.0);
    EXPECT_EQ(report["cases"].size(), 2u);

    EXPECT_EQ(run_cli(""), 2);
    EXPECT_EQ(run_cli("query --scene " + p("scene/scene.ply")), 2);
    EXPECT_EQ(run_cli(query_args + " --text 'green pyramid' --out " + p("bad")), 2);
    EXPECT_EQ(run_cli("query --scene " + p("scene/scene.ply") + " --books " + p("scene/books") + " --config " +
                      p("config.json") + " --provider proc:false --text 'red cube' --out " + p("bad")),
              3);
    EXPECT_EQ(run_cli("prepare --scene " + p("scene/scene.ply") + " --cameras " + p("scene/cameras.json") +
                      " --provider clip --out " + p("bad_books")),
              2);

    KnowledgeBooks books = load_books(p("scene/books"));
    for (auto& m : books.depth.maps) {
        std::fill(m.values.begin(), m.values.end(), 0.0f);
    }
    save_books(books, p("flat_books"));
    const std::string flat_query = "query --scene " + p("scene/scene.ply") + " --books " + p("flat_books") +
                                   " --provider mock:" + p("scene/registry.json") + " --config " + p("config.json");
    EXPECT_EQ(run_cli(flat_query + " --text 'red cube' --out " + p("bad")), 4);

    json manifest = json::parse(io::read_text_file(p("flat_books/manifest.json")));
    manifest["version"] = 9;
    io::write_text_file(p("flat_books/manifest.json"), manifest.dump());
    EXPECT_EQ(run_cli(flat_query + " --text 'red cube' --out " + p("bad")), 2);
}

TEST(LoadSuite, ResolvesPathsAndRequiresOneTruth) {
    testing::TempDir dir("suite");
    fs::create_directories(dir.path() / "gt");
    io::write_file(dir.file("gt/0.flags"), encode_flags(TargetFlags(4)));
    io::write_text_file(dir.file("cases.json"), json{{"provider", "mock:registry.json"},
                                                     {"cases", json::array({{{"query", "red cube"},
                                                                             {"scene", "scene.ply"},
                                                                             {"books", "books"},
                                                                             {"gt_flags", "gt/0.flags"}}})}}
                                                    .dump());
    const EvalSuite s = load_suite(dir.file("cases.json"));
    ASSERT_EQ(s.cases.size(), 1u);
    EXPECT_EQ(fs::path(s.cases[0].scene_path), dir.path() / "scene.ply");
    EXPECT_EQ(fs::path(s.cases[0].books_path), dir.path() / "books");
    EXPECT_EQ(s.provider, "mock:" + (dir.path() / "registry.json").string());
    ASSERT_TRUE(s.cases[0].gt_flags.has_value());

    io::write_text_file(dir.file("none.json"),
                        json{{"cases", json::array({{{"query", "x"}, {"scene", "s.ply"}, {"books", "b"}}})}}.dump());
    EXPECT_THROW(load_suite(dir.file("none.json")), ValidationError);
}

} // namespace
} // namespace gvr
