// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gvr/books.hpp"
#include "gvr/error.hpp"
#include "gvr/eval.hpp"
#include "gvr/grounding.hpp"
#include "gvr/mock_provider.hpp"
#include "gvr/synth.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>
#include <random>

namespace gvr {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

void expect_orthonormal(const Eigen::Matrix3d& r) {
    EXPECT_NEAR((r * r.transpose() - Eigen::Matrix3d::Identity()).norm(), 0.0, 1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
}

TEST(BevCamera, CenteredAboveTarget) {
    const CameraModel cam = make_bev_camera({0, 0, 0}, {0, 0, 1}, 5.0, 512, 512, 60.0);
    EXPECT_NEAR((cam.center() - WorldPoint(0, 0, 5)).norm(), 0.0, 1e-12);
    const auto p = project_point({0, 0, 0}, cam);
    ASSERT_TRUE(p.has_value());
    EXPECT_NEAR(p->pixel.u, cam.cx, 1e-9);
    EXPECT_NEAR(p->pixel.v, cam.cy, 1e-9);
    EXPECT_NEAR(p->depth, 5.0, 1e-12);
    expect_orthonormal(cam.rotation);
    EXPECT_NEAR(cam.rotation.row(0).dot(Eigen::RowVector3d(1, 0, 0)), 1.0, 1e-12);
}

TEST(BevCamera, AnyTargetProjectsToPrincipalPoint) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 200; ++i) {
        const WorldPoint l(u(rng), u(rng), u(rng));
        const Eigen::Vector3d up = Eigen::Vector3d(u(rng), u(rng), u(rng)).normalized();
        const double h = 0.5 + std::abs(u(rng));
        const CameraModel cam = make_bev_camera(l, up, h, 320, 240, 50.0);
        const auto p = project_point(l, cam);
        ASSERT_TRUE(p.has_value());
        EXPECT_NEAR(p->pixel.u, cam.cx, 0.5);
        EXPECT_NEAR(p->pixel.v, cam.cy, 0.5);
        EXPECT_NEAR((cam.center() - (l + h * up)).norm(), 0.0, 1e-9);
        EXPECT_NEAR(cam.forward().dot(-up), 1.0, 1e-9);
        expect_orthonormal(cam.rotation);
    }
}

TEST(BevCamera, DegenerateRollFallsBackToWorldY) {
    const CameraModel cam = make_bev_camera({1, 2, 3}, {1, 0, 0}, 4.0, 100, 100, 60.0);
    expect_orthonormal(cam.rotation);
    EXPECT_NEAR((cam.center() - WorldPoint(5, 2, 3)).norm(), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(cam.rotation.row(0).dot(Eigen::RowVector3d(0, 1, 0))), 1.0, 1e-12);
}

TEST(BevHeight, FactorTimesExtentAndCornerFit) {
    const Eigen::AlignedBox3d box(Eigen::Vector3d(-1, -1, 0), Eigen::Vector3d(1, 1, 1));
    const double h = bev_height_for(box, {0, 0, 0.5}, {0, 0, 1}, 4.0, 512, 512, 60.0);
    EXPECT_GE(h, 4.0);
    const CameraModel cam = make_bev_camera({0, 0, 0.5}, {0, 0, 1}, h, 512, 512, 60.0);
    for (int c = 0; c < 8; ++c) {
        const auto p = project_point(box.corner(static_cast<Eigen::AlignedBox3d::CornerType>(c)), cam);
        ASSERT_TRUE(p.has_value());
        EXPECT_TRUE(cam.contains(p->pixel));
    }
    const Eigen::AlignedBox3d wide(Eigen::Vector3d(-20, -20, 0), Eigen::Vector3d(20, 20, 0.1));
    const double hw = bev_height_for(wide, {0, 0, 0}, {0, 0, 1}, 4.0, 512, 512, 60.0);
    EXPECT_GT(hw, 20.0 / std::tan(30.0 * kDeg));
}

/// Independent pinhole reference.
TargetFlags frustum_oracle(const BinaryMask& mask, const CameraModel& cam, const GaussianScene& s,
                           const TargetFlags* within) {
    TargetFlags out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (within && !within->test(i)) {
            continue;
        }
        const Eigen::Vector3d q = cam.rotation * s.positions[i].cast<double>() + cam.translation;
        if (q.z() <= kDepthEpsilon) {
            continue;
        }
        const double u = cam.fx * q.x() / q.z() + cam.cx;
        const double v = cam.fy * q.y() / q.z() + cam.cy;
        const double x = std::floor(u + 0.5);
        const double y = std::floor(v + 0.5);
        if (x < 0 || y < 0 || x >= cam.width || y >= cam.height) {
            continue;
        }
        if (mask.test(static_cast<int>(x), static_cast<int>(y))) {
            out.set(i);
        }
    }
    return out;
}

TEST(FrustumFilter, FullAndEmptyMasks) {
    std::mt19937_64 rng(14);
    const GaussianScene s = testing::random_scene(1000, rng, 3.0f);
    const CameraModel cam = testing::identity_camera(64, 48, 40.0);
    const TargetFlags full = frustum_filter(BinaryMask::full(64, 48), cam, s);
    EXPECT_EQ(full, frustum_oracle(BinaryMask::full(64, 48), cam, s, nullptr));
    EXPECT_GT(full.count(), 0u);
    EXPECT_LT(full.count(), s.size());
    EXPECT_EQ(frustum_filter(BinaryMask(64, 48), cam, s).count(), 0u);
    EXPECT_THROW(frustum_filter(BinaryMask(48, 64), cam, s), DomainError);
}

TEST(FrustumFilter, HalfPlaneAndRandomMasksMatchOracle) {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 40; ++trial) {
        const GaussianScene s = testing::random_scene(1000, rng, 2.0f);
        const CameraModel cam = testing::random_camera(rng);
        BinaryMask half(cam.width, cam.height);
        for (int y = 0; y < cam.height; ++y) {
            for (int x = 0; x < cam.width / 2; ++x) {
                half.set(x, y);
            }
        }
        ASSERT_EQ(frustum_filter(half, cam, s), frustum_oracle(half, cam, s, nullptr));
        std::bernoulli_distribution coin(0.5);
        BinaryMask noise(cam.width, cam.height);
        TargetFlags within(s.size());
        for (int y = 0; y < cam.height; ++y) {
            for (int x = 0; x < cam.width; ++x) {
                noise.set(x, y, coin(rng));
            }
        }
        for (std::size_t i = 0; i < s.size(); ++i) {
            within.set(i, coin(rng));
        }
        ASSERT_EQ(frustum_filter(noise, cam, s, &within), frustum_oracle(noise, cam, s, &within));
    }
}

TEST(VirtualRing, Geometry) {
    const WorldPoint l(0.3, -0.2, 0.1);
    const double d = 2.0;
    const auto ring = make_virtual_ring(l, 4, d, 30.0, {0, 0, 1}, 256, 256, 60.0);
    ASSERT_EQ(ring.size(), 4u);
    std::vector<double> yaws;
    for (const auto& cam : ring) {
        const Eigen::Vector3d off = cam.center() - l;
        EXPECT_NEAR(off.norm(), d, 1e-6);
        EXPECT_NEAR(off.z(), d * std::sin(30.0 * kDeg), 1e-9);
        const auto p = project_point(l, cam);
        ASSERT_TRUE(p.has_value());
        EXPECT_NEAR(p->pixel.u, cam.cx, 1e-6);
        EXPECT_NEAR(p->pixel.v, cam.cy, 1e-6);
        yaws.push_back(std::atan2(off.y(), off.x()));
        expect_orthonormal(cam.rotation);
    }
    for (std::size_t i = 0; i < 4; ++i) {
        double delta = yaws[(i + 1) % 4] - yaws[i];
        delta = std::remainder(delta, 2.0 * std::numbers::pi);
        EXPECT_NEAR(std::abs(delta), 90.0 * kDeg, 1e-9);
    }
}

TEST(VirtualRing, ArbitraryUpAndCount) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 1; k <= 9; ++k) {
        const Eigen::Vector3d up = Eigen::Vector3d(u(rng), u(rng), u(rng)).normalized();
        const WorldPoint l(u(rng), u(rng), u(rng));
        const auto ring = make_virtual_ring(l, k, 1.5, 30.0, up, 128, 128, 60.0);
        ASSERT_EQ(ring.size(), static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < ring.size(); ++i) {
            const Eigen::Vector3d off = ring[i].center() - l;
            EXPECT_NEAR(off.norm(), 1.5, 1e-6);
            EXPECT_NEAR(off.dot(up), 0.75, 1e-9);
            const Eigen::Vector3d a = (off - off.dot(up) * up).normalized();
            const Eigen::Vector3d next = ring[(i + 1) % ring.size()].center() - l;
            const Eigen::Vector3d b = (next - next.dot(up) * up).normalized();
            if (k > 1) {
                EXPECT_NEAR(std::acos(std::clamp(a.dot(b), -1.0, 1.0)), std::min(2.0 * std::numbers::pi / k,
                                                                                 2.0 * std::numbers::pi - 2.0 * std::numbers::pi / k),
                            1e-6);
            }
        }
    }
    EXPECT_THROW(make_virtual_ring({0, 0, 0}, 0, 1.0, 30.0, {0, 0, 1}, 64, 64, 60.0), DomainError);
    EXPECT_THROW(make_virtual_ring({0, 0, 0}, 4, 0.0, 30.0, {0, 0, 1}, 64, 64, 60.0), DomainError);
}

TEST(TargetWidth, MaskExtentAtTargetDepth) {
    const CameraModel cam = make_bev_camera({0, 0, 0}, {0, 0, 1}, 5.0, 200, 200, 60.0);
    BinaryMask m(200, 200);
    for (int y = 90; y < 110; ++y) {
        for (int x = 80; x < 120; ++x) {
            m.set(x, y);
        }
    }
    EXPECT_NEAR(target_width(m, cam, {0, 0, 0}), 40.0 * 5.0 / cam.fx, 1e-9);
    EXPECT_THROW(target_width(BinaryMask(200, 200), cam, {0, 0, 0}), DomainError);
}

/// Dense ball of small opaque Gaussians.
void add_ball(GaussianScene& s, const Eigen::Vector3f& c, float r, const Eigen::Vector3f& rgb, int n,
              std::mt19937_64& rng) {
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    for (int i = 0; i < n;) {
        const Eigen::Vector3f p(u(rng), u(rng), u(rng));
        if (p.norm() > 1.0f) {
            continue;
        }
        s.add(c + r * p, {1, 0, 0, 0}, Eigen::Vector3f::Constant(0.15f * r), 0.95f, rgb);
        ++i;
    }
}

TEST(Smfi, RemovesSpuriousClusterAndStaysInsideCoarse) {
    std::mt19937_64 rng(31);
    GaussianScene s;
    add_ball(s, {0, 0, 0}, 0.1f, {1, 0, 0}, 400, rng);
    add_ball(s, {0, 0, 0.6f}, 0.1f, {0, 0, 1}, 400, rng);
    add_ball(s, {2, 2, 0}, 0.1f, {1, 0, 0}, 100, rng);
    TargetFlags red(s.size());
    TargetFlags coarse(s.size());
    for (std::size_t i = 0; i < 800; ++i) {
        coarse.set(i);
        red.set(i, i < 400);
    }
    MockRegistry reg = MockRegistry::palette_names();
    MockProvider mock(reg, MockOptions{16});
    const auto ring = make_virtual_ring({0, 0, 0}, 4, 2.0, 30.0, {0, 0, 1}, 192, 192, 60.0);
    const SmfiResult r = smfi_refine(coarse, s, "red", ring, mock);
    EXPECT_EQ(r.flags, red);
    EXPECT_TRUE(r.skipped.empty());
    EXPECT_EQ(r.mask_areas.size(), 4u);
    EXPECT_TRUE((r.flags & coarse) == r.flags);

    const SmfiResult none = smfi_refine(coarse, s, "yellow", ring, mock);
    EXPECT_EQ(none.flags, coarse);
    EXPECT_EQ(none.skipped, (std::vector<int>{0, 1, 2, 3}));
}

TEST(Smfi, FullFrameMasksKeepCoarse) {
    std::mt19937_64 rng(32);
    GaussianScene s;
    add_ball(s, {0, 0, 0}, 0.05f, {0, 1, 0}, 200, rng);
    // A single huge green splat at the target turns every ring frame green.
    s.add({0, 0, 0}, {1, 0, 0, 0}, Eigen::Vector3f::Constant(50.0f), 0.99f, {0, 1, 0});
    TargetFlags all(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        all.set(i);
    }
    MockProvider mock(MockRegistry::palette_names(), MockOptions{16});
    const auto ring = make_virtual_ring({0, 0, 0}, 4, 1.0, 30.0, {0, 0, 1}, 96, 96, 60.0);
    const SmfiResult r = smfi_refine(all, s, "green", ring, mock);
    for (const std::size_t a : r.mask_areas) {
        EXPECT_EQ(a, 96u * 96u);
    }
    EXPECT_EQ(r.flags, all);
}

TEST(Smfi, ContainmentOnRandomInputs) {
    std::mt19937_64 rng(33);
    MockProvider mock(MockRegistry::palette_names(), MockOptions{16});
    for (int trial = 0; trial < 10; ++trial) {
        GaussianScene s = testing::random_scene(1500, rng, 0.5f);
        TargetFlags coarse(s.size());
        std::bernoulli_distribution coin(0.6);
        for (std::size_t i = 0; i < s.size(); ++i) {
            coarse.set(i, coin(rng));
        }
        const auto ring = make_virtual_ring({0, 0, 0}, 4, 2.0, 30.0, {0, 0, 1}, 64, 64, 60.0);
        for (const char* q : {"red", "green", "blue", "gray"}) {
            const SmfiResult r = smfi_refine(coarse, s, q, ring, mock);
            ASSERT_TRUE((r.flags & coarse) == r.flags);
        }
    }
}

TEST(EstimateUp, PlaneNormalOfCameraRing) {
    std::vector<CameraModel> cams;
    const Eigen::Vector3d up = Eigen::Vector3d(0.2, -0.3, 1.0).normalized();
    const Eigen::Vector3d e1 = up.unitOrthogonal();
    const Eigen::Vector3d e2 = up.cross(e1);
    for (int i = 0; i < 12; ++i) {
        const double a = 2.0 * std::numbers::pi * i / 12.0;
        const WorldPoint c = 3.0 * (std::cos(a) * e1 + std::sin(a) * e2) + 1.0 * up;
        cams.push_back(CameraModel::with_fov(64, 64, 60.0).looking_at(c, {0, 0, 0}, up));
    }
    const Eigen::Vector3d est = estimate_up_vector(cams, {0, 0, 1});
    EXPECT_NEAR(est.dot(up), 1.0, 1e-9);
    EXPECT_NEAR(estimate_up_vector(cams, {0, 0, -1}).dot(up), -1.0, 1e-9);
}

TEST(Config, JsonRoundTripAndValidation) {
    GroundingConfig c;
    c.k_views = 5;
    c.k_ring = 6;
    c.theta_vir = 45.0;
    c.up = Eigen::Vector3d(0, 1, 0);
    c.use_smfi = false;
    const GroundingConfig back = config_from_json(config_to_json(c));
    EXPECT_EQ(back.k_views, 5);
    EXPECT_EQ(back.k_ring, 6);
    EXPECT_EQ(back.theta_vir, 45.0);
    EXPECT_EQ(back.up, c.up);
    EXPECT_FALSE(back.use_smfi);
    EXPECT_EQ(config_from_json(nlohmann::json{{"c", 64}}).dim, 64);
    EXPECT_THROW(config_from_json(nlohmann::json{{"k_vews", 3}}), ValidationError);
    EXPECT_THROW(config_from_json(nlohmann::json{{"k_ring", 0}}), ValidationError);
    EXPECT_THROW(config_from_json(nlohmann::json{{"epsilon_frac", -1.0}}), ValidationError);
    GroundingConfig bad;
    bad.up = Eigen::Vector3d::Zero();
    EXPECT_THROW(bad.validate(), ValidationError);
}

class EndToEnd : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        SynthSpec spec;
        spec.total_gaussians = 30000;
        spec.views = 12;
        spec.image_size = 256;
        spec.objects = {{ShapeKind::kCube, "red", "red cube", {-0.5, 0.0}, 0.4},
                        {ShapeKind::kSphere, "blue", "blue ball", {0.5, 0.3}, 0.35},
                        {ShapeKind::kCylinder, "yellow", "yellow can", {0.1, -0.6}, 0.3, 0.5}};
        synth = new SynthScene(synth_scene(spec, 7));
        provider = new MockProvider(synth->registry, MockOptions{64});
        books = new KnowledgeBooks;
        books->svb = build_svb(synth->views, *provider);
        books->depth = build_depth_book(synth->cameras, synth->scene);
        books->cameras = synth->cameras;
    }
    static void TearDownTestSuite() {
        delete books;
        delete provider;
        delete synth;
    }

    static GroundingConfig config() {
        GroundingConfig c;
        c.dim = 64;
        c.image_width = 256;
        c.image_height = 256;
        return c;
    }

    static SynthScene* synth;
    static MockProvider* provider;
    static KnowledgeBooks* books;
};

SynthScene* EndToEnd::synth = nullptr;
MockProvider* EndToEnd::provider = nullptr;
KnowledgeBooks* EndToEnd::books = nullptr;

TEST_F(EndToEnd, EveryObjectGroundsWithHighIou) {
    for (std::size_t k = 0; k < synth->phrases.size(); ++k) {
        const GroundingResult r = ground(synth->phrases[k], synth->scene, *books, synth->cameras, *provider, config());
        EXPECT_GE(iou(r.flags, synth->targets[k]), 0.95) << synth->phrases[k];
        EXPECT_TRUE((r.flags & r.diagnostics.coarse) == r.flags);
        EXPECT_EQ(r.diagnostics.rig.ring.size(), 4u);
        EXPECT_NEAR(r.diagnostics.rig.d_vir, 3.0 * r.diagnostics.target_width, 1e-12);
        EXPECT_FALSE(r.diagnostics.vote.supporters.empty());
    }
}

TEST_F(EndToEnd, DeterministicAndNonMutating) {
    const GaussianScene scene_before = synth->scene;
    const SemanticVectorBook svb_before = books->svb;
    const DepthBook depth_before = books->depth;
    GroundingConfig c1 = config();
    c1.workers = 1;
    GroundingConfig c3 = config();
    c3.workers = 3;
    const GroundingResult a = ground("blue ball", synth->scene, *books, synth->cameras, *provider, c1);
    const GroundingResult b = ground("blue ball", synth->scene, *books, synth->cameras, *provider, c3);
    EXPECT_EQ(a.flags, b.flags);
    EXPECT_EQ(a.location, b.location);
    EXPECT_TRUE(synth->scene == scene_before);
    EXPECT_TRUE(books->svb == svb_before);
    EXPECT_TRUE(books->depth == depth_before);
}

TEST_F(EndToEnd, AblationsAndDiagnostics) {
    GroundingConfig coarse_only = config();
    coarse_only.use_smfi = false;
    const GroundingResult c = ground("red cube", synth->scene, *books, synth->cameras, *provider, coarse_only);
    EXPECT_EQ(c.flags, c.diagnostics.coarse);
    GroundingConfig no_rfl = config();
    no_rfl.use_rfl = false;
    const GroundingResult n = ground("red cube", synth->scene, *books, synth->cameras, *provider, no_rfl);
    EXPECT_GT(n.flags.count(), 0u);
    const nlohmann::json j = diagnostics_to_json(c.diagnostics);
    EXPECT_TRUE(j.contains("vote"));
    EXPECT_TRUE(j.contains("timings"));
}

TEST_F(EndToEnd, UnregisteredQueryFails) {
    EXPECT_THROW(ground("purple teapot", synth->scene, *books, synth->cameras, *provider, config()), Error);
}

TEST_F(EndToEnd, MismatchedBooksRejected) {
    GroundingConfig wrong = config();
    wrong.dim = 512;
    EXPECT_THROW(ground("red cube", synth->scene, *books, synth->cameras, *provider, wrong), ValidationError);
    std::vector<CameraModel> fewer(synth->cameras.begin(), synth->cameras.end() - 1);
    EXPECT_THROW(ground("red cube", synth->scene, *books, fewer, *provider, config()), ValidationError);
}

} // namespace
} // namespace gvr
