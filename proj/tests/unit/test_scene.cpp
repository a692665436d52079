// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gvr/camera.hpp"
#include "gvr/error.hpp"
#include "gvr/flags.hpp"
#include "gvr/io.hpp"
#include "gvr/mask.hpp"
#include "gvr/scene.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cstring>
#include <numbers>

namespace gvr {
namespace {

using testing::identity_camera;

std::string ply_header(const std::vector<std::string>& props, std::size_t n) {
    std::string h = "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(n) + "\n";
    for (const auto& p : props) {
        h += "property float " + p + "\n";
    }
    return h + "end_header\n";
}

std::vector<std::byte> with_body(const std::string& header, std::size_t floats, float fill = 0.0f) {
    std::vector<std::byte> out(header.size() + floats * 4);
    std::memcpy(out.data(), header.data(), header.size());
    for (std::size_t i = 0; i < floats; ++i) {
        std::memcpy(out.data() + header.size() + 4 * i, &fill, 4);
    }
    return out;
}

TEST(Ply, PropertyLayoutHas62Floats) {
    const auto& names = ply_property_names();
    ASSERT_EQ(names.size(), 62u);
    EXPECT_EQ(names.front(), "x");
    EXPECT_EQ(names[6], "f_dc_0");
    EXPECT_EQ(names[9], "f_rest_0");
    EXPECT_EQ(names[53], "f_rest_44");
    EXPECT_EQ(names[54], "opacity");
    EXPECT_EQ(names[55], "scale_0");
    EXPECT_EQ(names[58], "rot_0");
    EXPECT_EQ(names.back(), "rot_3");
}

TEST(Ply, RoundTripPreservesAttributes) {
    std::mt19937_64 rng(11);
    const GaussianScene s = testing::random_scene(500, rng);
    const GaussianScene r = load_scene(save_scene(s));
    ASSERT_EQ(r.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_EQ(r.positions[i], s.positions[i]);
        EXPECT_EQ(r.sh[i], s.sh[i]);
        EXPECT_NEAR(r.opacities[i], s.opacities[i], 1e-6);
        for (int k = 0; k < 3; ++k) {
            EXPECT_NEAR(r.scales[i][k] / s.scales[i][k], 1.0, 1e-6);
        }
        EXPECT_NEAR((r.rotations[i] - s.rotations[i]).norm(), 0.0, 1e-6);
    }
}

TEST(Ply, ActivatesStoredValues) {
    const auto& names = ply_property_names();
    std::vector<float> raw(62, 0.0f);
    raw[54] = 0.0f;                 // logit 0 -> opacity 0.5
    raw[55] = std::log(2.0f);       // scale 2
    raw[58] = 2.0f;                 // unnormalized quaternion (2,0,0,0)
    const std::string header = ply_header(names, 1);
    std::vector<std::byte> bytes(header.size() + 62 * 4);
    std::memcpy(bytes.data(), header.data(), header.size());
    std::memcpy(bytes.data() + header.size(), raw.data(), 62 * 4);
    const GaussianScene s = load_scene(bytes);
    EXPECT_FLOAT_EQ(s.opacities[0], 0.5f);
    EXPECT_NEAR(s.scales[0].x(), 2.0f, 1e-6);
    EXPECT_FLOAT_EQ(s.scales[0].y(), 1.0f);
    EXPECT_EQ(s.rotations[0], Eigen::Vector4f(1, 0, 0, 0));
}

TEST(Ply, MissingPropertyIsNamed) {
    auto names = ply_property_names();
    names.erase(names.begin() + 54);
    try {
        load_scene(with_body(ply_header(names, 0), 0));
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("opacity"), std::string::npos) << e.what();
    }
}

TEST(Ply, ReorderedPropertiesAreRejected) {
    auto names = ply_property_names();
    std::swap(names[0], names[1]);
    EXPECT_THROW(load_scene(with_body(ply_header(names, 1), 62)), ParseError);
}

TEST(Ply, TruncatedAndTrailingDataAreRejected) {
    const std::string header = ply_header(ply_property_names(), 2);
    EXPECT_THROW(load_scene(with_body(header, 62 * 2 - 1)), ParseError);
    EXPECT_THROW(load_scene(with_body(header, 62 * 2 + 1)), ParseError);
    EXPECT_EQ(load_scene(with_body(header, 62 * 2, 0.5f)).size(), 2u);
}

TEST(Ply, NonFiniteAttributeNamesPrimitive) {
    const std::string header = ply_header(ply_property_names(), 3);
    auto bytes = with_body(header, 62 * 3, 0.5f);
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(bytes.data() + header.size() + (62 * 2 + 4) * 4, &nan, 4);
    try {
        load_scene(bytes);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("primitive 2"), std::string::npos) << e.what();
    }
}

TEST(Ply, AsciiFormatIsRejected) {
    std::string header = ply_header(ply_property_names(), 0);
    header.replace(header.find("binary_little_endian"), 20, "ascii");
    EXPECT_THROW(load_scene(with_body(header, 0)), ParseError);
}

TEST(Scene, SelectKeepsFlaggedInOrder) {
    std::mt19937_64 rng(3);
    const GaussianScene s = testing::random_scene(10, rng);
    TargetFlags f(10);
    f.set(2);
    f.set(7);
    const GaussianScene sub = s.select(f);
    ASSERT_EQ(sub.size(), 2u);
    EXPECT_EQ(sub.positions[0], s.positions[2]);
    EXPECT_EQ(sub.positions[1], s.positions[7]);
    EXPECT_THROW(s.select(TargetFlags(3)), DomainError);
}

// -----------------------------------------------------------------------------

TEST(Camera, ProjectAndBackProjectIdentity) {
    const CameraModel cam = identity_camera();
    const auto p = project_point({0.0, 0.0, 2.0}, cam);
    ASSERT_TRUE(p);
    EXPECT_DOUBLE_EQ(p->pixel.u, 50.0);
    EXPECT_DOUBLE_EQ(p->pixel.v, 50.0);
    EXPECT_DOUBLE_EQ(p->depth, 2.0);
    const WorldPoint w = back_project({50.0, 50.0}, 2.0, cam);
    EXPECT_TRUE(w.isApprox(WorldPoint(0, 0, 2)));
    EXPECT_FALSE(project_point({0.0, 0.0, -1.0}, cam));
    EXPECT_FALSE(project_point({0.0, 0.0, 0.0}, cam));
    EXPECT_THROW(back_project({1.0, 1.0}, 0.0, cam), DomainError);
}

TEST(Camera, RoundTripOnRandomPairs) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const CameraModel cam = testing::random_camera(rng);
        const WorldPoint p(u(rng), u(rng), u(rng));
        const auto proj = project_point(p, cam);
        ASSERT_TRUE(proj);
        const WorldPoint back = back_project(proj->pixel, proj->depth, cam);
        EXPECT_LT((back - p).norm(), 1e-6 * std::max(1.0, p.norm()));
    }
}

TEST(Camera, NearestPixelRoundsHalfUp) {
    EXPECT_EQ(nearest_pixel({10.5, 3.49}), (PixelIndex{11, 3}));
    EXPECT_EQ(nearest_pixel({-0.5, -0.51}), (PixelIndex{0, -1}));
}

TEST(Camera, LookingAtKeepsImageUpAlongWorldUp) {
    const CameraModel cam = CameraModel::with_fov(64, 64, 60.0).looking_at({0, -5, 0}, {0, 0, 0}, {0, 0, 1});
    cam.validate();
    const auto above = project_point({0, 0, 1}, cam);
    ASSERT_TRUE(above);
    EXPECT_LT(above->pixel.v, cam.cy);
    EXPECT_TRUE(cam.center().isApprox(WorldPoint(0, -5, 0)));
}

TEST(Camera, ManifestRoundTripAndValidation) {
    std::mt19937_64 rng(2);
    std::vector<CameraModel> cams;
    for (int i = 0; i < 3; ++i) {
        cams.push_back(testing::random_camera(rng));
        cams.back().id = i;
    }
    const auto loaded = load_cameras(save_cameras(cams));
    ASSERT_EQ(loaded.size(), 3u);
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(loaded[i].id, i);
        EXPECT_EQ(loaded[i].rotation, cams[i].rotation);
        EXPECT_EQ(loaded[i].translation, cams[i].translation);
        EXPECT_EQ(loaded[i].fx, cams[i].fx);
    }

    auto doc = nlohmann::json::parse(save_cameras(cams));
    doc[1]["id"] = 0;
    EXPECT_THROW(load_cameras(doc.dump()), ValidationError);
    doc = nlohmann::json::parse(save_cameras(cams));
    doc[0]["rotation"] = {1, 0, 0, 0, 1, 0, 0, 0, 2};
    EXPECT_THROW(load_cameras(doc.dump()), ValidationError);
    doc = nlohmann::json::parse(save_cameras(cams));
    doc[0]["rotation"] = {1, 0, 0, 0, 1, 0, 0, 0, -1};
    EXPECT_THROW(load_cameras(doc.dump()), ValidationError);
    doc = nlohmann::json::parse(save_cameras(cams));
    doc[0].erase("fx");
    EXPECT_THROW(load_cameras(doc.dump()), ParseError);
    EXPECT_THROW(load_cameras("{"), ParseError);
}

// -----------------------------------------------------------------------------

TEST(Flags, EncodeDecodeRoundTrip) {
    std::mt19937_64 rng(9);
    for (const std::size_t n : {0u, 1u, 7u, 8u, 9u, 1000u}) {
        TargetFlags f(n);
        for (std::size_t i = 0; i < n; ++i) {
            f.set(i, rng() % 3 == 0);
        }
        const auto bytes = encode_flags(f);
        ASSERT_EQ(bytes.size(), 8 + (n + 7) / 8);
        EXPECT_EQ(std::memcmp(bytes.data(), "GVRF", 4), 0);
        EXPECT_EQ(decode_flags(bytes), f);
    }
}

TEST(Flags, BitsAreLsbFirst) {
    TargetFlags f(10);
    f.set(0);
    f.set(9);
    const auto bytes = encode_flags(f);
    EXPECT_EQ(io::get_u32(bytes, 4), 10u);
    EXPECT_EQ(bytes[8], std::byte{0x01});
    EXPECT_EQ(bytes[9], std::byte{0x02});
}

TEST(Flags, CorruptPayloads) {
    auto bytes = encode_flags(TargetFlags(16, true));
    bytes.pop_back();
    EXPECT_THROW(decode_flags(bytes), CorruptionError);
    bytes[0] = std::byte{'X'};
    EXPECT_THROW(decode_flags(bytes), ParseError);
}

TEST(Flags, SetAlgebra) {
    TargetFlags a(4), b(4);
    a.set(0);
    a.set(1);
    b.set(1);
    b.set(2);
    EXPECT_EQ((a & b).count(), 1u);
    EXPECT_EQ((a | b).count(), 3u);
    EXPECT_TRUE((a & b).is_subset_of(a));
    EXPECT_FALSE(a.is_subset_of(b));
    EXPECT_THROW(a &= TargetFlags(5), DomainError);
}

// -----------------------------------------------------------------------------

TEST(Rle, RoundTripRandomMasks) {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 50; ++k) {
        const int w = 1 + static_cast<int>(rng() % 40);
        const int h = 1 + static_cast<int>(rng() % 40);
        BinaryMask m(w, h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                m.set(x, y, rng() % 4 == 0);
            }
        }
        const RleMask rle = encode_rle(m);
        EXPECT_EQ(decode_rle(rle), m);
        EXPECT_EQ(decode_rle(rle_from_json(rle_to_json(rle))), m);
    }
}

TEST(Rle, StartsWithBackgroundRun) {
    BinaryMask m(3, 1);
    m.set(0, 0);
    const RleMask rle = encode_rle(m);
    EXPECT_EQ(rle.runs, (std::vector<std::uint32_t>{0, 1, 2}));
    EXPECT_THROW(decode_rle(RleMask{3, 1, {1, 1}}), ParseError);
    EXPECT_THROW(decode_rle(RleMask{3, 1, {2, 2}}), ParseError);
}

TEST(Mask, GeometryHelpers) {
    BinaryMask m(20, 20);
    m.set(10, 10);
    m.set(10, 11);
    const PixelLocation c = m.center_of_mass();
    EXPECT_DOUBLE_EQ(c.u, 10.0);
    EXPECT_DOUBLE_EQ(c.v, 10.5);
    EXPECT_EQ(m.bbox(), (PixelBox{10, 10, 10, 11}));
    EXPECT_EQ(m.area(), 2u);
    EXPECT_TRUE(m.contains({10.2, 10.6}));
    EXPECT_FALSE(m.contains({11.0, 10.0}));
    EXPECT_THROW(BinaryMask(4, 4).center_of_mass(), DomainError);
}

// -----------------------------------------------------------------------------

TEST(Io, Base64AndSha256KnownValues) {
    EXPECT_EQ(io::base64_encode(io::as_bytes("foobar")), "Zm9vYmFy");
    EXPECT_EQ(io::base64_encode(io::as_bytes("fo")), "Zm8=");
    const auto d = io::base64_decode("Zm8=");
    EXPECT_EQ(std::string(reinterpret_cast<const char*>(d.data()), d.size()), "fo");
    EXPECT_EQ(io::sha256_hex(std::string_view("abc")),
              "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

} // namespace
} // namespace gvr
