// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gvr/scene.hpp"

#include "gvr/error.hpp"
#include "gvr/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string_view>

namespace gvr {

const std::vector<std::string>& ply_property_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v = {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"};
        for (int i = 0; i < 45; ++i) {
            v.push_back("f_rest_" + std::to_string(i));
        }
        v.emplace_back("opacity");
        for (int i = 0; i < 3; ++i) {
            v.push_back("scale_" + std::to_string(i));
        }
        for (int i = 0; i < 4; ++i) {
            v.push_back("rot_" + std::to_string(i));
        }
        return v;
    }();
    return names;
}

void GaussianScene::reserve(std::size_t n) {
    positions.reserve(n);
    rotations.reserve(n);
    scales.reserve(n);
    opacities.reserve(n);
    sh.reserve(n);
}

void GaussianScene::add(const Eigen::Vector3f& position, const Eigen::Vector4f& rotation_wxyz,
                        const Eigen::Vector3f& scale, float opacity, const Eigen::Vector3f& rgb) {
    positions.push_back(position);
    rotations.push_back(rotation_wxyz.normalized());
    scales.push_back(scale);
    opacities.push_back(opacity);
    ShCoefficients coeffs{};
    for (int c = 0; c < 3; ++c) {
        coeffs[static_cast<std::size_t>(c)] = (rgb[c] - 0.5f) / kShC0;
    }
    sh.push_back(coeffs);
}

Eigen::Vector3f GaussianScene::base_color(std::size_t i) const {
    const auto& c = sh[i];
    return Eigen::Vector3f(0.5f + kShC0 * c[0], 0.5f + kShC0 * c[1], 0.5f + kShC0 * c[2]).cwiseMax(0.0f).cwiseMin(1.0f);
}

void GaussianScene::validate() const {
    const std::size_t n = positions.size();
    if (rotations.size() != n || scales.size() != n || opacities.size() != n || sh.size() != n) {
        throw ValidationError("scene: attribute arrays have inconsistent lengths");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!positions[i].allFinite() || !rotations[i].allFinite() || !scales[i].allFinite() ||
            !std::isfinite(opacities[i]) ||
            !std::all_of(sh[i].begin(), sh[i].end(), [](float v) { return std::isfinite(v); })) {
            throw ValidationError(fmt::format("scene: primitive {} has a non-finite attribute", i));
        }
        if (std::abs(rotations[i].norm() - 1.0f) > 1e-6f) {
            throw ValidationError(fmt::format("scene: primitive {} quaternion is not unit length", i));
        }
        if (!(scales[i].minCoeff() > 0.0f)) {
            throw ValidationError(fmt::format("scene: primitive {} has a non-positive scale", i));
        }
        if (opacities[i] < 0.0f || opacities[i] > 1.0f) {
            throw ValidationError(fmt::format("scene: primitive {} opacity {} outside [0,1]", i, opacities[i]));
        }
    }
}

Eigen::AlignedBox3d GaussianScene::bounds() const {
    Eigen::AlignedBox3d box;
    for (const auto& p : positions) {
        box.extend(p.cast<double>());
    }
    return box;
}

GaussianScene GaussianScene::select(const TargetFlags& flags) const {
    if (flags.size() != size()) {
        throw DomainError(fmt::format("select: flags length {} != scene size {}", flags.size(), size()));
    }
    GaussianScene out;
    out.reserve(flags.count());
    for (std::size_t i = 0; i < size(); ++i) {
        if (flags.test(i)) {
            out.positions.push_back(positions[i]);
            out.rotations.push_back(rotations[i]);
            out.scales.push_back(scales[i]);
            out.opacities.push_back(opacities[i]);
            out.sh.push_back(sh[i]);
        }
    }
    return out;
}

// -----------------------------------------------------------------------------
//  PLY
// -----------------------------------------------------------------------------

namespace {

constexpr std::size_t kPropertiesPerVertex = 62;

struct PlyHeader {
    std::size_t vertex_count = 0;
    std::size_t data_offset = 0;
};

PlyHeader parse_header(std::span<const std::byte> payload) {
    const std::string_view text(reinterpret_cast<const char*>(payload.data()), payload.size());
    const std::string_view terminator = "end_header\n";
    const auto end = text.find(terminator);
    if (end == std::string_view::npos) {
        throw ParseError("ply: missing end_header");
    }
    std::istringstream lines(std::string(text.substr(0, end)));
    std::string line;
    if (!std::getline(lines, line) || line != "ply") {
        throw ParseError("ply: missing 'ply' magic");
    }

    PlyHeader header;
    header.data_offset = end + terminator.size();
    bool have_format = false;
    bool have_vertex = false;
    std::vector<std::string> props;
    while (std::getline(lines, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::istringstream tok(line);
        std::string keyword;
        tok >> keyword;
        if (keyword.empty() || keyword == "comment" || keyword == "obj_info") {
            continue;
        }
        if (keyword == "format") {
            std::string fmt_name, version;
            tok >> fmt_name >> version;
            if (fmt_name != "binary_little_endian") {
                throw ParseError("ply: unsupported format '" + fmt_name + "', expected binary_little_endian");
            }
            have_format = true;
        } else if (keyword == "element") {
            std::string name;
            std::size_t count = 0;
            tok >> name >> count;
            if (name != "vertex" || have_vertex) {
                throw ParseError("ply: unexpected element '" + name + "'");
            }
            header.vertex_count = count;
            have_vertex = true;
        } else if (keyword == "property") {
            std::string type, name;
            tok >> type >> name;
            if (!have_vertex) {
                throw ParseError("ply: property before element vertex");
            }
            if (type != "float" && type != "float32") {
                throw ParseError("ply: property '" + name + "' has type '" + type + "', expected float");
            }
            props.push_back(name);
        } else {
            throw ParseError("ply: unexpected header line '" + line + "'");
        }
    }
    if (!have_format) {
        throw ParseError("ply: missing format line");
    }
    if (!have_vertex) {
        throw ParseError("ply: missing element vertex");
    }

    const auto& expected = ply_property_names();
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i < props.size() && props[i] == expected[i]) {
            continue;
        }
        if (std::find(props.begin(), props.end(), expected[i]) == props.end()) {
            throw ParseError("ply: missing property " + expected[i]);
        }
        throw ParseError(fmt::format("ply: property order mismatch at position {}: expected {}, found {}", i,
                                     expected[i], i < props.size() ? props[i] : std::string("<none>")));
    }
    if (props.size() > expected.size()) {
        throw ParseError("ply: unexpected extra property " + props[expected.size()]);
    }
    return header;
}

} // namespace

GaussianScene load_scene(std::span<const std::byte> payload) {
    const PlyHeader header = parse_header(payload);
    const std::size_t stride = kPropertiesPerVertex * sizeof(float);
    const std::size_t expected_bytes = header.vertex_count * stride;
    const std::size_t available = payload.size() - header.data_offset;
    if (available < expected_bytes) {
        throw ParseError(fmt::format("ply: truncated vertex data ({} of {} bytes)", available, expected_bytes));
    }
    if (available > expected_bytes) {
        throw ParseError(fmt::format("ply: {} trailing bytes after vertex data", available - expected_bytes));
    }

    GaussianScene scene;
    scene.reserve(header.vertex_count);
    std::array<float, kPropertiesPerVertex> raw{};
    for (std::size_t i = 0; i < header.vertex_count; ++i) {
        std::memcpy(raw.data(), payload.data() + header.data_offset + i * stride, stride);
        if (!std::all_of(raw.begin(), raw.end(), [](float v) { return std::isfinite(v); })) {
            throw ValidationError(fmt::format("ply: primitive {} has a non-finite attribute", i));
        }
        // Layout: xyz(0..2) normals(3..5) f_dc(6..8) f_rest(9..53) opacity(54) scale(55..57) rot(58..61)
        scene.positions.emplace_back(raw[0], raw[1], raw[2]);
        ShCoefficients coeffs{};
        std::copy(raw.begin() + 6, raw.begin() + 54, coeffs.begin());
        scene.sh.push_back(coeffs);
        const double logit = raw[54];
        scene.opacities.push_back(static_cast<float>(1.0 / (1.0 + std::exp(-logit))));
        const Eigen::Vector3f scale(static_cast<float>(std::exp(static_cast<double>(raw[55]))),
                                    static_cast<float>(std::exp(static_cast<double>(raw[56]))),
                                    static_cast<float>(std::exp(static_cast<double>(raw[57]))));
        if (!scale.allFinite() || !(scale.minCoeff() > 0.0f)) {
            throw ValidationError(fmt::format("ply: primitive {} scale is not representable", i));
        }
        scene.scales.push_back(scale);
        const Eigen::Vector4f q(raw[58], raw[59], raw[60], raw[61]);
        const float norm = q.norm();
        if (!(norm > 0.0f)) {
            throw ValidationError(fmt::format("ply: primitive {} has a zero quaternion", i));
        }
        scene.rotations.push_back(q / norm);
    }
    return scene;
}

GaussianScene load_scene_file(const std::string& path) { return load_scene(io::read_file(path)); }

std::vector<std::byte> save_scene(const GaussianScene& scene) {
    std::string header = "ply\nformat binary_little_endian 1.0\n";
    header += fmt::format("element vertex {}\n", scene.size());
    for (const auto& name : ply_property_names()) {
        header += "property float " + name + "\n";
    }
    header += "end_header\n";

    std::vector<std::byte> out(header.size() + scene.size() * kPropertiesPerVertex * sizeof(float));
    std::memcpy(out.data(), header.data(), header.size());
    std::array<float, kPropertiesPerVertex> raw{};
    for (std::size_t i = 0; i < scene.size(); ++i) {
        raw.fill(0.0f);
        for (int k = 0; k < 3; ++k) {
            raw[static_cast<std::size_t>(k)] = scene.positions[i][k];
        }
        std::copy(scene.sh[i].begin(), scene.sh[i].end(), raw.begin() + 6);
        const double o = std::clamp(static_cast<double>(scene.opacities[i]), 1e-12, 1.0 - 1e-12);
        raw[54] = static_cast<float>(std::log(o / (1.0 - o)));
        for (int k = 0; k < 3; ++k) {
            raw[55 + static_cast<std::size_t>(k)] = static_cast<float>(std::log(static_cast<double>(scene.scales[i][k])));
        }
        for (int k = 0; k < 4; ++k) {
            raw[58 + static_cast<std::size_t>(k)] = scene.rotations[i][k];
        }
        std::memcpy(out.data() + header.size() + i * raw.size() * sizeof(float), raw.data(),
                    raw.size() * sizeof(float));
    }
    return out;
}

void save_scene_file(const GaussianScene& scene, const std::string& path) { io::write_file(path, save_scene(scene)); }

} // namespace gvr
