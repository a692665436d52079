// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gvr/renderer.hpp"

#include "gvr/error.hpp"

#include <Eigen/Geometry>
#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <thread>

namespace gvr {

bool project_splat(const GaussianScene& scene, std::size_t i, const CameraModel& cam, Splat& out) {
    const Eigen::Vector3d p_cam = cam.to_camera(scene.positions[i].cast<double>());
    const double z = p_cam.z();
    if (!(z > kDepthEpsilon)) {
        return false;
    }

    const Eigen::Vector4f& q = scene.rotations[i];
    const Eigen::Matrix3d rot =
        Eigen::Quaterniond(q[0], q[1], q[2], q[3]).normalized().toRotationMatrix();
    const Eigen::Matrix3d m = rot * scene.scales[i].cast<double>().asDiagonal();
    const Eigen::Matrix3d cov3 = m * m.transpose();

    // First-order perspective Jacobian, with the lateral offset clamped as in
    // the reference rasterizer so far off-screen primitives stay bounded.
    const double lim_x = 1.3 * (0.5 * cam.width / cam.fx);
    const double lim_y = 1.3 * (0.5 * cam.height / cam.fy);
    const double tx = std::clamp(p_cam.x() / z, -lim_x, lim_x) * z;
    const double ty = std::clamp(p_cam.y() / z, -lim_y, lim_y) * z;
    Eigen::Matrix<double, 2, 3> jac;
    jac << cam.fx / z, 0.0, -cam.fx * tx / (z * z), 0.0, cam.fy / z, -cam.fy * ty / (z * z);
    const Eigen::Matrix<double, 2, 3> t = jac * cam.rotation;
    Eigen::Matrix2d cov2 = t * cov3 * t.transpose();
    cov2(0, 0) += kCovarianceDilation;
    cov2(1, 1) += kCovarianceDilation;

    const double det = cov2.determinant();
    if (!(det > 0.0)) {
        return false;
    }
    const double mid = 0.5 * (cov2(0, 0) + cov2(1, 1));
    const double lambda = mid + std::sqrt(std::max(0.1, mid * mid - det));
    const double radius = std::ceil(3.0 * std::sqrt(lambda));

    const double u = cam.fx * p_cam.x() / z + cam.cx;
    const double v = cam.fy * p_cam.y() / z + cam.cy;
    if (u + radius < 0.0 || u - radius > cam.width - 1 || v + radius < 0.0 || v - radius > cam.height - 1) {
        return false;
    }

    out.index = static_cast<std::uint32_t>(i);
    out.u = static_cast<float>(u);
    out.v = static_cast<float>(v);
    out.depth = static_cast<float>(z);
    out.conic_a = static_cast<float>(cov2(1, 1) / det);
    out.conic_b = static_cast<float>(-cov2(0, 1) / det);
    out.conic_c = static_cast<float>(cov2(0, 0) / det);
    out.opacity = scene.opacities[i];
    out.radius = static_cast<float>(radius);
    out.color = scene.base_color(i);
    return true;
}

namespace {

struct TileBins {
    int tiles_x = 0;
    int tiles_y = 0;
    std::vector<std::uint32_t> offsets; // tiles + 1 entries
    std::vector<std::uint32_t> entries; // indices into the sorted splat array
};

struct TileRange {
    int x0, x1, y0, y1;
};

TileRange tile_range(const Splat& s, const TileBins& bins) {
    const auto lo = [](float c, float r) { return static_cast<int>(std::floor((c - r) / kTileSize)); };
    const auto hi = [](float c, float r) { return static_cast<int>(std::floor((c + r) / kTileSize)); };
    return {std::clamp(lo(s.u, s.radius), 0, bins.tiles_x - 1), std::clamp(hi(s.u, s.radius), 0, bins.tiles_x - 1),
            std::clamp(lo(s.v, s.radius), 0, bins.tiles_y - 1), std::clamp(hi(s.v, s.radius), 0, bins.tiles_y - 1)};
}

TileBins bin_splats(const std::vector<Splat>& splats, int width, int height) {
    TileBins bins;
    bins.tiles_x = (width + kTileSize - 1) / kTileSize;
    bins.tiles_y = (height + kTileSize - 1) / kTileSize;
    const std::size_t n_tiles = static_cast<std::size_t>(bins.tiles_x) * bins.tiles_y;
    std::vector<std::uint32_t> counts(n_tiles, 0);
    for (const Splat& s : splats) {
        const TileRange r = tile_range(s, bins);
        for (int ty = r.y0; ty <= r.y1; ++ty) {
            for (int tx = r.x0; tx <= r.x1; ++tx) {
                ++counts[static_cast<std::size_t>(ty) * bins.tiles_x + tx];
            }
        }
    }
    bins.offsets.assign(n_tiles + 1, 0);
    std::partial_sum(counts.begin(), counts.end(), bins.offsets.begin() + 1);
    bins.entries.resize(bins.offsets.back());
    std::vector<std::uint32_t> cursor(bins.offsets.begin(), bins.offsets.end() - 1);
    for (std::uint32_t k = 0; k < splats.size(); ++k) {
        const TileRange r = tile_range(splats[k], bins);
        for (int ty = r.y0; ty <= r.y1; ++ty) {
            for (int tx = r.x0; tx <= r.x1; ++tx) {
                bins.entries[cursor[static_cast<std::size_t>(ty) * bins.tiles_x + tx]++] = k;
            }
        }
    }
    return bins;
}

/// Slack below which a splat's exponent certainly yields alpha under kMinSplatAlpha.
constexpr float kPowerFloorMargin = 1e-3f;

void composite_tile(int tile, const TileBins& bins, const std::vector<Splat>& splats, RenderOutput& out) {
    const int width = out.rgb.width;
    const int height = out.rgb.height;
    const int tx0 = (tile % bins.tiles_x) * kTileSize;
    const int ty0 = (tile / bins.tiles_x) * kTileSize;
    const int tx1 = std::min(width, tx0 + kTileSize) - 1;
    const int ty1 = std::min(height, ty0 + kTileSize) - 1;
    const int tw = tx1 - tx0 + 1;
    const int n_pixels = tw * (ty1 - ty0 + 1);
    const std::uint32_t begin = bins.offsets[static_cast<std::size_t>(tile)];
    const std::uint32_t end = bins.offsets[static_cast<std::size_t>(tile) + 1];

    std::array<float, kTileSize * kTileSize> transmittance;
    std::array<float, kTileSize * kTileSize> r{}, g{}, b{}, depth_sum{}, weight_sum{};
    std::array<std::uint8_t, kTileSize * kTileSize> done{};
    transmittance.fill(1.0f);
    int n_done = 0;

    // Splat-major traversal: each splat touches only the pixels of its
    // support box; every pixel still sees splats front to back.
    for (std::uint32_t e = begin; e < end && n_done < n_pixels; ++e) {
        const Splat& s = splats[bins.entries[e]];
        const int x0 = std::max(tx0, static_cast<int>(std::ceil(s.u - s.radius)));
        const int x1 = std::min(tx1, static_cast<int>(std::floor(s.u + s.radius)));
        const int y0 = std::max(ty0, static_cast<int>(std::ceil(s.v - s.radius)));
        const int y1 = std::min(ty1, static_cast<int>(std::floor(s.v + s.radius)));
        if (!(s.opacity >= kMinSplatAlpha)) {
            continue;
        }
        const float power_floor = std::log(kMinSplatAlpha / s.opacity) - kPowerFloorMargin;
        for (int y = y0; y <= y1; ++y) {
            const float dy = s.v - static_cast<float>(y);
            for (int x = x0; x <= x1; ++x) {
                const int k = (y - ty0) * tw + (x - tx0);
                if (done[k]) {
                    continue;
                }
                const float dx = s.u - static_cast<float>(x);
                const float power = -0.5f * (s.conic_a * dx * dx + s.conic_c * dy * dy) - s.conic_b * dx * dy;
                if (power > 0.0f || power < power_floor) {
                    continue;
                }
                const float alpha = std::min(kMaxSplatAlpha, s.opacity * std::exp(power));
                if (alpha < kMinSplatAlpha) {
                    continue;
                }
                const float t = transmittance[k];
                const float next = t * (1.0f - alpha);
                if (next < kTransmittanceFloor) {
                    done[k] = 1;
                    ++n_done;
                    continue;
                }
                const float w = alpha * t;
                r[k] += w * s.color.x();
                g[k] += w * s.color.y();
                b[k] += w * s.color.z();
                depth_sum[k] += w * s.depth;
                weight_sum[k] += w;
                transmittance[k] = next;
            }
        }
    }

    for (int y = ty0; y <= ty1; ++y) {
        for (int x = tx0; x <= tx1; ++x) {
            const int k = (y - ty0) * tw + (x - tx0);
            const std::size_t pix = static_cast<std::size_t>(y) * width + x;
            out.rgb.data[3 * pix] = std::clamp(r[k], 0.0f, 1.0f);
            out.rgb.data[3 * pix + 1] = std::clamp(g[k], 0.0f, 1.0f);
            out.rgb.data[3 * pix + 2] = std::clamp(b[k], 0.0f, 1.0f);
            const float accumulated = 1.0f - transmittance[k];
            out.alpha[pix] = accumulated;
            out.depth.values[pix] = accumulated >= kDepthAlphaFloor ? depth_sum[k] / weight_sum[k] : 0.0f;
        }
    }
}

} // namespace

RenderOutput render(const CameraModel& cam, const GaussianScene& scene, const TargetFlags* subset,
                    const RenderOptions& options) {
    if (subset != nullptr && subset->size() != scene.size()) {
        throw DomainError(fmt::format("render: subset length {} != scene size {}", subset->size(), scene.size()));
    }
    RenderOutput out;
    out.rgb = RgbImage(cam.width, cam.height);
    out.depth = DepthMap(cam.width, cam.height);
    out.alpha.assign(static_cast<std::size_t>(cam.width) * cam.height, 0.0f);

    std::vector<Splat> splats;
    splats.reserve(subset ? subset->count() : scene.size());
    Splat s;
    for (std::size_t i = 0; i < scene.size(); ++i) {
        if (subset != nullptr && !subset->test(i)) {
            continue;
        }
        if (project_splat(scene, i, cam, s)) {
            splats.push_back(s);
        }
    }
    std::sort(splats.begin(), splats.end(), [](const Splat& a, const Splat& b) {
        return a.depth != b.depth ? a.depth < b.depth : a.index < b.index;
    });

    const TileBins bins = bin_splats(splats, cam.width, cam.height);
    const int n_tiles = bins.tiles_x * bins.tiles_y;
    int workers = options.workers > 0 ? options.workers : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, n_tiles);
    if (workers == 1) {
        for (int t = 0; t < n_tiles; ++t) {
            composite_tile(t, bins, splats, out);
        }
        return out;
    }
    {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (int t = w; t < n_tiles; t += workers) {
                    composite_tile(t, bins, splats, out);
                }
            });
        }
    }
    return out;
}

RgbImage render_rgb(const CameraModel& cam, const GaussianScene& scene, const TargetFlags* subset,
                    const RenderOptions& options) {
    return render(cam, scene, subset, options).rgb;
}

DepthMap render_depth(const CameraModel& cam, const GaussianScene& scene, const RenderOptions& options) {
    return render(cam, scene, nullptr, options).depth;
}

} // namespace gvr
