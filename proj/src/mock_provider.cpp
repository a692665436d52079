// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gvr/mock_provider.hpp"

#include "gvr/error.hpp"
#include "gvr/io.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>

namespace gvr {

const std::vector<PaletteColor>& mock_palette() {
    // Pairwise RGB-direction cosines stay <= 0.82 so blended fringes still
    // classify to the dominant color.
    static const std::vector<PaletteColor> palette = {
        {"red", {1.0f, 0.0f, 0.0f}},    {"green", {0.0f, 1.0f, 0.0f}},   {"blue", {0.0f, 0.0f, 1.0f}},
        {"yellow", {1.0f, 1.0f, 0.0f}}, {"magenta", {1.0f, 0.0f, 1.0f}}, {"cyan", {0.0f, 1.0f, 1.0f}},
        {"gray", {0.5f, 0.5f, 0.5f}},
    };
    return palette;
}

int palette_id(std::string_view name) {
    const auto& p = mock_palette();
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i].name == name) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

MockRegistry MockRegistry::palette_names() {
    MockRegistry r;
    for (const auto& c : mock_palette()) {
        r.add(c.name, c.name);
    }
    return r;
}

MockRegistry MockRegistry::from_json_text(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("mock registry: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ParseError("mock registry: expected an object of phrase -> color name");
    }
    MockRegistry r;
    for (const auto& [phrase, color] : doc.items()) {
        if (!color.is_string()) {
            throw ParseError("mock registry: color for '" + phrase + "' must be a string");
        }
        r.add(phrase, color.get<std::string>());
    }
    return r;
}

MockRegistry MockRegistry::load(const std::string& path) { return from_json_text(io::read_text_file(path)); }

std::string MockRegistry::to_json_text() const {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [phrase, id] : phrases_) {
        doc[phrase] = mock_palette()[static_cast<std::size_t>(id)].name;
    }
    return doc.dump(2);
}

void MockRegistry::add(std::string phrase, std::string_view color_name) {
    const int id = palette_id(color_name);
    if (id < 0) {
        throw DomainError(fmt::format("mock registry: unknown color '{}'", color_name));
    }
    phrases_[std::move(phrase)] = id;
}

int MockRegistry::color_of(std::string_view phrase) const {
    const auto it = phrases_.find(phrase);
    return it == phrases_.end() ? -1 : it->second;
}

MockProvider::MockProvider(MockRegistry registry, MockOptions options)
    : registry_(std::move(registry)), options_(options) {
    if (options_.dim <= static_cast<int>(mock_palette().size())) {
        throw DomainError(fmt::format("mock provider needs dim > {}", mock_palette().size()));
    }
}

std::vector<int> MockProvider::classify(const RgbImage& image) const {
    const auto& palette = mock_palette();
    std::vector<Eigen::Vector3f> dirs;
    dirs.reserve(palette.size());
    for (const auto& c : palette) {
        dirs.push_back(c.rgb.normalized());
    }
    std::vector<int> classes(static_cast<std::size_t>(image.width) * image.height, -1);
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const Eigen::Vector3f p(image.data[3 * i], image.data[3 * i + 1], image.data[3 * i + 2]);
        if (p.maxCoeff() < options_.background_floor) {
            continue;
        }
        const Eigen::Vector3f d = p.normalized();
        int best = 0;
        float best_cos = -2.0f;
        for (std::size_t k = 0; k < dirs.size(); ++k) {
            const float c = d.dot(dirs[k]);
            if (c > best_cos) {
                best_cos = c;
                best = static_cast<int>(k);
            }
        }
        classes[i] = best;
    }
    return classes;
}

namespace {

/// 4-connected component of equal class containing `seed`.
BinaryMask flood(const std::vector<int>& classes, int width, int height, std::size_t seed,
                 std::vector<std::uint8_t>& visited) {
    BinaryMask mask(width, height);
    const int cls = classes[seed];
    std::vector<std::size_t> stack{seed};
    visited[seed] = 1;
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        const int x = static_cast<int>(i % static_cast<std::size_t>(width));
        const int y = static_cast<int>(i / static_cast<std::size_t>(width));
        mask.set(x, y);
        const auto visit = [&](int nx, int ny) {
            if (nx < 0 || ny < 0 || nx >= width || ny >= height) {
                return;
            }
            const std::size_t j = static_cast<std::size_t>(ny) * width + nx;
            if (!visited[j] && classes[j] == cls) {
                visited[j] = 1;
                stack.push_back(j);
            }
        };
        visit(x - 1, y);
        visit(x + 1, y);
        visit(x, y - 1);
        visit(x, y + 1);
    }
    return mask;
}

} // namespace

std::vector<BinaryMask> MockProvider::do_segment_all(const RgbImage& image) {
    const auto classes = classify(image);
    std::vector<std::uint8_t> visited(classes.size(), 0);
    std::vector<BinaryMask> masks;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (classes[i] < 0 || visited[i]) {
            continue;
        }
        BinaryMask m = flood(classes, image.width, image.height, i, visited);
        if (m.area() >= options_.min_area) {
            masks.push_back(std::move(m));
        }
    }
    return masks;
}

std::optional<BinaryMask> MockProvider::do_segment_point(const RgbImage& image, PixelLocation px) {
    const auto classes = classify(image);
    const PixelIndex p = nearest_pixel(px);
    const std::size_t seed = static_cast<std::size_t>(p.y) * image.width + p.x;
    if (classes[seed] < 0) {
        return std::nullopt;
    }
    std::vector<std::uint8_t> visited(classes.size(), 0);
    return flood(classes, image.width, image.height, seed, visited);
}

std::optional<BinaryMask> MockProvider::do_segment_text(const RgbImage& image, std::string_view query) {
    const int color = registry_.color_of(query);
    if (color < 0) {
        return std::nullopt;
    }
    const auto classes = classify(image);
    std::vector<std::uint8_t> visited(classes.size(), 0);
    std::optional<BinaryMask> best;
    // Row-major scan: the first component found wins ties on area.
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (classes[i] != color || visited[i]) {
            continue;
        }
        BinaryMask m = flood(classes, image.width, image.height, i, visited);
        if (!best || m.area() > best->area()) {
            best = std::move(m);
        }
    }
    return best;
}

SemanticVector MockProvider::do_embed_patch(const RgbImage& patch, const BinaryMask& patch_mask) {
    const auto classes = classify(patch);
    std::vector<std::size_t> votes(mock_palette().size(), 0);
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (patch_mask.bits()[i] && classes[i] >= 0) {
            ++votes[static_cast<std::size_t>(classes[i])];
        }
    }
    const auto it = std::max_element(votes.begin(), votes.end());
    const int index = *it == 0 ? unknown_index() : static_cast<int>(it - votes.begin());
    return SemanticVector::basis(options_.dim, index);
}

SemanticVector MockProvider::do_embed_text(std::string_view query) {
    const int color = registry_.color_of(query);
    if (color < 0) {
        throw DomainError(fmt::format("mock embed_text: phrase '{}' is not registered", query));
    }
    return SemanticVector::basis(options_.dim, color);
}

} // namespace gvr
