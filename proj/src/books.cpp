// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gvr/books.hpp"

#include "gvr/error.hpp"
#include "gvr/io.hpp"
#include "gvr/parallel.hpp"
#include "gvr/provider.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>

namespace gvr {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr char kDepthMagic[4] = {'G', 'V', 'R', 'D'};
constexpr std::size_t kDepthHeaderBytes = 16;
constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kVectorsFile = "vectors.f32";
constexpr const char* kMasksFile = "masks.json";
constexpr const char* kCamerasFile = "cameras.json";

std::string depth_file(int view_id) { return fmt::format("depth/{}.f32", view_id); }

double round_half_up(double x) { return std::floor(x + 0.5); }

} // namespace

std::size_t SemanticVectorBook::patch_count() const noexcept {
    std::size_t n = 0;
    for (const auto& v : views) {
        n += v.size();
    }
    return n;
}

void SemanticVectorBook::validate() const {
    if (dim <= 0) {
        throw ValidationError(fmt::format("semantic vector book: dimension must be positive, got {}", dim));
    }
    for (std::size_t i = 0; i < views.size(); ++i) {
        for (std::size_t j = 0; j < views[i].size(); ++j) {
            const PatchEntry& e = views[i][j];
            if (e.view_id != static_cast<int>(i) || e.patch_id != static_cast<int>(j)) {
                throw ValidationError(fmt::format("semantic vector book: entry at ({}, {}) is labelled ({}, {})", i, j,
                                                  e.view_id, e.patch_id));
            }
            if (e.vector.dim() != dim) {
                throw ValidationError(fmt::format("semantic vector book: view {} patch {} has dimension {}, expected {}",
                                                  i, j, e.vector.dim(), dim));
            }
            double n = 0.0;
            for (const float x : e.vector.values()) {
                n += static_cast<double>(x) * x;
            }
            if (std::abs(std::sqrt(n) - 1.0) > kUnitNormTolerance) {
                throw ValidationError(fmt::format("semantic vector book: view {} patch {} is not unit norm", i, j));
            }
            if (!e.bbox.contains(e.centroid)) {
                throw ValidationError(fmt::format("semantic vector book: view {} patch {} centroid outside bbox", i, j));
            }
        }
    }
}

PatchEntry make_patch_entry(int view_id, int patch_id, SemanticVector vector, BinaryMask mask) {
    PatchEntry e;
    e.view_id = view_id;
    e.patch_id = patch_id;
    e.vector = std::move(vector);
    const PixelLocation com = mask.center_of_mass();
    e.centroid = {round_half_up(com.u), round_half_up(com.v)};
    e.bbox = mask.bbox();
    e.mask = std::move(mask);
    return e;
}

SemanticVectorBook build_svb(const std::vector<RgbImage>& views, Provider& provider) {
    if (views.empty()) {
        throw ValidationError("build_svb: no views");
    }
    SemanticVectorBook book;
    book.views.resize(views.size());
    std::vector<int> dims(views.size(), -1);
    parallel_for(views.size(), provider.thread_safe() ? 0 : 1, [&](std::size_t i) {
        const int view_id = static_cast<int>(i);
        try {
            auto masks = provider.segment_all(views[i]);
            auto& entries = book.views[i];
            entries.reserve(masks.size());
            for (std::size_t j = 0; j < masks.size(); ++j) {
                SemanticVector v = provider.embed_patch(views[i], masks[j]);
                dims[i] = v.dim();
                entries.push_back(make_patch_entry(view_id, static_cast<int>(j), std::move(v), std::move(masks[j])));
            }
        } catch (const Error& e) {
            throw ProviderError(provider.identity(), fmt::format("view {}: {}", view_id, e.what()));
        }
    });
    book.dim = 0;
    for (const int d : dims) {
        if (d < 0) {
            continue;
        }
        if (book.dim != 0 && d != book.dim) {
            throw ProviderError(provider.identity(), "embedding dimension changed between views");
        }
        book.dim = d;
    }
    if (book.dim == 0) {
        book.dim = provider.embed_text("object").dim();
    }
    book.validate();
    return book;
}

DepthBook build_depth_book(const std::vector<CameraModel>& cams, const GaussianScene& scene,
                           const RenderOptions& options) {
    DepthBook db;
    db.maps.reserve(cams.size());
    for (const auto& cam : cams) {
        cam.validate();
        db.maps.push_back(render_depth(cam, scene, options));
    }
    return db;
}

void check_alignment(const SemanticVectorBook& svb, const DepthBook& db, const std::vector<CameraModel>& cams) {
    if (svb.size() != db.size()) {
        throw ValidationError(fmt::format("books disagree: {} semantic views, {} depth maps", svb.size(), db.size()));
    }
    if (cams.empty()) {
        return;
    }
    if (cams.size() != db.size()) {
        throw ValidationError(fmt::format("books hold {} views but {} cameras were given", db.size(), cams.size()));
    }
    for (std::size_t i = 0; i < cams.size(); ++i) {
        if (cams[i].id != static_cast<int>(i)) {
            throw ValidationError(fmt::format("camera ids must be dense 0..n-1; position {} has id {}", i, cams[i].id));
        }
        if (db.maps[i].width != cams[i].width || db.maps[i].height != cams[i].height) {
            throw ValidationError(fmt::format("depth map {} is {}x{} but its camera is {}x{}", i, db.maps[i].width,
                                              db.maps[i].height, cams[i].width, cams[i].height));
        }
    }
}

std::string view_image_name(int view_id) { return fmt::format("{:04d}.png", view_id); }

std::vector<std::byte> encode_depth(const DepthMap& map) {
    std::vector<std::byte> out;
    out.reserve(kDepthHeaderBytes + map.values.size() * 4);
    for (const char c : kDepthMagic) {
        out.push_back(static_cast<std::byte>(c));
    }
    io::put_u32(out, static_cast<std::uint32_t>(map.height));
    io::put_u32(out, static_cast<std::uint32_t>(map.width));
    io::put_u32(out, 0);
    const auto* p = reinterpret_cast<const std::byte*>(map.values.data());
    out.insert(out.end(), p, p + map.values.size() * 4);
    return out;
}

DepthMap decode_depth(std::span<const std::byte> bytes) {
    if (bytes.size() < kDepthHeaderBytes || std::memcmp(bytes.data(), kDepthMagic, 4) != 0) {
        throw CorruptionError("depth map: bad header");
    }
    const std::uint32_t h = io::get_u32(bytes, 4);
    const std::uint32_t w = io::get_u32(bytes, 8);
    const std::size_t expected = kDepthHeaderBytes + static_cast<std::size_t>(h) * w * 4;
    if (bytes.size() != expected) {
        throw CorruptionError(fmt::format("depth map: {} bytes, expected {} for {}x{}", bytes.size(), expected, w, h));
    }
    DepthMap map(static_cast<int>(w), static_cast<int>(h));
    std::memcpy(map.values.data(), bytes.data() + kDepthHeaderBytes, map.values.size() * 4);
    return map;
}

void save_books(const KnowledgeBooks& books, const std::string& dir) {
    const auto& svb = books.svb;
    svb.validate();
    check_alignment(svb, books.depth, books.cameras);
    fs::create_directories(fs::path(dir) / "depth");

    json checksums = json::object();
    const auto put = [&](const std::string& name, std::span<const std::byte> bytes) {
        io::write_file((fs::path(dir) / name).string(), bytes);
        checksums[name] = io::sha256_hex(bytes);
    };

    std::vector<std::byte> vectors;
    vectors.reserve(svb.patch_count() * static_cast<std::size_t>(svb.dim) * 4);
    json masks = json::array();
    json counts = json::array();
    for (const auto& view : svb.views) {
        json entries = json::array();
        for (const auto& e : view) {
            for (const float x : e.vector.values()) {
                io::put_f32(vectors, x);
            }
            entries.push_back({{"patch_id", e.patch_id},
                               {"centroid", {e.centroid.u, e.centroid.v}},
                               {"bbox", {e.bbox.x0, e.bbox.y0, e.bbox.x1, e.bbox.y1}},
                               {"mask", rle_to_json(encode_rle(e.mask))}});
        }
        counts.push_back(view.size());
        masks.push_back(std::move(entries));
    }
    put(kVectorsFile, vectors);
    put(kMasksFile, io::as_bytes(masks.dump()));
    for (std::size_t i = 0; i < books.depth.size(); ++i) {
        put(depth_file(static_cast<int>(i)), encode_depth(books.depth.maps[i]));
    }
    if (!books.cameras.empty()) {
        put(kCamerasFile, io::as_bytes(save_cameras(books.cameras)));
    }

    const json manifest = {{"format", "gvr-books"},
                           {"version", kBookVersion},
                           {"n", svb.size()},
                           {"c", svb.dim},
                           {"patches", counts},
                           {"checksums", checksums}};
    io::write_text_file((fs::path(dir) / kManifestFile).string(), manifest.dump(2));
}

namespace {

std::vector<std::byte> read_checked(const fs::path& dir, const json& checksums, const std::string& name) {
    if (!checksums.contains(name)) {
        throw CorruptionError(fmt::format("books: manifest has no checksum for {}", name));
    }
    const fs::path path = dir / name;
    if (!fs::exists(path)) {
        throw CorruptionError(fmt::format("books: missing file {}", name));
    }
    auto bytes = io::read_file(path.string());
    if (io::sha256_hex(bytes) != checksums.at(name).get<std::string>()) {
        throw CorruptionError(fmt::format("books: checksum mismatch for {}", name));
    }
    return bytes;
}

} // namespace

KnowledgeBooks load_books(const std::string& dir, std::optional<int> expected_dim) {
    const fs::path root(dir);
    if (!fs::exists(root / kManifestFile)) {
        throw IoError(fmt::format("books: {} has no {}", dir, kManifestFile));
    }
    json manifest;
    try {
        manifest = json::parse(io::read_text_file((root / kManifestFile).string()));
    } catch (const json::parse_error& e) {
        throw CorruptionError(std::string("books manifest: ") + e.what());
    }

    KnowledgeBooks books;
    auto& svb = books.svb;
    std::vector<std::size_t> counts;
    json checksums;
    std::size_t n = 0;
    try {
        const int version = manifest.at("version").get<int>();
        if (version != kBookVersion) {
            throw VersionError(version, kBookVersion);
        }
        n = manifest.at("n").get<std::size_t>();
        svb.dim = manifest.at("c").get<int>();
        counts = manifest.at("patches").get<std::vector<std::size_t>>();
        checksums = manifest.at("checksums");
    } catch (const json::exception& e) {
        throw CorruptionError(std::string("books manifest: ") + e.what());
    }
    if (svb.dim <= 0) {
        throw ValidationError(fmt::format("books: dimension must be positive, got {}", svb.dim));
    }
    if (expected_dim && *expected_dim != svb.dim) {
        throw ValidationError(fmt::format("books: embedding dimension {} does not match expected {}", svb.dim,
                                          *expected_dim));
    }
    if (counts.size() != n) {
        throw CorruptionError(fmt::format("books manifest: {} patch counts for {} views", counts.size(), n));
    }

    const auto vectors = read_checked(root, checksums, kVectorsFile);
    std::size_t total = 0;
    for (const auto c : counts) {
        total += c;
    }
    const std::size_t row_bytes = static_cast<std::size_t>(svb.dim) * 4;
    if (vectors.size() != total * row_bytes) {
        throw CorruptionError(fmt::format("books: {} holds {} bytes, expected {}", kVectorsFile, vectors.size(),
                                          total * row_bytes));
    }

    const auto mask_bytes = read_checked(root, checksums, kMasksFile);
    json masks;
    try {
        masks = json::parse(std::string_view(reinterpret_cast<const char*>(mask_bytes.data()), mask_bytes.size()));
    } catch (const json::parse_error& e) {
        throw CorruptionError(std::string("books masks: ") + e.what());
    }
    if (!masks.is_array() || masks.size() != n) {
        throw CorruptionError("books masks: expected one entry list per view");
    }

    svb.views.resize(n);
    std::size_t row = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const json& entries = masks[i];
        if (!entries.is_array() || entries.size() != counts[i]) {
            throw CorruptionError(fmt::format("books masks: view {} does not hold {} patches", i, counts[i]));
        }
        for (std::size_t j = 0; j < counts[i]; ++j, ++row) {
            const json& m = entries[j];
            PatchEntry e;
            e.view_id = static_cast<int>(i);
            try {
                e.patch_id = m.at("patch_id").get<int>();
                const auto c = m.at("centroid").get<std::vector<double>>();
                const auto b = m.at("bbox").get<std::vector<int>>();
                if (c.size() != 2 || b.size() != 4) {
                    throw CorruptionError(fmt::format("books masks: view {} patch {} malformed", i, j));
                }
                e.centroid = {c[0], c[1]};
                e.bbox = {b[0], b[1], b[2], b[3]};
                e.mask = decode_rle(rle_from_json(m.at("mask")));
            } catch (const json::exception& ex) {
                throw CorruptionError(fmt::format("books masks: view {} patch {}: {}", i, j, ex.what()));
            } catch (const ParseError& ex) {
                throw CorruptionError(fmt::format("books masks: view {} patch {}: {}", i, j, ex.what()));
            }
            std::vector<float> v(static_cast<std::size_t>(svb.dim));
            std::memcpy(v.data(), vectors.data() + row * row_bytes, row_bytes);
            e.vector = SemanticVector::from_unit(std::move(v));
            svb.views[i].push_back(std::move(e));
        }
    }
    svb.validate();

    books.depth.maps.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        books.depth.maps.push_back(decode_depth(read_checked(root, checksums, depth_file(static_cast<int>(i)))));
    }
    if (checksums.contains(kCamerasFile)) {
        const auto bytes = read_checked(root, checksums, kCamerasFile);
        books.cameras = load_cameras(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    }
    check_alignment(svb, books.depth, books.cameras);
    return books;
}

} // namespace gvr
