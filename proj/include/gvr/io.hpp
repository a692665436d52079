// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gvr::io {

std::vector<std::byte> read_file(const std::string& path);
std::string read_text_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::byte> bytes);
void write_text_file(const std::string& path, std::string_view text);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::byte> bytes);
std::string sha256_hex(std::string_view text);

std::string base64_encode(std::span<const std::byte> bytes);
/// Throws ParseError on malformed input.
std::vector<std::byte> base64_decode(std::string_view text);

// Little-endian scalar helpers. The engine only targets little-endian hosts, so
// these are plain copies.
static_assert(std::endian::native == std::endian::little, "little-endian host required");

inline void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
    const auto* p = reinterpret_cast<const std::byte*>(&v);
    out.insert(out.end(), p, p + 4);
}

inline void put_f32(std::vector<std::byte>& out, float v) {
    const auto* p = reinterpret_cast<const std::byte*>(&v);
    out.insert(out.end(), p, p + 4);
}

inline std::uint32_t get_u32(std::span<const std::byte> in, std::size_t offset) {
    std::uint32_t v;
    std::memcpy(&v, in.data() + offset, 4);
    return v;
}

inline float get_f32(std::span<const std::byte> in, std::size_t offset) {
    float v;
    std::memcpy(&v, in.data() + offset, 4);
    return v;
}

inline std::span<const std::byte> as_bytes(std::string_view s) {
    return {reinterpret_cast<const std::byte*>(s.data()), s.size()};
}

} // namespace gvr::io
