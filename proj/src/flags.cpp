// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gvr/flags.hpp"

#include "gvr/error.hpp"
#include "gvr/io.hpp"

#include <algorithm>
#include <numeric>

namespace gvr {

namespace {
constexpr char kFlagsMagic[4] = {'G', 'V', 'R', 'F'};
}

std::size_t TargetFlags::count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<std::size_t> TargetFlags::indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i]) {
            out.push_back(i);
        }
    }
    return out;
}

bool TargetFlags::is_subset_of(const TargetFlags& other) const {
    if (other.size() != size()) {
        throw DomainError("flags length mismatch");
    }
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i] && !other.bits_[i]) {
            return false;
        }
    }
    return true;
}

TargetFlags& TargetFlags::operator&=(const TargetFlags& other) {
    if (other.size() != size()) {
        throw DomainError("flags length mismatch");
    }
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        bits_[i] &= other.bits_[i];
    }
    return *this;
}

TargetFlags& TargetFlags::operator|=(const TargetFlags& other) {
    if (other.size() != size()) {
        throw DomainError("flags length mismatch");
    }
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        bits_[i] |= other.bits_[i];
    }
    return *this;
}

TargetFlags operator&(TargetFlags a, const TargetFlags& b) { return a &= b; }
TargetFlags operator|(TargetFlags a, const TargetFlags& b) { return a |= b; }

std::vector<std::byte> encode_flags(const TargetFlags& flags) {
    std::vector<std::byte> out;
    out.reserve(8 + (flags.size() + 7) / 8);
    for (char c : kFlagsMagic) {
        out.push_back(static_cast<std::byte>(c));
    }
    io::put_u32(out, static_cast<std::uint32_t>(flags.size()));
    const std::size_t header = out.size();
    out.resize(header + (flags.size() + 7) / 8, std::byte{0});
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (flags.test(i)) {
            out[header + i / 8] |= static_cast<std::byte>(1u << (i % 8));
        }
    }
    return out;
}

TargetFlags decode_flags(std::span<const std::byte> bytes) {
    if (bytes.size() < 8 || !std::equal(std::begin(kFlagsMagic), std::end(kFlagsMagic), bytes.begin(),
                                        [](char c, std::byte b) { return static_cast<std::byte>(c) == b; })) {
        throw ParseError("flags: missing GVRF header");
    }
    const std::size_t n = io::get_u32(bytes, 4);
    if (bytes.size() != 8 + (n + 7) / 8) {
        throw CorruptionError("flags: payload size does not match N=" + std::to_string(n));
    }
    TargetFlags flags(n);
    for (std::size_t i = 0; i < n; ++i) {
        if ((static_cast<unsigned>(bytes[8 + i / 8]) >> (i % 8)) & 1u) {
            flags.set(i);
        }
    }
    return flags;
}

void save_flags_file(const TargetFlags& flags, const std::string& path) { io::write_file(path, encode_flags(flags)); }

TargetFlags load_flags_file(const std::string& path) { return decode_flags(io::read_file(path)); }

} // namespace gvr
