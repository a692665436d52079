// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gvr {

/// One bit per Gaussian; set means "target".
class TargetFlags {
public:
    TargetFlags() = default;
    explicit TargetFlags(std::size_t n, bool value = false) : bits_(n, value ? 1 : 0) {}

    static TargetFlags all(std::size_t n) { return TargetFlags(n, true); }

    std::size_t size() const noexcept { return bits_.size(); }
    bool test(std::size_t i) const { return bits_[i] != 0; }
    void set(std::size_t i, bool value = true) { bits_[i] = value ? 1 : 0; }

    /// Number of set bits.
    std::size_t count() const noexcept;

    /// Indices of set bits, ascending.
    std::vector<std::size_t> indices() const;

    /// True when every set bit of *this is also set in `other`.
    bool is_subset_of(const TargetFlags& other) const;

    TargetFlags& operator&=(const TargetFlags& other);
    TargetFlags& operator|=(const TargetFlags& other);

    std::span<const std::uint8_t> raw() const noexcept { return bits_; }

    friend bool operator==(const TargetFlags&, const TargetFlags&) = default;

private:
    std::vector<std::uint8_t> bits_;
};

TargetFlags operator&(TargetFlags a, const TargetFlags& b);
TargetFlags operator|(TargetFlags a, const TargetFlags& b);

/// "GVRF" magic, u32 N, then ceil(N/8) bytes, bit i at byte i/8, bit i%8 (LSB first).
std::vector<std::byte> encode_flags(const TargetFlags& flags);
TargetFlags decode_flags(std::span<const std::byte> bytes);

void save_flags_file(const TargetFlags& flags, const std::string& path);
TargetFlags load_flags_file(const std::string& path);

} // namespace gvr
