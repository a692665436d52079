// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gvr/io.hpp"

#include "gvr/error.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <fstream>
#include <iterator>

namespace gvr::io {

std::vector<std::byte> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    const auto size = static_cast<std::size_t>(in.tellg());
    std::vector<std::byte> bytes(size);
    in.seekg(0);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
    if (!in) {
        throw IoError("short read on " + path);
    }
    return bytes;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::byte> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("short write on " + path);
    }
}

void write_text_file(const std::string& path, std::string_view text) {
    write_file(path, as_bytes(text));
}

std::string sha256_hex(std::span<const std::byte> bytes) {
    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * SHA256_DIGEST_LENGTH);
    for (unsigned char b : digest) {
        out.push_back(kHex[b >> 4]);
        out.push_back(kHex[b & 0xF]);
    }
    return out;
}

std::string sha256_hex(std::string_view text) { return sha256_hex(as_bytes(text)); }

std::string base64_encode(std::span<const std::byte> bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::vector<std::byte> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) {
        throw ParseError("base64: length is not a multiple of 4");
    }
    std::vector<std::byte> out(3 * (text.size() / 4));
    const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
    if (n < 0) {
        throw ParseError("base64: malformed input");
    }
    // EVP_DecodeBlock keeps the bytes produced by '=' padding.
    std::size_t len = static_cast<std::size_t>(n);
    if (!text.empty() && text.back() == '=') {
        --len;
        if (text[text.size() - 2] == '=') {
            --len;
        }
    }
    out.resize(len);
    return out;
}

} // namespace gvr::io
