// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gvr/camera.hpp"
#include "gvr/image.hpp"
#include "gvr/mask.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gvr {

class Provider;

enum class ProviderOp { kSegmentAll, kSegmentPoint, kSegmentText, kEmbedPatch, kEmbedText };

std::string_view op_name(ProviderOp op) noexcept;
/// Throws ParseError for unknown tags.
ProviderOp parse_op(std::string_view name);

/// One line of the newline-delimited JSON protocol:
/// {"id", "op", "image": base64 PNG, "point": [u, v]?, "text"?, "mask": RLE?}
struct ProviderRequest {
    std::int64_t id = 0;
    ProviderOp op = ProviderOp::kSegmentAll;
    std::optional<RgbImage> image;
    std::optional<PixelLocation> point;
    std::optional<std::string> text;
    std::optional<BinaryMask> mask;
};

/// {"id", "masks": [RLE...]?, "vector": [floats]?, "error"?}
struct ProviderResponse {
    std::int64_t id = 0;
    std::optional<std::vector<BinaryMask>> masks;
    std::optional<std::vector<float>> vector;
    std::optional<std::string> error;
};

nlohmann::json request_to_json(const ProviderRequest& request);
/// Throws ParseError on schema violations (missing fields for the op, bad PNG, bad RLE).
ProviderRequest request_from_json(const nlohmann::json& j);

nlohmann::json response_to_json(const ProviderResponse& response);
ProviderResponse response_from_json(const nlohmann::json& j);

/// Schema check of a response against its request: echoed id, the payload the
/// op requires, mask dimensions matching the request image, unit vectors.
/// Throws ValidationError. Error responses only need the echoed id.
void validate_response(const ProviderRequest& request, const ProviderResponse& response);

/// Runs one request against a provider; failures become error responses.
ProviderResponse handle_request(Provider& provider, const ProviderRequest& request);

/// Serves the protocol until EOF. Malformed lines get an error response
/// (echoing the id when it can be read) and the loop keeps going.
void serve(Provider& provider, std::istream& in, std::ostream& out);

/// Cache key for a request: SHA-256 of its JSON form without the id.
std::string request_key(const ProviderRequest& request);

} // namespace gvr
