// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gvr/protocol.hpp"

#include "gvr/error.hpp"
#include "gvr/io.hpp"
#include "gvr/provider.hpp"
#include "gvr/semantic.hpp"

#include <fmt/format.h>

#include <cmath>
#include <istream>
#include <ostream>

namespace gvr {

using json = nlohmann::json;

std::string_view op_name(ProviderOp op) noexcept {
    switch (op) {
    case ProviderOp::kSegmentAll:
        return "segment_all";
    case ProviderOp::kSegmentPoint:
        return "segment_point";
    case ProviderOp::kSegmentText:
        return "segment_text";
    case ProviderOp::kEmbedPatch:
        return "embed_patch";
    case ProviderOp::kEmbedText:
        return "embed_text";
    }
    return "unknown";
}

ProviderOp parse_op(std::string_view name) {
    for (const ProviderOp op : {ProviderOp::kSegmentAll, ProviderOp::kSegmentPoint, ProviderOp::kSegmentText,
                                ProviderOp::kEmbedPatch, ProviderOp::kEmbedText}) {
        if (op_name(op) == name) {
            return op;
        }
    }
    throw ParseError(fmt::format("unknown op '{}'", name));
}

namespace {

bool needs_image(ProviderOp op) { return op != ProviderOp::kEmbedText; }
bool needs_text(ProviderOp op) { return op == ProviderOp::kSegmentText || op == ProviderOp::kEmbedText; }
bool returns_masks(ProviderOp op) {
    return op == ProviderOp::kSegmentAll || op == ProviderOp::kSegmentPoint || op == ProviderOp::kSegmentText;
}

} // namespace

json request_to_json(const ProviderRequest& request) {
    json j = {{"id", request.id}, {"op", op_name(request.op)}};
    if (request.image) {
        j["image"] = io::base64_encode(encode_png(*request.image));
    }
    if (request.point) {
        j["point"] = {request.point->u, request.point->v};
    }
    if (request.text) {
        j["text"] = *request.text;
    }
    if (request.mask) {
        j["mask"] = rle_to_json(encode_rle(*request.mask));
    }
    return j;
}

ProviderRequest request_from_json(const json& j) {
    if (!j.is_object()) {
        throw ParseError("request must be a JSON object");
    }
    ProviderRequest r;
    try {
        r.id = j.at("id").get<std::int64_t>();
        r.op = parse_op(j.at("op").get<std::string>());
        if (j.contains("image")) {
            r.image = decode_png(io::base64_decode(j.at("image").get<std::string>()));
        }
        if (j.contains("point")) {
            const auto p = j.at("point").get<std::vector<double>>();
            if (p.size() != 2) {
                throw ParseError("point must be [u, v]");
            }
            r.point = PixelLocation{p[0], p[1]};
        }
        if (j.contains("text")) {
            r.text = j.at("text").get<std::string>();
        }
        if (j.contains("mask")) {
            r.mask = decode_rle(rle_from_json(j.at("mask")));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("request: ") + e.what());
    }
    if (needs_image(r.op) && !r.image) {
        throw ParseError(fmt::format("{} request needs an image", op_name(r.op)));
    }
    if (needs_text(r.op) && !r.text) {
        throw ParseError(fmt::format("{} request needs text", op_name(r.op)));
    }
    if (r.op == ProviderOp::kSegmentPoint && !r.point) {
        throw ParseError("segment_point request needs a point");
    }
    if (r.op == ProviderOp::kEmbedPatch && !r.mask) {
        throw ParseError("embed_patch request needs a mask");
    }
    return r;
}

json response_to_json(const ProviderResponse& response) {
    json j = {{"id", response.id}};
    if (response.masks) {
        json masks = json::array();
        for (const auto& m : *response.masks) {
            masks.push_back(rle_to_json(encode_rle(m)));
        }
        j["masks"] = std::move(masks);
    }
    if (response.vector) {
        j["vector"] = *response.vector;
    }
    if (response.error) {
        j["error"] = *response.error;
    }
    return j;
}

ProviderResponse response_from_json(const json& j) {
    if (!j.is_object()) {
        throw ParseError("response must be a JSON object");
    }
    ProviderResponse r;
    try {
        r.id = j.at("id").get<std::int64_t>();
        if (j.contains("masks")) {
            std::vector<BinaryMask> masks;
            for (const auto& m : j.at("masks")) {
                masks.push_back(decode_rle(rle_from_json(m)));
            }
            r.masks = std::move(masks);
        }
        if (j.contains("vector")) {
            r.vector = j.at("vector").get<std::vector<float>>();
        }
        if (j.contains("error")) {
            r.error = j.at("error").get<std::string>();
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("response: ") + e.what());
    }
    return r;
}

void validate_response(const ProviderRequest& request, const ProviderResponse& response) {
    if (response.id != request.id) {
        throw ValidationError(fmt::format("response id {} does not echo request id {}", response.id, request.id));
    }
    if (response.error) {
        return;
    }
    if (returns_masks(request.op)) {
        if (!response.masks) {
            throw ValidationError(fmt::format("{} response is missing 'masks'", op_name(request.op)));
        }
        if (request.op != ProviderOp::kSegmentAll && response.masks->size() > 1) {
            throw ValidationError(fmt::format("{} response may hold at most one mask", op_name(request.op)));
        }
        for (const auto& m : *response.masks) {
            if (m.width() != request.image->width || m.height() != request.image->height) {
                throw ValidationError("response mask dimensions do not match the request image");
            }
        }
    } else {
        if (!response.vector) {
            throw ValidationError(fmt::format("{} response is missing 'vector'", op_name(request.op)));
        }
        double n = 0.0;
        for (const float x : *response.vector) {
            n += static_cast<double>(x) * x;
        }
        if (!std::isfinite(n) || std::abs(std::sqrt(n) - 1.0) > kUnitNormTolerance) {
            throw ValidationError("response vector is not unit norm");
        }
    }
}

ProviderResponse handle_request(Provider& provider, const ProviderRequest& request) {
    ProviderResponse response;
    response.id = request.id;
    try {
        switch (request.op) {
        case ProviderOp::kSegmentAll:
            response.masks = provider.segment_all(*request.image);
            break;
        case ProviderOp::kSegmentPoint: {
            auto m = provider.segment_point(*request.image, *request.point);
            response.masks.emplace();
            if (m) {
                response.masks->push_back(std::move(*m));
            }
            break;
        }
        case ProviderOp::kSegmentText: {
            auto m = provider.segment_text(*request.image, *request.text);
            response.masks.emplace();
            if (m) {
                response.masks->push_back(std::move(*m));
            }
            break;
        }
        case ProviderOp::kEmbedPatch: {
            const auto v = provider.embed_patch(*request.image, *request.mask);
            response.vector.emplace(v.values().begin(), v.values().end());
            break;
        }
        case ProviderOp::kEmbedText: {
            const auto v = provider.embed_text(*request.text);
            response.vector.emplace(v.values().begin(), v.values().end());
            break;
        }
        }
    } catch (const std::exception& e) {
        response.masks.reset();
        response.vector.reset();
        response.error = e.what();
    }
    return response;
}

void serve(Provider& provider, std::istream& in, std::ostream& out) {
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        ProviderResponse response;
        try {
            const json j = json::parse(line);
            if (j.is_object() && j.contains("id") && j["id"].is_number_integer()) {
                response.id = j["id"].get<std::int64_t>();
            }
            response = handle_request(provider, request_from_json(j));
        } catch (const std::exception& e) {
            response.error = e.what();
        }
        out << response_to_json(response).dump() << '\n';
        out.flush();
    }
}

std::string request_key(const ProviderRequest& request) {
    json j = request_to_json(request);
    j.erase("id");
    return io::sha256_hex(j.dump());
}

} // namespace gvr
