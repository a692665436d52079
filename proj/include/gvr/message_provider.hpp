// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gvr/protocol.hpp"
#include "gvr/provider.hpp"

#include <sys/types.h>

#include <atomic>
#include <map>
#include <mutex>
#include <string>

namespace gvr {

/// Provider whose capabilities are answered by protocol messages. Subclasses
/// only implement `exchange`; responses are schema-checked and error
/// responses become ProviderError.
class MessageProvider : public Provider {
protected:
    virtual ProviderResponse exchange(const ProviderRequest& request) = 0;

    std::vector<BinaryMask> do_segment_all(const RgbImage& image) override;
    std::optional<BinaryMask> do_segment_point(const RgbImage& image, PixelLocation px) override;
    std::optional<BinaryMask> do_segment_text(const RgbImage& image, std::string_view query) override;
    SemanticVector do_embed_patch(const RgbImage& patch, const BinaryMask& patch_mask) override;
    SemanticVector do_embed_text(std::string_view query) override;

private:
    ProviderResponse call(ProviderRequest request);
    std::optional<BinaryMask> single_mask(ProviderRequest request);
    SemanticVector vector_of(ProviderRequest request);

    std::atomic<std::int64_t> next_id_{1};
};

/// Talks to a child process (`/bin/sh -c command`) over stdin/stdout, one
/// request at a time.
class ProcessProvider final : public MessageProvider {
public:
    explicit ProcessProvider(std::string command);
    ~ProcessProvider() override;

    ProcessProvider(const ProcessProvider&) = delete;
    ProcessProvider& operator=(const ProcessProvider&) = delete;

    std::string identity() const override { return "proc:" + command_; }

protected:
    ProviderResponse exchange(const ProviderRequest& request) override;

private:
    std::string read_line();

    std::string command_;
    std::mutex mutex_;
    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string pending_;
};

/// Name of the recorded-response file inside a files: directory.
inline constexpr const char* kRecordedResponsesFile = "responses.jsonl";

/// Replays responses recorded in DIR/responses.jsonl, keyed by `request_key`.
class FileProvider final : public MessageProvider {
public:
    explicit FileProvider(std::string dir);

    std::string identity() const override { return "files:" + dir_; }
    bool thread_safe() const override { return true; }

    std::size_t size() const noexcept { return responses_.size(); }

protected:
    ProviderResponse exchange(const ProviderRequest& request) override;

private:
    std::string dir_;
    std::map<std::string, nlohmann::json> responses_;
};

/// Forwards to another provider and appends every exchange to
/// DIR/responses.jsonl so a FileProvider can replay it later.
class RecordingProvider final : public MessageProvider {
public:
    RecordingProvider(Provider& inner, std::string dir);

    std::string identity() const override { return "record:" + inner_.identity(); }

protected:
    ProviderResponse exchange(const ProviderRequest& request) override;

private:
    Provider& inner_;
    std::string dir_;
    std::mutex mutex_;
};

} // namespace gvr
