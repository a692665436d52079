// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gvr/message_provider.hpp"

#include "gvr/error.hpp"
#include "gvr/io.hpp"

#include <fmt/format.h>

#include <csignal>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

namespace gvr {

using json = nlohmann::json;

// -----------------------------------------------------------------------------
//  MessageProvider
// -----------------------------------------------------------------------------

ProviderResponse MessageProvider::call(ProviderRequest request) {
    request.id = next_id_++;
    ProviderResponse response;
    try {
        response = exchange(request);
        validate_response(request, response);
    } catch (const ProviderError&) {
        throw;
    } catch (const Error& e) {
        throw ProviderError(identity(), e.what());
    }
    if (response.error) {
        throw ProviderError(identity(), fmt::format("{} failed: {}", op_name(request.op), *response.error));
    }
    return response;
}

std::optional<BinaryMask> MessageProvider::single_mask(ProviderRequest request) {
    auto response = call(std::move(request));
    if (response.masks->empty()) {
        return std::nullopt;
    }
    return std::move(response.masks->front());
}

SemanticVector MessageProvider::vector_of(ProviderRequest request) {
    auto response = call(std::move(request));
    return SemanticVector(std::move(*response.vector));
}

std::vector<BinaryMask> MessageProvider::do_segment_all(const RgbImage& image) {
    ProviderRequest r;
    r.op = ProviderOp::kSegmentAll;
    r.image = image;
    return std::move(*call(std::move(r)).masks);
}

std::optional<BinaryMask> MessageProvider::do_segment_point(const RgbImage& image, PixelLocation px) {
    ProviderRequest r;
    r.op = ProviderOp::kSegmentPoint;
    r.image = image;
    r.point = px;
    return single_mask(std::move(r));
}

std::optional<BinaryMask> MessageProvider::do_segment_text(const RgbImage& image, std::string_view query) {
    ProviderRequest r;
    r.op = ProviderOp::kSegmentText;
    r.image = image;
    r.text = std::string(query);
    return single_mask(std::move(r));
}

SemanticVector MessageProvider::do_embed_patch(const RgbImage& patch, const BinaryMask& patch_mask) {
    ProviderRequest r;
    r.op = ProviderOp::kEmbedPatch;
    r.image = patch;
    r.mask = patch_mask;
    return vector_of(std::move(r));
}

SemanticVector MessageProvider::do_embed_text(std::string_view query) {
    ProviderRequest r;
    r.op = ProviderOp::kEmbedText;
    r.text = std::string(query);
    return vector_of(std::move(r));
}

// -----------------------------------------------------------------------------
//  ProcessProvider
// -----------------------------------------------------------------------------

ProcessProvider::ProcessProvider(std::string command) : command_(std::move(command)) {
    std::signal(SIGPIPE, SIG_IGN);
    int in_pipe[2];
    int out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) {
        throw ProviderError(identity(), std::string("pipe: ") + std::strerror(errno));
    }
    pid_ = fork();
    if (pid_ < 0) {
        throw ProviderError(identity(), std::string("fork: ") + std::strerror(errno));
    }
    if (pid_ == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
}

ProcessProvider::~ProcessProvider() {
    if (to_child_ >= 0) {
        close(to_child_);
    }
    if (from_child_ >= 0) {
        close(from_child_);
    }
    if (pid_ > 0) {
        int status = 0;
        waitpid(pid_, &status, 0);
    }
}

std::string ProcessProvider::read_line() {
    for (;;) {
        const auto nl = pending_.find('\n');
        if (nl != std::string::npos) {
            std::string line = pending_.substr(0, nl);
            pending_.erase(0, nl + 1);
            return line;
        }
        char buf[65536];
        const ssize_t n = read(from_child_, buf, sizeof(buf));
        if (n < 0 && errno == EINTR) {
            continue;
        }
        if (n <= 0) {
            throw ProviderError(identity(), "process closed its output");
        }
        pending_.append(buf, static_cast<std::size_t>(n));
    }
}

ProviderResponse ProcessProvider::exchange(const ProviderRequest& request) {
    const std::lock_guard lock(mutex_);
    const std::string line = request_to_json(request).dump() + "\n";
    std::size_t written = 0;
    while (written < line.size()) {
        const ssize_t n = write(to_child_, line.data() + written, line.size() - written);
        if (n < 0 && errno == EINTR) {
            continue;
        }
        if (n <= 0) {
            throw ProviderError(identity(), "process is not accepting requests");
        }
        written += static_cast<std::size_t>(n);
    }
    try {
        return response_from_json(json::parse(read_line()));
    } catch (const json::exception& e) {
        throw ProviderError(identity(), std::string("malformed response: ") + e.what());
    }
}

// -----------------------------------------------------------------------------
//  FileProvider / RecordingProvider
// -----------------------------------------------------------------------------

FileProvider::FileProvider(std::string dir) : dir_(std::move(dir)) {
    const std::string path = (std::filesystem::path(dir_) / kRecordedResponsesFile).string();
    std::ifstream in(path);
    if (!in) {
        throw ProviderError(identity(), "cannot open " + path);
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            json j = json::parse(line);
            responses_[j.at("key").get<std::string>()] = std::move(j.at("response"));
        } catch (const json::exception& e) {
            throw ProviderError(identity(), fmt::format("{}:{}: {}", path, line_no, e.what()));
        }
    }
}

ProviderResponse FileProvider::exchange(const ProviderRequest& request) {
    const std::string key = request_key(request);
    const auto it = responses_.find(key);
    if (it == responses_.end()) {
        throw ProviderError(identity(), fmt::format("no recorded response for {} (key {})", op_name(request.op), key));
    }
    ProviderResponse response = response_from_json(it->second);
    response.id = request.id;
    return response;
}

RecordingProvider::RecordingProvider(Provider& inner, std::string dir) : inner_(inner), dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

ProviderResponse RecordingProvider::exchange(const ProviderRequest& request) {
    ProviderResponse response = handle_request(inner_, request);
    const json record = {{"key", request_key(request)}, {"op", op_name(request.op)},
                         {"response", response_to_json(response)}};
    const std::lock_guard lock(mutex_);
    std::ofstream out(std::filesystem::path(dir_) / kRecordedResponsesFile, std::ios::app);
    if (!out) {
        throw IoError("cannot append to " + dir_);
    }
    out << record.dump() << '\n';
    return response;
}

} // namespace gvr
