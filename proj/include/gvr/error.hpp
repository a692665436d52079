// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace gvr {

enum class ErrorKind {
    kParse,
    kValidation,
    kDomain,
    kCorruption,
    kVersion,
    kProvider,
    kGrounding,
    kIo,
};

/// Base of every error the engine throws. `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(ErrorKind::kParse, what) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::kValidation, what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::kDomain, what) {}
};

class CorruptionError : public Error {
public:
    explicit CorruptionError(const std::string& what) : Error(ErrorKind::kCorruption, what) {}
};

class VersionError : public Error {
public:
    VersionError(int found, int expected)
        : Error(ErrorKind::kVersion, "book version mismatch: found " + std::to_string(found) +
                                         ", expected " + std::to_string(expected)),
          found_(found),
          expected_(expected) {}

    int found() const noexcept { return found_; }
    int expected() const noexcept { return expected_; }

private:
    int found_;
    int expected_;
};

/// Raised by provider backends. Carries the backend identity ("mock", "proc:...").
class ProviderError : public Error {
public:
    ProviderError(std::string backend, const std::string& what)
        : Error(ErrorKind::kProvider, "provider '" + backend + "': " + what),
          backend_(std::move(backend)) {}

    const std::string& backend() const noexcept { return backend_; }

private:
    std::string backend_;
};

/// Raised when a query cannot be grounded. `stage()` names the pipeline step.
class GroundingError : public Error {
public:
    GroundingError(std::string stage, const std::string& what)
        : Error(ErrorKind::kGrounding, stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

/// 0 ok, 2 validation, 3 provider, 4 grounding, 1 anything else.
int exit_code_for(ErrorKind kind) noexcept;

} // namespace gvr
