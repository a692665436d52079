// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gvr/error.hpp"

namespace gvr {

int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::kParse:
    case ErrorKind::kValidation:
    case ErrorKind::kDomain:
    case ErrorKind::kCorruption:
    case ErrorKind::kVersion:
        return 2;
    case ErrorKind::kProvider:
        return 3;
    case ErrorKind::kGrounding:
        return 4;
    case ErrorKind::kIo:
        return 1;
    }
    return 1;
}

} // namespace gvr
