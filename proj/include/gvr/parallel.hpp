// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gvr {

inline int resolve_workers(int requested) {
    if (requested > 0) {
        return requested;
    }
    return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

/// Runs fn(i) for i in [0, n). Each index runs exactly once; the exception of
/// the lowest failing index is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    const auto w = static_cast<std::size_t>(std::clamp<std::size_t>(static_cast<std::size_t>(resolve_workers(workers)), 1, std::max<std::size_t>(n, 1)));
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mutex;
    std::size_t failed_index = n;
    std::exception_ptr failure;
    {
        std::vector<std::jthread> pool;
        pool.reserve(w);
        for (std::size_t t = 0; t < w; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        const std::lock_guard lock(mutex);
                        if (i < failed_index) {
                            failed_index = i;
                            failure = std::current_exception();
                        }
                    }
                }
            });
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace gvr
