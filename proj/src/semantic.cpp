// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#include "gvr/semantic.hpp"

#include "gvr/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace gvr {

namespace {

double norm_of(std::span<const float> v) {
    double s = 0.0;
    for (const float x : v) {
        s += static_cast<double>(x) * x;
    }
    return std::sqrt(s);
}

} // namespace

SemanticVector::SemanticVector(std::vector<float> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw DomainError("semantic vector: empty");
    }
    const double n = norm_of(values_);
    if (!std::isfinite(n) || n == 0.0) {
        throw DomainError("semantic vector: zero or non-finite norm");
    }
    for (auto& x : values_) {
        x = static_cast<float>(x / n);
    }
}

SemanticVector SemanticVector::from_unit(std::vector<float> values) {
    const double n = norm_of(values);
    if (values.empty() || !std::isfinite(n) || std::abs(n - 1.0) > kUnitNormTolerance) {
        throw ValidationError(fmt::format("semantic vector: norm {} is not unit within {}", n, kUnitNormTolerance));
    }
    SemanticVector v;
    v.values_ = std::move(values);
    return v;
}

SemanticVector SemanticVector::basis(int dim, int index) {
    if (dim <= 0 || index < 0 || index >= dim) {
        throw DomainError(fmt::format("basis vector {} out of range for dim {}", index, dim));
    }
    std::vector<float> v(static_cast<std::size_t>(dim), 0.0f);
    v[static_cast<std::size_t>(index)] = 1.0f;
    return SemanticVector(std::move(v));
}

double cosine(const SemanticVector& a, const SemanticVector& b) {
    if (a.dim() != b.dim()) {
        throw DomainError(fmt::format("cosine: dimension mismatch {} vs {}", a.dim(), b.dim()));
    }
    double dot = 0.0;
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) {
        dot += static_cast<double>(av[i]) * bv[i];
    }
    return dot / (norm_of(av) * norm_of(bv));
}

} // namespace gvr
