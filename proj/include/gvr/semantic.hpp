// Copyright 2026 The GVR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

namespace gvr {

inline constexpr int kDefaultEmbeddingDim = 512;
inline constexpr double kUnitNormTolerance = 1e-5;

/// Unit-norm embedding vector (float32 storage).
class SemanticVector {
public:
    SemanticVector() = default;

    /// Normalizes `values`. Throws DomainError on empty, zero or non-finite input.
    explicit SemanticVector(std::vector<float> values);

    /// Wraps values that are already unit length (within kUnitNormTolerance)
    /// without touching their bits. Throws ValidationError otherwise.
    static SemanticVector from_unit(std::vector<float> values);

    /// e_index in R^dim.
    static SemanticVector basis(int dim, int index);

    int dim() const noexcept { return static_cast<int>(values_.size()); }
    std::span<const float> values() const noexcept { return values_; }

    friend bool operator==(const SemanticVector&, const SemanticVector&) = default;

private:
    std::vector<float> values_;
};

/// Cosine similarity computed in double. Throws DomainError on dim mismatch.
double cosine(const SemanticVector& a, const SemanticVector& b);

} // namespace gvr
