// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace claimstage {

/// Fixed-dimension float vector, stored densely or as sorted (index, value) pairs.
/// Both forms compare equal when they describe the same components.
class Vector {
public:
    Vector() = default;

    /// Throws ContractError on empty input or non-finite components.
    static Vector dense(std::vector<float> values);
    /// Entries may be unsorted and repeat indices (values are summed). Zero entries are dropped.
    static Vector sparse(std::uint32_t dim, std::vector<std::pair<std::uint32_t, float>> entries);

    std::uint32_t dim() const noexcept { return dim_; }
    bool is_sparse() const noexcept { return sparse_; }
    /// Dense components, or the non-zero values of a sparse vector.
    std::span<const float> values() const noexcept { return values_; }
    /// Indices of the non-zero values; empty for dense vectors.
    std::span<const std::uint32_t> indices() const noexcept { return indices_; }

    double norm() const noexcept;
    bool is_zero() const noexcept;
    /// Unit-length copy. A zero vector stays zero; a vector already within 1e-6 of unit
    /// length is returned unchanged, so normalization is idempotent.
    Vector normalized() const;
    std::vector<float> to_dense() const;

    bool operator==(const Vector& other) const;

private:
    std::uint32_t dim_ = 0;
    bool sparse_ = false;
    std::vector<float> values_;
    std::vector<std::uint32_t> indices_;
};

/// Dot product in double precision. Throws ContractError on dimension mismatch.
double dot(const Vector& a, const Vector& b);
/// Cosine similarity; 0 when either side is the zero vector.
double cosine(const Vector& a, const Vector& b);

}  // namespace claimstage
