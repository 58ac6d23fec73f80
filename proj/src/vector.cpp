// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#include "claimstage/vector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "claimstage/errors.hpp"

namespace claimstage {

Vector Vector::dense(std::vector<float> values) {
    if (values.empty()) throw ContractError("vector dimension must be positive");
    for (const float v : values) {
        if (!std::isfinite(v)) throw ContractError("vector has a non-finite component");
    }
    Vector out;
    out.dim_ = static_cast<std::uint32_t>(values.size());
    out.values_ = std::move(values);
    return out;
}

Vector Vector::sparse(std::uint32_t dim, std::vector<std::pair<std::uint32_t, float>> entries) {
    if (dim == 0) throw ContractError("vector dimension must be positive");
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    Vector out;
    out.dim_ = dim;
    out.sparse_ = true;
    for (std::size_t i = 0; i < entries.size();) {
        const std::uint32_t index = entries[i].first;
        if (index >= dim) throw ContractError("sparse index " + std::to_string(index) + " out of range");
        float sum = 0.0f;
        for (; i < entries.size() && entries[i].first == index; ++i) sum += entries[i].second;
        if (!std::isfinite(sum)) throw ContractError("vector has a non-finite component");
        if (sum != 0.0f) {
            out.indices_.push_back(index);
            out.values_.push_back(sum);
        }
    }
    return out;
}

double Vector::norm() const noexcept {
    double sum = 0.0;
    for (const float v : values_) sum += static_cast<double>(v) * v;
    return std::sqrt(sum);
}

bool Vector::is_zero() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](float v) { return v == 0.0f; });
}

Vector Vector::normalized() const {
    const double n = norm();
    if (n == 0.0 || std::abs(n - 1.0) <= 1e-6) return *this;
    Vector out = *this;
    for (float& v : out.values_) v = static_cast<float>(v / n);
    return out;
}

std::vector<float> Vector::to_dense() const {
    if (!sparse_) return values_;
    std::vector<float> out(dim_, 0.0f);
    for (std::size_t i = 0; i < indices_.size(); ++i) out[indices_[i]] = values_[i];
    return out;
}

bool Vector::operator==(const Vector& other) const {
    if (dim_ != other.dim_) return false;
    if (sparse_ == other.sparse_) return values_ == other.values_ && indices_ == other.indices_;
    return to_dense() == other.to_dense();
}

double dot(const Vector& a, const Vector& b) {
    if (a.dim() != b.dim()) {
        throw ContractError("dimension mismatch: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    }
    double sum = 0.0;
    if (a.is_sparse() && b.is_sparse()) {
        const auto ai = a.indices(), bi = b.indices();
        const auto av = a.values(), bv = b.values();
        std::size_t i = 0, j = 0;
        while (i < ai.size() && j < bi.size()) {
            if (ai[i] < bi[j]) ++i;
            else if (bi[j] < ai[i]) ++j;
            else sum += static_cast<double>(av[i++]) * bv[j++];
        }
        return sum;
    }
    if (a.is_sparse() || b.is_sparse()) {
        const Vector& s = a.is_sparse() ? a : b;
        const Vector& d = a.is_sparse() ? b : a;
        const auto dv = d.values();
        for (std::size_t i = 0; i < s.indices().size(); ++i) {
            sum += static_cast<double>(s.values()[i]) * dv[s.indices()[i]];
        }
        return sum;
    }
    const auto av = a.values(), bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) sum += static_cast<double>(av[i]) * bv[i];
    return sum;
}

double cosine(const Vector& a, const Vector& b) {
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) {
        if (a.dim() != b.dim()) throw ContractError("dimension mismatch");
        return 0.0;
    }
    return dot(a, b) / (na * nb);
}

}  // namespace claimstage
