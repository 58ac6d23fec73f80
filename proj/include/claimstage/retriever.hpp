// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "claimstage/embedder.hpp"
#include "claimstage/ranked_list.hpp"

namespace claimstage {

inline constexpr std::size_t kDefaultCandidateCount = 100;

/// Exact cosine index over a fact-check pool. Rows are L2-normalized at build time.
/// All-sparse pools are held as an inverted index, anything else as a dense row-major matrix.
class Index {
public:
    /// Throws ValidationError for an empty pool or ids missing from the store (all listed).
    static Index build(const EmbeddingStore& store, std::span<const FactCheckId> pool_ids);
    /// Same contract as build(), from explicit (id, vector) rows.
    static Index from_vectors(std::vector<std::pair<FactCheckId, Vector>> rows);

    std::size_t size() const noexcept { return ids_.size(); }
    std::uint32_t dim() const noexcept { return dim_; }
    bool is_sparse() const noexcept { return sparse_; }
    std::span<const FactCheckId> ids() const noexcept { return ids_; }

    /// Highest-cosine k entries, ties broken by ascending id. Throws ContractError when the
    /// query dimension differs or k is zero.
    RankedList top_k(const Vector& query, std::size_t k, PostId post_id = 0) const;

    /// One top_k per query. Work is split over `workers` threads; the result does not depend on
    /// the worker count. Errors name the offending post.
    Predictions batch(const std::map<PostId, Vector>& queries, std::size_t k, unsigned workers = 1) const;

private:
    void score_dense_block(std::span<const std::vector<float>> queries, std::size_t k,
                           std::span<RankedList> out) const;
    void score_sparse(const Vector& query, std::size_t k, RankedList& out) const;
    std::vector<float> prepare_dense_query(const Vector& query) const;

    std::uint32_t dim_ = 0;
    bool sparse_ = false;
    std::vector<FactCheckId> ids_;
    // dense: ids_.size() x dim_ row-major
    std::vector<float> matrix_;
    // sparse: CSR postings keyed by feature index
    std::vector<std::size_t> posting_offsets_;
    std::vector<std::uint32_t> posting_rows_;
    std::vector<float> posting_values_;
};

inline Index build_index(const EmbeddingStore& store, std::span<const FactCheckId> pool_ids) {
    return Index::build(store, pool_ids);
}

inline RankedList top_k(const Index& index, const Vector& query, std::size_t k, PostId post_id = 0) {
    return index.top_k(query, k, post_id);
}

inline Predictions batch_retrieve(const Index& index, const std::map<PostId, Vector>& queries, std::size_t k,
                                  unsigned workers = 1) {
    return index.batch(queries, k, workers);
}

}  // namespace claimstage
