// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#include "claimstage/retriever.hpp"

#include <algorithm>
#include <exception>
#include <numeric>
#include <sstream>
#include <thread>

#include "claimstage/errors.hpp"

namespace claimstage {

namespace {

// Fixed eight-lane accumulation so every (query, row) score is bit-identical no matter how
// the work is blocked or split across threads.
inline float dot_kernel(const float* a, const float* b, std::size_t n) noexcept {
    float acc[8] = {0.f, 0.f, 0.f, 0.f, 0.f, 0.f, 0.f, 0.f};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        for (std::size_t j = 0; j < 8; ++j) acc[j] += a[i + j] * b[i + j];
    }
    float tail = 0.f;
    for (; i < n; ++i) tail += a[i] * b[i];
    return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
}

// Bounded selection of the k best entries; heap front is the entry that ranks last.
class TopKCollector {
public:
    explicit TopKCollector(std::size_t k) : k_(k) { heap_.reserve(k); }

    void offer(FactCheckId id, double score) {
        const RankedEntry e{id, score};
        if (heap_.size() < k_) {
            heap_.push_back(e);
            std::push_heap(heap_.begin(), heap_.end(), ranks_before);
        } else if (ranks_before(e, heap_.front())) {
            std::pop_heap(heap_.begin(), heap_.end(), ranks_before);
            heap_.back() = e;
            std::push_heap(heap_.begin(), heap_.end(), ranks_before);
        }
    }

    std::vector<RankedEntry> take() {
        std::sort_heap(heap_.begin(), heap_.end(), ranks_before);
        return std::move(heap_);
    }

private:
    std::size_t k_;
    std::vector<RankedEntry> heap_;
};

constexpr std::size_t kQueryBlock = 16;

}  // namespace

Index Index::from_vectors(std::vector<std::pair<FactCheckId, Vector>> rows) {
    if (rows.empty()) throw ValidationError("cannot build an index over an empty pool");
    Index index;
    index.dim_ = rows.front().second.dim();
    index.sparse_ = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.second.is_sparse(); });
    index.ids_.reserve(rows.size());
    for (const auto& [id, v] : rows) {
        if (v.dim() != index.dim_) throw ContractError("pool vectors have differing dimensions");
        index.ids_.push_back(id);
    }
    {
        auto sorted = index.ids_;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw ValidationError("pool contains a duplicate fact_check_id");
        }
    }

    if (index.sparse_) {
        std::vector<std::size_t> counts(index.dim_ + 1, 0);
        std::vector<Vector> normalized;
        normalized.reserve(rows.size());
        for (const auto& [id, v] : rows) {
            normalized.push_back(v.normalized());
            for (const auto f : normalized.back().indices()) ++counts[f + 1];
        }
        std::partial_sum(counts.begin(), counts.end(), counts.begin());
        index.posting_offsets_ = counts;
        index.posting_rows_.resize(counts.back());
        index.posting_values_.resize(counts.back());
        auto cursor = counts;
        for (std::size_t r = 0; r < normalized.size(); ++r) {
            const auto idx = normalized[r].indices();
            const auto val = normalized[r].values();
            for (std::size_t i = 0; i < idx.size(); ++i) {
                const auto slot = cursor[idx[i]]++;
                index.posting_rows_[slot] = static_cast<std::uint32_t>(r);
                index.posting_values_[slot] = val[i];
            }
        }
    } else {
        index.matrix_.resize(rows.size() * static_cast<std::size_t>(index.dim_));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto dense = rows[r].second.normalized().to_dense();
            std::copy(dense.begin(), dense.end(), index.matrix_.begin() + static_cast<std::ptrdiff_t>(r * index.dim_));
        }
    }
    return index;
}

Index Index::build(const EmbeddingStore& store, std::span<const FactCheckId> pool_ids) {
    if (pool_ids.empty()) throw ValidationError("cannot build an index over an empty pool");
    std::vector<FactCheckId> missing;
    for (const auto id : pool_ids) {
        if (!store.contains(Namespace::fact_check, id)) missing.push_back(id);
    }
    if (!missing.empty()) {
        std::ostringstream os;
        os << missing.size() << " pool ids have no embedding:";
        for (std::size_t i = 0; i < missing.size() && i < 20; ++i) os << ' ' << missing[i];
        if (missing.size() > 20) os << " ...";
        throw ValidationError(os.str());
    }
    std::vector<std::pair<FactCheckId, Vector>> rows;
    rows.reserve(pool_ids.size());
    for (const auto id : pool_ids) rows.emplace_back(id, store.get(Namespace::fact_check, id));
    return from_vectors(std::move(rows));
}

std::vector<float> Index::prepare_dense_query(const Vector& query) const {
    return query.normalized().to_dense();
}

void Index::score_dense_block(std::span<const std::vector<float>> queries, std::size_t k,
                              std::span<RankedList> out) const {
    std::vector<TopKCollector> collectors(queries.size(), TopKCollector(k));
    const std::size_t n = ids_.size();
    for (std::size_t r = 0; r < n; ++r) {
        const float* row = matrix_.data() + r * dim_;
        for (std::size_t q = 0; q < queries.size(); ++q) {
            collectors[q].offer(ids_[r], dot_kernel(queries[q].data(), row, dim_));
        }
    }
    for (std::size_t q = 0; q < queries.size(); ++q) {
        out[q].entries = collectors[q].take();
        out[q].stage = Stage::retrieval;
    }
}

void Index::score_sparse(const Vector& query, std::size_t k, RankedList& out) const {
    const Vector q = query.normalized();
    std::vector<double> acc(ids_.size(), 0.0);
    const auto values = q.values();
    const auto dense_query = !q.is_sparse();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::uint32_t feature = dense_query ? static_cast<std::uint32_t>(i) : q.indices()[i];
        const double w = values[i];
        if (w == 0.0) continue;
        for (std::size_t p = posting_offsets_[feature]; p < posting_offsets_[feature + 1]; ++p) {
            acc[posting_rows_[p]] += w * posting_values_[p];
        }
    }
    TopKCollector collector(k);
    for (std::size_t r = 0; r < ids_.size(); ++r) collector.offer(ids_[r], acc[r]);
    out.entries = collector.take();
    out.stage = Stage::retrieval;
}

RankedList Index::top_k(const Vector& query, std::size_t k, PostId post_id) const {
    if (k == 0) throw ContractError("k must be at least 1");
    if (query.dim() != dim_) {
        throw ContractError("query dim " + std::to_string(query.dim()) + " differs from index dim " +
                            std::to_string(dim_));
    }
    RankedList out;
    out.post_id = post_id;
    if (sparse_) {
        score_sparse(query, k, out);
    } else {
        const std::vector<float> q = prepare_dense_query(query);
        score_dense_block(std::span<const std::vector<float>>(&q, 1), k, std::span<RankedList>(&out, 1));
    }
    return out;
}

Predictions Index::batch(const std::map<PostId, Vector>& queries, std::size_t k, unsigned workers) const {
    if (k == 0) throw ContractError("k must be at least 1");
    std::vector<PostId> order;
    std::vector<const Vector*> vectors;
    for (const auto& [post, v] : queries) {
        if (v.dim() != dim_) {
            throw ContractError("post " + std::to_string(post) + ": query dim " + std::to_string(v.dim()) +
                                " differs from index dim " + std::to_string(dim_));
        }
        order.push_back(post);
        vectors.push_back(&v);
    }
    std::vector<RankedList> results(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) results[i].post_id = order[i];

    const std::size_t blocks = (order.size() + kQueryBlock - 1) / kQueryBlock;
    auto run_block = [&](std::size_t b) {
        const std::size_t begin = b * kQueryBlock;
        const std::size_t end = std::min(order.size(), begin + kQueryBlock);
        if (sparse_) {
            for (std::size_t i = begin; i < end; ++i) score_sparse(*vectors[i], k, results[i]);
        } else {
            std::vector<std::vector<float>> dense;
            dense.reserve(end - begin);
            for (std::size_t i = begin; i < end; ++i) dense.push_back(prepare_dense_query(*vectors[i]));
            score_dense_block(dense, k, std::span<RankedList>(results).subspan(begin, end - begin));
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(blocks)));
    if (threads <= 1) {
        for (std::size_t b = 0; b < blocks; ++b) run_block(b);
    } else {
        std::vector<std::exception_ptr> errors(threads);
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t b = t; b < blocks; b += threads) run_block(b);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    Predictions out;
    for (auto& list : results) {
        const PostId post = list.post_id;
        out.emplace(post, std::move(list));
    }
    return out;
}

}  // namespace claimstage
