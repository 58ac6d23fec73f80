// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "claimstage/corpus.hpp"

namespace claimstage {

enum class Stage { retrieval, rerank, fused };

std::string to_string(Stage stage);
Stage parse_stage(const std::string& text);

struct RankedEntry {
    FactCheckId fact_check_id = 0;
    double score = 0.0;

    bool operator==(const RankedEntry&) const = default;
};

/// Candidates for one post, best first. Scores never increase and ids are unique.
struct RankedList {
    PostId post_id = 0;
    std::vector<RankedEntry> entries;
    Stage stage = Stage::retrieval;

    std::vector<FactCheckId> ids() const;
    /// Throws ContractError if the ordering or uniqueness invariant is broken.
    void validate() const;

    bool operator==(const RankedList&) const = default;
};

/// Ranking order shared by every stage: higher score first, then lower id.
inline bool ranks_before(const RankedEntry& a, const RankedEntry& b) noexcept {
    return a.score > b.score || (a.score == b.score && a.fact_check_id < b.fact_check_id);
}

using Predictions = std::map<PostId, RankedList>;

/// One JSON object per line: {"post_id": int, "stage": str, "candidates": [[id, score], ...]}.
void write_candidates_jsonl(std::ostream& out, const Predictions& lists);
Predictions read_candidates_jsonl(std::istream& in);

}  // namespace claimstage
