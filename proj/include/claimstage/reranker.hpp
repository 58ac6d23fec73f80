// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "claimstage/corpus.hpp"
#include "claimstage/ranked_list.hpp"

namespace claimstage {

inline constexpr std::size_t kDefaultTopN = 10;

/// Pair scorer used by rerank(). Returns nullopt when it has no score for the pair.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual std::optional<double> score(PostId post, FactCheckId fact_check) const = 0;
    virtual std::string model_name() const = 0;
};

/// Scores imported from an external model (one row per scored pair).
class ScoreTable final : public Scorer {
public:
    ScoreTable() = default;
    explicit ScoreTable(std::string model_name) : model_name_(std::move(model_name)) {}

    /// Returns true when the key was new; later values replace earlier ones.
    bool set(PostId post, FactCheckId fact_check, double score);
    std::optional<double> score(PostId post, FactCheckId fact_check) const override;
    std::string model_name() const override { return model_name_; }
    std::size_t size() const noexcept { return scores_.size(); }

private:
    std::string model_name_;
    std::map<std::pair<PostId, FactCheckId>, double> scores_;
};

struct ScoreLoad {
    ScoreTable table;
    std::size_t duplicates = 0;  // rows that replaced an earlier row for the same pair
    std::vector<RecordError> errors;
    std::size_t data_rows = 0;
};

/// TSV with header `post_id<TAB>fact_check_id<TAB>score`. Non-finite or unparsable scores
/// become record errors; duplicate pairs keep the last row.
ScoreLoad load_scores(std::istream& tsv, const std::string& model_name);

/// Jaccard similarity of the character 3-gram sets of the folded strings; 0 when both are empty.
double lexical_overlap_score(std::string_view query_text, std::string_view doc_text);

/// Deterministic stand-in for a cross-encoder: lexical overlap of composed texts.
class LexicalScorer final : public Scorer {
public:
    LexicalScorer(std::map<PostId, std::string> post_texts, std::map<FactCheckId, std::string> doc_texts,
                  std::string model_name = "lexical");

    std::optional<double> score(PostId post, FactCheckId fact_check) const override;
    std::string model_name() const override { return model_name_; }

private:
    std::map<PostId, std::vector<std::string>> post_grams_;
    std::map<FactCheckId, std::vector<std::string>> doc_grams_;
    std::string model_name_;
};

enum class MissingScorePolicy { fail, fallback };

MissingScorePolicy parse_missing_policy(std::string_view text);

struct RerankOptions {
    std::size_t top_n = kDefaultTopN;
    MissingScorePolicy missing = MissingScorePolicy::fail;
};

struct RerankStats {
    std::size_t fallbacks = 0;
};

/// Re-scores `candidates` with `scorer`, sorts by score (ties: ascending id) and keeps top_n.
/// A pair without a score throws LookupError under `fail`, or keeps its retrieval score under
/// `fallback` (counted in `stats`).
RankedList rerank(const RankedList& candidates, const Scorer& scorer, const RerankOptions& options = {},
                  RerankStats* stats = nullptr);

Predictions rerank_all(const Predictions& candidates, const Scorer& scorer, const RerankOptions& options = {},
                       RerankStats* stats = nullptr);

}  // namespace claimstage
