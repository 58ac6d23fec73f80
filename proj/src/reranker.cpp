// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#include "claimstage/reranker.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>

#include "claimstage/errors.hpp"
#include "claimstage/text.hpp"
#include "csv.hpp"

namespace claimstage {

bool ScoreTable::set(PostId post, FactCheckId fact_check, double score) {
    const auto [it, inserted] = scores_.insert_or_assign({post, fact_check}, score);
    return inserted;
}

std::optional<double> ScoreTable::score(PostId post, FactCheckId fact_check) const {
    const auto it = scores_.find({post, fact_check});
    if (it == scores_.end()) return std::nullopt;
    return it->second;
}

ScoreLoad load_scores(std::istream& tsv, const std::string& model_name) {
    detail::CsvReader reader(tsv, '\t');
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw ValidationError("score file is empty (header expected)");
    const std::vector<std::string> expected = {"post_id", "fact_check_id", "score"};
    if (fields != expected) throw ValidationError("score file header must be post_id, fact_check_id, score");

    ScoreLoad load;
    load.table = ScoreTable(model_name);
    while (reader.next(fields)) {
        const std::size_t row = ++load.data_rows;
        if (fields.size() != 3) {
            load.errors.push_back({row, "", "", "expected 3 fields"});
            continue;
        }
        const auto post = parse_record_id(fields[0]);
        const auto fc = parse_record_id(fields[1]);
        if (!post) {
            load.errors.push_back({row, "post_id", fields[0], "not an integer id"});
            continue;
        }
        if (!fc) {
            load.errors.push_back({row, "fact_check_id", fields[1], "not an integer id"});
            continue;
        }
        double value = 0.0;
        const auto& raw = fields[2];
        const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
        if (ec != std::errc() || ptr != raw.data() + raw.size() || !std::isfinite(value)) {
            load.errors.push_back({row, "score", raw, "score must be a finite number"});
            continue;
        }
        if (!load.table.set(*post, *fc, value)) ++load.duplicates;
    }
    return load;
}

namespace {

std::vector<std::string> trigram_set(std::string_view text) {
    auto grams = char_ngrams(fold_text(text), 3, 3);
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    return grams;
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t shared = 0;
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) ++i;
        else if (*j < *i) ++j;
        else {
            ++shared;
            ++i;
            ++j;
        }
    }
    return static_cast<double>(shared) / static_cast<double>(a.size() + b.size() - shared);
}

}  // namespace

double lexical_overlap_score(std::string_view query_text, std::string_view doc_text) {
    return jaccard(trigram_set(query_text), trigram_set(doc_text));
}

LexicalScorer::LexicalScorer(std::map<PostId, std::string> post_texts, std::map<FactCheckId, std::string> doc_texts,
                             std::string model_name)
    : model_name_(std::move(model_name)) {
    for (const auto& [id, text] : post_texts) post_grams_.emplace(id, trigram_set(text));
    for (const auto& [id, text] : doc_texts) doc_grams_.emplace(id, trigram_set(text));
}

std::optional<double> LexicalScorer::score(PostId post, FactCheckId fact_check) const {
    const auto p = post_grams_.find(post);
    const auto d = doc_grams_.find(fact_check);
    if (p == post_grams_.end() || d == doc_grams_.end()) return std::nullopt;
    return jaccard(p->second, d->second);
}

MissingScorePolicy parse_missing_policy(std::string_view text) {
    if (text == "fail") return MissingScorePolicy::fail;
    if (text == "fallback") return MissingScorePolicy::fallback;
    throw ConfigError("missing-score policy must be 'fail' or 'fallback'");
}

RankedList rerank(const RankedList& candidates, const Scorer& scorer, const RerankOptions& options,
                  RerankStats* stats) {
    if (options.top_n == 0) throw ContractError("top_n must be at least 1");
    RankedList out;
    out.post_id = candidates.post_id;
    out.stage = Stage::rerank;
    out.entries.reserve(candidates.entries.size());
    for (const auto& e : candidates.entries) {
        auto s = scorer.score(candidates.post_id, e.fact_check_id);
        if (!s) {
            if (options.missing == MissingScorePolicy::fail) {
                throw LookupError(scorer.model_name() + ": no score for (post " + std::to_string(candidates.post_id) +
                                  ", fact_check " + std::to_string(e.fact_check_id) + ")");
            }
            if (stats) ++stats->fallbacks;
            s = e.score;
        }
        out.entries.push_back({e.fact_check_id, *s});
    }
    const auto keep = std::min(options.top_n, out.entries.size());
    std::partial_sort(out.entries.begin(), out.entries.begin() + static_cast<std::ptrdiff_t>(keep), out.entries.end(),
                      ranks_before);
    out.entries.resize(keep);
    return out;
}

Predictions rerank_all(const Predictions& candidates, const Scorer& scorer, const RerankOptions& options,
                       RerankStats* stats) {
    Predictions out;
    for (const auto& [post, list] : candidates) out.emplace(post, rerank(list, scorer, options, stats));
    return out;
}

}  // namespace claimstage
