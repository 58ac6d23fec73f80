// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

namespace claimstage {

using PostId = std::uint64_t;
using FactCheckId = std::uint64_t;

/// Text in its source language, an optional machine translation and the detected languages.
struct LangTuple {
    std::string original;
    std::optional<std::string> translation;
    std::vector<std::pair<std::string, double>> languages;

    bool operator==(const LangTuple&) const = default;
};

struct Post {
    PostId post_id = 0;
    std::vector<LangTuple> ocr;
    std::optional<LangTuple> text;
    std::vector<std::string> verdicts;
    std::string instances;  // kept verbatim, never composed

    bool operator==(const Post&) const = default;
};

struct FactCheck {
    FactCheckId fact_check_id = 0;
    LangTuple claim;
    std::optional<LangTuple> title;
    std::string instances;

    bool operator==(const FactCheck&) const = default;
};

/// One rejected CSV row. `row` is the 1-based data row (the header is row 0).
struct RecordError {
    std::size_t row = 0;
    std::string column;
    std::string raw;
    std::string message;
};

template <typename Record>
struct ParseResult {
    std::vector<Record> records;
    std::vector<RecordError> errors;
    /// Ids of records that parsed but carry no usable text (posts without ocr and text).
    std::vector<std::uint64_t> flagged;
    std::size_t data_rows = 0;
};

// ---------------------------------------------------------------------------
// Field-level grammar shared by the CSV columns.

/// Absent-value rule: empty, "nan" and "NaN" mean missing.
bool is_missing(std::string_view field);

/// Parses `(QStr, QStr[, LangList])`. Returns nullopt for missing fields.
/// Throws ValidationError on a malformed literal.
std::optional<LangTuple> parse_lang_tuple(std::string_view field);
/// Parses `[Tuple, ...]`; missing → empty list.
std::vector<LangTuple> parse_lang_tuple_list(std::string_view field);
/// Parses `[QStr, ...]`; missing → empty list.
std::vector<std::string> parse_string_list(std::string_view field);
/// Decimal non-negative integer without sign or leading zeros.
std::optional<std::uint64_t> parse_record_id(std::string_view field);

// ---------------------------------------------------------------------------
// CSV ingestion. Duplicate ids throw ValidationError (fatal for the corpus);
// every other problem becomes a RecordError and the row is skipped.

ParseResult<FactCheck> parse_fact_checks(std::istream& csv);
ParseResult<Post> parse_posts(std::istream& csv);

class PairSet {
public:
    PairSet() = default;
    explicit PairSet(std::set<std::pair<PostId, FactCheckId>> pairs);

    void insert(PostId post, FactCheckId fact_check);
    std::size_t size() const noexcept { return pairs_.size(); }
    bool empty() const noexcept { return pairs_.empty(); }
    bool contains(PostId post, FactCheckId fact_check) const;
    bool has_post(PostId post) const { return by_post_.count(post) != 0; }
    /// Gold fact-checks for `post`; empty set when the post has none.
    const std::set<FactCheckId>& gold(PostId post) const;
    const std::set<std::pair<PostId, FactCheckId>>& pairs() const noexcept { return pairs_; }

private:
    std::set<std::pair<PostId, FactCheckId>> pairs_;
    std::map<PostId, std::set<FactCheckId>> by_post_;
};

struct PairParseResult {
    PairSet pairs;
    std::vector<RecordError> errors;
    std::size_t data_rows = 0;
};

PairParseResult parse_pairs(std::istream& csv);

// ---------------------------------------------------------------------------
// Task splits.

inline constexpr std::string_view kCrosslingual = "crosslingual";

struct TaskEntry {
    std::vector<PostId> posts_train;
    std::vector<PostId> posts_dev;
    std::vector<FactCheckId> fact_checks;
};

struct TaskSplit {
    std::map<std::string, TaskEntry> monolingual;
    std::optional<TaskEntry> crosslingual;

    std::vector<std::string> languages() const;
};

/// Accepts either a flat object `{"eng": {...}, "crosslingual": {...}}` or the nested
/// `{"monolingual": {"eng": {...}}, "crosslingual": {...}}` form. Id lists are de-duplicated
/// (first occurrence kept); train/dev overlap throws ValidationError; any other shape throws
/// ConfigError.
TaskSplit parse_tasks(std::istream& json);

// ---------------------------------------------------------------------------

class Corpus {
public:
    Corpus() = default;
    /// Throws ValidationError on duplicate ids.
    Corpus(std::vector<Post> posts, std::vector<FactCheck> fact_checks);

    const std::vector<Post>& posts() const noexcept { return posts_; }
    const std::vector<FactCheck>& fact_checks() const noexcept { return fact_checks_; }

    const Post* find_post(PostId id) const;
    const FactCheck* find_fact_check(FactCheckId id) const;
    /// Throws LookupError.
    const Post& post(PostId id) const;
    const FactCheck& fact_check(FactCheckId id) const;

private:
    std::vector<Post> posts_;
    std::vector<FactCheck> fact_checks_;
    std::unordered_map<PostId, std::size_t> post_index_;
    std::unordered_map<FactCheckId, std::size_t> fact_check_index_;
};

/// Throws ValidationError listing the first unresolved ids.
void validate_split(const TaskSplit& split, const Corpus& corpus);
/// Throws ValidationError when a pair references an unknown post or fact-check.
void validate_pairs(const PairSet& pairs, const Corpus& corpus);

enum class SplitSide { train, dev };

struct LanguageView {
    std::string language;
    std::vector<const Post*> posts;
    std::vector<const FactCheck*> pool;
};

/// Resolves one task entry against the corpus. `language` may be "crosslingual"; an empty
/// crosslingual fact-check list means the whole corpus pool. Throws LookupError.
LanguageView language_view(const Corpus& corpus, const TaskSplit& split,
                           const std::string& language, SplitSide side = SplitSide::dev);

// ---------------------------------------------------------------------------
// Composition.

enum class CompositionPlan { O, T, OT, OTV };

std::string to_string(CompositionPlan plan);
/// Accepts "O", "T", "OT", "O,T", "OTV", "O,T,V". Throws ConfigError.
CompositionPlan parse_plan(std::string_view text);

struct ComposeOptions {
    /// When false, a missing translation falls back to the original text.
    bool strict_plan = false;
};

std::string compose_post_text(const Post& post, CompositionPlan plan, ComposeOptions options = {});
/// OTV is treated as OT: fact-checks carry no verdicts.
std::string compose_fact_check_text(const FactCheck& fact_check, CompositionPlan plan,
                                    ComposeOptions options = {});

// ---------------------------------------------------------------------------
// Writers for the task CSV formats (inverse of the parsers above).

std::string format_lang_tuple(const LangTuple& tuple);
std::string format_lang_tuple_list(const std::vector<LangTuple>& tuples);
std::string format_string_list(const std::vector<std::string>& items);

void write_fact_checks_csv(std::ostream& out, const std::vector<FactCheck>& fact_checks);
void write_posts_csv(std::ostream& out, const std::vector<Post>& posts);
void write_pairs_csv(std::ostream& out, const PairSet& pairs);
nlohmann::json to_json(const TaskSplit& split);

// ---------------------------------------------------------------------------
// Normalized JSON Lines form.

nlohmann::json to_json(const LangTuple& tuple);
nlohmann::json to_json(const Post& post);
nlohmann::json to_json(const FactCheck& fact_check);
LangTuple lang_tuple_from_json(const nlohmann::json& j);
Post post_from_json(const nlohmann::json& j);
FactCheck fact_check_from_json(const nlohmann::json& j);

void write_jsonl(std::ostream& out, const std::vector<Post>& posts);
void write_jsonl(std::ostream& out, const std::vector<FactCheck>& fact_checks);
std::vector<Post> read_posts_jsonl(std::istream& in);
std::vector<FactCheck> read_fact_checks_jsonl(std::istream& in);

}  // namespace claimstage
