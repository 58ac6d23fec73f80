// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "claimstage/corpus.hpp"
#include "claimstage/ranked_list.hpp"
#include "json.hpp"

namespace claimstage {

/// post_id -> ranked fact-check ids (best first).
using PredictionSet = std::map<PostId, std::vector<FactCheckId>>;

PredictionSet to_prediction_set(const Predictions& lists);
/// Throws ValidationError if any list repeats an id.
void validate_predictions(const PredictionSet& predictions);

/// Fraction of posts with at least one gold fact-check among their first k predictions.
/// Every predicted post must have gold pairs (LookupError names the first that does not);
/// an empty prediction set, k == 0 or duplicate ids throw ValidationError.
double success_at_k(const PredictionSet& predictions, const PairSet& gold, std::size_t k = 10);

/// S@1 .. S@k_max, for diagnostics.
std::vector<double> success_curve(const PredictionSet& predictions, const PairSet& gold, std::size_t k_max);

/// Round half away from zero to `decimals` places, tolerant of binary representation error
/// (93.645 rounds to 93.65).
double round_half_up(double value, int decimals = 2);
/// round_half_up then fixed formatting, e.g. "82.18".
std::string format_percent(double value);

/// Unweighted mean of the per-language percentages, full precision. Throws ValidationError
/// on an empty map.
double macro_average(const std::map<std::string, double>& per_language);

/// fused - best_individual in percentage points, rounded to two decimals.
double improvement(double fused, double best_individual);

/// Canonical column order for reports; unknown languages follow in lexical order.
const std::vector<std::string>& canonical_languages();

enum class Track { monolingual, crosslingual };

std::string to_string(Track track);
Track parse_track(const std::string& text);

struct ReportRow {
    std::string model;
    std::string plan;
    std::map<std::string, double> scores;  // language -> S@10 percent

    double average() const { return macro_average(scores); }
    bool operator==(const ReportRow&) const = default;
};

struct EvaluationReport {
    Track track = Track::monolingual;
    std::vector<ReportRow> rows;

    /// Languages present in any row, in canonical order.
    std::vector<std::string> languages() const;
    bool operator==(const EvaluationReport&) const = default;
};

/// Plain-text table: Model, Plan, Avg, then one column per language (monolingual only).
std::string render_table(const EvaluationReport& report);

nlohmann::json to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::json& j);

/// Submission file: {"<post_id>": [fact_check_id, ...], ...}.
nlohmann::json submission_json(const PredictionSet& predictions);
PredictionSet read_submission(std::istream& in);

}  // namespace claimstage
