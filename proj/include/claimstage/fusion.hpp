// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "claimstage/ranked_list.hpp"

namespace claimstage {

/// Size of the voting window; lists longer than this are rejected.
inline constexpr std::size_t kVoteWindow = 10;

struct ModelWeight {
    std::string model_name;
    double dev_s_at_10 = 0.0;
    double weight = 0.0;
};

enum class WeightFunction { proportional, softmax };

struct WeightOptions {
    WeightFunction function = WeightFunction::proportional;
    double temperature = 0.05;  // softmax only
};

/// Turns dev-set S@10 (fractions in [0,1]) into positive weights that sum to 1 and never
/// decrease with the score. Proportional weights are s / sum(s). A model at 0 would receive no
/// weight, so proportional weighting rejects it; an empty map or all-zero scores are rejected
/// for every function. Output is sorted by model name.
std::vector<ModelWeight> compute_weights(const std::map<std::string, double>& dev_scores,
                                         const WeightOptions& options = {});

enum class VoteScheme { borda, reciprocal_rank, approval };

VoteScheme parse_vote_scheme(std::string_view text);
WeightFunction parse_weight_function(std::string_view text);

struct VoteOptions {
    VoteScheme scheme = VoteScheme::borda;
    double rrf_k = 60.0;
};

struct VoteTally {
    double points = 0.0;
    std::size_t supporters = 0;
    double score_sum = 0.0;
};

/// Points a model of weight `weight` grants to the candidate at 1-based `rank`.
/// Borda: weight * (11 - rank); reciprocal rank: weight / (rrf_k + rank); approval: weight.
double vote_points(double weight, std::size_t rank, const VoteOptions& options = {});

/// Fuses several models' lists for one post. Candidates are ordered by points, then supporter
/// count, then ascending id, and truncated to the window. Throws ContractError for a list longer
/// than the window or lists of different posts, LookupError for a model without weight.
RankedList weighted_vote(const std::map<std::string, RankedList>& lists, const std::map<std::string, double>& weights,
                         const VoteOptions& options = {});

/// Per-post tallies, exposed for diagnostics.
std::map<FactCheckId, VoteTally> tally_votes(const std::map<std::string, RankedList>& lists,
                                             const std::map<std::string, double>& weights,
                                             const VoteOptions& options = {});

std::map<std::string, double> weight_map(const std::vector<ModelWeight>& weights);

/// weighted_vote for every post. All models must cover the same posts; otherwise a
/// ValidationError lists the missing posts per model.
Predictions fuse_run(const std::map<std::string, Predictions>& per_model, const std::map<std::string, double>& weights,
                     const VoteOptions& options = {});

}  // namespace claimstage
