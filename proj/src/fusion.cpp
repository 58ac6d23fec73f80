// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#include "claimstage/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "claimstage/errors.hpp"

namespace claimstage {

std::vector<ModelWeight> compute_weights(const std::map<std::string, double>& dev_scores,
                                         const WeightOptions& options) {
    if (dev_scores.empty()) throw ValidationError("weighting needs at least one model");
    double total = 0.0;
    double best = 0.0;
    for (const auto& [model, s] : dev_scores) {
        if (!(s >= 0.0 && s <= 1.0)) {
            throw ValidationError("dev S@10 of " + model + " must lie in [0,1]");
        }
        total += s;
        best = std::max(best, s);
    }
    if (total == 0.0) throw ValidationError("all dev S@10 scores are zero; nothing to weight by");

    std::vector<ModelWeight> out;
    if (options.function == WeightFunction::proportional) {
        for (const auto& [model, s] : dev_scores) {
            if (s == 0.0) {
                throw ValidationError("model " + model + " has dev S@10 of 0 and would get zero weight");
            }
            out.push_back({model, s, s / total});
        }
    } else {
        if (!(options.temperature > 0.0)) throw ConfigError("softmax temperature must be positive");
        double z = 0.0;
        for (const auto& [model, s] : dev_scores) z += std::exp((s - best) / options.temperature);
        for (const auto& [model, s] : dev_scores) {
            out.push_back({model, s, std::exp((s - best) / options.temperature) / z});
        }
        for (const auto& w : out) {
            if (!(w.weight > 0.0)) throw ValidationError("softmax weight of " + w.model_name + " underflowed to 0");
        }
    }
    return out;
}

VoteScheme parse_vote_scheme(std::string_view text) {
    if (text == "borda") return VoteScheme::borda;
    if (text == "rrf" || text == "reciprocal_rank") return VoteScheme::reciprocal_rank;
    if (text == "approval") return VoteScheme::approval;
    throw ConfigError("unknown fusion scheme '" + std::string(text) + "' (borda, rrf, approval)");
}

WeightFunction parse_weight_function(std::string_view text) {
    if (text == "proportional") return WeightFunction::proportional;
    if (text == "softmax") return WeightFunction::softmax;
    throw ConfigError("unknown weight function '" + std::string(text) + "'");
}

double vote_points(double weight, std::size_t rank, const VoteOptions& options) {
    switch (options.scheme) {
        case VoteScheme::borda: return weight * static_cast<double>(kVoteWindow + 1 - rank);
        case VoteScheme::reciprocal_rank: return weight / (options.rrf_k + static_cast<double>(rank));
        case VoteScheme::approval: return weight;
    }
    return 0.0;
}

std::map<std::string, double> weight_map(const std::vector<ModelWeight>& weights) {
    std::map<std::string, double> out;
    for (const auto& w : weights) out[w.model_name] = w.weight;
    return out;
}

std::map<FactCheckId, VoteTally> tally_votes(const std::map<std::string, RankedList>& lists,
                                             const std::map<std::string, double>& weights,
                                             const VoteOptions& options) {
    struct Contributions {
        std::vector<double> points;
        std::vector<double> scores;
    };
    std::map<FactCheckId, Contributions> collected;
    bool first = true;
    PostId post = 0;
    for (const auto& [model, list] : lists) {
        const auto w = weights.find(model);
        if (w == weights.end()) throw LookupError("model '" + model + "' has no fusion weight");
        if (!(w->second > 0.0)) throw ContractError("model '" + model + "' has a non-positive weight");
        if (list.entries.size() > kVoteWindow) {
            throw ContractError("model '" + model + "' supplied " + std::to_string(list.entries.size()) +
                                " candidates; at most " + std::to_string(kVoteWindow) + " may vote");
        }
        if (first) {
            post = list.post_id;
            first = false;
        } else if (list.post_id != post) {
            throw ContractError("fusion inputs belong to different posts");
        }
        list.validate();
        for (std::size_t r = 0; r < list.entries.size(); ++r) {
            auto& c = collected[list.entries[r].fact_check_id];
            c.points.push_back(vote_points(w->second, r + 1, options));
            c.scores.push_back(list.entries[r].score);
        }
    }
    // Sum contributions in sorted order so the total does not depend on model order.
    std::map<FactCheckId, VoteTally> out;
    for (auto& [id, c] : collected) {
        std::sort(c.points.begin(), c.points.end());
        std::sort(c.scores.begin(), c.scores.end());
        VoteTally t;
        for (const double p : c.points) t.points += p;
        for (const double s : c.scores) t.score_sum += s;
        t.supporters = c.points.size();
        out.emplace(id, t);
    }
    return out;
}

RankedList weighted_vote(const std::map<std::string, RankedList>& lists, const std::map<std::string, double>& weights,
                         const VoteOptions& options) {
    if (lists.empty()) throw ContractError("weighted_vote needs at least one list");
    const auto tally = tally_votes(lists, weights, options);
    struct Row {
        FactCheckId id;
        VoteTally t;
    };
    std::vector<Row> rows;
    rows.reserve(tally.size());
    for (const auto& [id, t] : tally) rows.push_back({id, t});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.t.points != b.t.points) return a.t.points > b.t.points;
        if (a.t.supporters != b.t.supporters) return a.t.supporters > b.t.supporters;
        return a.id < b.id;
    });
    RankedList out;
    out.post_id = lists.begin()->second.post_id;
    out.stage = Stage::fused;
    for (std::size_t i = 0; i < rows.size() && i < kVoteWindow; ++i) {
        out.entries.push_back({rows[i].id, rows[i].t.points});
    }
    return out;
}

Predictions fuse_run(const std::map<std::string, Predictions>& per_model, const std::map<std::string, double>& weights,
                     const VoteOptions& options) {
    if (per_model.empty()) throw ValidationError("fusion needs at least one model");
    std::set<PostId> all_posts;
    for (const auto& [model, preds] : per_model) {
        for (const auto& [post, list] : preds) all_posts.insert(post);
    }
    std::ostringstream missing;
    bool any_missing = false;
    for (const auto& [model, preds] : per_model) {
        std::vector<PostId> lacking;
        for (const PostId p : all_posts) {
            if (!preds.count(p)) lacking.push_back(p);
        }
        if (!lacking.empty()) {
            any_missing = true;
            missing << " " << model << " lacks " << lacking.size() << " posts (";
            for (std::size_t i = 0; i < lacking.size() && i < 10; ++i) missing << (i ? ", " : "") << lacking[i];
            missing << (lacking.size() > 10 ? ", ...);" : ");");
        }
    }
    if (any_missing) throw ValidationError("post coverage differs between models:" + missing.str());

    Predictions out;
    for (const PostId post : all_posts) {
        std::map<std::string, RankedList> lists;
        for (const auto& [model, preds] : per_model) lists.emplace(model, preds.at(post));
        out.emplace(post, weighted_vote(lists, weights, options));
    }
    return out;
}

}  // namespace claimstage
