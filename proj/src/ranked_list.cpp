// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#include "claimstage/ranked_list.hpp"

#include <istream>
#include <ostream>
#include <unordered_set>

#include "claimstage/errors.hpp"
#include "json.hpp"

namespace claimstage {

std::string to_string(Stage stage) {
    switch (stage) {
        case Stage::retrieval: return "retrieval";
        case Stage::rerank: return "rerank";
        case Stage::fused: return "fused";
    }
    return "?";
}

Stage parse_stage(const std::string& text) {
    if (text == "retrieval") return Stage::retrieval;
    if (text == "rerank") return Stage::rerank;
    if (text == "fused") return Stage::fused;
    throw ValidationError("unknown stage tag '" + text + "'");
}

std::vector<FactCheckId> RankedList::ids() const {
    std::vector<FactCheckId> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.fact_check_id);
    return out;
}

void RankedList::validate() const {
    std::unordered_set<FactCheckId> seen;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!seen.insert(entries[i].fact_check_id).second) {
            throw ContractError("post " + std::to_string(post_id) + ": duplicate fact_check_id " +
                                std::to_string(entries[i].fact_check_id));
        }
        if (i > 0 && entries[i].score > entries[i - 1].score) {
            throw ContractError("post " + std::to_string(post_id) + ": scores increase at rank " +
                                std::to_string(i + 1));
        }
    }
}

void write_candidates_jsonl(std::ostream& out, const Predictions& lists) {
    for (const auto& [post, list] : lists) {
        nlohmann::json candidates = nlohmann::json::array();
        for (const auto& e : list.entries) candidates.push_back({e.fact_check_id, e.score});
        const nlohmann::json line = {{"post_id", post}, {"stage", to_string(list.stage)}, {"candidates", candidates}};
        out << line.dump() << '\n';
    }
}

Predictions read_candidates_jsonl(std::istream& in) {
    Predictions out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            RankedList list;
            list.post_id = j.at("post_id").get<PostId>();
            list.stage = parse_stage(j.value("stage", std::string("retrieval")));
            for (const auto& c : j.at("candidates")) {
                list.entries.push_back({c.at(0).get<FactCheckId>(), c.at(1).get<double>()});
            }
            list.validate();
            if (!out.emplace(list.post_id, std::move(list)).second) {
                throw ValidationError("post_id repeated");
            }
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("candidates line " + std::to_string(number) + ": " + e.what());
        } catch (const Error& e) {
            throw ValidationError("candidates line " + std::to_string(number) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace claimstage
