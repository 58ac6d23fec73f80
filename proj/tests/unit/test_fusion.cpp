// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "claimstage/errors.hpp"
#include "claimstage/fusion.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace claimstage;

namespace {

RankedList list_of(PostId post, const std::vector<FactCheckId>& ids) {
    RankedList l;
    l.post_id = post;
    l.stage = Stage::rerank;
    double s = static_cast<double>(ids.size());
    for (const auto id : ids) l.entries.push_back({id, s--});
    return l;
}

std::vector<FactCheckId> random_ids(std::mt19937_64& rng, std::size_t n, FactCheckId pool) {
    std::vector<FactCheckId> all(pool);
    for (FactCheckId i = 0; i < pool; ++i) all[i] = 1000 + i;
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(n);
    return all;
}

struct Case {
    std::map<std::string, RankedList> lists;
    std::map<std::string, double> weights;
};

// Small pools keep overlaps, and therefore ties, frequent. Integer weights keep rescaling exact.
Case random_case(std::mt19937_64& rng) {
    Case c;
    const std::size_t models = 1 + rng() % 5;
    const FactCheckId pool = 10 + rng() % 15;
    for (std::size_t m = 0; m < models; ++m) {
        const std::string name = "m" + std::to_string(m);
        c.lists[name] = list_of(7, random_ids(rng, 1 + rng() % 10, pool));
        c.weights[name] = static_cast<double>(1 + rng() % 5);
    }
    return c;
}

std::map<std::string, double> weights_of(const std::vector<ModelWeight>& w) { return weight_map(w); }

}  // namespace

TEST_CASE("compute_weights: proportional") {
    auto single = compute_weights({{"only", 0.93}});
    REQUIRE(single.size() == 1);
    CHECK(single[0].weight == 1.0);
    CHECK(single[0].dev_s_at_10 == 0.93);

    const auto even = weights_of(compute_weights({{"a", 0.9}, {"b", 0.9}}));
    CHECK(even.at("a") == 0.5);
    CHECK(even.at("b") == 0.5);

    // Three strongest rerankers on the dev set; the sum of their scores is 2.7904.
    const auto three = weights_of(compute_weights({{"r1", 0.9257}, {"r2", 0.9373}, {"r3", 0.9274}}));
    CHECK(three.at("r1") == doctest::Approx(0.331744552752).epsilon(1e-10));
    CHECK(three.at("r2") == doctest::Approx(0.335901662844).epsilon(1e-10));
    CHECK(three.at("r3") == doctest::Approx(0.332353784404).epsilon(1e-10));
    double total = 0;
    for (const auto& [m, w] : three) total += w;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(compute_weights({}), ValidationError);
    CHECK_THROWS_AS(compute_weights({{"a", 0.0}, {"b", 0.0}}), ValidationError);
    CHECK_THROWS_AS(compute_weights({{"a", 0.0}, {"b", 0.5}}), ValidationError);
    CHECK_THROWS_AS(compute_weights({{"a", 1.5}}), ValidationError);
}

TEST_CASE("compute_weights: softmax") {
    WeightOptions soft{WeightFunction::softmax, 0.05};
    const auto w = weights_of(compute_weights({{"r1", 0.9257}, {"r2", 0.9373}, {"r3", 0.9274}}, soft));
    CHECK(w.at("r1") == doctest::Approx(0.303425276719).epsilon(1e-9));
    CHECK(w.at("r2") == doctest::Approx(0.382655602695).epsilon(1e-9));
    CHECK(w.at("r3") == doctest::Approx(0.313919120586).epsilon(1e-9));
    // A zero score is allowed here since it still gets a positive weight.
    const auto z = weights_of(compute_weights({{"a", 0.0}, {"b", 0.1}}, soft));
    CHECK(z.at("a") > 0.0);
    CHECK(z.at("a") < z.at("b"));
    CHECK_THROWS_AS(compute_weights({{"a", 0.5}}, {WeightFunction::softmax, 0.0}), ConfigError);
    CHECK(parse_weight_function("softmax") == WeightFunction::softmax);
    CHECK_THROWS_AS(parse_weight_function("linear"), ConfigError);
}

TEST_CASE("property: weights are monotone in score") {
    std::mt19937_64 rng(2);
    for (const auto fn : {WeightFunction::proportional, WeightFunction::softmax}) {
        for (int round = 0; round < 200; ++round) {
            std::map<std::string, double> scores;
            const int n = 1 + static_cast<int>(rng() % 6);
            for (int i = 0; i < n; ++i) scores["m" + std::to_string(i)] = 0.01 + 0.99 * (rng() % 1000) / 999.0;
            const auto w = compute_weights(scores, {fn, 0.1});
            double total = 0;
            for (const auto& a : w) {
                total += a.weight;
                CHECK(a.weight > 0.0);
                for (const auto& b : w) {
                    if (a.dev_s_at_10 < b.dev_s_at_10) CHECK(a.weight <= b.weight);
                }
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("vote_points per scheme") {
    CHECK(vote_points(0.5, 1) == 5.0);
    CHECK(vote_points(1.0, 10) == 1.0);
    CHECK(vote_points(2.0, 3, {VoteScheme::reciprocal_rank, 60.0}) == doctest::Approx(2.0 / 63.0));
    CHECK(vote_points(0.3, 7, {VoteScheme::approval}) == 0.3);
    CHECK(parse_vote_scheme("rrf") == VoteScheme::reciprocal_rank);
    CHECK(parse_vote_scheme("approval") == VoteScheme::approval);
    CHECK_THROWS_AS(parse_vote_scheme("condorcet"), ConfigError);
}

TEST_CASE("weighted_vote: hand example") {
    const FactCheckId x = 1, y = 2, z = 3;
    const auto fused = weighted_vote({{"A", list_of(1, {x, y, z})}, {"B", list_of(1, {y, z, x})}}, {{"A", 1.0}, {"B", 1.0}});
    CHECK(fused.ids() == std::vector<FactCheckId>{y, x, z});
    CHECK(fused.stage == Stage::fused);
    CHECK(fused.entries[0].score == 19.0);
    CHECK(fused.entries[1].score == 18.0);
    CHECK(fused.entries[2].score == 17.0);
    fused.validate();
}

TEST_CASE("weighted_vote: ties break on supporters then id") {
    // 9 held by one model at rank 1 (10 points); 4 and 5 held by two models at rank 6 (5 + 5).
    const auto fused = weighted_vote({{"A", list_of(1, {9, 20, 21, 22, 23, 5})}, {"B", list_of(1, {30, 31, 32, 33, 34, 4})}},
                                     {{"A", 1.0}, {"B", 1.0}});
    CHECK(fused.ids().front() == 9);
    const auto tally = tally_votes({{"A", list_of(1, {9, 4})}, {"B", list_of(1, {4, 9})}}, {{"A", 1.0}, {"B", 1.0}});
    CHECK(tally.at(4).points == tally.at(9).points);
    CHECK(tally.at(4).supporters == 2);
    const auto even = weighted_vote({{"A", list_of(1, {9, 4})}, {"B", list_of(1, {4, 9})}}, {{"A", 1.0}, {"B", 1.0}});
    CHECK(even.ids() == std::vector<FactCheckId>{4, 9});
    const auto support = weighted_vote({{"A", list_of(1, {8, 6})}, {"B", list_of(1, {7})}, {"C", list_of(1, {6})}},
                                       {{"A", 1.0}, {"B", 1.0}, {"C", 1.0}});
    // 6: 9 + 10 from two models; 8: 10 from one; 7: 10 from one.
    CHECK(support.ids() == std::vector<FactCheckId>{6, 7, 8});
}

TEST_CASE("weighted_vote: contract errors") {
    std::vector<FactCheckId> eleven;
    for (FactCheckId i = 0; i < 11; ++i) eleven.push_back(i);
    CHECK_THROWS_AS(weighted_vote({{"A", list_of(1, eleven)}}, {{"A", 1.0}}), ContractError);
    CHECK_THROWS_AS(weighted_vote({{"A", list_of(1, {1})}}, {{"B", 1.0}}), LookupError);
    CHECK_THROWS_AS(weighted_vote({{"A", list_of(1, {1})}, {"B", list_of(2, {1})}}, {{"A", 1.0}, {"B", 1.0}}), ContractError);
    CHECK_THROWS_AS(weighted_vote({{"A", list_of(1, {1})}}, {{"A", 0.0}}), ContractError);
    CHECK_THROWS_AS(weighted_vote({}, {}), ContractError);
    RankedList broken = list_of(1, {1, 2});
    broken.entries[1].score = 99.0;
    CHECK_THROWS_AS(weighted_vote({{"A", broken}}, {{"A", 1.0}}), ContractError);
}

TEST_CASE("weighted_vote matches the exhaustive tally fixture") {
    const auto doc = nlohmann::json::parse(test_support::slurp(test_support::fixture("fusion_20posts.json")));
    const auto weights = doc.at("weights").get<std::map<std::string, double>>();
    std::size_t checked = 0;
    for (const auto& post : doc.at("posts")) {
        std::map<std::string, RankedList> lists;
        for (const auto& [model, ids] : post.at("lists").items()) {
            lists[model] = list_of(post.at("post_id").get<PostId>(), ids.get<std::vector<FactCheckId>>());
        }
        CHECK(weighted_vote(lists, weights).ids() == post.at("expected").get<std::vector<FactCheckId>>());
        ++checked;
    }
    CHECK(checked == 20);
}

TEST_CASE("property: single model is the identity") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 500; ++i) {
        const auto ids = random_ids(rng, 1 + rng() % 10, 40);
        const double w = 0.01 + (rng() % 1000) / 100.0;
        for (const auto scheme : {VoteScheme::borda, VoteScheme::reciprocal_rank}) {
            CHECK(weighted_vote({{"solo", list_of(3, ids)}}, {{"solo", w}}, {scheme, 60.0}).ids() == ids);
        }
    }
}

TEST_CASE("property: model order does not matter") {
    std::mt19937_64 rng(32);
    for (int i = 0; i < 500; ++i) {
        const auto c = random_case(rng);
        const auto base = weighted_vote(c.lists, c.weights);
        // Relabel models under a random permutation so the map iterates them in another order.
        std::vector<std::string> names;
        for (const auto& [m, l] : c.lists) names.push_back(m);
        std::vector<std::string> shuffled = names;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        std::map<std::string, RankedList> lists;
        std::map<std::string, double> weights;
        for (std::size_t j = 0; j < names.size(); ++j) {
            lists["z" + shuffled[j]] = c.lists.at(names[j]);
            weights["z" + shuffled[j]] = c.weights.at(names[j]);
        }
        CHECK(weighted_vote(lists, weights) == base);
    }
}

TEST_CASE("property: scaling weights keeps the order") {
    std::mt19937_64 rng(33);
    for (int i = 0; i < 500; ++i) {
        const auto c = random_case(rng);
        const double scale = std::vector<double>{0.5, 2.0, 3.0, 10.0, 0.125}[rng() % 5];
        auto scaled = c.weights;
        for (auto& [m, w] : scaled) w *= scale;
        CHECK(weighted_vote(c.lists, scaled).ids() == weighted_vote(c.lists, c.weights).ids());
    }
}

TEST_CASE("property: output is drawn from the inputs") {
    std::mt19937_64 rng(34);
    for (int i = 0; i < 500; ++i) {
        const auto c = random_case(rng);
        std::set<FactCheckId> all;
        for (const auto& [m, l] : c.lists) {
            for (const auto id : l.ids()) all.insert(id);
        }
        for (const auto scheme : {VoteScheme::borda, VoteScheme::reciprocal_rank, VoteScheme::approval}) {
            const auto fused = weighted_vote(c.lists, c.weights, {scheme, 60.0});
            CHECK(fused.entries.size() == std::min(all.size(), kVoteWindow));
            for (const auto id : fused.ids()) CHECK(all.count(id) == 1);
            fused.validate();
        }
    }
}

TEST_CASE("rrf and approval") {
    // RRF: rank 1 in one list beats ranks 2 and 3 in two lists only when rrf_k is small.
    const std::map<std::string, RankedList> lists{{"A", list_of(1, {1, 2})}, {"B", list_of(1, {3, 5, 2})}, {"C", list_of(1, {4})}};
    const std::map<std::string, double> w{{"A", 1.0}, {"B", 1.0}, {"C", 1.0}};
    CHECK(weighted_vote(lists, w, {VoteScheme::reciprocal_rank, 60.0}).ids().front() == 2);
    CHECK(weighted_vote(lists, w, {VoteScheme::reciprocal_rank, 0.0}).ids().front() == 1);
    // Approval counts membership only.
    CHECK(weighted_vote(lists, w, {VoteScheme::approval}).ids() == std::vector<FactCheckId>{2, 1, 3, 4, 5});
}

TEST_CASE("fuse_run") {
    Predictions a, b;
    a[1] = list_of(1, {1, 2});
    a[2] = list_of(2, {5});
    b[1] = list_of(1, {2, 1});
    b[2] = list_of(2, {6});
    const auto fused = fuse_run({{"a", a}, {"b", b}}, {{"a", 2.0}, {"b", 1.0}});
    CHECK(fused.size() == 2);
    CHECK(fused.at(1).ids() == std::vector<FactCheckId>{1, 2});
    CHECK(fused.at(2).ids() == std::vector<FactCheckId>{5, 6});

    b.erase(2);
    try {
        fuse_run({{"a", a}, {"b", b}}, {{"a", 2.0}, {"b", 1.0}});
        FAIL("expected a coverage error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("b lacks 1 posts (2)") != std::string::npos);
    }
    CHECK_THROWS_AS(fuse_run({}, {}), ValidationError);
}
