// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "claimstage/errors.hpp"
#include "claimstage/eval.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace claimstage;

namespace {

const std::vector<std::string> kEight = {"eng", "spa", "deu", "por", "fra", "ara", "msa", "tha"};

std::map<std::string, double> row_of(const std::vector<std::string>& langs, const std::vector<double>& values) {
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < langs.size(); ++i) out[langs[i]] = values[i];
    return out;
}

EvaluationReport sample_report() {
    EvaluationReport r;
    r.rows.push_back({"retrieval:dense-large", "O",
                      row_of(kEight, {78.03, 81.30, 79.51, 80.46, 84.04, 80.76, 78.09, 95.23})});
    r.rows.push_back({"Voting", "O,T", row_of(kEight, {91.21, 95.44, 93.97, 94.03, 95.74, 93.58, 97.14, 100.0})});
    return r;
}

// Writes the golden file instead of comparing when CLAIMSTAGE_UPDATE_GOLDEN is set.
void check_golden(const std::string& name, const std::string& actual) {
    const auto path = std::filesystem::path(CLAIMSTAGE_GOLDEN_DIR) / name;
    if (std::getenv("CLAIMSTAGE_UPDATE_GOLDEN")) {
        std::ofstream(path, std::ios::binary) << actual;
        return;
    }
    REQUIRE(std::filesystem::exists(path));
    CHECK(test_support::slurp(path) == actual);
}

}  // namespace

TEST_CASE("success_at_k: worked examples") {
    PairSet gold;
    gold.insert(1, 10);
    gold.insert(2, 20);
    gold.insert(2, 21);
    gold.insert(3, 30);
    PredictionSet preds{{1, {10, 11, 12}}, {2, {1, 2, 3, 4, 5, 6, 7, 8, 9, 21}}, {3, {31, 32}}};
    CHECK(success_at_k(preds, gold) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(format_percent(100.0 * success_at_k(preds, gold)) == "66.67");
    // The second post's gold sits at rank 10 exactly.
    CHECK(success_at_k(preds, gold, 9) == doctest::Approx(1.0 / 3.0));
    CHECK(success_at_k({{3, {31}}}, gold) == 0.0);
    CHECK(success_at_k({{2, {20}}}, gold, 1) == 1.0);
    CHECK(success_at_k({{3, {}}}, gold) == 0.0);
}

TEST_CASE("success_at_k: errors") {
    PairSet gold;
    gold.insert(1, 10);
    try {
        success_at_k({{1, {10}}, {42, {10}}}, gold);
        FAIL("expected LookupError");
    } catch (const LookupError& e) {
        CHECK(std::string(e.what()).find("42") != std::string::npos);
    }
    CHECK_THROWS_AS(success_at_k({{1, {10}}}, gold, 0), ValidationError);
    CHECK_THROWS_AS(success_at_k({}, gold), ValidationError);
    CHECK_THROWS_AS(success_at_k({{1, {10, 11, 10}}}, gold), ValidationError);
    CHECK_THROWS_AS(validate_predictions({{1, {3, 3}}}), ValidationError);
}

TEST_CASE("property: S@k is monotone in k and ignores post order") {
    std::mt19937_64 rng(8);
    for (int round = 0; round < 200; ++round) {
        PairSet gold;
        PredictionSet preds;
        const int posts = 1 + static_cast<int>(rng() % 30);
        for (int p = 0; p < posts; ++p) {
            gold.insert(p, rng() % 40);
            if (rng() % 3 == 0) gold.insert(p, rng() % 40);
            std::vector<FactCheckId> ids(40);
            for (FactCheckId i = 0; i < 40; ++i) ids[i] = i;
            std::shuffle(ids.begin(), ids.end(), rng);
            ids.resize(rng() % 15);
            preds[p] = ids;
        }
        const auto curve = success_curve(preds, gold, 15);
        REQUIRE(curve.size() == 15);
        for (std::size_t k = 1; k < curve.size(); ++k) CHECK(curve[k - 1] <= curve[k]);
        CHECK(curve[9] == success_at_k(preds, gold, 10));
        for (const double s : curve) CHECK((s >= 0.0 && s <= 1.0));
    }
}

TEST_CASE("macro averages of the reported rows") {
    const auto report = sample_report();
    CHECK(format_percent(report.rows[0].average()) == "82.18");
    CHECK(report.rows[0].average() == doctest::Approx(82.1775).epsilon(1e-12));
    CHECK(format_percent(report.rows[1].average()) == "95.14");
    CHECK(report.rows[1].average() == doctest::Approx(95.13875).epsilon(1e-12));

    const auto ten_languages = row_of({"eng", "fra", "deu", "por", "spa", "tha", "msa", "ara", "tur", "pol"},
                                 {89.40, 95.00, 90.20, 89.00, 94.80, 99.45, 100.0, 97.0, 93.00, 88.60});
    CHECK(macro_average(ten_languages) == doctest::Approx(93.645).epsilon(1e-12));
    CHECK(round_half_up(macro_average(ten_languages)) == 93.65);
    CHECK(format_percent(macro_average(ten_languages)) == "93.65");

    CHECK(macro_average({{"eng", 84.05}}) == 84.05);
    CHECK_THROWS_AS(macro_average({}), ValidationError);
}

TEST_CASE("improvement and rounding") {
    CHECK(improvement(95.14, 93.73) == 1.41);
    CHECK(improvement(84.05, 80.25) == 3.80);
    CHECK(improvement(90.0, 90.0) == 0.0);
    CHECK(improvement(90.0, 91.5) == -1.5);
    CHECK(round_half_up(0.125) == 0.13);
    CHECK(round_half_up(2.675) == 2.68);
    CHECK(round_half_up(-1.005) == -1.01);
    CHECK(round_half_up(82.1775) == 82.18);
    CHECK(round_half_up(1.2345, 3) == 1.235);
    CHECK(format_percent(100.0) == "100.00");
    CHECK(format_percent(0.0) == "0.00");
    CHECK(format_percent(3.8) == "3.80");
}

TEST_CASE("report languages follow the canonical order") {
    EvaluationReport r;
    r.rows.push_back({"a", "O", {{"zzz", 1.0}, {"tha", 2.0}, {"eng", 3.0}, {"aaa", 4.0}}});
    r.rows.push_back({"b", "O", {{"pol", 1.0}}});
    CHECK(r.languages() == std::vector<std::string>{"eng", "tha", "pol", "aaa", "zzz"});
}

TEST_CASE("render_table shape and golden files") {
    const auto report = sample_report();
    const auto table = render_table(report);
    std::istringstream lines(table);
    std::string header;
    std::getline(lines, header);
    CHECK(header.find("Model") == 0);
    for (const auto& col : {"Plan", "Avg", "eng", "spa", "deu", "por", "fra", "ara", "msa", "tha"}) {
        CHECK(header.find(col) != std::string::npos);
    }
    CHECK(header.find("eng") < header.find("tha"));
    CHECK(table.find("82.18") != std::string::npos);
    CHECK(table.find("95.14") != std::string::npos);
    CHECK(table.find("100.00") != std::string::npos);
    check_golden("report.txt", table);
    check_golden("report.json", to_json(report).dump(2) + "\n");

    EvaluationReport cross;
    cross.track = Track::crosslingual;
    cross.rows.push_back({"Voting", "T", {{"all", 84.05}}});
    const auto cross_table = render_table(cross);
    CHECK(cross_table.find("84.05") != std::string::npos);
    CHECK(cross_table.find("all") == std::string::npos);
}

TEST_CASE("report JSON round trip") {
    const auto report = sample_report();
    CHECK(report_from_json(to_json(report)) == report);
    CHECK(report_from_json(nlohmann::json::parse(to_json(report).dump())) == report);
    CHECK_THROWS_AS(report_from_json(nlohmann::json::parse("{\"track\":\"sideways\",\"rows\":[]}")), ValidationError);
    CHECK(parse_track("crosslingual") == Track::crosslingual);
    CHECK(to_string(Track::monolingual) == "monolingual");
}

TEST_CASE("submission round trip") {
    const PredictionSet preds{{3, {9, 8, 7}}, {12, {}}, {100, {1}}};
    const auto j = submission_json(preds);
    CHECK(j.dump() == "{\"100\":[1],\"12\":[],\"3\":[9,8,7]}");
    std::istringstream in(j.dump(2));
    CHECK(read_submission(in) == preds);
    std::istringstream bad("{\"x\": [1]}");
    CHECK_THROWS_AS(read_submission(bad), ValidationError);
    std::istringstream dup("{\"1\": [2, 2]}");
    CHECK_THROWS_AS(read_submission(dup), ValidationError);
}

TEST_CASE("to_prediction_set keeps order") {
    Predictions lists;
    lists[5].post_id = 5;
    lists[5].entries = {{30, 0.9}, {10, 0.5}};
    CHECK(to_prediction_set(lists) == PredictionSet{{5, {30, 10}}});
}
