// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#include "claimstage/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "claimstage/errors.hpp"

namespace claimstage {

PredictionSet to_prediction_set(const Predictions& lists) {
    PredictionSet out;
    for (const auto& [post, list] : lists) out.emplace(post, list.ids());
    return out;
}

void validate_predictions(const PredictionSet& predictions) {
    for (const auto& [post, ids] : predictions) {
        std::unordered_set<FactCheckId> seen;
        for (const auto id : ids) {
            if (!seen.insert(id).second) {
                throw ValidationError("post " + std::to_string(post) + " lists fact_check " + std::to_string(id) +
                                      " twice");
            }
        }
    }
}

double success_at_k(const PredictionSet& predictions, const PairSet& gold, std::size_t k) {
    if (k == 0) throw ValidationError("k must be at least 1");
    if (predictions.empty()) throw ValidationError("no predictions to evaluate");
    validate_predictions(predictions);
    std::size_t hits = 0;
    for (const auto& [post, ids] : predictions) {
        const auto& golds = gold.gold(post);
        if (golds.empty()) throw LookupError("post " + std::to_string(post) + " has no gold fact-check");
        const auto limit = std::min(k, ids.size());
        for (std::size_t i = 0; i < limit; ++i) {
            if (golds.count(ids[i])) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

std::vector<double> success_curve(const PredictionSet& predictions, const PairSet& gold, std::size_t k_max) {
    std::vector<double> out;
    for (std::size_t k = 1; k <= k_max; ++k) out.push_back(success_at_k(predictions, gold, k));
    return out;
}

double round_half_up(double value, int decimals) {
    const double scale = std::pow(10.0, decimals);
    const double scaled = std::abs(value) * scale;
    // Inputs such as 93.645 are stored a hair below the tie; nudge by a few ulps of the scaled value.
    const double rounded = std::floor(scaled + 0.5 + scaled * 1e-12) / scale;
    return std::copysign(rounded, value);
}

std::string format_percent(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.2f", round_half_up(value, 2));
    std::string out(buffer);
    return out == "-0.00" ? "0.00" : out;
}

double macro_average(const std::map<std::string, double>& per_language) {
    if (per_language.empty()) throw ValidationError("macro average of an empty language set");
    double sum = 0.0;
    for (const auto& [lang, value] : per_language) sum += value;
    return sum / static_cast<double>(per_language.size());
}

double improvement(double fused, double best_individual) { return round_half_up(fused - best_individual, 2); }

const std::vector<std::string>& canonical_languages() {
    static const std::vector<std::string> order = {"eng", "spa", "deu", "por", "fra",
                                                   "ara", "msa", "tha", "pol", "tur"};
    return order;
}

std::string to_string(Track track) { return track == Track::monolingual ? "monolingual" : "crosslingual"; }

Track parse_track(const std::string& text) {
    if (text == "monolingual") return Track::monolingual;
    if (text == "crosslingual") return Track::crosslingual;
    throw ConfigError("track must be 'monolingual' or 'crosslingual'");
}

std::vector<std::string> EvaluationReport::languages() const {
    std::set<std::string> present;
    for (const auto& row : rows) {
        for (const auto& [lang, v] : row.scores) present.insert(lang);
    }
    std::vector<std::string> out;
    for (const auto& lang : canonical_languages()) {
        if (present.erase(lang)) out.push_back(lang);
    }
    out.insert(out.end(), present.begin(), present.end());
    return out;
}

std::string render_table(const EvaluationReport& report) {
    std::vector<std::string> header = {"Model", "Plan", "Avg"};
    const auto langs = report.track == Track::monolingual ? report.languages() : std::vector<std::string>{};
    header.insert(header.end(), langs.begin(), langs.end());

    std::vector<std::vector<std::string>> cells;
    for (const auto& row : report.rows) {
        std::vector<std::string> line = {row.model, row.plan, format_percent(row.average())};
        for (const auto& lang : langs) {
            const auto it = row.scores.find(lang);
            line.push_back(it == row.scores.end() ? "-" : format_percent(it->second));
        }
        cells.push_back(std::move(line));
    }
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& line : cells) width[c] = std::max(width[c], line[c].size());
    }
    std::ostringstream os;
    auto emit = [&](const std::vector<std::string>& line) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            if (c) os << " | ";
            os << line[c];
            if (c + 1 < line.size()) os << std::string(width[c] - line[c].size(), ' ');
        }
        os << '\n';
    };
    emit(header);
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c) os << "-+-";
        os << std::string(width[c], '-');
    }
    os << '\n';
    for (const auto& line : cells) emit(line);
    return os.str();
}

nlohmann::json to_json(const EvaluationReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.rows) {
        rows.push_back({{"model", row.model},
                        {"plan", row.plan},
                        {"avg", format_percent(row.average())},
                        {"scores", row.scores}});
    }
    return {{"track", to_string(report.track)}, {"languages", report.languages()}, {"rows", rows}};
}

EvaluationReport report_from_json(const nlohmann::json& j) {
    EvaluationReport report;
    try {
        report.track = parse_track(j.at("track").get<std::string>());
        for (const auto& r : j.at("rows")) {
            ReportRow row;
            row.model = r.at("model").get<std::string>();
            row.plan = r.at("plan").get<std::string>();
            row.scores = r.at("scores").get<std::map<std::string, double>>();
            report.rows.push_back(std::move(row));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed report JSON: ") + e.what());
    }
    return report;
}

nlohmann::json submission_json(const PredictionSet& predictions) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [post, ids] : predictions) out[std::to_string(post)] = ids;
    return out;
}

PredictionSet read_submission(std::istream& in) {
    PredictionSet out;
    try {
        const auto j = nlohmann::json::parse(in);
        if (!j.is_object()) throw ValidationError("submission must be a JSON object");
        for (const auto& [key, ids] : j.items()) {
            const auto post = parse_record_id(key);
            if (!post) throw ValidationError("submission key '" + key + "' is not a post id");
            out.emplace(*post, ids.get<std::vector<FactCheckId>>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed submission JSON: ") + e.what());
    }
    validate_predictions(out);
    return out;
}

}  // namespace claimstage
