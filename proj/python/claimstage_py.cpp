// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "claimstage/errors.hpp"
#include "claimstage/pipeline.hpp"
#include "claimstage/synthetic.hpp"

namespace py = pybind11;
namespace cs = claimstage;

namespace {

using Ranking = std::vector<std::pair<cs::FactCheckId, double>>;

cs::RankedList to_list(const Ranking& ranking, cs::Stage stage) {
    cs::RankedList list;
    list.stage = stage;
    for (const auto& [id, score] : ranking) list.entries.push_back({id, score});
    list.validate();
    return list;
}

Ranking from_list(const cs::RankedList& list) {
    Ranking out;
    for (const auto& e : list.entries) out.emplace_back(e.fact_check_id, e.score);
    return out;
}

cs::PairSet to_pairs(const std::vector<std::pair<cs::PostId, cs::FactCheckId>>& pairs) {
    cs::PairSet out;
    for (const auto& [post, fc] : pairs) out.insert(post, fc);
    return out;
}

std::string run_json(const cs::RunResult& r) {
    nlohmann::json j = {{"report", cs::to_json(r.report)},
                        {"manifest", cs::to_json(r.manifest)},
                        {"run_dir", r.run_dir.string()},
                        {"weights", r.weights},
                        {"table", cs::render_table(r.report)}};
    return j.dump();
}

}  // namespace

PYBIND11_MODULE(_claimstage, m) {
    m.doc() = "Bindings for the claimstage retrieval, reranking and voting engine";
    m.attr("__version__") = cs::kVersion;

    // Translators registered later are tried first, so the root class goes in first and the
    // Python classes mirror the C++ hierarchy.
    const auto& error = py::register_exception<cs::Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<cs::ValidationError>(m, "ValidationError", error.ptr());
    py::register_exception<cs::LookupError>(m, "LookupError", error.ptr());
    py::register_exception<cs::ContractError>(m, "ContractError", error.ptr());
    py::register_exception<cs::StageError>(m, "StageError", error.ptr());

    // corpus
    m.def("parse_lang_tuple", [](const std::string& field) -> std::optional<std::string> {
        const auto t = cs::parse_lang_tuple(field);
        if (!t) return std::nullopt;
        return cs::to_json(*t).dump();
    }, py::arg("field"), "Parses one language tuple; returns its JSON form or None when missing.");
    m.def("compose_text", [](const std::string& post_json, const std::string& plan, bool strict) {
        return cs::compose_post_text(cs::post_from_json(nlohmann::json::parse(post_json)), cs::parse_plan(plan),
                                     cs::ComposeOptions{strict});
    }, py::arg("post_json"), py::arg("plan"), py::arg("strict_plan") = false);

    // embedder
    py::class_<cs::BaselineVectorizer>(m, "BaselineVectorizer")
        .def_static("fit", [](const std::vector<std::string>& docs, int n_min, int n_max,
                              std::uint32_t hash_dim) {
            return cs::BaselineVectorizer::fit(docs, cs::BaselineVectorizerConfig{n_min, n_max, hash_dim});
        }, py::arg("documents"), py::arg("ngram_min") = 3, py::arg("ngram_max") = 5, py::arg("hash_dim") = 1u << 18)
        .def_property_readonly("dim", &cs::BaselineVectorizer::dim)
        .def_property_readonly("document_count", &cs::BaselineVectorizer::document_count)
        .def("embed", [](const cs::BaselineVectorizer& v, const std::string& text) {
            const auto vec = v.embed(text);
            std::map<std::uint32_t, float> out;
            const auto values = vec.values();
            const auto indices = vec.indices();
            for (std::size_t i = 0; i < values.size(); ++i) out[indices[i]] = values[i];
            return out;
        }, "Sparse {bucket: weight} map of the L2-normalized vector.")
        .def("cosine", [](const cs::BaselineVectorizer& v, const std::string& a, const std::string& b) {
            return cs::cosine(v.embed(a), v.embed(b));
        });

    // retriever
    m.def("top_k", [](py::array_t<float, py::array::c_style | py::array::forcecast> pool,
                      const std::vector<cs::FactCheckId>& ids,
                      py::array_t<float, py::array::c_style | py::array::forcecast> query, std::size_t k) {
        if (pool.ndim() != 2 || query.ndim() != 1) throw cs::ValidationError("pool must be 2-D and query 1-D");
        const auto rows = static_cast<std::size_t>(pool.shape(0));
        const auto dim = static_cast<std::size_t>(pool.shape(1));
        if (ids.size() != rows) throw cs::ValidationError("one id per pool row is required");
        std::vector<std::pair<cs::FactCheckId, cs::Vector>> data;
        for (std::size_t r = 0; r < rows; ++r) {
            data.emplace_back(ids[r], cs::Vector::dense(std::vector<float>(pool.data(r, 0), pool.data(r, 0) + dim)));
        }
        const auto index = cs::Index::from_vectors(std::move(data));
        const auto q = cs::Vector::dense(std::vector<float>(query.data(), query.data() + query.shape(0)));
        py::gil_scoped_release release;
        return from_list(index.top_k(q, k));
    }, py::arg("pool"), py::arg("ids"), py::arg("query"), py::arg("k") = cs::kVoteWindow,
       "Exact cosine top-k; ties go to the smaller id.");

    // reranker
    m.def("lexical_overlap_score", &cs::lexical_overlap_score, py::arg("query"), py::arg("document"));

    // fusion
    m.def("compute_weights", [](const std::map<std::string, double>& dev, const std::string& function,
                                double temperature) {
        cs::WeightOptions options{cs::parse_weight_function(function), temperature};
        return cs::weight_map(cs::compute_weights(dev, options));
    }, py::arg("dev_scores"), py::arg("function") = "proportional", py::arg("temperature") = 0.05);
    m.def("weighted_vote", [](const std::map<std::string, Ranking>& lists, const std::map<std::string, double>& weights,
                              const std::string& scheme, double rrf_k) {
        std::map<std::string, cs::RankedList> converted;
        for (const auto& [model, ranking] : lists) converted[model] = to_list(ranking, cs::Stage::rerank);
        return from_list(cs::weighted_vote(converted, weights, cs::VoteOptions{cs::parse_vote_scheme(scheme), rrf_k}));
    }, py::arg("lists"), py::arg("weights"), py::arg("scheme") = "borda", py::arg("rrf_k") = 60.0,
       "Each list is [(fact_check_id, score), ...] in rank order; returns the fused top-10.");

    // eval
    m.def("success_at_k", [](const std::map<cs::PostId, std::vector<cs::FactCheckId>>& predictions,
                             const std::vector<std::pair<cs::PostId, cs::FactCheckId>>& gold, std::size_t k) {
        return cs::success_at_k(predictions, to_pairs(gold), k);
    }, py::arg("predictions"), py::arg("gold"), py::arg("k") = cs::kVoteWindow);
    m.def("macro_average", &cs::macro_average, py::arg("per_language"));
    m.def("round_half_up", &cs::round_half_up, py::arg("value"), py::arg("decimals") = 2);
    m.def("format_percent", &cs::format_percent, py::arg("value"));
    m.def("improvement", &cs::improvement, py::arg("fused"), py::arg("best_individual"));

    // pipeline
    m.def("write_synthetic_corpus", [](const std::filesystem::path& dir, std::size_t languages,
                                       std::size_t posts_per_language, std::size_t fact_checks, std::uint64_t seed,
                                       bool unrelated_gold) {
        cs::SyntheticSpec spec;
        spec.languages = languages;
        spec.posts_per_language = posts_per_language;
        spec.fact_checks = fact_checks;
        spec.seed = seed;
        spec.unrelated_gold = unrelated_gold;
        const auto files = cs::write_corpus_files(cs::make_synthetic_corpus(spec), dir);
        return std::map<std::string, std::string>{{"fact_checks", files.fact_checks.string()},
                                                  {"posts", files.posts.string()},
                                                  {"pairs", files.pairs.string()},
                                                  {"tasks", files.tasks.string()}};
    }, py::arg("directory"), py::arg("languages") = 8, py::arg("posts_per_language") = 50,
       py::arg("fact_checks") = 2000, py::arg("seed") = 7, py::arg("unrelated_gold") = false);
    m.def("_run_config", [](const std::string& config_json, const std::filesystem::path& base_dir,
                            bool retrieval_only) {
        const auto config = cs::config_from_json(nlohmann::json::parse(config_json), base_dir);
        cs::RunResult result;
        {
            py::gil_scoped_release release;
            result = retrieval_only ? cs::run_retrieval_experiment(config)
                     : config.track == cs::Track::crosslingual ? cs::crosslingual_mode(config)
                                                               : cs::run_full_pipeline(config);
        }
        return run_json(result);
    });
    m.def("_config_hash", [](const std::string& config_json, const std::filesystem::path& base_dir) {
        return cs::config_hash(cs::config_from_json(nlohmann::json::parse(config_json), base_dir));
    });
}
