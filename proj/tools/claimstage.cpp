// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Exit codes: 0 success, 1 validation error, 2 stage failure.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "claimstage/errors.hpp"
#include "claimstage/pipeline.hpp"
#include "claimstage/synthetic.hpp"

namespace cs = claimstage;
namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitStage = 2;

struct Overrides {
    std::string config;
    std::string plan;
    std::optional<std::size_t> k;
    std::optional<std::size_t> top_n;
    std::string track;
    std::string out;
    std::optional<unsigned> workers;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "Experiment config (JSON)")->required();
    cmd->add_option("--plan", o.plan, "Composition plan: O, T, OT or OTV");
    cmd->add_option("--k", o.k, "Stage-1 candidate count");
    cmd->add_option("--top-n", o.top_n, "Reranker output length");
    cmd->add_option("--track", o.track, "monolingual or crosslingual");
    cmd->add_option("--out", o.out, "Output root directory");
    cmd->add_option("--workers", o.workers, "Retrieval worker threads");
}

cs::ExperimentConfig resolve_config(const Overrides& o) {
    auto config = cs::load_config(o.config);
    if (!o.plan.empty()) config.plan = cs::parse_plan(o.plan);
    if (o.k) config.k = *o.k;
    if (o.top_n) {
        for (auto& r : config.rerankers) r.top_n = *o.top_n;
    }
    if (!o.track.empty()) config.track = cs::parse_track(o.track);
    if (!o.out.empty()) config.paths.out = o.out;
    if (o.workers) config.workers = *o.workers;
    return config;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw cs::ValidationError("cannot open " + path);
    return in;
}

// Writes to `path`, or stdout when it is empty or "-".
template <typename F>
void emit(const std::string& path, F&& write) {
    if (path.empty() || path == "-") {
        write(std::cout);
        return;
    }
    if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw cs::ValidationError("cannot write " + path);
    write(out);
}

void print_run(const cs::RunResult& r) {
    std::cout << cs::render_table(r.report);
    for (const auto& w : r.manifest.warnings) std::cerr << "warning: " << w << '\n';
    if (!r.weights.empty()) {
        std::cerr << "fusion weights:";
        for (const auto& [model, w] : r.weights) std::cerr << ' ' << model << '=' << w;
        std::cerr << '\n';
    }
    std::cerr << "run directory: " << r.run_dir.string() << '\n';
}

std::pair<std::string, std::string> split_assignment(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw cs::ValidationError("expected MODEL=VALUE, got '" + text + "'");
    return {text.substr(0, eq), text.substr(eq + 1)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Three-stage retrieval of previously fact-checked claims"};
    app.set_version_flag("--version", std::string(cs::kVersion));
    app.require_subcommand(1);

    // ingest
    std::string fc_path, posts_path, pairs_path, tasks_path, ingest_out;
    auto* ingest = app.add_subcommand("ingest", "Parse the CSV corpus and write normalized JSON Lines");
    ingest->add_option("--fact-checks", fc_path)->required();
    ingest->add_option("--posts", posts_path)->required();
    ingest->add_option("--pairs", pairs_path);
    ingest->add_option("--tasks", tasks_path);
    ingest->add_option("--out", ingest_out, "Output directory")->required();

    // embed
    Overrides embed_o;
    std::string embed_file;
    auto* embed = app.add_subcommand("embed", "Embed every post and pool document of a config");
    add_overrides(embed, embed_o);
    embed->add_option("--output", embed_file, "Embedding file to write")->required();

    // retrieve
    Overrides retrieve_o;
    auto* retrieve = app.add_subcommand("retrieve", "Stage 1 only; prints the retrieval report");
    add_overrides(retrieve, retrieve_o);

    // rerank
    std::string cand_path, scores_path, model_name = "model", rerank_out, missing = "fail";
    std::size_t rerank_top_n = cs::kDefaultTopN;
    auto* rerank = app.add_subcommand("rerank", "Rerank candidate lists with a score file");
    rerank->add_option("--candidates", cand_path, "Stage-1 JSON Lines")->required();
    rerank->add_option("--scores", scores_path, "TSV with post_id, fact_check_id, score")->required();
    rerank->add_option("--model", model_name);
    rerank->add_option("--top-n", rerank_top_n);
    rerank->add_option("--missing", missing, "fail or fallback");
    rerank->add_option("--out", rerank_out, "Output JSON Lines (default stdout)");

    // fuse
    std::vector<std::string> fuse_inputs, fuse_weights;
    std::string scheme = "borda", fuse_out;
    auto* fuse = app.add_subcommand("fuse", "Weighted voting over reranked lists");
    fuse->add_option("--input", fuse_inputs, "MODEL=reranked.jsonl")->required();
    fuse->add_option("--weight", fuse_weights, "MODEL=weight")->required();
    fuse->add_option("--scheme", scheme, "borda, rrf or approval");
    fuse->add_option("--out", fuse_out, "Output JSON Lines (default stdout)");

    // eval
    std::string pred_path, gold_path;
    std::size_t eval_k = cs::kVoteWindow;
    auto* eval = app.add_subcommand("eval", "Success@k of a submission or candidate file");
    eval->add_option("--predictions", pred_path, "Submission JSON or candidate JSON Lines")->required();
    eval->add_option("--pairs", gold_path, "Gold pairs CSV")->required();
    eval->add_option("--k", eval_k);

    // run
    Overrides run_o;
    auto* run = app.add_subcommand("run", "Full pipeline: retrieve, rerank, vote, evaluate");
    add_overrides(run, run_o);

    // synth (demo data)
    cs::SyntheticSpec synth_spec;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "Write a generated demo corpus");
    synth->add_option("--out", synth_out)->required();
    synth->add_option("--languages", synth_spec.languages);
    synth->add_option("--posts", synth_spec.posts_per_language);
    synth->add_option("--fact-checks", synth_spec.fact_checks);
    synth->add_option("--seed", synth_spec.seed);
    synth->add_flag("--unrelated-gold", synth_spec.unrelated_gold);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Help and version requests exit 0; every other usage error is invalid input.
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*ingest) {
            auto fc_in = open_in(fc_path);
            const auto fcs = cs::parse_fact_checks(fc_in);
            auto post_in = open_in(posts_path);
            const auto posts = cs::parse_posts(post_in);
            fs::create_directories(ingest_out);
            emit((fs::path(ingest_out) / "fact_checks.jsonl").string(),
                 [&](std::ostream& os) { cs::write_jsonl(os, fcs.records); });
            emit((fs::path(ingest_out) / "posts.jsonl").string(),
                 [&](std::ostream& os) { cs::write_jsonl(os, posts.records); });
            std::cout << "fact_checks: " << fcs.records.size() << " of " << fcs.data_rows << " rows\n"
                      << "posts: " << posts.records.size() << " of " << posts.data_rows << " rows\n";
            for (const auto& e : fcs.errors) std::cerr << fc_path << ": row " << e.row << ": " << e.message << '\n';
            for (const auto& e : posts.errors) std::cerr << posts_path << ": row " << e.row << ": " << e.message << '\n';
            if (!posts.flagged.empty()) std::cerr << posts.flagged.size() << " posts have neither text nor ocr\n";
            if (!pairs_path.empty()) {
                auto in = open_in(pairs_path);
                const auto pairs = cs::parse_pairs(in);
                std::cout << "pairs: " << pairs.pairs.size() << " of " << pairs.data_rows << " rows\n";
            }
            if (!tasks_path.empty()) {
                auto in = open_in(tasks_path);
                const auto split = cs::parse_tasks(in);
                const cs::Corpus corpus(posts.records, fcs.records);
                cs::validate_split(split, corpus);
                std::cout << "languages: " << split.languages().size()
                          << (split.crosslingual ? " + crosslingual" : "") << '\n';
            }
            return fcs.errors.empty() && posts.errors.empty() ? 0 : kExitValidation;
        }
        if (*embed) {
            const auto config = resolve_config(embed_o);
            config.validate();
            const auto inputs = cs::load_inputs(config);
            const auto store = cs::build_embeddings(config, inputs);
            cs::save_embeddings(store, embed_file);
            std::cout << store.size() << " vectors of dim " << store.dim() << " written to " << embed_file << '\n';
            return 0;
        }
        if (*retrieve) {
            print_run(cs::run_retrieval_experiment(resolve_config(retrieve_o)));
            return 0;
        }
        if (*rerank) {
            auto cand_in = open_in(cand_path);
            const auto candidates = cs::read_candidates_jsonl(cand_in);
            auto score_in = open_in(scores_path);
            auto load = cs::load_scores(score_in, model_name);
            for (const auto& e : load.errors) std::cerr << scores_path << ": row " << e.row << ": " << e.message << '\n';
            if (!load.errors.empty()) return kExitValidation;
            cs::RerankStats stats;
            const auto lists = cs::rerank_all(candidates, load.table,
                                              cs::RerankOptions{rerank_top_n, cs::parse_missing_policy(missing)}, &stats);
            emit(rerank_out, [&](std::ostream& os) { cs::write_candidates_jsonl(os, lists); });
            if (stats.fallbacks) std::cerr << stats.fallbacks << " pairs fell back to retrieval scores\n";
            return 0;
        }
        if (*fuse) {
            std::map<std::string, cs::Predictions> per_model;
            for (const auto& item : fuse_inputs) {
                const auto [model, path] = split_assignment(item);
                auto in = open_in(path);
                per_model[model] = cs::read_candidates_jsonl(in);
            }
            std::map<std::string, double> weights;
            for (const auto& item : fuse_weights) {
                const auto [model, value] = split_assignment(item);
                try {
                    weights[model] = std::stod(value);
                } catch (const std::exception&) {
                    throw cs::ValidationError("weight for '" + model + "' is not a number");
                }
            }
            cs::VoteOptions options;
            options.scheme = cs::parse_vote_scheme(scheme);
            const auto fused = cs::fuse_run(per_model, weights, options);
            emit(fuse_out, [&](std::ostream& os) { cs::write_candidates_jsonl(os, fused); });
            return 0;
        }
        if (*eval) {
            auto gold_in = open_in(gold_path);
            const auto gold = cs::parse_pairs(gold_in);
            auto in = open_in(pred_path);
            const auto predictions = fs::path(pred_path).extension() == ".jsonl"
                                         ? cs::to_prediction_set(cs::read_candidates_jsonl(in))
                                         : cs::read_submission(in);
            std::cout << "S@" << eval_k << " = "
                      << cs::format_percent(100.0 * cs::success_at_k(predictions, gold.pairs, eval_k)) << " over "
                      << predictions.size() << " posts\n";
            return 0;
        }
        if (*run) {
            const auto config = resolve_config(run_o);
            print_run(config.track == cs::Track::crosslingual ? cs::crosslingual_mode(config)
                                                              : cs::run_full_pipeline(config));
            return 0;
        }
        if (*synth) {
            const auto files = cs::write_corpus_files(cs::make_synthetic_corpus(synth_spec), synth_out);
            std::cout << "wrote " << files.fact_checks.string() << ", " << files.posts.string() << ", "
                      << files.pairs.string() << ", " << files.tasks.string() << '\n';
            return 0;
        }
    } catch (const cs::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const cs::StageError& e) {
        std::cerr << "stage failure: " << e.what() << '\n';
        return kExitStage;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return kExitStage;
    }
    return 0;
}
