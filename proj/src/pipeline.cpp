// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#include "claimstage/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "claimstage/errors.hpp"

namespace claimstage {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

CompositionPlan ExperimentConfig::effective_plan() const {
    if (plan) return *plan;
    return track == Track::crosslingual ? CompositionPlan::T : CompositionPlan::OT;
}

void ExperimentConfig::validate() const {
    if (k == 0) throw ConfigError("k must be at least 1");
    if (!retrieval_only && rerankers.empty()) {
        throw ConfigError("configure at least one reranker or set retrieval_only");
    }
    std::set<std::string> names;
    for (const auto& r : rerankers) {
        if (r.model_name.empty()) throw ConfigError("reranker model name must not be empty");
        if (!names.insert(r.model_name).second) throw ConfigError("duplicate reranker model '" + r.model_name + "'");
        if (r.top_n == 0) throw ConfigError("reranker top_n must be at least 1");
        if (r.top_n > kVoteWindow) {
            throw ConfigError("reranker top_n may not exceed the voting window of " + std::to_string(kVoteWindow));
        }
        if (k < r.top_n) throw ConfigError("k must be at least each reranker's top_n");
        if (r.kind == RerankerSpec::Kind::score_file && r.path.empty()) {
            throw ConfigError("score_file reranker '" + r.model_name + "' needs a path");
        }
    }
    if (!fusion.external_weights.empty()) {
        for (const auto& r : rerankers) {
            if (!fusion.external_weights.count(r.model_name)) {
                throw ConfigError("external weights lack model '" + r.model_name + "'");
            }
        }
    }
    if (embedder.kind == EmbedderSpec::Kind::baseline) embedder.baseline.validate();
    if (embedder.kind == EmbedderSpec::Kind::file && embedder.path.empty()) {
        throw ConfigError("file embedder needs a path");
    }
    if (embedder.kind == EmbedderSpec::Kind::remote && embedder.remote.model.empty()) {
        throw ConfigError("remote embedder needs a model name");
    }
    if (paths.fact_checks.empty() || paths.posts.empty() || paths.pairs.empty() || paths.tasks.empty()) {
        throw ConfigError("paths.fact_checks, paths.posts, paths.pairs and paths.tasks are required");
    }
    if (workers == 0) throw ConfigError("workers must be at least 1");
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    if (p.empty()) return {};
    const fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j, const fs::path& base) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig c;
    try {
        reject_unknown(j,
                       {"track", "languages", "plan", "strict_plan", "embedder", "k", "retrieval_only", "rerankers",
                        "missing_scores", "fusion", "paths", "split", "seed", "workers", "reuse_stage1"},
                       "config");
        if (j.contains("track")) c.track = parse_track(j["track"].get<std::string>());
        if (j.contains("languages")) c.languages = j["languages"].get<std::vector<std::string>>();
        if (j.contains("plan") && !j["plan"].is_null()) c.plan = parse_plan(j["plan"].get<std::string>());
        c.strict_plan = j.value("strict_plan", false);
        if (j.contains("embedder")) {
            const auto& e = j["embedder"];
            const auto kind = e.value("kind", std::string("baseline"));
            if (kind == "baseline") {
                reject_unknown(e, {"kind", "ngram_min", "ngram_max", "hash_dim"}, "embedder");
                c.embedder.kind = EmbedderSpec::Kind::baseline;
                c.embedder.baseline.ngram_min = e.value("ngram_min", 3);
                c.embedder.baseline.ngram_max = e.value("ngram_max", 5);
                c.embedder.baseline.hash_dim = e.value("hash_dim", 1u << 18);
            } else if (kind == "file") {
                reject_unknown(e, {"kind", "path"}, "embedder");
                c.embedder.kind = EmbedderSpec::Kind::file;
                c.embedder.path = resolve(base, e.at("path").get<std::string>());
            } else if (kind == "remote") {
                reject_unknown(e,
                               {"kind", "endpoint", "model", "max_batch", "attempts", "backoff_ms", "max_in_flight",
                                "timeout_s"},
                               "embedder");
                c.embedder.kind = EmbedderSpec::Kind::remote;
                auto& r = c.embedder.remote;
                r.endpoint = e.value("endpoint", std::string());
                r.model = e.at("model").get<std::string>();
                r.max_batch = e.value("max_batch", std::size_t{64});
                r.attempts = e.value("attempts", 3);
                r.backoff = std::chrono::milliseconds(e.value("backoff_ms", 200));
                r.max_in_flight = e.value("max_in_flight", std::size_t{4});
                r.timeout = std::chrono::seconds(e.value("timeout_s", 60));
            } else {
                throw ConfigError("embedder kind must be baseline, file or remote");
            }
        }
        c.k = j.value("k", kDefaultCandidateCount);
        c.retrieval_only = j.value("retrieval_only", false);
        if (j.contains("rerankers")) {
            for (const auto& r : j["rerankers"]) {
                reject_unknown(r, {"kind", "model", "path", "top_n"}, "reranker");
                RerankerSpec spec;
                const auto kind = r.value("kind", std::string("lexical"));
                if (kind == "lexical") {
                    spec.kind = RerankerSpec::Kind::lexical_baseline;
                    spec.model_name = r.value("model", std::string("lexical"));
                } else if (kind == "score_file") {
                    spec.kind = RerankerSpec::Kind::score_file;
                    spec.model_name = r.at("model").get<std::string>();
                    spec.path = resolve(base, r.at("path").get<std::string>());
                } else {
                    throw ConfigError("reranker kind must be lexical or score_file");
                }
                spec.top_n = r.value("top_n", kDefaultTopN);
                c.rerankers.push_back(std::move(spec));
            }
        }
        c.missing_scores = parse_missing_policy(j.value("missing_scores", std::string("fail")));
        if (j.contains("fusion")) {
            const auto& f = j["fusion"];
            reject_unknown(f, {"scheme", "rrf_k", "weight_function", "temperature", "weights"}, "fusion");
            c.fusion.vote.scheme = parse_vote_scheme(f.value("scheme", std::string("borda")));
            c.fusion.vote.rrf_k = f.value("rrf_k", 60.0);
            c.fusion.weighting.function = parse_weight_function(f.value("weight_function", std::string("proportional")));
            c.fusion.weighting.temperature = f.value("temperature", 0.05);
            if (f.contains("weights") && f["weights"].is_object()) {
                c.fusion.external_weights = f["weights"].get<std::map<std::string, double>>();
            }
        }
        if (j.contains("paths")) {
            const auto& p = j["paths"];
            reject_unknown(p, {"fact_checks", "posts", "pairs", "tasks", "out"}, "paths");
            c.paths.fact_checks = resolve(base, p.value("fact_checks", std::string()));
            c.paths.posts = resolve(base, p.value("posts", std::string()));
            c.paths.pairs = resolve(base, p.value("pairs", std::string()));
            c.paths.tasks = resolve(base, p.value("tasks", std::string()));
            c.paths.out = resolve(base, p.value("out", std::string("runs")));
        }
        const auto split = j.value("split", std::string("dev"));
        if (split != "dev" && split != "train") throw ConfigError("split must be dev or train");
        c.split = split == "dev" ? SplitSide::dev : SplitSide::train;
        c.seed = j.value("seed", std::uint64_t{0});
        c.workers = j.value("workers", 1u);
        c.reuse_stage1 = j.value("reuse_stage1", true);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j, path.parent_path());
}

nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json embedder;
    switch (c.embedder.kind) {
        case EmbedderSpec::Kind::baseline:
            embedder = {{"kind", "baseline"},
                        {"ngram_min", c.embedder.baseline.ngram_min},
                        {"ngram_max", c.embedder.baseline.ngram_max},
                        {"hash_dim", c.embedder.baseline.hash_dim}};
            break;
        case EmbedderSpec::Kind::file:
            embedder = {{"kind", "file"}, {"path", c.embedder.path.string()}};
            break;
        case EmbedderSpec::Kind::remote:
            embedder = {{"kind", "remote"},
                        {"endpoint", c.embedder.remote.endpoint},
                        {"model", c.embedder.remote.model},
                        {"max_batch", c.embedder.remote.max_batch},
                        {"attempts", c.embedder.remote.attempts},
                        {"backoff_ms", c.embedder.remote.backoff.count()},
                        {"max_in_flight", c.embedder.remote.max_in_flight},
                        {"timeout_s", c.embedder.remote.timeout.count()}};
            break;
    }
    nlohmann::json rerankers = nlohmann::json::array();
    for (const auto& r : c.rerankers) {
        nlohmann::json item = {{"kind", r.kind == RerankerSpec::Kind::lexical_baseline ? "lexical" : "score_file"},
                               {"model", r.model_name},
                               {"top_n", r.top_n}};
        if (r.kind == RerankerSpec::Kind::score_file) item["path"] = r.path.string();
        rerankers.push_back(std::move(item));
    }
    const char* scheme = c.fusion.vote.scheme == VoteScheme::borda             ? "borda"
                         : c.fusion.vote.scheme == VoteScheme::reciprocal_rank ? "rrf"
                                                                               : "approval";
    nlohmann::json fusion = {
        {"scheme", scheme},
        {"rrf_k", c.fusion.vote.rrf_k},
        {"weight_function", c.fusion.weighting.function == WeightFunction::proportional ? "proportional" : "softmax"},
        {"temperature", c.fusion.weighting.temperature}};
    if (!c.fusion.external_weights.empty()) fusion["weights"] = c.fusion.external_weights;
    return {{"track", to_string(c.track)},
            {"languages", c.languages},
            {"plan", to_string(c.effective_plan())},
            {"strict_plan", c.strict_plan},
            {"embedder", embedder},
            {"k", c.k},
            {"retrieval_only", c.retrieval_only},
            {"rerankers", rerankers},
            {"missing_scores", c.missing_scores == MissingScorePolicy::fail ? "fail" : "fallback"},
            {"fusion", fusion},
            {"paths",
             {{"fact_checks", c.paths.fact_checks.string()},
              {"posts", c.paths.posts.string()},
              {"pairs", c.paths.pairs.string()},
              {"tasks", c.paths.tasks.string()},
              {"out", c.paths.out.string()}}},
            {"split", c.split == SplitSide::dev ? "dev" : "train"},
            {"seed", c.seed},
            {"workers", c.workers},
            {"reuse_stage1", c.reuse_stage1}};
}

// ---------------------------------------------------------------------------
// Hashing

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw Error("SHA-256 unavailable");
    }
    ~Sha256() { EVP_MD_CTX_free(ctx_); }
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(std::string_view bytes) { EVP_DigestUpdate(ctx_, bytes.data(), bytes.size()); }

    void update_file(const fs::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ValidationError("cannot read input file " + path.string());
        std::vector<char> buffer(1 << 16);
        while (in) {
            in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
            update(std::string_view(buffer.data(), static_cast<std::size_t>(in.gcount())));
        }
    }

    std::string hex() {
        unsigned char digest[EVP_MAX_MD_SIZE];
        unsigned int length = 0;
        EVP_DigestFinal_ex(ctx_, digest, &length);
        std::ostringstream os;
        for (unsigned int i = 0; i < length; ++i) {
            os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
        }
        return os.str();
    }

private:
    EVP_MD_CTX* ctx_;
};

}  // namespace

std::string config_hash(const ExperimentConfig& c) {
    nlohmann::json canonical = to_json(c);
    canonical.erase("workers");
    canonical.erase("reuse_stage1");
    canonical["paths"].erase("out");
    if (c.embedder.kind == EmbedderSpec::Kind::remote) {
        canonical["embedder"]["endpoint"] = resolve_remote_endpoint(c.embedder.remote.endpoint);
    }
    // Input files enter by content, not by location.
    std::vector<std::pair<std::string, fs::path>> inputs = {{"fact_checks", c.paths.fact_checks},
                                                            {"posts", c.paths.posts},
                                                            {"pairs", c.paths.pairs},
                                                            {"tasks", c.paths.tasks}};
    for (auto& [name, path] : inputs) canonical["paths"][name] = "";
    if (c.embedder.kind == EmbedderSpec::Kind::file) {
        inputs.emplace_back("embeddings", c.embedder.path);
        canonical["embedder"]["path"] = "";
    }
    for (std::size_t i = 0; i < c.rerankers.size(); ++i) {
        if (c.rerankers[i].kind == RerankerSpec::Kind::score_file) {
            inputs.emplace_back("scores:" + c.rerankers[i].model_name, c.rerankers[i].path);
            canonical["rerankers"][i]["path"] = "";
        }
    }
    Sha256 sha;
    sha.update(canonical.dump());
    for (const auto& [name, path] : inputs) {
        Sha256 file;
        file.update_file(path);
        sha.update("\n" + name + "=" + file.hex());
    }
    return sha.hex();
}

nlohmann::json to_json(const RunManifest& m) {
    return {{"config_hash", m.config_hash},
            {"version", m.version},
            {"artifacts", m.artifacts},
            {"timings_seconds", m.timings_seconds},
            {"warnings", m.warnings}};
}

// ---------------------------------------------------------------------------
// Inputs

ExperimentInputs load_inputs(const ExperimentConfig& config) {
    ExperimentInputs inputs;
    auto open = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw ValidationError("cannot open " + p.string());
        return in;
    };
    auto report = [&inputs](const std::string& file, const std::vector<RecordError>& errors) {
        for (const auto& e : errors) {
            inputs.warnings.push_back(file + ": rejected row " + std::to_string(e.row) + ": " + e.message);
        }
    };
    // Normalized JSON Lines (as written by `ingest`) are accepted in place of the CSV files.
    auto is_jsonl = [](const fs::path& p) { return p.extension() == ".jsonl"; };
    ParseResult<FactCheck> fcs;
    auto fc_in = open(config.paths.fact_checks);
    if (is_jsonl(config.paths.fact_checks)) {
        fcs.records = read_fact_checks_jsonl(fc_in);
    } else {
        fcs = parse_fact_checks(fc_in);
    }
    report(config.paths.fact_checks.filename().string(), fcs.errors);
    ParseResult<Post> posts;
    auto post_in = open(config.paths.posts);
    if (is_jsonl(config.paths.posts)) {
        posts.records = read_posts_jsonl(post_in);
    } else {
        posts = parse_posts(post_in);
    }
    report(config.paths.posts.filename().string(), posts.errors);
    for (const auto id : posts.flagged) inputs.warnings.push_back("post " + std::to_string(id) + " has no text or ocr");
    auto pair_in = open(config.paths.pairs);
    auto pairs = parse_pairs(pair_in);
    report(config.paths.pairs.filename().string(), pairs.errors);
    auto task_in = open(config.paths.tasks);
    inputs.split = parse_tasks(task_in);

    inputs.corpus = Corpus(std::move(posts.records), std::move(fcs.records));
    inputs.pairs = std::move(pairs.pairs);
    validate_split(inputs.split, inputs.corpus);
    validate_pairs(inputs.pairs, inputs.corpus);
    return inputs;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::string> view_languages(const ExperimentConfig& config, const TaskSplit& split) {
    if (config.track == Track::crosslingual) {
        if (!split.crosslingual) throw ValidationError("task split has no crosslingual entry");
        return {std::string(kCrosslingual)};
    }
    if (config.languages.empty()) {
        auto langs = split.languages();
        if (langs.empty()) throw ValidationError("task split has no monolingual entries");
        return langs;
    }
    for (const auto& lang : config.languages) {
        if (!split.monolingual.count(lang)) throw ConfigError("configured language '" + lang + "' is not in the task split");
    }
    return config.languages;
}

struct ComposedView {
    LanguageView view;
    std::map<PostId, std::string> post_texts;
    std::map<FactCheckId, std::string> doc_texts;
    std::vector<FactCheckId> pool_ids;
};

ComposedView compose_view(const ExperimentConfig& config, const ExperimentInputs& inputs, const std::string& language,
                          std::vector<std::string>& warnings) {
    ComposedView cv;
    cv.view = language_view(inputs.corpus, inputs.split, language, config.split);
    const CompositionPlan plan = config.effective_plan();
    const ComposeOptions options{config.strict_plan};
    for (const Post* p : cv.view.posts) {
        auto text = compose_post_text(*p, plan, options);
        if (text.empty()) warnings.push_back(language + ": post " + std::to_string(p->post_id) + " composes to empty text");
        cv.post_texts.emplace(p->post_id, std::move(text));
    }
    for (const FactCheck* f : cv.view.pool) {
        cv.doc_texts.emplace(f->fact_check_id, compose_fact_check_text(*f, plan, options));
        cv.pool_ids.push_back(f->fact_check_id);
    }
    return cv;
}

// Supplies the stage-1 operands for one view.
class ViewEmbedder {
public:
    ViewEmbedder(const ExperimentConfig& config) : config_(config) {
        if (config.embedder.kind == EmbedderSpec::Kind::file) {
            store_ = load_embeddings(config.embedder.path);
        } else if (config.embedder.kind == EmbedderSpec::Kind::remote) {
            auto remote = config.embedder.remote;
            remote.endpoint = resolve_remote_endpoint(remote.endpoint);
            remote_ = std::make_unique<RemoteEmbedder>(remote);
        }
    }

    std::string label() const {
        switch (config_.embedder.kind) {
            case EmbedderSpec::Kind::baseline: return "tfidf-baseline";
            case EmbedderSpec::Kind::file: return store_.provenance();
            case EmbedderSpec::Kind::remote: return remote_->provenance();
        }
        return "?";
    }

    struct Operands {
        std::vector<std::pair<FactCheckId, Vector>> pool;
        std::map<PostId, Vector> queries;
    };

    Operands embed(const ComposedView& cv) {
        Operands out;
        switch (config_.embedder.kind) {
            case EmbedderSpec::Kind::baseline: {
                std::vector<std::string> docs;
                docs.reserve(cv.pool_ids.size());
                for (const auto id : cv.pool_ids) docs.push_back(cv.doc_texts.at(id));
                const auto vectorizer = BaselineVectorizer::fit(docs, config_.embedder.baseline);
                for (std::size_t i = 0; i < docs.size(); ++i) out.pool.emplace_back(cv.pool_ids[i], vectorizer.embed(docs[i]));
                for (const auto& [post, text] : cv.post_texts) out.queries.emplace(post, vectorizer.embed(text));
                break;
            }
            case EmbedderSpec::Kind::file: {
                for (const auto id : cv.pool_ids) {
                    if (!store_.contains(Namespace::fact_check, id)) {
                        throw ValidationError("fact_check " + std::to_string(id) + " has no embedding in " +
                                              config_.embedder.path.string());
                    }
                    out.pool.emplace_back(id, store_.get(Namespace::fact_check, id));
                }
                for (const auto& [post, text] : cv.post_texts) out.queries.emplace(post, store_.embed(Namespace::post, post));
                break;
            }
            case EmbedderSpec::Kind::remote: {
                std::vector<std::string> docs;
                for (const auto id : cv.pool_ids) docs.push_back(cv.doc_texts.at(id));
                auto doc_vectors = remote_->embed_all(docs);
                for (std::size_t i = 0; i < docs.size(); ++i) out.pool.emplace_back(cv.pool_ids[i], std::move(doc_vectors[i]));
                std::vector<PostId> ids;
                std::vector<std::string> texts;
                for (const auto& [post, text] : cv.post_texts) {
                    ids.push_back(post);
                    texts.push_back(text);
                }
                auto query_vectors = remote_->embed_all(texts);
                for (std::size_t i = 0; i < ids.size(); ++i) out.queries.emplace(ids[i], std::move(query_vectors[i]));
                break;
            }
        }
        return out;
    }

private:
    const ExperimentConfig& config_;
    EmbeddingStore store_;
    std::unique_ptr<RemoteEmbedder> remote_;
};

template <typename F>
auto in_stage(const std::string& stage, F&& body) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const ValidationError& e) {
        throw ValidationError("stage " + stage + ": " + e.what());
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

std::string candidates_text(const Predictions& lists) {
    std::ostringstream os;
    write_candidates_jsonl(os, lists);
    return os.str();
}

Predictions truncate(const Predictions& lists, std::size_t n) {
    Predictions out = lists;
    for (auto& [post, list] : out) {
        if (list.entries.size() > n) list.entries.resize(n);
    }
    return out;
}

bool covers(const Predictions& lists, const ComposedView& cv) {
    if (lists.size() != cv.post_texts.size()) return false;
    for (const auto& [post, text] : cv.post_texts) {
        if (!lists.count(post)) return false;
    }
    return true;
}

enum class Mode { retrieval_only, full };

RunResult run(const ExperimentConfig& config, Mode mode) {
    const auto total_start = Clock::now();
    in_stage("config", [&] {
        config.validate();
        return 0;
    });
    RunResult result;
    auto& manifest = result.manifest;
    manifest.config_hash = in_stage("config", [&] { return config_hash(config); });
    result.run_dir = config.paths.out / manifest.config_hash.substr(0, 16);
    fs::create_directories(result.run_dir);

    auto t = Clock::now();
    const ExperimentInputs inputs = in_stage("ingest", [&] { return load_inputs(config); });
    manifest.timings_seconds["ingest"] = seconds_since(t);
    manifest.warnings = inputs.warnings;

    const auto languages = in_stage("ingest", [&] { return view_languages(config, inputs.split); });
    const std::string plan_label = to_string(config.effective_plan());
    const bool full = mode == Mode::full && !config.retrieval_only;

    ViewEmbedder embedder = in_stage("embed", [&] { return ViewEmbedder(config); });

    ReportRow retrieval_row{"retrieval:" + embedder.label(), plan_label, {}};
    std::map<std::string, ReportRow> reranker_rows;
    for (const auto& r : config.rerankers) reranker_rows[r.model_name] = ReportRow{r.model_name, plan_label, {}};

    // per language: model -> reranked lists
    std::map<std::string, std::map<std::string, Predictions>> reranked;
    std::map<std::string, Predictions> retrieval_top;
    std::map<std::string, ScoreTable> tables;

    if (full) {
        in_stage("rerank", [&] {
            for (const auto& r : config.rerankers) {
                if (r.kind != RerankerSpec::Kind::score_file) continue;
                std::ifstream in(r.path, std::ios::binary);
                if (!in) throw ValidationError("cannot open score file " + r.path.string());
                auto load = load_scores(in, r.model_name);
                if (!load.errors.empty()) {
                    const auto& e = load.errors.front();
                    throw ValidationError(r.path.string() + ": row " + std::to_string(e.row) + ": " + e.message +
                                          " (" + std::to_string(load.errors.size()) + " bad rows)");
                }
                if (load.duplicates) {
                    manifest.warnings.push_back(r.model_name + ": " + std::to_string(load.duplicates) +
                                                " duplicate score rows (last one kept)");
                }
                tables.emplace(r.model_name, std::move(load.table));
            }
            return 0;
        });
    }

    for (const auto& lang : languages) {
        const ComposedView cv = in_stage("compose", [&] { return compose_view(config, inputs, lang, manifest.warnings); });

        // Stage 1
        const fs::path stage1_rel = fs::path("stage1") / (lang + ".jsonl");
        const fs::path stage1_path = result.run_dir / stage1_rel;
        Predictions candidates;
        t = Clock::now();
        bool reused = false;
        if (config.reuse_stage1 && fs::exists(stage1_path)) {
            std::ifstream in(stage1_path, std::ios::binary);
            candidates = in_stage("retrieve", [&] { return read_candidates_jsonl(in); });
            reused = covers(candidates, cv);
        }
        if (!reused) {
            candidates = in_stage("retrieve", [&] {
                auto operands = embedder.embed(cv);
                const Index index = Index::from_vectors(std::move(operands.pool));
                return index.batch(operands.queries, config.k, config.workers);
            });
            write_text(stage1_path, candidates_text(candidates));
        }
        manifest.artifacts["stage1/" + lang] = stage1_rel.string();
        manifest.timings_seconds["retrieve/" + lang] = seconds_since(t);

        retrieval_top[lang] = truncate(candidates, kVoteWindow);
        retrieval_row.scores[lang] = in_stage("eval", [&] {
            return 100.0 * success_at_k(to_prediction_set(retrieval_top[lang]), inputs.pairs, kVoteWindow);
        });
        if (!full) continue;

        // Stage 2
        t = Clock::now();
        for (const auto& r : config.rerankers) {
            Predictions lists = in_stage("rerank", [&] {
                const RerankOptions options{r.top_n, config.missing_scores};
                RerankStats stats;
                Predictions out;
                if (r.kind == RerankerSpec::Kind::lexical_baseline) {
                    std::map<FactCheckId, std::string> docs;
                    for (const auto& [post, list] : candidates) {
                        for (const auto& e : list.entries) docs.emplace(e.fact_check_id, cv.doc_texts.at(e.fact_check_id));
                    }
                    const LexicalScorer scorer(cv.post_texts, std::move(docs), r.model_name);
                    out = rerank_all(candidates, scorer, options, &stats);
                } else {
                    out = rerank_all(candidates, tables.at(r.model_name), options, &stats);
                }
                if (stats.fallbacks) {
                    manifest.warnings.push_back(r.model_name + "/" + lang + ": " + std::to_string(stats.fallbacks) +
                                                " pairs fell back to retrieval scores");
                }
                return out;
            });
            const fs::path rel = fs::path("stage2") / r.model_name / (lang + ".jsonl");
            write_text(result.run_dir / rel, candidates_text(lists));
            manifest.artifacts["stage2/" + r.model_name + "/" + lang] = rel.string();
            reranker_rows[r.model_name].scores[lang] = in_stage("eval", [&] {
                return 100.0 * success_at_k(to_prediction_set(lists), inputs.pairs, kVoteWindow);
            });
            reranked[lang].emplace(r.model_name, std::move(lists));
        }
        manifest.timings_seconds["rerank/" + lang] = seconds_since(t);
    }

    result.report.track = config.track;
    result.report.rows.push_back(retrieval_row);

    PredictionSet submission;
    if (full) {
        // Stage 3
        t = Clock::now();
        result.weights = in_stage("fuse", [&] {
            if (!config.fusion.external_weights.empty()) return config.fusion.external_weights;
            std::map<std::string, double> dev;
            bool any_signal = false;
            for (const auto& [model, row] : reranker_rows) {
                dev[model] = row.average() / 100.0;
                any_signal = any_signal || dev[model] > 0.0;
            }
            if (!any_signal) {
                manifest.warnings.push_back("every reranker scored 0 on the split; voting with uniform weights");
                std::map<std::string, double> uniform;
                for (const auto& [model, s] : dev) uniform[model] = 1.0 / static_cast<double>(dev.size());
                return uniform;
            }
            return weight_map(compute_weights(dev, config.fusion.weighting));
        });
        ReportRow voting{"Voting", plan_label, {}};
        for (const auto& lang : languages) {
            const Predictions fused =
                in_stage("fuse", [&] { return fuse_run(reranked.at(lang), result.weights, config.fusion.vote); });
            const fs::path rel = fs::path("stage3") / (lang + ".jsonl");
            write_text(result.run_dir / rel, candidates_text(fused));
            manifest.artifacts["stage3/" + lang] = rel.string();
            voting.scores[lang] = in_stage("eval", [&] {
                return 100.0 * success_at_k(to_prediction_set(fused), inputs.pairs, kVoteWindow);
            });
            for (const auto& [post, ids] : to_prediction_set(fused)) submission[post] = ids;
        }
        manifest.timings_seconds["fuse"] = seconds_since(t);
        for (const auto& r : config.rerankers) result.report.rows.push_back(reranker_rows.at(r.model_name));
        result.report.rows.push_back(voting);
    } else {
        for (const auto& [lang, lists] : retrieval_top) {
            for (const auto& [post, ids] : to_prediction_set(lists)) submission[post] = ids;
        }
    }

    const std::string submission_name = config.track == Track::monolingual ? "monolingual_predictions.json"
                                                                           : "crosslingual_predictions.json";
    write_text(result.run_dir / submission_name, submission_json(submission).dump() + "\n");
    manifest.artifacts["submission"] = submission_name;
    write_text(result.run_dir / "report.json", to_json(result.report).dump(2) + "\n");
    write_text(result.run_dir / "report.txt", render_table(result.report));
    manifest.artifacts["report"] = "report.json";
    manifest.artifacts["report_table"] = "report.txt";
    write_text(result.run_dir / "config.json", to_json(config).dump(2) + "\n");
    manifest.artifacts["config"] = "config.json";
    manifest.timings_seconds["total"] = seconds_since(total_start);
    write_text(result.run_dir / "manifest.json", to_json(manifest).dump(2) + "\n");
    result.submission = std::move(submission);
    return result;
}

}  // namespace

EmbeddingStore build_embeddings(const ExperimentConfig& config, const ExperimentInputs& inputs) {
    ViewEmbedder embedder(config);
    std::vector<std::string> warnings;
    std::optional<EmbeddingStore> store;
    for (const auto& lang : view_languages(config, inputs.split)) {
        const ComposedView cv = compose_view(config, inputs, lang, warnings);
        auto operands = embedder.embed(cv);
        if (!store) {
            const auto dim = operands.pool.empty() ? operands.queries.begin()->second.dim() : operands.pool.front().second.dim();
            store.emplace(dim, embedder.label());
        }
        for (auto& [id, v] : operands.pool) {
            if (!store->contains(Namespace::fact_check, id)) store->insert(Namespace::fact_check, id, std::move(v));
        }
        for (auto& [id, v] : operands.queries) {
            if (!store->contains(Namespace::post, id)) store->insert(Namespace::post, id, std::move(v));
        }
    }
    if (!store) throw ValidationError("nothing to embed");
    return std::move(*store);
}

RunResult run_retrieval_experiment(const ExperimentConfig& config) { return run(config, Mode::retrieval_only); }

RunResult run_full_pipeline(const ExperimentConfig& config) { return run(config, Mode::full); }

RunResult crosslingual_mode(const ExperimentConfig& config) {
    if (config.track != Track::crosslingual) {
        throw ConfigError("crosslingual mode requires track = crosslingual");
    }
    return run(config, Mode::full);
}

}  // namespace claimstage
