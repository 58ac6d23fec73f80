// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "claimstage/corpus.hpp"
#include "claimstage/embedder.hpp"
#include "claimstage/eval.hpp"
#include "claimstage/fusion.hpp"
#include "claimstage/reranker.hpp"
#include "claimstage/retriever.hpp"

namespace claimstage {

inline constexpr const char* kVersion = "0.3.0";

struct EmbedderSpec {
    enum class Kind { baseline, file, remote };
    Kind kind = Kind::baseline;
    BaselineVectorizerConfig baseline;
    std::filesystem::path path;  // file
    RemoteEmbedderConfig remote;  // remote
};

struct RerankerSpec {
    enum class Kind { score_file, lexical_baseline };
    Kind kind = Kind::lexical_baseline;
    std::string model_name = "lexical";
    std::filesystem::path path;  // score_file
    std::size_t top_n = kDefaultTopN;
};

struct FusionSpec {
    VoteOptions vote;
    WeightOptions weighting;
    /// When non-empty, used instead of dev-derived weights.
    std::map<std::string, double> external_weights;
};

struct ExperimentPaths {
    std::filesystem::path fact_checks;
    std::filesystem::path posts;
    std::filesystem::path pairs;
    std::filesystem::path tasks;
    std::filesystem::path out = "runs";
};

struct ExperimentConfig {
    Track track = Track::monolingual;
    std::vector<std::string> languages;  // empty: every language of the split
    std::optional<CompositionPlan> plan;  // default OT (monolingual) or T (crosslingual)
    bool strict_plan = false;
    EmbedderSpec embedder;
    std::size_t k = kDefaultCandidateCount;
    bool retrieval_only = false;
    std::vector<RerankerSpec> rerankers;
    MissingScorePolicy missing_scores = MissingScorePolicy::fail;
    FusionSpec fusion;
    ExperimentPaths paths;
    SplitSide split = SplitSide::dev;
    std::uint64_t seed = 0;
    // Execution knobs; they never change outputs and are excluded from the config hash.
    unsigned workers = 1;
    bool reuse_stage1 = true;

    CompositionPlan effective_plan() const;
    /// Throws ConfigError.
    void validate() const;
};

/// Reads a JSON config. Relative paths are resolved against the config file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const ExperimentConfig& config);

/// SHA-256 over the canonical config (execution knobs excluded) and the bytes of every input
/// file it names. Hex encoded.
std::string config_hash(const ExperimentConfig& config);

struct RunManifest {
    std::string config_hash;
    std::string version = kVersion;
    std::map<std::string, std::string> artifacts;  // name -> path relative to the run directory
    std::map<std::string, double> timings_seconds;
    std::vector<std::string> warnings;
};

nlohmann::json to_json(const RunManifest& manifest);

struct RunResult {
    EvaluationReport report;
    RunManifest manifest;
    std::filesystem::path run_dir;
    PredictionSet submission;
    std::map<std::string, double> weights;  // fusion weights actually used
};

/// Loaded, validated inputs for a config.
struct ExperimentInputs {
    Corpus corpus;
    PairSet pairs;
    TaskSplit split;
    std::vector<std::string> warnings;
};

ExperimentInputs load_inputs(const ExperimentConfig& config);

/// Composes and embeds every post and pool document the config touches.
EmbeddingStore build_embeddings(const ExperimentConfig& config, const ExperimentInputs& inputs);

/// Stage 1 only; the report holds one retrieval row.
RunResult run_retrieval_experiment(const ExperimentConfig& config);
/// Retrieval, every configured reranker, weighted voting, evaluation and submission files.
RunResult run_full_pipeline(const ExperimentConfig& config);
/// run_full_pipeline for a crosslingual config; any other track raises ConfigError.
RunResult crosslingual_mode(const ExperimentConfig& config);

}  // namespace claimstage
