// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "claimstage/corpus.hpp"

namespace claimstage {

/// Generated monolingual corpus used by tests, the acceptance suite and the CLI demo.
/// Fact-checks are split evenly across languages; the first `posts_per_language` of each
/// language pool are gold claims, one per dev post, and each post copies its gold claim.
struct SyntheticSpec {
    std::size_t languages = 8;
    std::size_t posts_per_language = 50;
    std::size_t train_posts_per_language = 5;
    std::size_t fact_checks = 2000;
    std::size_t words_per_text = 12;
    std::uint64_t seed = 7;
    /// Replace every gold claim with text sharing no characters with its post.
    bool unrelated_gold = false;
    /// Leave translations out so plans O and T coincide.
    bool drop_translations = false;
    /// Also write a crosslingual entry whose dev posts are all monolingual dev posts.
    bool with_crosslingual = true;
};

struct SyntheticCorpus {
    Corpus corpus;
    PairSet pairs;
    TaskSplit split;
};

SyntheticCorpus make_synthetic_corpus(const SyntheticSpec& spec);

struct CorpusFiles {
    std::filesystem::path fact_checks;
    std::filesystem::path posts;
    std::filesystem::path pairs;
    std::filesystem::path tasks;
};

/// Writes fact_checks.csv, posts.csv, pairs.csv and tasks.json into `directory`.
CorpusFiles write_corpus_files(const SyntheticCorpus& data, const std::filesystem::path& directory);

}  // namespace claimstage
