// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#include "claimstage/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <random>

#include "claimstage/errors.hpp"
#include "claimstage/eval.hpp"

namespace claimstage {

namespace {

// Raw engine output only: std distributions differ between standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

private:
    std::mt19937_64 engine_;
};

struct Alphabet {
    std::vector<std::string> onsets;
    std::vector<std::string> nuclei;
};

std::vector<std::string> make_vocabulary(Rng& rng, const Alphabet& a, std::size_t size) {
    std::vector<std::string> words;
    words.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        std::string w;
        const std::size_t syllables = 2 + rng.below(3);
        for (std::size_t s = 0; s < syllables; ++s) {
            w += a.onsets[rng.below(a.onsets.size())];
            w += a.nuclei[rng.below(a.nuclei.size())];
        }
        words.push_back(std::move(w));
    }
    return words;
}

std::string sentence(Rng& rng, const std::vector<std::string>& vocabulary, std::size_t words) {
    std::string out;
    for (std::size_t i = 0; i < words; ++i) {
        if (i) out.push_back(' ');
        out += vocabulary[rng.below(vocabulary.size())];
    }
    return out;
}

}  // namespace

SyntheticCorpus make_synthetic_corpus(const SyntheticSpec& spec) {
    const auto& codes = canonical_languages();
    if (spec.languages == 0 || spec.languages > codes.size()) {
        throw ConfigError("synthetic corpus supports 1.." + std::to_string(codes.size()) + " languages");
    }
    const std::size_t pool_size = spec.fact_checks / spec.languages;
    if (pool_size < spec.posts_per_language || spec.words_per_text == 0) {
        throw ConfigError("synthetic corpus needs at least one fact-check per dev post in every language");
    }

    Rng rng(spec.seed);
    const Alphabet latin{{"b", "c", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"},
                         {"a", "e", "i", "o", "u"}};
    const Alphabet cyrillic{{"б", "в", "г", "д", "ж", "з", "к", "л", "м", "н", "п", "р"}, {"а", "е", "и", "о", "у", "ы"}};
    const auto english = make_vocabulary(rng, latin, 4000);
    std::vector<std::vector<std::string>> native;
    for (std::size_t l = 0; l < spec.languages; ++l) native.push_back(make_vocabulary(rng, latin, 4000));
    const auto unrelated = make_vocabulary(rng, cyrillic, 500);

    // Shuffled ids so gold claims are not systematically the smallest ids.
    std::vector<FactCheckId> fc_ids(pool_size * spec.languages);
    for (std::size_t i = 0; i < fc_ids.size(); ++i) fc_ids[i] = 1000 + i;
    for (std::size_t i = fc_ids.size(); i > 1; --i) std::swap(fc_ids[i - 1], fc_ids[rng.below(i)]);

    std::vector<FactCheck> fact_checks;
    std::vector<Post> posts;
    SyntheticCorpus out;
    PostId next_post = 1;
    TaskEntry cross;

    auto tuple = [&](std::size_t lang) {
        LangTuple t;
        t.original = sentence(rng, native[lang], spec.words_per_text);
        if (!spec.drop_translations) t.translation = sentence(rng, english, spec.words_per_text);
        t.languages = {{codes[lang], 1.0}};
        return t;
    };

    for (std::size_t lang = 0; lang < spec.languages; ++lang) {
        TaskEntry entry;
        std::vector<LangTuple> gold_claims;
        for (std::size_t j = 0; j < pool_size; ++j) {
            FactCheck fc;
            fc.fact_check_id = fc_ids[lang * pool_size + j];
            fc.claim = tuple(lang);
            if (j >= spec.posts_per_language) fc.title = tuple(lang);
            entry.fact_checks.push_back(fc.fact_check_id);
            fact_checks.push_back(std::move(fc));
        }
        for (std::size_t j = 0; j < spec.posts_per_language; ++j) {
            FactCheck& gold = fact_checks[fact_checks.size() - pool_size + j];
            Post post;
            post.post_id = next_post++;
            post.text = gold.claim;
            post.verdicts = {"False information"};
            post.instances = "[(" + std::to_string(1600000000 + post.post_id) + ", 'fb')]";
            if (spec.unrelated_gold) {
                gold.claim.original = sentence(rng, unrelated, spec.words_per_text);
                if (gold.claim.translation) gold.claim.translation = sentence(rng, unrelated, spec.words_per_text);
            }
            out.pairs.insert(post.post_id, gold.fact_check_id);
            entry.posts_dev.push_back(post.post_id);
            cross.posts_dev.push_back(post.post_id);
            posts.push_back(std::move(post));
        }
        for (std::size_t j = 0; j < spec.train_posts_per_language; ++j) {
            Post post;
            post.post_id = next_post++;
            post.ocr = {tuple(lang)};
            const FactCheckId target = entry.fact_checks[rng.below(entry.fact_checks.size())];
            out.pairs.insert(post.post_id, target);
            entry.posts_train.push_back(post.post_id);
            cross.posts_train.push_back(post.post_id);
            posts.push_back(std::move(post));
        }
        out.split.monolingual[codes[lang]] = std::move(entry);
    }
    if (spec.with_crosslingual) out.split.crosslingual = std::move(cross);
    out.corpus = Corpus(std::move(posts), std::move(fact_checks));
    return out;
}

CorpusFiles write_corpus_files(const SyntheticCorpus& data, const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    CorpusFiles files{directory / "fact_checks.csv", directory / "posts.csv", directory / "pairs.csv",
                      directory / "tasks.json"};
    {
        std::ofstream out(files.fact_checks, std::ios::binary);
        write_fact_checks_csv(out, data.corpus.fact_checks());
    }
    {
        std::ofstream out(files.posts, std::ios::binary);
        write_posts_csv(out, data.corpus.posts());
    }
    {
        std::ofstream out(files.pairs, std::ios::binary);
        write_pairs_csv(out, data.pairs);
    }
    {
        std::ofstream out(files.tasks, std::ios::binary);
        out << to_json(data.split).dump(2) << '\n';
    }
    return files;
}

}  // namespace claimstage
