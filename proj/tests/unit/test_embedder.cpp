// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <set>
#include <sstream>

#include "claimstage/embedder.hpp"
#include "claimstage/errors.hpp"
#include "claimstage/text.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace claimstage;

namespace {

BaselineVectorizer fit(std::vector<std::string> docs, BaselineVectorizerConfig cfg = {}) {
    return BaselineVectorizer::fit(docs, cfg);
}

std::set<std::uint32_t> buckets_of(const BaselineVectorizer& v, const std::string& text) {
    std::set<std::uint32_t> out;
    for (const auto& g : char_ngrams(fold_text(text), 3, 5)) out.insert(v.bucket(g));
    return out;
}

}  // namespace

TEST_CASE("config validation") {
    CHECK_NOTHROW(BaselineVectorizerConfig{}.validate());
    CHECK_THROWS_AS((BaselineVectorizerConfig{3, 5, 1000}.validate()), ConfigError);
    CHECK_THROWS_AS((BaselineVectorizerConfig{5, 3, 1024}.validate()), ConfigError);
    CHECK_THROWS_AS((BaselineVectorizerConfig{0, 3, 1024}.validate()), ConfigError);
}

TEST_CASE("fit: disjoint documents give one shared idf") {
    const auto v = fit({"abcde", "vwxyz"});
    // Smoothed idf with N = 2 and df = 1 for every gram.
    const double expected = std::log(3.0 / 2.0) + 1.0;
    for (const auto& text : {"abcde", "vwxyz"}) {
        for (const auto b : buckets_of(v, text)) {
            CHECK(v.document_frequency(b) == 1);
            CHECK(v.idf(b) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
    CHECK(v.document_count() == 2);
}

TEST_CASE("fit: determinism, single document, errors") {
    CHECK(fit({"one doc", "two docs"}).state_bytes() == fit({"one doc", "two docs"}).state_bytes());
    const auto single = fit({"misinformation"});
    for (const auto b : buckets_of(single, "misinformation")) CHECK(single.document_frequency(b) == 1);
    CHECK_THROWS_AS(fit({}), ValidationError);
    CHECK_THROWS_AS(fit({"", "ab", "  "}).dim(), ValidationError);
}

TEST_CASE("bucket is FNV-1a masked to the hash dimension") {
    const auto v = fit({"abc"}, BaselineVectorizerConfig{3, 5, 1024});
    CHECK(v.bucket("abc") == (fnv1a64("abc") & 1023u));
}

TEST_CASE("embed: deterministic, unit length, disjoint support") {
    const auto v = fit({"abcde", "vwxyz", "misinformation spreads fast"});
    const auto a = v.embed("abcde");
    CHECK(a == v.embed("abcde"));
    CHECK(std::abs(a.norm() - 1.0) < 1e-5);
    CHECK(cosine(a, v.embed("vwxyz")) == 0.0);
    CHECK(v.embed("ab").is_zero());
}

// Reference values from tests/oracles/tfidf_cosine.py (string-keyed, no hashing).
TEST_CASE("embed: cosine matches the independent TF-IDF oracle") {
    const std::string a = "misinformation spreads fast";
    const std::string b = "misinformation spreads fast!";
    const auto pair = fit({a, b});
    // The oracle has no hashing; make sure these grams do not collide at 2^18.
    std::set<std::string> grams;
    for (const auto& t : {a, b}) {
        for (const auto& g : char_ngrams(fold_text(t), 3, 5)) grams.insert(g);
    }
    std::set<std::uint32_t> buckets;
    for (const auto& g : grams) buckets.insert(pair.bucket(g));
    REQUIRE(buckets.size() == grams.size());

    CHECK(cosine(pair.embed(a), pair.embed(b)) == doctest::Approx(0.961225018).epsilon(1e-5));
    const auto pool = fit({a, b, "the weather is nice today", "spreads of butter"});
    CHECK(cosine(pool.embed(a), pool.embed(b)) == doctest::Approx(0.965736892).epsilon(1e-5));
    CHECK(cosine(pool.embed(a), pool.embed("spreads of butter")) == doctest::Approx(0.164775553).epsilon(1e-5));
}

TEST_CASE("property: vector depends only on the bag of n-grams") {
    const auto v = fit({"claims about vaccines", "a claim about elections", "weather report"});
    std::mt19937_64 rng(9);
    for (const std::string text : {"claims about vaccines spread", "report report report", "a"}) {
        auto grams = char_ngrams(fold_text(text), 3, 5);
        std::shuffle(grams.begin(), grams.end(), rng);
        std::map<std::uint32_t, int> tf;
        for (const auto& g : grams) ++tf[v.bucket(g)];
        std::vector<std::pair<std::uint32_t, float>> entries;
        for (const auto& [b, c] : tf) {
            entries.emplace_back(b, static_cast<float>((1.0 + std::log(static_cast<double>(c))) * v.idf(b)));
        }
        std::reverse(entries.begin(), entries.end());
        CHECK(Vector::sparse(v.dim(), entries).normalized() == v.embed(text));
    }
}

TEST_CASE("embedding store") {
    EmbeddingStore store(3, "baseline");
    store.insert(Namespace::post, 1, Vector::dense({3, 0, 4}));
    store.insert(Namespace::fact_check, 1, Vector::dense({1, 0, 0}));
    CHECK(store.size() == 2);
    CHECK_THROWS_AS(store.insert(Namespace::post, 1, Vector::dense({1, 1, 1})), ContractError);
    CHECK_THROWS_AS(store.insert(Namespace::post, 2, Vector::dense({1, 1})), ContractError);
    CHECK_THROWS_AS((void)store.get(Namespace::post, 9), LookupError);
    const auto e = store.embed(Namespace::post, 1);
    CHECK(e.values()[0] == doctest::Approx(0.6f));
    CHECK(e.values()[2] == doctest::Approx(0.8f));
}

namespace {

EmbeddingStore sample_store() {
    EmbeddingStore store(4, "remote:http://127.0.0.1:1#m");
    store.insert(Namespace::fact_check, 7, Vector::dense({0.5f, -1.25f, 3e-8f, 2.0f}));
    store.insert(Namespace::post, 7, Vector::dense({1, 2, 3, 4}));
    store.insert(Namespace::post, 2, Vector::sparse(4, {{1, 1.0f}}));
    return store;
}

std::string bytes_of(const EmbeddingStore& store) {
    std::ostringstream os;
    write_embeddings(store, os);
    return os.str();
}

std::uint64_t format_offset(const std::string& bytes) {
    std::istringstream in(bytes);
    try {
        read_embeddings(in, "x");
    } catch (const FormatError& e) {
        return e.offset();
    }
    FAIL("expected a format error");
    return 0;
}

}  // namespace

TEST_CASE("embedding file: bit-exact layout") {
    EmbeddingStore store(2, "baseline");
    store.insert(Namespace::fact_check, 258, Vector::dense({1.0f, -2.0f}));
    const auto bytes = bytes_of(store);
    const std::string expected = std::string("CSEB") + std::string("\x01\x00\x00\x00", 4) +
                                 std::string("\x02\x00\x00\x00", 4) + std::string("\x01\0\0\0\0\0\0\0", 8) +
                                 std::string("\x01", 1) + std::string("\x02\x01\0\0\0\0\0\0", 8) +
                                 std::string("\x00\x00\x80\x3f", 4) + std::string("\x00\x00\x00\xc0", 4);
    CHECK(bytes == expected);
}

TEST_CASE("embedding file: round trip and provenance") {
    const auto store = sample_store();
    test_support::TempDir dir("cseb");
    const auto path = dir.path() / "vectors.cseb";
    save_embeddings(store, path);
    const auto loaded = load_embeddings(path);
    CHECK(loaded == store);
    CHECK(loaded.provenance() == store.provenance());

    std::filesystem::remove(path.string() + ".meta.json");
    CHECK(load_embeddings(path).provenance() == "file:" + path.string());

    const EmbeddingStore empty(16, "baseline");
    const auto empty_bytes = bytes_of(empty);
    CHECK(empty_bytes.size() == 20);
    std::istringstream in(empty_bytes);
    CHECK(read_embeddings(in, "baseline") == empty);
}

TEST_CASE("embedding file: malformed input names the byte offset") {
    const auto good = bytes_of(sample_store());
    const std::size_t header = 20;
    const std::size_t record = 1 + 8 + 4 * 4;

    // Truncated in the middle of the second record's vector.
    CHECK(format_offset(good.substr(0, header + record + 9 + 6)) == header + record + 9 + 4);
    CHECK(format_offset(good.substr(0, 10)) == 8);

    auto bad_magic = good;
    bad_magic[0] = 'X';
    CHECK(format_offset(bad_magic) == 0);

    auto bad_version = good;
    bad_version[4] = 2;
    CHECK(format_offset(bad_version) == 4);

    CHECK(format_offset(good + "z") == good.size());

    auto bad_namespace = good;
    bad_namespace[header] = 5;
    CHECK(format_offset(bad_namespace) == header);

    auto nan_value = good;
    const float nan = std::nanf("");
    std::memcpy(&nan_value[header + 9], &nan, 4);
    CHECK(format_offset(nan_value) == header + 9);

    // Second record rewritten with the first record's key.
    auto duplicate = good;
    std::copy_n(good.begin() + header, 9, duplicate.begin() + header + record);
    CHECK(format_offset(duplicate) == header + record);

    auto zero_dim = good;
    std::memset(&zero_dim[8], 0, 4);
    CHECK(format_offset(zero_dim) == 8);
}
