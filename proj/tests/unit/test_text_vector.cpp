// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "claimstage/errors.hpp"
#include "claimstage/text.hpp"
#include "claimstage/vector.hpp"
#include "doctest.h"

using namespace claimstage;

TEST_CASE("fold_text applies NFKC then lowercase") {
    CHECK(fold_text("\xEF\xAC\x81" "le") == "file");            // U+FB01 ligature
    CHECK(fold_text("\xEF\xBC\xA1\xEF\xBC\xA2") == "ab");      // full-width A B
    CHECK(fold_text("\xC3\x89T\xC3\x89") == "\xC3\xA9t\xC3\xA9");  // ÉTÉ
    CHECK(fold_text("E\xCC\x81") == "\xC3\xA9");                // combining acute composes
    CHECK(fold_text("").empty());
}

TEST_CASE("char_ngrams counts code points, not bytes") {
    CHECK(char_ngrams("abcde", 3, 5) == std::vector<std::string>{"abc", "bcd", "cde", "abcd", "bcde", "abcde"});
    CHECK(char_ngrams("ab", 3, 5).empty());
    const auto thai = char_ngrams("\xE0\xB9\x84\xE0\xB8\x97\xE0\xB8\xA2", 3, 3);  // three code points
    REQUIRE(thai.size() == 1);
    CHECK(thai[0].size() == 9);
}

TEST_CASE("utf8 helpers") {
    CHECK(is_valid_utf8("plain"));
    CHECK(is_valid_utf8("\xF0\x9F\x98\x80"));
    CHECK_FALSE(is_valid_utf8("\xC3"));
    CHECK_FALSE(is_valid_utf8("\xED\xA0\x80"));  // surrogate
    std::string s;
    append_utf8(s, 0x1F600);
    CHECK(s == "\xF0\x9F\x98\x80");
}

TEST_CASE("fnv1a64 reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("vector construction") {
    CHECK_THROWS_AS(Vector::dense({}), ContractError);
    CHECK_THROWS_AS(Vector::dense({1.0f, std::nanf("")}), ContractError);
    CHECK_THROWS_AS(Vector::dense({INFINITY}), ContractError);
    const auto s = Vector::sparse(8, {{5, 1.0f}, {2, 2.0f}, {5, 0.5f}, {7, 0.0f}});
    CHECK(s.dim() == 8);
    CHECK(std::vector<std::uint32_t>(s.indices().begin(), s.indices().end()) == std::vector<std::uint32_t>{2, 5});
    CHECK(std::vector<float>(s.values().begin(), s.values().end()) == std::vector<float>{2.0f, 1.5f});
    CHECK_THROWS_AS(Vector::sparse(4, {{4, 1.0f}}), ContractError);
    CHECK(s == Vector::dense({0, 0, 2.0f, 0, 0, 1.5f, 0, 0}));
}

TEST_CASE("dot and cosine") {
    const auto a = Vector::dense({1, 2, 3});
    const auto b = Vector::sparse(3, {{0, 1.0f}, {2, -1.0f}});
    CHECK(dot(a, b) == doctest::Approx(-2.0));
    CHECK(dot(b, a) == doctest::Approx(-2.0));
    CHECK(cosine(a, a) == doctest::Approx(1.0));
    CHECK(cosine(a, Vector::sparse(3, {})) == 0.0);
    CHECK_THROWS_AS(dot(a, Vector::dense({1, 2})), ContractError);
}

TEST_CASE("property: normalization is unit length and idempotent") {
    std::mt19937_64 rng(3);
    auto uniform = [&] { return static_cast<float>(static_cast<double>(rng() % 2000001) / 1000000.0 - 1.0); };
    for (int i = 0; i < 500; ++i) {
        const auto dim = 1 + rng() % 64;
        std::vector<float> values(dim);
        for (auto& v : values) v = uniform() * static_cast<float>(1 + rng() % 1000);
        for (const auto& v : {Vector::dense(values), Vector::sparse(static_cast<std::uint32_t>(dim), [&] {
                                  std::vector<std::pair<std::uint32_t, float>> e;
                                  for (std::uint32_t j = 0; j < dim; ++j) e.emplace_back(j, values[j]);
                                  return e;
                              }())}) {
            const auto n = v.normalized();
            if (v.is_zero()) {
                CHECK(n.is_zero());
                continue;
            }
            CHECK(std::abs(n.norm() - 1.0) <= 1e-5);
            CHECK(n.normalized() == n);
        }
    }
    const auto zero = Vector::dense({0, 0, 0});
    CHECK(zero.normalized() == zero);
    CHECK(zero.is_zero());
}
