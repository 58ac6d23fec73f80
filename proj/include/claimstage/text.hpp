// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace claimstage {

bool is_valid_utf8(std::string_view text);

/// Appends the UTF-8 encoding of `code_point`. Throws ValidationError for surrogates and
/// values above U+10FFFF.
void append_utf8(std::string& out, std::uint32_t code_point);

/// NFKC normalization followed by root-locale lowercasing. Invalid UTF-8 throws ValidationError.
std::string fold_text(std::string_view text);

/// Character n-grams (code points) of `text`, for each n in [n_min, n_max], in order of
/// occurrence. Each gram is returned as its UTF-8 byte string. No folding is applied.
std::vector<std::string> char_ngrams(std::string_view text, int n_min, int n_max);

/// 64-bit FNV-1a. Stable across platforms; used for feature hashing.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace claimstage
