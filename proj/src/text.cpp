// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#include "claimstage/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "claimstage/errors.hpp"

namespace claimstage {

bool is_valid_utf8(std::string_view text) {
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(text.data());
    const auto length = static_cast<std::int32_t>(text.size());
    std::int32_t i = 0;
    while (i < length) {
        UChar32 c;
        U8_NEXT(bytes, i, length, c);
        if (c < 0) return false;
    }
    return true;
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        throw ValidationError("invalid code point U+" + std::to_string(cp));
    }
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string fold_text(std::string_view text) {
    if (!is_valid_utf8(text)) {
        throw ValidationError("text is not valid UTF-8");
    }
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfkc = icu::Normalizer2::getNFKCInstance(status);
    if (U_FAILURE(status)) {
        throw Error(std::string("ICU NFKC unavailable: ") + u_errorName(status));
    }
    const auto source = icu::UnicodeString::fromUTF8(
        icu::StringPiece(text.data(), static_cast<std::int32_t>(text.size())));
    icu::UnicodeString normalized = nfkc->normalize(source, status);
    if (U_FAILURE(status)) {
        throw Error(std::string("NFKC normalization failed: ") + u_errorName(status));
    }
    normalized.toLower(icu::Locale::getRoot());
    std::string out;
    normalized.toUTF8String(out);
    return out;
}

std::vector<std::string> char_ngrams(std::string_view text, int n_min, int n_max) {
    // byte offset of every code point start, plus the end
    std::vector<std::size_t> starts;
    starts.reserve(text.size() + 1);
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(text.data());
    const auto length = static_cast<std::int32_t>(text.size());
    std::int32_t i = 0;
    while (i < length) {
        starts.push_back(static_cast<std::size_t>(i));
        UChar32 c;
        U8_NEXT(bytes, i, length, c);
    }
    const std::size_t count = starts.size();
    starts.push_back(text.size());

    std::vector<std::string> grams;
    for (int n = n_min; n <= n_max; ++n) {
        const auto width = static_cast<std::size_t>(n);
        if (width == 0 || count < width) continue;
        for (std::size_t s = 0; s + width <= count; ++s) {
            grams.emplace_back(text.substr(starts[s], starts[s + width] - starts[s]));
        }
    }
    return grams;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const char ch : bytes) {
        hash ^= static_cast<std::uint8_t>(ch);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

}  // namespace claimstage
