// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#include "claimstage/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "claimstage/errors.hpp"
#include "claimstage/text.hpp"
#include "csv.hpp"

namespace claimstage {

namespace {

// Recursive-descent reader for the Python-literal fields found in the task CSVs.
class LiteralCursor {
public:
    explicit LiteralCursor(std::string_view text) : text_(text) {}

    void skip_ws() {
        while (pos_ < text_.size() &&
               (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r')) {
            ++pos_;
        }
    }

    bool at_end() {
        skip_ws();
        return pos_ >= text_.size();
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    bool accept(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            fail(std::string("expected '") + c + "'");
        }
    }

    std::string quoted_string() {
        const char quote = peek();
        if (quote != '\'' && quote != '"') {
            fail("expected quoted string");
        }
        ++pos_;
        std::string out;
        while (true) {
            if (pos_ >= text_.size()) fail("unterminated string");
            const char ch = text_[pos_++];
            if (ch == quote) break;
            if (ch != '\\') {
                out.push_back(ch);
                continue;
            }
            if (pos_ >= text_.size()) fail("dangling backslash");
            const char esc = text_[pos_++];
            switch (esc) {
                case '\\': out.push_back('\\'); break;
                case '\'': out.push_back('\''); break;
                case '"': out.push_back('"'); break;
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case 'r': out.push_back('\r'); break;
                case 'b': out.push_back('\b'); break;
                case 'f': out.push_back('\f'); break;
                case 'v': out.push_back('\v'); break;
                case 'a': out.push_back('\a'); break;
                case '0': out.push_back('\0'); break;
                case 'x': append_utf8(out, hex_digits(2)); break;
                case 'u': append_utf8(out, hex_digits(4)); break;
                case 'U': append_utf8(out, hex_digits(8)); break;
                default:
                    // unknown escapes are kept literally, as Python does
                    out.push_back('\\');
                    out.push_back(esc);
            }
        }
        if (!is_valid_utf8(out)) fail("string is not valid UTF-8");
        return out;
    }

    double number() {
        skip_ws();
        const char* begin = text_.data() + pos_;
        const char* end = text_.data() + text_.size();
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc() || ptr == begin) fail("expected number");
        pos_ += static_cast<std::size_t>(ptr - begin);
        return value;
    }

    [[noreturn]] void fail(const std::string& message) const {
        throw ValidationError(message + " at offset " + std::to_string(pos_));
    }

private:
    std::uint32_t hex_digits(int count) {
        std::uint32_t value = 0;
        for (int i = 0; i < count; ++i) {
            if (pos_ >= text_.size()) fail("truncated hex escape");
            const char ch = text_[pos_++];
            value <<= 4;
            if (ch >= '0' && ch <= '9') value |= static_cast<std::uint32_t>(ch - '0');
            else if (ch >= 'a' && ch <= 'f') value |= static_cast<std::uint32_t>(ch - 'a' + 10);
            else if (ch >= 'A' && ch <= 'F') value |= static_cast<std::uint32_t>(ch - 'A' + 10);
            else fail("bad hex escape");
        }
        return value;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

bool valid_language_code(const std::string& code) {
    return !code.empty() &&
           std::all_of(code.begin(), code.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

LangTuple read_tuple(LiteralCursor& cur) {
    LangTuple tuple;
    cur.expect('(');
    tuple.original = cur.quoted_string();
    cur.expect(',');
    std::string translation = cur.quoted_string();
    if (!is_missing(translation)) tuple.translation = std::move(translation);
    if (cur.accept(',')) {
        if (cur.peek() != ')') {
            cur.expect('[');
            if (!cur.accept(']')) {
                do {
                    cur.expect('(');
                    std::string code = cur.quoted_string();
                    cur.expect(',');
                    const double confidence = cur.number();
                    cur.expect(')');
                    if (!valid_language_code(code)) cur.fail("bad language code '" + code + "'");
                    if (!(confidence >= 0.0 && confidence <= 1.0)) cur.fail("confidence outside [0,1]");
                    tuple.languages.emplace_back(std::move(code), confidence);
                } while (cur.accept(','));
                cur.expect(']');
            }
        }
    }
    cur.expect(')');
    return tuple;
}

template <typename F>
auto parse_whole(std::string_view field, F&& read) {
    LiteralCursor cur(field);
    auto value = read(cur);
    if (!cur.at_end()) cur.fail("trailing characters");
    return value;
}

struct Header {
    std::vector<std::size_t> columns;
    std::size_t width = 0;
};

Header resolve_header(detail::CsvReader& reader, const std::vector<std::string>& required) {
    std::vector<std::string> fields;
    if (!reader.next(fields)) {
        throw ValidationError("CSV input is empty (header expected)");
    }
    Header header;
    header.width = fields.size();
    for (const auto& name : required) {
        const auto it = std::find(fields.begin(), fields.end(), name);
        if (it == fields.end()) {
            throw ValidationError("CSV header lacks column '" + name + "'");
        }
        header.columns.push_back(static_cast<std::size_t>(it - fields.begin()));
    }
    return header;
}

}  // namespace

bool is_missing(std::string_view field) {
    return field.empty() || field == "nan" || field == "NaN";
}

std::optional<LangTuple> parse_lang_tuple(std::string_view field) {
    if (is_missing(field)) return std::nullopt;
    return parse_whole(field, [](LiteralCursor& cur) { return read_tuple(cur); });
}

std::vector<LangTuple> parse_lang_tuple_list(std::string_view field) {
    if (is_missing(field)) return {};
    return parse_whole(field, [](LiteralCursor& cur) {
        std::vector<LangTuple> out;
        cur.expect('[');
        if (!cur.accept(']')) {
            do {
                out.push_back(read_tuple(cur));
            } while (cur.accept(','));
            cur.expect(']');
        }
        return out;
    });
}

std::vector<std::string> parse_string_list(std::string_view field) {
    if (is_missing(field)) return {};
    return parse_whole(field, [](LiteralCursor& cur) {
        std::vector<std::string> out;
        cur.expect('[');
        if (!cur.accept(']')) {
            do {
                out.push_back(cur.quoted_string());
            } while (cur.accept(','));
            cur.expect(']');
        }
        return out;
    });
}

std::optional<std::uint64_t> parse_record_id(std::string_view field) {
    if (field.empty() || (field.size() > 1 && field[0] == '0')) return std::nullopt;
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) return std::nullopt;
    return value;
}

// ---------------------------------------------------------------------------

ParseResult<FactCheck> parse_fact_checks(std::istream& csv) {
    detail::CsvReader reader(csv);
    const Header header = resolve_header(reader, {"fact_check_id", "claim", "instances", "title"});
    ParseResult<FactCheck> result;
    std::unordered_set<FactCheckId> seen;
    std::vector<std::string> fields;
    static const char* const names[] = {"fact_check_id", "claim", "instances", "title"};
    while (reader.next(fields)) {
        const std::size_t row = ++result.data_rows;
        if (fields.size() != header.width) {
            result.errors.push_back({row, "", "", "expected " + std::to_string(header.width) +
                                                      " fields, found " + std::to_string(fields.size())});
            continue;
        }
        std::size_t column = 0;
        FactCheck fc;
        try {
            const auto id = parse_record_id(fields[header.columns[0]]);
            if (!id) throw ValidationError("not a canonical non-negative integer id");
            fc.fact_check_id = *id;
            column = 1;
            auto claim = parse_lang_tuple(fields[header.columns[1]]);
            if (!claim) throw ValidationError("claim is missing");
            fc.claim = std::move(*claim);
            column = 2;
            fc.instances = fields[header.columns[2]];
            column = 3;
            fc.title = parse_lang_tuple(fields[header.columns[3]]);
        } catch (const ValidationError& e) {
            result.errors.push_back({row, names[column], fields[header.columns[column]], e.what()});
            continue;
        }
        if (!seen.insert(fc.fact_check_id).second) {
            throw ValidationError("duplicate fact_check_id " + std::to_string(fc.fact_check_id) +
                                  " at data row " + std::to_string(row));
        }
        result.records.push_back(std::move(fc));
    }
    return result;
}

ParseResult<Post> parse_posts(std::istream& csv) {
    detail::CsvReader reader(csv);
    const Header header = resolve_header(reader, {"post_id", "instances", "ocr", "verdicts", "text"});
    ParseResult<Post> result;
    std::unordered_set<PostId> seen;
    std::vector<std::string> fields;
    static const char* const names[] = {"post_id", "instances", "ocr", "verdicts", "text"};
    while (reader.next(fields)) {
        const std::size_t row = ++result.data_rows;
        if (fields.size() != header.width) {
            result.errors.push_back({row, "", "", "expected " + std::to_string(header.width) +
                                                      " fields, found " + std::to_string(fields.size())});
            continue;
        }
        std::size_t column = 0;
        Post post;
        try {
            const auto id = parse_record_id(fields[header.columns[0]]);
            if (!id) throw ValidationError("not a canonical non-negative integer id");
            post.post_id = *id;
            column = 1;
            post.instances = fields[header.columns[1]];
            column = 2;
            post.ocr = parse_lang_tuple_list(fields[header.columns[2]]);
            column = 3;
            post.verdicts = parse_string_list(fields[header.columns[3]]);
            column = 4;
            post.text = parse_lang_tuple(fields[header.columns[4]]);
        } catch (const ValidationError& e) {
            result.errors.push_back({row, names[column], fields[header.columns[column]], e.what()});
            continue;
        }
        if (!seen.insert(post.post_id).second) {
            throw ValidationError("duplicate post_id " + std::to_string(post.post_id) + " at data row " +
                                  std::to_string(row));
        }
        const bool has_text = post.text && !post.text->original.empty();
        const bool has_ocr = std::any_of(post.ocr.begin(), post.ocr.end(),
                                         [](const LangTuple& t) { return !t.original.empty(); });
        if (!has_text && !has_ocr) result.flagged.push_back(post.post_id);
        result.records.push_back(std::move(post));
    }
    return result;
}

// ---------------------------------------------------------------------------

PairSet::PairSet(std::set<std::pair<PostId, FactCheckId>> pairs) {
    for (const auto& [post, fc] : pairs) insert(post, fc);
}

void PairSet::insert(PostId post, FactCheckId fact_check) {
    if (pairs_.emplace(post, fact_check).second) {
        by_post_[post].insert(fact_check);
    }
}

bool PairSet::contains(PostId post, FactCheckId fact_check) const {
    return pairs_.count({post, fact_check}) != 0;
}

const std::set<FactCheckId>& PairSet::gold(PostId post) const {
    static const std::set<FactCheckId> empty;
    const auto it = by_post_.find(post);
    return it == by_post_.end() ? empty : it->second;
}

PairParseResult parse_pairs(std::istream& csv) {
    detail::CsvReader reader(csv);
    const Header header = resolve_header(reader, {"post_id", "fact_check_id"});
    PairParseResult result;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        const std::size_t row = ++result.data_rows;
        if (fields.size() != header.width) {
            result.errors.push_back({row, "", "", "wrong field count"});
            continue;
        }
        const auto post = parse_record_id(fields[header.columns[0]]);
        const auto fc = parse_record_id(fields[header.columns[1]]);
        if (!post) {
            result.errors.push_back({row, "post_id", fields[header.columns[0]], "not an integer id"});
            continue;
        }
        if (!fc) {
            result.errors.push_back({row, "fact_check_id", fields[header.columns[1]], "not an integer id"});
            continue;
        }
        result.pairs.insert(*post, *fc);
    }
    return result;
}

// ---------------------------------------------------------------------------

namespace {

bool is_entry_object(const nlohmann::json& j) {
    if (!j.is_object()) return false;
    for (const auto& [key, value] : j.items()) {
        if (key != "posts_train" && key != "posts_dev" && key != "fact_checks") return false;
        if (!value.is_array()) return false;
    }
    return !j.empty();
}

std::vector<std::uint64_t> id_list(const nlohmann::json& j, const std::string& where) {
    std::vector<std::uint64_t> out;
    std::unordered_set<std::uint64_t> seen;
    if (j.is_null()) return out;
    for (const auto& v : j) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            throw ConfigError(where + ": ids must be non-negative integers");
        }
        const auto id = v.get<std::uint64_t>();
        if (seen.insert(id).second) out.push_back(id);
    }
    return out;
}

TaskEntry read_entry(const nlohmann::json& j, const std::string& name) {
    TaskEntry entry;
    entry.posts_train = id_list(j.value("posts_train", nlohmann::json()), name + ".posts_train");
    entry.posts_dev = id_list(j.value("posts_dev", nlohmann::json()), name + ".posts_dev");
    entry.fact_checks = id_list(j.value("fact_checks", nlohmann::json()), name + ".fact_checks");
    const std::unordered_set<PostId> train(entry.posts_train.begin(), entry.posts_train.end());
    for (const PostId id : entry.posts_dev) {
        if (train.count(id)) {
            throw ValidationError(name + ": post " + std::to_string(id) + " is in both train and dev");
        }
    }
    return entry;
}

}  // namespace

std::vector<std::string> TaskSplit::languages() const {
    std::vector<std::string> out;
    for (const auto& [lang, entry] : monolingual) out.push_back(lang);
    return out;
}

TaskSplit parse_tasks(std::istream& in) {
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("tasks file is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("tasks file must hold a JSON object");
    TaskSplit split;
    for (const auto& [key, value] : root.items()) {
        if (key == kCrosslingual) {
            if (!is_entry_object(value)) throw ConfigError("crosslingual entry has an unknown shape");
            split.crosslingual = read_entry(value, key);
        } else if (key == "monolingual") {
            if (!value.is_object()) throw ConfigError("monolingual must map languages to entries");
            for (const auto& [lang, entry] : value.items()) {
                if (!is_entry_object(entry)) throw ConfigError("entry '" + lang + "' has an unknown shape");
                split.monolingual[lang] = read_entry(entry, lang);
            }
        } else if (is_entry_object(value)) {
            split.monolingual[key] = read_entry(value, key);
        } else {
            throw ConfigError("tasks key '" + key + "' has an unknown shape");
        }
    }
    return split;
}

// ---------------------------------------------------------------------------

Corpus::Corpus(std::vector<Post> posts, std::vector<FactCheck> fact_checks)
    : posts_(std::move(posts)), fact_checks_(std::move(fact_checks)) {
    for (std::size_t i = 0; i < posts_.size(); ++i) {
        if (!post_index_.emplace(posts_[i].post_id, i).second) {
            throw ValidationError("duplicate post_id " + std::to_string(posts_[i].post_id));
        }
    }
    for (std::size_t i = 0; i < fact_checks_.size(); ++i) {
        if (!fact_check_index_.emplace(fact_checks_[i].fact_check_id, i).second) {
            throw ValidationError("duplicate fact_check_id " + std::to_string(fact_checks_[i].fact_check_id));
        }
    }
}

const Post* Corpus::find_post(PostId id) const {
    const auto it = post_index_.find(id);
    return it == post_index_.end() ? nullptr : &posts_[it->second];
}

const FactCheck* Corpus::find_fact_check(FactCheckId id) const {
    const auto it = fact_check_index_.find(id);
    return it == fact_check_index_.end() ? nullptr : &fact_checks_[it->second];
}

const Post& Corpus::post(PostId id) const {
    if (const Post* p = find_post(id)) return *p;
    throw LookupError("unknown post_id " + std::to_string(id));
}

const FactCheck& Corpus::fact_check(FactCheckId id) const {
    if (const FactCheck* f = find_fact_check(id)) return *f;
    throw LookupError("unknown fact_check_id " + std::to_string(id));
}

namespace {

std::string describe_missing(const std::string& what, const std::vector<std::uint64_t>& ids) {
    std::ostringstream os;
    os << ids.size() << " unresolved " << what << " (";
    for (std::size_t i = 0; i < ids.size() && i < 10; ++i) os << (i ? ", " : "") << ids[i];
    if (ids.size() > 10) os << ", ...";
    os << ")";
    return os.str();
}

void check_entry(const std::string& name, const TaskEntry& entry, const Corpus& corpus) {
    std::vector<std::uint64_t> posts, fcs;
    for (const auto id : entry.posts_train) if (!corpus.find_post(id)) posts.push_back(id);
    for (const auto id : entry.posts_dev) if (!corpus.find_post(id)) posts.push_back(id);
    for (const auto id : entry.fact_checks) if (!corpus.find_fact_check(id)) fcs.push_back(id);
    if (!posts.empty()) throw ValidationError(name + ": " + describe_missing("post ids", posts));
    if (!fcs.empty()) throw ValidationError(name + ": " + describe_missing("fact-check ids", fcs));
}

}  // namespace

void validate_split(const TaskSplit& split, const Corpus& corpus) {
    for (const auto& [lang, entry] : split.monolingual) check_entry(lang, entry, corpus);
    if (split.crosslingual) check_entry(std::string(kCrosslingual), *split.crosslingual, corpus);
}

void validate_pairs(const PairSet& pairs, const Corpus& corpus) {
    std::vector<std::uint64_t> posts, fcs;
    for (const auto& [post, fc] : pairs.pairs()) {
        if (!corpus.find_post(post)) posts.push_back(post);
        if (!corpus.find_fact_check(fc)) fcs.push_back(fc);
    }
    if (!posts.empty()) throw ValidationError("pairs: " + describe_missing("post ids", posts));
    if (!fcs.empty()) throw ValidationError("pairs: " + describe_missing("fact-check ids", fcs));
}

LanguageView language_view(const Corpus& corpus, const TaskSplit& split, const std::string& language,
                           SplitSide side) {
    const TaskEntry* entry = nullptr;
    if (language == kCrosslingual) {
        if (split.crosslingual) entry = &*split.crosslingual;
    } else if (const auto it = split.monolingual.find(language); it != split.monolingual.end()) {
        entry = &it->second;
    }
    if (!entry) throw LookupError("language '" + language + "' is not in the task split");

    LanguageView view;
    view.language = language;
    const auto& post_ids = side == SplitSide::dev ? entry->posts_dev : entry->posts_train;
    view.posts.reserve(post_ids.size());
    for (const PostId id : post_ids) view.posts.push_back(&corpus.post(id));
    if (language == kCrosslingual && entry->fact_checks.empty()) {
        for (const auto& fc : corpus.fact_checks()) view.pool.push_back(&fc);
    } else {
        view.pool.reserve(entry->fact_checks.size());
        for (const FactCheckId id : entry->fact_checks) view.pool.push_back(&corpus.fact_check(id));
    }
    return view;
}

// ---------------------------------------------------------------------------

std::string to_string(CompositionPlan plan) {
    switch (plan) {
        case CompositionPlan::O: return "O";
        case CompositionPlan::T: return "T";
        case CompositionPlan::OT: return "OT";
        case CompositionPlan::OTV: return "OTV";
    }
    return "?";
}

CompositionPlan parse_plan(std::string_view text) {
    if (text == "O") return CompositionPlan::O;
    if (text == "T") return CompositionPlan::T;
    if (text == "OT" || text == "O,T") return CompositionPlan::OT;
    if (text == "OTV" || text == "O,T,V") return CompositionPlan::OTV;
    throw ConfigError("unknown composition plan '" + std::string(text) + "' (expected O, T, OT or OTV)");
}

namespace {

void push_part(std::string& out, const std::string& part) {
    if (part.empty()) return;
    if (!out.empty()) out.push_back(' ');
    out += part;
}

void push_original(std::string& out, const LangTuple& t) { push_part(out, t.original); }

void push_translation(std::string& out, const LangTuple& t, ComposeOptions options) {
    if (t.translation) {
        push_part(out, *t.translation);
    } else if (!options.strict_plan) {
        push_part(out, t.original);
    }
}

}  // namespace

std::string compose_post_text(const Post& post, CompositionPlan plan, ComposeOptions options) {
    std::string out;
    const bool originals = plan != CompositionPlan::T;
    const bool translations = plan != CompositionPlan::O;
    if (originals) {
        if (post.text) push_original(out, *post.text);
        for (const auto& t : post.ocr) push_original(out, t);
    }
    if (translations) {
        if (post.text) push_translation(out, *post.text, options);
        for (const auto& t : post.ocr) push_translation(out, t, options);
    }
    if (plan == CompositionPlan::OTV) {
        for (const auto& v : post.verdicts) push_part(out, v);
    }
    return out;
}

std::string compose_fact_check_text(const FactCheck& fc, CompositionPlan plan, ComposeOptions options) {
    std::string out;
    if (plan != CompositionPlan::T) {
        push_original(out, fc.claim);
        if (fc.title) push_original(out, *fc.title);
    }
    if (plan != CompositionPlan::O) {
        push_translation(out, fc.claim, options);
        if (fc.title) push_translation(out, *fc.title, options);
    }
    return out;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const LangTuple& t) {
    nlohmann::json langs = nlohmann::json::array();
    for (const auto& [code, conf] : t.languages) langs.push_back({code, conf});
    return {{"original", t.original},
            {"translation", t.translation ? nlohmann::json(*t.translation) : nlohmann::json()},
            {"languages", std::move(langs)}};
}

nlohmann::json to_json(const Post& p) {
    nlohmann::json ocr = nlohmann::json::array();
    for (const auto& t : p.ocr) ocr.push_back(to_json(t));
    return {{"type", "post"},
            {"post_id", p.post_id},
            {"ocr", std::move(ocr)},
            {"text", p.text ? to_json(*p.text) : nlohmann::json()},
            {"verdicts", p.verdicts},
            {"instances", p.instances}};
}

nlohmann::json to_json(const FactCheck& f) {
    return {{"type", "fact_check"},
            {"fact_check_id", f.fact_check_id},
            {"claim", to_json(f.claim)},
            {"title", f.title ? to_json(*f.title) : nlohmann::json()},
            {"instances", f.instances}};
}

LangTuple lang_tuple_from_json(const nlohmann::json& j) {
    LangTuple t;
    t.original = j.at("original").get<std::string>();
    if (!j.at("translation").is_null()) t.translation = j.at("translation").get<std::string>();
    for (const auto& pair : j.at("languages")) {
        t.languages.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<double>());
    }
    return t;
}

Post post_from_json(const nlohmann::json& j) {
    Post p;
    p.post_id = j.at("post_id").get<PostId>();
    for (const auto& t : j.at("ocr")) p.ocr.push_back(lang_tuple_from_json(t));
    if (!j.at("text").is_null()) p.text = lang_tuple_from_json(j.at("text"));
    p.verdicts = j.at("verdicts").get<std::vector<std::string>>();
    p.instances = j.at("instances").get<std::string>();
    return p;
}

FactCheck fact_check_from_json(const nlohmann::json& j) {
    FactCheck f;
    f.fact_check_id = j.at("fact_check_id").get<FactCheckId>();
    f.claim = lang_tuple_from_json(j.at("claim"));
    if (!j.at("title").is_null()) f.title = lang_tuple_from_json(j.at("title"));
    f.instances = j.at("instances").get<std::string>();
    return f;
}

void write_jsonl(std::ostream& out, const std::vector<Post>& posts) {
    for (const auto& p : posts) out << to_json(p).dump() << '\n';
}

void write_jsonl(std::ostream& out, const std::vector<FactCheck>& fact_checks) {
    for (const auto& f : fact_checks) out << to_json(f).dump() << '\n';
}

namespace {

template <typename Record, typename F>
std::vector<Record> read_jsonl(std::istream& in, F&& convert) {
    std::vector<Record> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        try {
            out.push_back(convert(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("JSON Lines record " + std::to_string(number) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace

std::vector<Post> read_posts_jsonl(std::istream& in) {
    return read_jsonl<Post>(in, [](const nlohmann::json& j) { return post_from_json(j); });
}

std::vector<FactCheck> read_fact_checks_jsonl(std::istream& in) {
    return read_jsonl<FactCheck>(in, [](const nlohmann::json& j) { return fact_check_from_json(j); });
}

}  // namespace claimstage

// ---------------------------------------------------------------------------

namespace claimstage {

namespace {

std::string quote_literal(const std::string& s) {
    std::string out = "'";
    for (const char ch : s) {
        switch (ch) {
            case '\\': out += "\\\\"; break;
            case '\'': out += "\\'"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out.push_back(ch);
        }
    }
    out.push_back('\'');
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (const char ch : s) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

std::string format_number(double v) {
    // shortest representation that parses back to the same double
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, v);
    std::string out(buffer, ptr);
    if (out.find_first_of(".eE") == std::string::npos) out += ".0";
    return out;
}

}  // namespace

std::string format_lang_tuple(const LangTuple& t) {
    std::string out = "(" + quote_literal(t.original) + ", " + quote_literal(t.translation.value_or("")) + ", [";
    for (std::size_t i = 0; i < t.languages.size(); ++i) {
        if (i) out += ", ";
        out += "(" + quote_literal(t.languages[i].first) + ", " + format_number(t.languages[i].second) + ")";
    }
    return out + "])";
}

std::string format_lang_tuple_list(const std::vector<LangTuple>& tuples) {
    std::string out = "[";
    for (std::size_t i = 0; i < tuples.size(); ++i) {
        if (i) out += ", ";
        out += format_lang_tuple(tuples[i]);
    }
    return out + "]";
}

std::string format_string_list(const std::vector<std::string>& items) {
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += quote_literal(items[i]);
    }
    return out + "]";
}

void write_fact_checks_csv(std::ostream& out, const std::vector<FactCheck>& fact_checks) {
    out << "fact_check_id,claim,instances,title\n";
    for (const auto& f : fact_checks) {
        out << f.fact_check_id << ',' << csv_field(format_lang_tuple(f.claim)) << ',' << csv_field(f.instances) << ','
            << (f.title ? csv_field(format_lang_tuple(*f.title)) : std::string()) << '\n';
    }
}

void write_posts_csv(std::ostream& out, const std::vector<Post>& posts) {
    out << "post_id,instances,ocr,verdicts,text\n";
    for (const auto& p : posts) {
        out << p.post_id << ',' << csv_field(p.instances) << ',' << csv_field(format_lang_tuple_list(p.ocr)) << ','
            << csv_field(format_string_list(p.verdicts)) << ','
            << (p.text ? csv_field(format_lang_tuple(*p.text)) : std::string()) << '\n';
    }
}

void write_pairs_csv(std::ostream& out, const PairSet& pairs) {
    out << "post_id,fact_check_id\n";
    for (const auto& [post, fc] : pairs.pairs()) out << post << ',' << fc << '\n';
}

nlohmann::json to_json(const TaskSplit& split) {
    auto entry = [](const TaskEntry& e) {
        return nlohmann::json{{"posts_train", e.posts_train}, {"posts_dev", e.posts_dev}, {"fact_checks", e.fact_checks}};
    };
    nlohmann::json out = nlohmann::json::object();
    if (!split.monolingual.empty()) {
        nlohmann::json mono = nlohmann::json::object();
        for (const auto& [lang, e] : split.monolingual) mono[lang] = entry(e);
        out["monolingual"] = std::move(mono);
    }
    if (split.crosslingual) out[std::string(kCrosslingual)] = entry(*split.crosslingual);
    return out;
}

}  // namespace claimstage
