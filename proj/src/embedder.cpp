// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#include "claimstage/embedder.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <semaphore>
#include <thread>
#include <unordered_map>

#include "claimstage/errors.hpp"
#include "claimstage/text.hpp"
#include "httplib.h"
#include "json.hpp"

namespace claimstage {

void BaselineVectorizerConfig::validate() const {
    if (ngram_min < 1 || ngram_min > ngram_max) {
        throw ConfigError("baseline vectorizer needs 1 <= ngram_min <= ngram_max");
    }
    if (hash_dim == 0 || !std::has_single_bit(hash_dim)) {
        throw ConfigError("baseline hash_dim must be a power of two");
    }
}

std::uint32_t BaselineVectorizer::bucket(std::string_view gram) const noexcept {
    return static_cast<std::uint32_t>(fnv1a64(gram) & (config_.hash_dim - 1));
}

double BaselineVectorizer::idf(std::uint32_t b) const {
    const double n = static_cast<double>(documents_);
    return std::log((1.0 + n) / (1.0 + df_.at(b))) + 1.0;
}

BaselineVectorizer BaselineVectorizer::fit(std::span<const std::string> documents,
                                           const BaselineVectorizerConfig& config) {
    config.validate();
    if (documents.empty()) throw ValidationError("cannot fit the baseline on an empty document list");
    BaselineVectorizer v;
    v.config_ = config;
    v.documents_ = documents.size();
    v.df_.assign(config.hash_dim, 0);
    bool any_gram = false;
    std::vector<std::uint32_t> buckets;
    for (const auto& doc : documents) {
        const auto grams = char_ngrams(fold_text(doc), config.ngram_min, config.ngram_max);
        buckets.clear();
        for (const auto& g : grams) buckets.push_back(v.bucket(g));
        std::sort(buckets.begin(), buckets.end());
        buckets.erase(std::unique(buckets.begin(), buckets.end()), buckets.end());
        for (const auto b : buckets) ++v.df_[b];
        any_gram = any_gram || !buckets.empty();
    }
    if (!any_gram) throw ValidationError("every document is empty after n-gram extraction");
    return v;
}

Vector BaselineVectorizer::embed(std::string_view text) const {
    const auto grams = char_ngrams(fold_text(text), config_.ngram_min, config_.ngram_max);
    std::unordered_map<std::uint32_t, std::uint32_t> tf;
    for (const auto& g : grams) ++tf[bucket(g)];
    std::vector<std::pair<std::uint32_t, float>> entries;
    entries.reserve(tf.size());
    for (const auto& [b, count] : tf) {
        const double weight = (1.0 + std::log(static_cast<double>(count))) * idf(b);
        entries.emplace_back(b, static_cast<float>(weight));
    }
    return Vector::sparse(config_.hash_dim, std::move(entries)).normalized();
}

std::string BaselineVectorizer::state_bytes() const {
    std::string out;
    auto put32 = [&out](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    };
    put32(static_cast<std::uint32_t>(config_.ngram_min));
    put32(static_cast<std::uint32_t>(config_.ngram_max));
    put32(config_.hash_dim);
    put32(static_cast<std::uint32_t>(documents_));
    put32(static_cast<std::uint32_t>(documents_ >> 32));
    for (const auto d : df_) put32(d);
    return out;
}

// ---------------------------------------------------------------------------

EmbeddingStore::EmbeddingStore(std::uint32_t dim, std::string provenance)
    : dim_(dim), provenance_(std::move(provenance)) {
    if (dim == 0) throw ContractError("embedding store dimension must be positive");
}

void EmbeddingStore::insert(Namespace ns, std::uint64_t id, Vector vector) {
    if (vector.dim() != dim_) {
        throw ContractError("vector of dim " + std::to_string(vector.dim()) + " inserted into store of dim " +
                            std::to_string(dim_));
    }
    if (!records_.emplace(RecordKey{ns, id}, std::move(vector)).second) {
        throw ContractError("duplicate embedding for id " + std::to_string(id));
    }
}

bool EmbeddingStore::contains(Namespace ns, std::uint64_t id) const {
    return records_.count(RecordKey{ns, id}) != 0;
}

const Vector& EmbeddingStore::get(Namespace ns, std::uint64_t id) const {
    const auto it = records_.find(RecordKey{ns, id});
    if (it == records_.end()) {
        throw LookupError(std::string(ns == Namespace::post ? "post" : "fact_check") + " " +
                          std::to_string(id) + " has no embedding");
    }
    return it->second;
}

Vector EmbeddingStore::embed(Namespace ns, std::uint64_t id) const { return get(ns, id).normalized(); }

namespace {

constexpr std::array<char, 4> kMagic = {'C', 'S', 'E', 'B'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
    std::array<char, sizeof(T)> bytes;
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
    out.write(bytes.data(), bytes.size());
}

class LeReader {
public:
    explicit LeReader(std::istream& in) : in_(in) {}

    template <typename T>
    T get(const char* what) {
        std::array<unsigned char, sizeof(T)> bytes;
        in_.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
        if (in_.gcount() != static_cast<std::streamsize>(bytes.size())) {
            throw FormatError(offset_, std::string("truncated file: ") + what + " needs " +
                                           std::to_string(sizeof(T)) + " bytes, " +
                                           std::to_string(in_.gcount()) + " remain");
        }
        T value = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
        offset_ += sizeof(T);
        return value;
    }

    std::uint64_t offset() const noexcept { return offset_; }
    bool at_eof() { return in_.peek() == std::char_traits<char>::eof(); }

private:
    std::istream& in_;
    std::uint64_t offset_ = 0;
};

}  // namespace

void write_embeddings(const EmbeddingStore& store, std::ostream& out) {
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, kVersion);
    put_le<std::uint32_t>(out, store.dim());
    put_le<std::uint64_t>(out, store.size());
    for (const auto& [key, vector] : store.records()) {
        put_le<std::uint8_t>(out, static_cast<std::uint8_t>(key.ns));
        put_le<std::uint64_t>(out, key.id);
        for (const float f : vector.to_dense()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
    }
    if (!out) throw Error("failed writing embedding stream");
}

EmbeddingStore read_embeddings(std::istream& in, std::string provenance) {
    LeReader reader(in);
    std::array<char, 4> magic{};
    for (auto& c : magic) c = static_cast<char>(reader.get<std::uint8_t>("magic"));
    if (magic != kMagic) throw FormatError(0, "bad magic (expected \"CSEB\")");
    const auto version = reader.get<std::uint32_t>("version");
    if (version != kVersion) throw FormatError(4, "unsupported version " + std::to_string(version));
    const auto dim = reader.get<std::uint32_t>("dim");
    if (dim == 0) throw FormatError(8, "dimension must be positive");
    const auto count = reader.get<std::uint64_t>("count");
    EmbeddingStore store(dim, std::move(provenance));
    std::vector<float> values(dim);
    for (std::uint64_t r = 0; r < count; ++r) {
        const std::uint64_t record_offset = reader.offset();
        const auto ns = reader.get<std::uint8_t>("namespace");
        if (ns > 1) throw FormatError(record_offset, "unknown namespace " + std::to_string(ns));
        const auto id = reader.get<std::uint64_t>("id");
        for (std::uint32_t i = 0; i < dim; ++i) {
            const std::uint64_t at = reader.offset();
            values[i] = std::bit_cast<float>(reader.get<std::uint32_t>("vector component"));
            if (!std::isfinite(values[i])) throw FormatError(at, "non-finite component");
        }
        if (store.contains(static_cast<Namespace>(ns), id)) {
            throw FormatError(record_offset, "duplicate record id " + std::to_string(id));
        }
        store.insert(static_cast<Namespace>(ns), id, Vector::dense(values));
    }
    if (!reader.at_eof()) throw FormatError(reader.offset(), "trailing bytes after last record");
    return store;
}

void save_embeddings(const EmbeddingStore& store, const std::filesystem::path& path) {
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + path.string() + " for writing");
        write_embeddings(store, out);
    }
    std::ofstream meta(path.string() + ".meta.json", std::ios::trunc);
    meta << nlohmann::json{{"provenance", store.provenance()}, {"dim", store.dim()}, {"count", store.size()}}.dump(2)
         << '\n';
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LookupError("cannot open embedding file " + path.string());
    std::string provenance = "file:" + path.string();
    if (std::ifstream meta(path.string() + ".meta.json"); meta) {
        try {
            const auto j = nlohmann::json::parse(meta);
            provenance = j.at("provenance").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(0, "unreadable sidecar " + path.string() + ".meta.json: " + e.what());
        }
    }
    return read_embeddings(in, std::move(provenance));
}

// ---------------------------------------------------------------------------

std::string resolve_remote_endpoint(const std::string& configured) {
    if (const char* env = std::getenv(kRemoteEmbedUrlEnv); env != nullptr && *env != '\0') return env;
    return configured;
}

struct RemoteEmbedder::State {
    explicit State(std::size_t in_flight) : slots(static_cast<std::ptrdiff_t>(in_flight)) {}

    std::counting_semaphore<1024> slots;
    std::mutex mutex;
    std::optional<std::uint32_t> dim;
    std::string base;  // scheme://host:port
    std::string path;  // prefix + "/embed"
};

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw ConfigError("remote embedder needs an endpoint");
    if (config_.max_batch == 0) throw ConfigError("remote max_batch must be positive");
    if (config_.attempts < 1) throw ConfigError("remote attempts must be at least 1");
    if (config_.max_in_flight == 0 || config_.max_in_flight > 1024) {
        throw ConfigError("remote max_in_flight must be in [1, 1024]");
    }
    state_ = std::make_unique<State>(config_.max_in_flight);
    const auto scheme_end = config_.endpoint.find("://");
    const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto slash = config_.endpoint.find('/', host_start);
    state_->base = config_.endpoint.substr(0, slash);
    std::string prefix = slash == std::string::npos ? "" : config_.endpoint.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    state_->path = prefix + "/embed";
}

RemoteEmbedder::~RemoteEmbedder() = default;

std::optional<std::uint32_t> RemoteEmbedder::dim() const {
    std::lock_guard lock(state_->mutex);
    return state_->dim;
}

std::vector<Vector> RemoteEmbedder::fetch(std::span<const std::string> texts) {
    if (texts.empty()) return {};
    if (texts.size() > config_.max_batch) {
        throw ContractError("batch of " + std::to_string(texts.size()) + " exceeds max_batch " +
                            std::to_string(config_.max_batch));
    }
    const std::string body =
        nlohmann::json{{"model", config_.model}, {"texts", std::vector<std::string>(texts.begin(), texts.end())}}
            .dump();

    std::string response;
    std::string last_error;
    bool ok = false;
    {
        state_->slots.acquire();
        struct Release {
            State* s;
            ~Release() { s->slots.release(); }
        } release{state_.get()};

        httplib::Client client(state_->base);
        client.set_connection_timeout(config_.timeout);
        client.set_read_timeout(config_.timeout);
        client.set_write_timeout(config_.timeout);
        auto delay = config_.backoff;
        for (int attempt = 1; attempt <= config_.attempts && !ok; ++attempt) {
            if (attempt > 1) {
                std::this_thread::sleep_for(delay);
                delay *= 2;
            }
            const auto res = client.Post(state_->path, body, "application/json");
            if (!res) {
                last_error = "transport failure: " + httplib::to_string(res.error());
            } else if (res->status < 200 || res->status >= 300) {
                last_error = "HTTP status " + std::to_string(res->status);
            } else {
                response = res->body;
                ok = true;
            }
        }
    }
    if (!ok) {
        throw TransportError("remote embed at " + config_.endpoint + " failed after " +
                             std::to_string(config_.attempts) + " attempts: " + last_error);
    }

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(response);
    } catch (const nlohmann::json::exception& e) {
        throw ContractError(std::string("remote response is not JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("dim") || !j.contains("vectors") || !j["dim"].is_number_unsigned() ||
        !j["vectors"].is_array()) {
        throw ContractError("remote response lacks integer 'dim' and array 'vectors'");
    }
    const auto dim = j["dim"].get<std::uint32_t>();
    if (dim == 0) throw ContractError("remote response has dim 0");
    const auto& vectors = j["vectors"];
    if (vectors.size() != texts.size()) {
        throw ContractError("remote returned " + std::to_string(vectors.size()) + " vectors for " +
                            std::to_string(texts.size()) + " texts");
    }
    {
        std::lock_guard lock(state_->mutex);
        if (state_->dim && *state_->dim != dim) {
            throw ContractError("remote dimension changed from " + std::to_string(*state_->dim) + " to " +
                                std::to_string(dim));
        }
        state_->dim = dim;
    }
    std::vector<Vector> out;
    out.reserve(vectors.size());
    for (const auto& v : vectors) {
        if (!v.is_array() || v.size() != dim) throw ContractError("remote vector length differs from dim");
        std::vector<float> values;
        values.reserve(dim);
        for (const auto& x : v) {
            if (!x.is_number()) throw ContractError("remote vector holds a non-number");
            values.push_back(x.get<float>());
        }
        out.push_back(Vector::dense(std::move(values)));
    }
    return out;
}

std::vector<Vector> RemoteEmbedder::embed_all(std::span<const std::string> texts) {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += config_.max_batch) {
        const auto n = std::min(config_.max_batch, texts.size() - start);
        for (auto& v : fetch(texts.subspan(start, n))) out.push_back(v.normalized());
    }
    return out;
}

Vector RemoteEmbedder::embed(std::string_view text) {
    const std::string one(text);
    return fetch(std::span<const std::string>(&one, 1)).front().normalized();
}

}  // namespace claimstage
