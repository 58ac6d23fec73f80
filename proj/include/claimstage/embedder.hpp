// Copyright (C) 2026 The claimstage Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "claimstage/vector.hpp"

namespace claimstage {

// ---------------------------------------------------------------------------
// Hashed character n-gram TF-IDF baseline.

struct BaselineVectorizerConfig {
    int ngram_min = 3;
    int ngram_max = 5;
    std::uint32_t hash_dim = 1u << 18;

    void validate() const;
};

/// Immutable after `fit`. Texts are NFKC-folded and lowercased, their code-point n-grams
/// hashed into `hash_dim` buckets, and weighted (1 + ln tf) * idf with
/// idf = ln((1 + N) / (1 + df)) + 1, then L2-normalized.
class BaselineVectorizer {
public:
    /// Throws ValidationError on an empty list or when no document yields an n-gram.
    static BaselineVectorizer fit(std::span<const std::string> documents,
                                  const BaselineVectorizerConfig& config = {});

    Vector embed(std::string_view text) const;

    const BaselineVectorizerConfig& config() const noexcept { return config_; }
    std::uint32_t dim() const noexcept { return config_.hash_dim; }
    std::size_t document_count() const noexcept { return documents_; }
    std::uint32_t bucket(std::string_view gram) const noexcept;
    std::uint32_t document_frequency(std::uint32_t bucket) const { return df_.at(bucket); }
    double idf(std::uint32_t bucket) const;

    /// Serialized fitted state; equal inputs give byte-identical state.
    std::string state_bytes() const;

private:
    BaselineVectorizerConfig config_;
    std::size_t documents_ = 0;
    std::vector<std::uint32_t> df_;
};

// ---------------------------------------------------------------------------
// Embedding store and its binary interchange file.

enum class Namespace : std::uint8_t { post = 0, fact_check = 1 };

struct RecordKey {
    Namespace ns = Namespace::post;
    std::uint64_t id = 0;

    auto operator<=>(const RecordKey&) const = default;
};

class EmbeddingStore {
public:
    EmbeddingStore() = default;
    /// `provenance` is one of "baseline", "file:<path>" or "remote:<endpoint>#<model>".
    explicit EmbeddingStore(std::uint32_t dim, std::string provenance = "baseline");

    /// Throws ContractError on dimension mismatch or a duplicate key.
    void insert(Namespace ns, std::uint64_t id, Vector vector);
    bool contains(Namespace ns, std::uint64_t id) const;
    /// Stored vector as inserted. Throws LookupError.
    const Vector& get(Namespace ns, std::uint64_t id) const;
    /// L2-normalized lookup. Throws LookupError.
    Vector embed(Namespace ns, std::uint64_t id) const;

    std::uint32_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return records_.size(); }
    const std::string& provenance() const noexcept { return provenance_; }
    void set_provenance(std::string provenance) { provenance_ = std::move(provenance); }
    const std::map<RecordKey, Vector>& records() const noexcept { return records_; }

    bool operator==(const EmbeddingStore& other) const = default;

private:
    std::uint32_t dim_ = 0;
    std::string provenance_;
    std::map<RecordKey, Vector> records_;
};

/// Layout: "CSEB", u32 version (1), u32 dim, u64 count, then per record
/// u8 namespace, u64 id, dim little-endian f32. Records are written in key order.
void write_embeddings(const EmbeddingStore& store, std::ostream& out);
/// Throws FormatError naming the byte offset of the problem.
EmbeddingStore read_embeddings(std::istream& in, std::string provenance);

/// Writes the binary file and a `<path>.meta.json` sidecar holding the provenance.
void save_embeddings(const EmbeddingStore& store, const std::filesystem::path& path);
/// Provenance comes from the sidecar when present, otherwise "file:<path>".
EmbeddingStore load_embeddings(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Remote embedding service client: POST <endpoint>/embed.

struct RemoteEmbedderConfig {
    std::string endpoint;  // e.g. "http://127.0.0.1:8080" or "http://host:port/prefix"
    std::string model;
    std::size_t max_batch = 64;
    int attempts = 3;
    std::chrono::milliseconds backoff{200};
    std::size_t max_in_flight = 4;
    std::chrono::seconds timeout{60};
};

/// Environment variable that overrides the configured endpoint.
inline constexpr const char* kRemoteEmbedUrlEnv = "CLAIMSTAGE_REMOTE_EMBED_URL";

/// Returns the value of CLAIMSTAGE_REMOTE_EMBED_URL when set and non-empty, else `configured`.
std::string resolve_remote_endpoint(const std::string& configured);

class RemoteEmbedder {
public:
    explicit RemoteEmbedder(RemoteEmbedderConfig config);
    ~RemoteEmbedder();
    RemoteEmbedder(const RemoteEmbedder&) = delete;
    RemoteEmbedder& operator=(const RemoteEmbedder&) = delete;

    /// One request for at most `max_batch` texts; raw vectors in input order.
    /// Transport failures and non-2xx answers are retried with exponential backoff, then
    /// raise TransportError. A malformed or partial answer, or a dimension that differs from
    /// an earlier answer, raises ContractError. An empty batch makes no request.
    std::vector<Vector> fetch(std::span<const std::string> texts);
    /// Splits `texts` into batches and normalizes every vector.
    std::vector<Vector> embed_all(std::span<const std::string> texts);
    Vector embed(std::string_view text);

    std::optional<std::uint32_t> dim() const;
    const RemoteEmbedderConfig& config() const noexcept { return config_; }
    std::string provenance() const { return "remote:" + config_.endpoint + "#" + config_.model; }

private:
    struct State;
    RemoteEmbedderConfig config_;
    std::unique_ptr<State> state_;
};

}  // namespace claimstage
