#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cgr/errors.hpp"

namespace cgr {

/// Connection settings for a remote chat/embedding endpoint.
struct ProviderConfig {
    std::string endpoint_url;               // e.g. "http://127.0.0.1:8089/v1"
    std::string model;                      // model name sent in the request body
    std::string api_key_env = "CGR_API_KEY";  // env var holding the bearer token
    double timeout_seconds = 60.0;
    int max_retries = 3;                    // retries after the initial attempt
    double backoff_base_seconds = 1.0;      // doubled per retry
    int max_concurrency = 4;                // in-flight request cap
    double temperature = 0.0;

    void validate() const;
};

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
    bool zero() const;
};

/// Cosine similarity; zero-norm inputs yield 0.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

/// Deterministic token feature-hashing embedder: canonicalize, split on
/// whitespace, bucket each token by FNV-1a(token) mod dim with a sign taken
/// from the low bit of FNV-1a over the reversed token bytes, then
/// L2-normalize. Empty text yields the zero vector.
EmbeddingVector hash_embed(std::string_view text, std::size_t dim = 256);

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string chat(const std::vector<ChatMessage>& messages) = 0;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) = 0;
    virtual std::size_t dim() const = 0;
};

/// Offline embedding provider backed by hash_embed.
class HashEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit HashEmbeddingProvider(std::size_t dim = 256) : dim_(dim) {}

    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;
    std::size_t dim() const override { return dim_; }

private:
    std::size_t dim_;
};

/// Process-wide kill switch for remote I/O. Tests arm it to prove that
/// offline pipelines never touch the network; a violation throws
/// NetworkGuardViolation, which no fallback path catches.
class NetworkGuard {
public:
    static void arm();
    static void disarm();
    static bool armed();

    /// RAII helper for test scopes.
    class Scope {
    public:
        Scope() { arm(); }
        ~Scope() { disarm(); }
        Scope(const Scope&) = delete;
        Scope& operator=(const Scope&) = delete;
    };

private:
    static std::atomic<bool> armed_;
};

class RemoteClient;  // pimpl over the HTTP transport

/// Chat completion client for an OpenAI-style endpoint: POST
/// {endpoint}/chat/completions with {model, messages, temperature}; the
/// reply text is read from choices[0].message.content. Retries transport
/// failures, 5xx and 429 with exponential backoff; honors the concurrency
/// cap; sends "Authorization: Bearer <key>" when the configured env var is
/// set.
class RemoteChatProvider final : public ChatProvider {
public:
    explicit RemoteChatProvider(ProviderConfig config);
    ~RemoteChatProvider() override;

    std::string chat(const std::vector<ChatMessage>& messages) override;

    /// Retries performed by the most recent call (for diagnostics/tests).
    int last_retries() const;

private:
    std::unique_ptr<RemoteClient> client_;
};

/// Embedding client: POST {endpoint}/embeddings with {model, input:[...]};
/// vectors are read from data[i].embedding, in input order.
class RemoteEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit RemoteEmbeddingProvider(ProviderConfig config);
    ~RemoteEmbeddingProvider() override;

    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;
    std::size_t dim() const override { return dim_; }

    int last_retries() const;

private:
    std::unique_ptr<RemoteClient> client_;
    std::size_t dim_ = 0;  // learned from the first response
};

}  // namespace cgr
