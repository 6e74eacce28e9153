#include "cgr/providers.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "cgr/text.hpp"
#include "httplib.h"
#include "json.hpp"

namespace cgr {

using nlohmann::json;

void ProviderConfig::validate() const {
    if (endpoint_url.empty()) throw ConfigError("provider endpoint_url is empty");
    if (timeout_seconds <= 0) throw ConfigError("provider timeout must be positive");
    if (max_retries < 0) throw ConfigError("provider max_retries must be >= 0");
    if (max_concurrency < 1) throw ConfigError("provider max_concurrency must be >= 1");
    if (backoff_base_seconds < 0) throw ConfigError("provider backoff base must be >= 0");
}

bool EmbeddingVector::zero() const {
    for (double v : values) {
        if (v != 0.0) return false;
    }
    return true;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    std::size_t n = std::min(a.values.size(), b.values.size());
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += a.values[i] * b.values[i];
    for (double v : a.values) na += v * v;
    for (double v : b.values) nb += v * v;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

EmbeddingVector hash_embed(std::string_view text, std::size_t dim) {
    EmbeddingVector vec;
    vec.values.assign(dim, 0.0);
    if (dim == 0) return vec;
    for (const auto& token : split_whitespace(canonicalize_text(text))) {
        std::size_t bucket = static_cast<std::size_t>(fnv1a64(token) % dim);
        double sign = (fnv1a64_reversed(token) & 1ull) == 0 ? 1.0 : -1.0;
        vec.values[bucket] += sign;
    }
    double norm = 0.0;
    for (double v : vec.values) norm += v * v;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& v : vec.values) v /= norm;
    }
    return vec;
}

std::vector<EmbeddingVector> HashEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(hash_embed(t, dim_));
    return out;
}

std::atomic<bool> NetworkGuard::armed_{false};

void NetworkGuard::arm() { armed_.store(true); }
void NetworkGuard::disarm() { armed_.store(false); }
bool NetworkGuard::armed() { return armed_.load(); }

namespace {

/// Counting semaphore with a runtime limit; enforces max_concurrency.
class Limiter {
public:
    explicit Limiter(int slots) : slots_(slots) {}

    void acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return slots_ > 0; });
        --slots_;
    }

    void release() {
        {
            std::lock_guard lock(mu_);
            ++slots_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int slots_;
};

struct SlotScope {
    explicit SlotScope(Limiter& limiter) : limiter_(limiter) { limiter_.acquire(); }
    ~SlotScope() { limiter_.release(); }
    Limiter& limiter_;
};

bool retryable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

}  // namespace

/// Shared POST-with-retries transport behind both remote providers.
class RemoteClient {
public:
    explicit RemoteClient(ProviderConfig config)
        : config_(std::move(config)), limiter_(config_.max_concurrency) {
        config_.validate();
        split_endpoint();
    }

    json post_json(const std::string& path, const json& body) {
        if (NetworkGuard::armed()) throw NetworkGuardViolation();
        SlotScope slot(limiter_);

        httplib::Client client(base_url_);
        auto timeout_ms = static_cast<int>(config_.timeout_seconds * 1000.0);
        client.set_connection_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
        client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
        client.set_write_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);

        httplib::Headers headers;
        if (const char* key = std::getenv(config_.api_key_env.c_str());
            key != nullptr && *key != '\0') {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }

        const std::string payload = body.dump();
        const std::string target = path_prefix_ + path;
        int attempts_allowed = config_.max_retries + 1;
        int retries = 0;
        std::string last_failure = "no attempt made";
        for (int attempt = 0; attempt < attempts_allowed; ++attempt) {
            if (attempt > 0) {
                ++retries;
                double delay = config_.backoff_base_seconds * std::pow(2.0, attempt - 1);
                std::this_thread::sleep_for(std::chrono::duration<double>(delay));
            }
            auto result = client.Post(target, headers, payload, "application/json");
            if (!result) {
                last_failure = "transport error: " + httplib::to_string(result.error());
                if (result.error() == httplib::Error::ConnectionTimeout ||
                    result.error() == httplib::Error::Read ||
                    result.error() == httplib::Error::Write) {
                    last_failure = "timeout or I/O error: " + httplib::to_string(result.error());
                }
                continue;
            }
            if (result->status == 200) {
                last_retries_.store(retries);
                json parsed = json::parse(result->body, nullptr, false);
                if (parsed.is_discarded()) {
                    throw SchemaError("provider returned a non-JSON body");
                }
                return parsed;
            }
            last_failure = "HTTP " + std::to_string(result->status);
            if (!retryable_status(result->status)) {
                last_retries_.store(retries);
                throw ProviderError(ProviderError::Kind::Status,
                                    "provider request failed with " + last_failure,
                                    result->status);
            }
        }
        last_retries_.store(retries);
        throw ProviderError(ProviderError::Kind::Exhausted,
                            "provider request failed after " + std::to_string(attempts_allowed) +
                                " attempts; last failure: " + last_failure);
    }

    const ProviderConfig& config() const { return config_; }
    int last_retries() const { return last_retries_.load(); }

private:
    // httplib wants scheme://host:port separately from the request path, so
    // "http://h:1234/v1" splits into base "http://h:1234" and prefix "/v1".
    void split_endpoint() {
        const std::string& url = config_.endpoint_url;
        auto scheme_end = url.find("://");
        std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
        auto slash = url.find('/', host_start);
        if (slash == std::string::npos) {
            base_url_ = url;
            path_prefix_.clear();
        } else {
            base_url_ = url.substr(0, slash);
            path_prefix_ = url.substr(slash);
            while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
        }
    }

    ProviderConfig config_;
    Limiter limiter_;
    std::string base_url_;
    std::string path_prefix_;
    std::atomic<int> last_retries_{0};
};

RemoteChatProvider::RemoteChatProvider(ProviderConfig config)
    : client_(std::make_unique<RemoteClient>(std::move(config))) {}

RemoteChatProvider::~RemoteChatProvider() = default;

std::string RemoteChatProvider::chat(const std::vector<ChatMessage>& messages) {
    json body;
    body["model"] = client_->config().model;
    auto msgs = json::array();
    for (const auto& m : messages) {
        msgs.push_back({{"role", m.role}, {"content", m.content}});
    }
    body["messages"] = std::move(msgs);
    body["temperature"] = client_->config().temperature;

    json reply = client_->post_json("/chat/completions", body);
    if (!reply.contains("choices") || !reply["choices"].is_array() || reply["choices"].empty()) {
        throw SchemaError("chat reply lacks choices");
    }
    const auto& first = reply["choices"][0];
    if (!first.contains("message") || !first["message"].contains("content") ||
        !first["message"]["content"].is_string()) {
        throw SchemaError("chat reply lacks choices[0].message.content");
    }
    return first["message"]["content"].get<std::string>();
}

int RemoteChatProvider::last_retries() const { return client_->last_retries(); }

RemoteEmbeddingProvider::RemoteEmbeddingProvider(ProviderConfig config)
    : client_(std::make_unique<RemoteClient>(std::move(config))) {}

RemoteEmbeddingProvider::~RemoteEmbeddingProvider() = default;

std::vector<EmbeddingVector> RemoteEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
    if (texts.empty()) return {};
    json body;
    body["model"] = client_->config().model;
    body["input"] = texts;

    json reply = client_->post_json("/embeddings", body);
    if (!reply.contains("data") || !reply["data"].is_array() ||
        reply["data"].size() != texts.size()) {
        throw SchemaError("embeddings reply data does not match the input batch");
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& item : reply["data"]) {
        if (!item.contains("embedding") || !item["embedding"].is_array()) {
            throw SchemaError("embeddings reply item lacks an embedding array");
        }
        EmbeddingVector vec;
        vec.values.reserve(item["embedding"].size());
        for (const auto& v : item["embedding"]) vec.values.push_back(v.get<double>());
        if (dim_ == 0) dim_ = vec.values.size();
        if (vec.values.size() != dim_) {
            throw SchemaError("embeddings reply has inconsistent dimensions");
        }
        out.push_back(std::move(vec));
    }
    return out;
}

int RemoteEmbeddingProvider::last_retries() const { return client_->last_retries(); }

}  // namespace cgr
