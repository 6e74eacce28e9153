#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "cgr/providers.hpp"
#include "cgr/text.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "httplib.h"
#include "json.hpp"

using namespace cgr;
using nlohmann::json;

namespace {

/// From-scratch reimplementation of the feature-hashing embedder used as the
/// oracle: canonicalize, split, bucket by FNV-1a mod dim, sign from the low
/// bit of FNV-1a over the reversed token, L2-normalize.
std::vector<double> oracle_embed(const std::string& text, std::size_t dim) {
    std::vector<double> values(dim, 0.0);
    std::string canonical;
    for (char c : text) {
        canonical += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    std::vector<std::string> tokens;
    std::string current;
    for (char c : canonical) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!current.empty()) tokens.push_back(std::exchange(current, {}));
        } else {
            current += c;
        }
    }
    if (!current.empty()) tokens.push_back(current);
    for (const auto& token : tokens) {
        std::uint64_t forward = 14695981039346656037ull;
        for (unsigned char byte : token) {
            forward ^= byte;
            forward *= 1099511628211ull;
        }
        std::uint64_t backward = 14695981039346656037ull;
        for (auto it = token.rbegin(); it != token.rend(); ++it) {
            backward ^= static_cast<unsigned char>(*it);
            backward *= 1099511628211ull;
        }
        const double sign = (backward & 1ull) == 0 ? 1.0 : -1.0;
        values[forward % dim] += sign;
    }
    double norm = 0.0;
    for (double v : values) norm += v * v;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& v : values) v /= norm;
    }
    return values;
}

/// Mock endpoint running on a loopback port for the duration of one test.
struct MockServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;

    explicit MockServer() = default;

    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~MockServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }

    ProviderConfig config() const {
        ProviderConfig out;
        out.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
        out.model = "mock-model";
        out.api_key_env = "CGR_TEST_API_KEY";
        out.timeout_seconds = 5.0;
        out.max_retries = 3;
        out.backoff_base_seconds = 0.001;
        out.max_concurrency = 4;
        return out;
    }
};

std::string chat_body(const std::string& content) {
    json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
    return reply.dump();
}

}  // namespace

TEST_SUITE("providers") {
    TEST_CASE("hash_embed matches the from-scratch oracle") {
        for (const char* text :
             {"hypertension", "Bilateral Renal  Artery Stenosis", "a b c d e f g",
              "PI-based regimen superior to NNRTI-based regimen", "", "  ", "x"}) {
            for (std::size_t dim : {16u, 256u}) {
                auto vec = hash_embed(text, dim);
                auto expected = oracle_embed(text, dim);
                REQUIRE(vec.values.size() == expected.size());
                for (std::size_t i = 0; i < expected.size(); ++i) {
                    CHECK(vec.values[i] == doctest::Approx(expected[i]).epsilon(1e-12));
                }
            }
        }
    }

    TEST_CASE("embeddings of non-empty text are unit length") {
        auto vec = hash_embed("warfarin dose adjustment in renal impairment");
        double norm = 0.0;
        for (double v : vec.values) norm += v * v;
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
        CHECK_FALSE(vec.zero());
    }

    TEST_CASE("empty text embeds to the zero vector") {
        auto vec = hash_embed("   ");
        CHECK(vec.zero());
        CHECK(vec.dim() == 256);
    }

    TEST_CASE("cosine basics") {
        EmbeddingVector a{{1.0, 0.0}};
        EmbeddingVector b{{0.0, 1.0}};
        EmbeddingVector c{{2.0, 0.0}};
        EmbeddingVector zero{{0.0, 0.0}};
        CHECK(cosine(a, b) == doctest::Approx(0.0));
        CHECK(cosine(a, c) == doctest::Approx(1.0));
        CHECK(cosine(a, zero) == 0.0);
    }

    TEST_CASE("disjoint token sets have exactly the oracle similarity") {
        const std::string left = "hypertension amlodipine";
        const std::string right = "warfarin bleeding";
        auto a = hash_embed(left);
        auto b = hash_embed(right);
        auto oa = oracle_embed(left, 256);
        auto ob = oracle_embed(right, 256);
        double expected = 0.0;
        for (std::size_t i = 0; i < oa.size(); ++i) expected += oa[i] * ob[i];
        CHECK(cosine(a, b) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(std::abs(cosine(a, b)) < 0.5);  // hash collisions only
    }

    TEST_CASE("shared tokens raise similarity") {
        auto a = hash_embed("hypertension medication");
        auto b = hash_embed("hypertension");
        CHECK(cosine(a, b) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));
    }

    TEST_CASE("embed_batch is the per-text map of hash_embed") {
        HashEmbeddingProvider provider(64);
        std::vector<std::string> texts = {"one", "two tokens here", ""};
        auto batch = provider.embed_batch(texts);
        REQUIRE(batch.size() == 3);
        for (std::size_t i = 0; i < texts.size(); ++i) {
            auto solo = hash_embed(texts[i], 64);
            CHECK(batch[i].values == solo.values);
        }
        CHECK(provider.dim() == 64);
    }

    TEST_CASE("provider config validation") {
        ProviderConfig config;
        CHECK_THROWS_AS(config.validate(), ConfigError);  // empty endpoint
        config.endpoint_url = "http://127.0.0.1:1/v1";
        CHECK_NOTHROW(config.validate());
        config.timeout_seconds = 0.0;
        CHECK_THROWS_AS(config.validate(), ConfigError);
        config = {};
        config.endpoint_url = "http://127.0.0.1:1/v1";
        config.max_concurrency = 0;
        CHECK_THROWS_AS(config.validate(), ConfigError);
    }

    TEST_CASE("chat request and reply follow the wire contract") {
        MockServer mock;
        json seen_body;
        std::string seen_auth;
        mock.server.Post("/v1/chat/completions",
                         [&](const httplib::Request& req, httplib::Response& res) {
                             seen_body = json::parse(req.body);
                             seen_auth = req.get_header_value("Authorization");
                             res.set_content(chat_body("The answer is amlodipine."),
                                             "application/json");
                         });
        mock.start();
        setenv("CGR_TEST_API_KEY", "sk-test-123", 1);
        RemoteChatProvider provider(mock.config());
        auto reply = provider.chat({{"system", "You answer briefly."}, {"user", "Which drug?"}});
        CHECK(reply == "The answer is amlodipine.");
        CHECK(provider.last_retries() == 0);
        CHECK(seen_auth == "Bearer sk-test-123");
        CHECK(seen_body["model"] == "mock-model");
        CHECK(seen_body["temperature"] == 0.0);
        REQUIRE(seen_body["messages"].size() == 2);
        CHECK(seen_body["messages"][0]["role"] == "system");
        CHECK(seen_body["messages"][1]["content"] == "Which drug?");
        unsetenv("CGR_TEST_API_KEY");
    }

    TEST_CASE("missing api key env sends no authorization header") {
        MockServer mock;
        std::string seen_auth = "unset";
        mock.server.Post("/v1/chat/completions",
                         [&](const httplib::Request& req, httplib::Response& res) {
                             seen_auth = req.has_header("Authorization")
                                             ? req.get_header_value("Authorization")
                                             : "";
                             res.set_content(chat_body("ok"), "application/json");
                         });
        mock.start();
        unsetenv("CGR_TEST_API_KEY");
        RemoteChatProvider provider(mock.config());
        provider.chat({{"user", "hi"}});
        CHECK(seen_auth.empty());
    }

    TEST_CASE("retryable statuses are retried with success after backoff") {
        MockServer mock;
        std::atomic<int> hits{0};
        mock.server.Post("/v1/chat/completions",
                         [&](const httplib::Request&, httplib::Response& res) {
                             int hit = ++hits;
                             if (hit <= 2) {
                                 res.status = 429;
                                 res.set_content("slow down", "text/plain");
                             } else {
                                 res.set_content(chat_body("recovered"), "application/json");
                             }
                         });
        mock.start();
        RemoteChatProvider provider(mock.config());
        CHECK(provider.chat({{"user", "q"}}) == "recovered");
        CHECK(hits.load() == 3);
        CHECK(provider.last_retries() == 2);
    }

    TEST_CASE("persistent server errors exhaust the retry budget") {
        MockServer mock;
        std::atomic<int> hits{0};
        mock.server.Post("/v1/chat/completions",
                         [&](const httplib::Request&, httplib::Response& res) {
                             ++hits;
                             res.status = 500;
                             res.set_content("boom", "text/plain");
                         });
        mock.start();
        auto config = mock.config();
        config.max_retries = 2;
        RemoteChatProvider provider(config);
        try {
            provider.chat({{"user", "q"}});
            FAIL("expected ProviderError");
        } catch (const ProviderError& e) {
            CHECK(e.kind() == ProviderError::Kind::Exhausted);
            CHECK(std::string(e.what()).find("after 3 attempts") != std::string::npos);
        }
        CHECK(hits.load() == 3);
        CHECK(provider.last_retries() == 2);
    }

    TEST_CASE("non-retryable statuses fail immediately") {
        MockServer mock;
        std::atomic<int> hits{0};
        mock.server.Post("/v1/chat/completions",
                         [&](const httplib::Request&, httplib::Response& res) {
                             ++hits;
                             res.status = 404;
                             res.set_content("nope", "text/plain");
                         });
        mock.start();
        RemoteChatProvider provider(mock.config());
        try {
            provider.chat({{"user", "q"}});
            FAIL("expected ProviderError");
        } catch (const ProviderError& e) {
            CHECK(e.kind() == ProviderError::Kind::Status);
            CHECK(e.status() == 404);
        }
        CHECK(hits.load() == 1);
    }

    TEST_CASE("malformed reply shapes raise SchemaError") {
        MockServer mock;
        std::string body = "not json";
        mock.server.Post("/v1/chat/completions",
                         [&](const httplib::Request&, httplib::Response& res) {
                             res.set_content(body, "application/json");
                         });
        mock.start();
        RemoteChatProvider provider(mock.config());
        CHECK_THROWS_AS(provider.chat({{"user", "q"}}), SchemaError);
        body = "{\"choices\":[]}";
        CHECK_THROWS_AS(provider.chat({{"user", "q"}}), SchemaError);
        body = "{\"choices\":[{\"message\":{}}]}";
        CHECK_THROWS_AS(provider.chat({{"user", "q"}}), SchemaError);
    }

    TEST_CASE("unreachable endpoints exhaust as transport failures") {
        ProviderConfig config;
        // Reserved port with nothing listening.
        config.endpoint_url = "http://127.0.0.1:9/v1";
        config.model = "mock";
        config.max_retries = 1;
        config.backoff_base_seconds = 0.001;
        config.timeout_seconds = 1.0;
        RemoteChatProvider provider(config);
        try {
            provider.chat({{"user", "q"}});
            FAIL("expected ProviderError");
        } catch (const ProviderError& e) {
            CHECK(e.kind() == ProviderError::Kind::Exhausted);
        }
    }

    TEST_CASE("in-flight requests never exceed the concurrency cap") {
        MockServer mock;
        std::atomic<int> in_flight{0};
        std::atomic<int> peak{0};
        mock.server.Post("/v1/chat/completions",
                         [&](const httplib::Request&, httplib::Response& res) {
                             int now = ++in_flight;
                             int prev = peak.load();
                             while (now > prev && !peak.compare_exchange_weak(prev, now)) {
                             }
                             std::this_thread::sleep_for(std::chrono::milliseconds(30));
                             --in_flight;
                             res.set_content(chat_body("ok"), "application/json");
                         });
        mock.start();
        auto config = mock.config();
        config.max_concurrency = 2;
        RemoteChatProvider provider(config);
        std::vector<std::thread> workers;
        for (int i = 0; i < 8; ++i) {
            workers.emplace_back([&provider] { provider.chat({{"user", "q"}}); });
        }
        for (auto& worker : workers) worker.join();
        CHECK(peak.load() <= 2);
    }

    TEST_CASE("embedding round-trip preserves order and learns the dimension") {
        MockServer mock;
        mock.server.Post("/v1/embeddings", [&](const httplib::Request& req,
                                               httplib::Response& res) {
            auto body = json::parse(req.body);
            json data = json::array();
            for (std::size_t i = 0; i < body["input"].size(); ++i) {
                data.push_back(
                    {{"embedding", {static_cast<double>(i), 1.0, 0.0}}, {"index", i}});
            }
            res.set_content(json{{"data", data}}.dump(), "application/json");
        });
        mock.start();
        RemoteEmbeddingProvider provider(mock.config());
        auto batch = provider.embed_batch({"first", "second", "third"});
        REQUIRE(batch.size() == 3);
        CHECK(batch[0].values == std::vector<double>{0.0, 1.0, 0.0});
        CHECK(batch[2].values == std::vector<double>{2.0, 1.0, 0.0});
        CHECK(provider.dim() == 3);
    }

    TEST_CASE("embedding reply size mismatch raises SchemaError") {
        MockServer mock;
        mock.server.Post("/v1/embeddings",
                         [&](const httplib::Request&, httplib::Response& res) {
                             res.set_content(
                                 json{{"data", {{{"embedding", {1.0}}}}}}.dump(),
                                 "application/json");
                         });
        mock.start();
        RemoteEmbeddingProvider provider(mock.config());
        CHECK_THROWS_AS(provider.embed_batch({"a", "b"}), SchemaError);
    }

    TEST_CASE("the armed network guard blocks remote calls before any transport") {
        MockServer mock;
        std::atomic<int> hits{0};
        mock.server.Post("/v1/chat/completions",
                         [&](const httplib::Request&, httplib::Response& res) {
                             ++hits;
                             res.set_content(chat_body("leak"), "application/json");
                         });
        mock.start();
        RemoteChatProvider provider(mock.config());
        {
            NetworkGuard::Scope guard;
            CHECK(NetworkGuard::armed());
            CHECK_THROWS_AS(provider.chat({{"user", "q"}}), NetworkGuardViolation);
            // The violation is a logic error, deliberately outside the
            // domain-error hierarchy that fallbacks catch.
            CHECK_THROWS_AS(provider.chat({{"user", "q"}}), std::logic_error);
        }
        CHECK_FALSE(NetworkGuard::armed());
        CHECK(hits.load() == 0);
        CHECK(provider.chat({{"user", "q"}}) == "leak");
        CHECK(hits.load() == 1);
    }
}
