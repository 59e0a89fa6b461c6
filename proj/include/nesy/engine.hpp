#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nesy/prompt.hpp"

namespace nesy {

using Embedding = std::vector<double>;

struct EngineConfig {
    std::string endpoint;
    std::string model;
    std::size_t context_budget = 4096;
    std::string api_key_env = "NESY_API_KEY";
    double timeout_s = 30.0;
    int retry_count = 2;
    std::uint64_t seed = 0;
    double temperature = 0.0;
    int max_tokens = 512;

    void validate() const;
    static EngineConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct Usage {
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
};

struct EngineResponse {
    std::string text;
    std::vector<Embedding> vectors;
    Usage usage;
    std::string raw;
};

/// Chat-completions wire body for `request`. Throws BudgetError when the
/// estimated size exceeds the configured context budget.
nlohmann::json prepare(const EngineConfig& config, const EngineRequest& request);
nlohmann::json prepare_embedding(const EngineConfig& config, const std::vector<std::string>& texts);

/// Decoders for the two response shapes. Throw ProtocolError carrying the body.
EngineResponse parse_completion_response(const std::string& body);
EngineResponse parse_embedding_response(const std::string& body, std::size_t expected_count);

class CompletionEngine {
public:
    virtual ~CompletionEngine() = default;

    EngineResponse complete(const EngineRequest& request) {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return do_complete(request);
    }

    virtual std::string id() const = 0;
    virtual std::size_t context_budget() const { return 4096; }
    std::size_t calls() const { return calls_.load(std::memory_order_relaxed); }

protected:
    virtual EngineResponse do_complete(const EngineRequest& request) = 0;

private:
    std::atomic<std::size_t> calls_{0};
};

class EmbeddingEngine {
public:
    virtual ~EmbeddingEngine() = default;

    std::vector<Embedding> embed(const std::vector<std::string>& texts) {
        calls_.fetch_add(1, std::memory_order_relaxed);
        return do_embed(texts);
    }
    Embedding embed_one(const std::string& text) { return embed({text}).front(); }

    virtual std::string id() const = 0;
    std::size_t calls() const { return calls_.load(std::memory_order_relaxed); }

protected:
    virtual std::vector<Embedding> do_embed(const std::vector<std::string>& texts) = 0;

private:
    std::atomic<std::size_t> calls_{0};
};

/// Scripted completion engine. Patterns are matched as substrings of the
/// operation, payload and user-input segments; the longest match wins.
/// Unmatched requests get a seeded digest echo.
class MockCompletion final : public CompletionEngine {
public:
    MockCompletion(std::map<std::string, std::string> script, std::uint64_t seed,
                   std::size_t context_budget = 4096);

    std::string id() const override { return "mock-completion"; }
    std::size_t context_budget() const override { return config_.context_budget; }

    /// The text the patterns are matched against.
    static std::string match_key(const EngineRequest& request);

protected:
    EngineResponse do_complete(const EngineRequest& request) override;

private:
    std::map<std::string, std::string> script_;
    EngineConfig config_;
};

/// Answers every request with a seeded shuffle of the printable ASCII set.
class RandomAsciiCompletion final : public CompletionEngine {
public:
    explicit RandomAsciiCompletion(std::uint64_t seed) : seed_(seed) {}
    std::string id() const override { return "random-ascii"; }

protected:
    EngineResponse do_complete(const EngineRequest& request) override;

private:
    std::uint64_t seed_;
};

/// Adapter for ad-hoc engines in tests and fixtures.
class FunctionCompletion final : public CompletionEngine {
public:
    using Fn = std::function<std::string(const EngineRequest&)>;
    FunctionCompletion(Fn fn, std::string id = "function-completion") : fn_(std::move(fn)), id_(std::move(id)) {}
    std::string id() const override { return id_; }

protected:
    EngineResponse do_complete(const EngineRequest& request) override { return {fn_(request), {}, {}, {}}; }

private:
    Fn fn_;
    std::string id_;
};

/// Character-trigram feature hashing into a unit-norm vector of size `dim`.
class MockEmbedding final : public EmbeddingEngine {
public:
    MockEmbedding(std::size_t dim, std::uint64_t seed);
    std::string id() const override;
    std::size_t dim() const { return dim_; }

    Embedding embed_text(std::string_view text) const;

protected:
    std::vector<Embedding> do_embed(const std::vector<std::string>& texts) override;

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

/// OpenAI-compatible chat-completions client.
class HttpCompletion final : public CompletionEngine {
public:
    explicit HttpCompletion(EngineConfig config);
    std::string id() const override { return "http:" + config_.model; }
    std::size_t context_budget() const override { return config_.context_budget; }

protected:
    EngineResponse do_complete(const EngineRequest& request) override;

private:
    EngineConfig config_;
};

/// OpenAI-compatible embeddings client.
class HttpEmbedding final : public EmbeddingEngine {
public:
    explicit HttpEmbedding(EngineConfig config);
    std::string id() const override { return "http:" + config_.model; }

protected:
    std::vector<Embedding> do_embed(const std::vector<std::string>& texts) override;

private:
    EngineConfig config_;
};

/// POST `body` to `endpoint` with retries on transport failure and 429/5xx.
/// Returns the response body of a 200 reply.
std::string post_json(const EngineConfig& config, const std::string& body);

}  // namespace nesy
