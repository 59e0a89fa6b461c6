#include "nesy/engine.hpp"

#include <cmath>

#include "nesy/baseline.hpp"
#include "nesy/errors.hpp"
#include "nesy/text.hpp"

namespace nesy {

void EngineConfig::validate() const {
    if (context_budget == 0) throw ConfigError("context_budget must be positive");
    if (retry_count < 0) throw ConfigError("retry_count must be non-negative");
    if (timeout_s <= 0) throw ConfigError("timeout must be positive");
}

EngineConfig EngineConfig::from_json(const nlohmann::json& j) {
    EngineConfig c;
    try {
        c.endpoint = j.value("endpoint", c.endpoint);
        c.model = j.value("model", c.model);
        c.context_budget = j.value("context_budget", c.context_budget);
        c.api_key_env = j.value("api_key_env", c.api_key_env);
        c.timeout_s = j.value("timeout", c.timeout_s);
        c.retry_count = j.value("retry_count", c.retry_count);
        c.seed = j.value("seed", c.seed);
        c.temperature = j.value("temperature", c.temperature);
        c.max_tokens = j.value("max_tokens", c.max_tokens);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("engine block: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json EngineConfig::to_json() const {
    return {{"endpoint", endpoint},           {"model", model},         {"context_budget", context_budget},
            {"api_key_env", api_key_env},     {"timeout", timeout_s},   {"retry_count", retry_count},
            {"seed", seed},                   {"temperature", temperature}, {"max_tokens", max_tokens}};
}

nlohmann::json prepare(const EngineConfig& config, const EngineRequest& request) {
    auto measured = estimate_context(request);
    if (measured > config.context_budget) throw BudgetError(measured, config.context_budget);
    nlohmann::json body;
    body["model"] = config.model;
    body["messages"] = nlohmann::json::array({
        {{"role", "system"}, {"content", render_system(request)}},
        {{"role", "user"}, {"content", render_user(request)}},
    });
    body["temperature"] = request.decode.temperature;
    body["max_tokens"] = request.decode.max_tokens;
    body["seed"] = request.decode.seed;
    if (!request.stop.empty()) body["stop"] = request.stop;
    return body;
}

nlohmann::json prepare_embedding(const EngineConfig& config, const std::vector<std::string>& texts) {
    return {{"model", config.model}, {"input", texts}};
}

EngineResponse parse_completion_response(const std::string& body) {
    auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ProtocolError("completion response is not a JSON object", body);
    const auto choices = j.find("choices");
    if (choices == j.end() || !choices->is_array() || choices->empty()) {
        throw ProtocolError("completion response has no choices", body);
    }
    const auto& first = (*choices)[0];
    if (!first.contains("message") || !first["message"].contains("content") ||
        !first["message"]["content"].is_string()) {
        throw ProtocolError("choices[0].message.content missing", body);
    }
    EngineResponse r;
    r.text = first["message"]["content"].get<std::string>();
    if (auto u = j.find("usage"); u != j.end() && u->is_object()) {
        r.usage.prompt_tokens = u->value("prompt_tokens", std::size_t{0});
        r.usage.completion_tokens = u->value("completion_tokens", std::size_t{0});
    }
    r.raw = body;
    return r;
}

EngineResponse parse_embedding_response(const std::string& body, std::size_t expected_count) {
    auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ProtocolError("embedding response is not a JSON object", body);
    const auto data = j.find("data");
    if (data == j.end() || !data->is_array() || data->size() != expected_count) {
        throw ProtocolError("embedding response data does not match the input count", body);
    }
    EngineResponse r;
    for (const auto& item : *data) {
        if (!item.contains("embedding") || !item["embedding"].is_array()) {
            throw ProtocolError("data[i].embedding missing", body);
        }
        Embedding v;
        for (const auto& x : item["embedding"]) {
            if (!x.is_number()) throw ProtocolError("embedding entry is not a number", body);
            v.push_back(x.get<double>());
            if (!std::isfinite(v.back())) throw ProtocolError("embedding entry is not finite", body);
        }
        if (!r.vectors.empty() && v.size() != r.vectors.front().size()) {
            throw ProtocolError("embedding dimensions differ within one batch", body);
        }
        r.vectors.push_back(std::move(v));
    }
    r.raw = body;
    return r;
}

MockCompletion::MockCompletion(std::map<std::string, std::string> script, std::uint64_t seed,
                               std::size_t context_budget)
    : script_(std::move(script)) {
    config_.model = "mock";
    config_.seed = seed;
    config_.context_budget = context_budget;
    config_.validate();
}

std::string MockCompletion::match_key(const EngineRequest& request) {
    return request[Segment::operation] + "\n" + request[Segment::payload] + "\n" + request[Segment::user_input];
}

EngineResponse MockCompletion::do_complete(const EngineRequest& request) {
    auto wire = prepare(config_, request);
    auto key = match_key(request);
    const std::string* best = nullptr;
    std::size_t best_len = 0;
    for (const auto& [pattern, response] : script_) {
        if (pattern.size() > best_len && text::contains(key, pattern)) {
            best = &response;
            best_len = pattern.size();
        }
    }
    EngineResponse r;
    r.text = best ? *best : "mock:" + text::hex64(text::fnv1a(wire.dump(), config_.seed));
    r.usage.prompt_tokens = estimate_context(request);
    r.usage.completion_tokens = estimate_tokens(r.text);
    return r;
}

EngineResponse RandomAsciiCompletion::do_complete(const EngineRequest& request) {
    EngineResponse r;
    r.text = seeded_shuffle(printable_ascii(), text::fnv1a(render_request(request), seed_));
    return r;
}

MockEmbedding::MockEmbedding(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim == 0) throw ConfigError("mock embedding dimension must be positive");
}

std::string MockEmbedding::id() const {
    return "mock-embedding:dim=" + std::to_string(dim_) + ":seed=" + std::to_string(seed_);
}

Embedding MockEmbedding::embed_text(std::string_view s) const {
    // \x02 and \x03 mark the boundaries so short and empty texts still have grams
    std::string padded = "\x02" + std::string(s) + "\x03";
    Embedding v(dim_, 0.0);
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
        auto h = text::fnv1a(std::string_view(padded).substr(i, 3), seed_);
        auto bucket = static_cast<std::size_t>((h >> 8) % dim_);
        v[bucket] += (h & 1) ? 1.0 : -1.0;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm == 0.0) {
        // every gram cancelled out; fall back to a fixed axis
        v[static_cast<std::size_t>(text::fnv1a(padded, seed_) % dim_)] = 1.0;
        return v;
    }
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

std::vector<Embedding> MockEmbedding::do_embed(const std::vector<std::string>& texts) {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_text(t));
    return out;
}

HttpCompletion::HttpCompletion(EngineConfig config) : config_(std::move(config)) { config_.validate(); }

EngineResponse HttpCompletion::do_complete(const EngineRequest& request) {
    auto req = request;
    if (req.decode.seed == 0) req.decode.seed = config_.seed;
    req.decode.temperature = config_.temperature;
    req.decode.max_tokens = config_.max_tokens;
    auto body = prepare(config_, req).dump();
    return parse_completion_response(post_json(config_, body));
}

HttpEmbedding::HttpEmbedding(EngineConfig config) : config_(std::move(config)) { config_.validate(); }

std::vector<Embedding> HttpEmbedding::do_embed(const std::vector<std::string>& texts) {
    auto body = prepare_embedding(config_, texts).dump();
    return parse_embedding_response(post_json(config_, body), texts.size()).vectors;
}

}  // namespace nesy
