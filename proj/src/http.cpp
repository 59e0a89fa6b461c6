#include <cstdlib>

#include <httplib.h>

#include "nesy/engine.hpp"
#include "nesy/errors.hpp"

namespace nesy {

namespace {

struct Url {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Url split_url(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint must be an absolute URL: " + endpoint);
    auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {endpoint, "/"};
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

bool transient(int status) { return status == 429 || status >= 500; }

}  // namespace

std::string post_json(const EngineConfig& config, const std::string& body) {
    auto url = split_url(config.endpoint);
    httplib::Client client(url.origin);
    auto secs = static_cast<time_t>(config.timeout_s);
    auto usecs = static_cast<time_t>((config.timeout_s - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers headers;
    if (const char* key = std::getenv(config.api_key_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::string last_error;
    int attempts = 0;
    while (attempts <= config.retry_count) {
        ++attempts;
        auto res = client.Post(url.path, headers, body, "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) return res->body;
        last_error = "HTTP status " + std::to_string(res->status);
        if (!transient(res->status)) break;
    }
    throw EngineUnavailableError(config.endpoint + " unavailable after " + std::to_string(attempts) +
                                 " attempt(s): " + last_error);
}

}  // namespace nesy
