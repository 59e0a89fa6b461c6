#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "nesy/engine.hpp"
#include "nesy/errors.hpp"

using namespace nesy;

namespace {

// Local chat-completions stand-in. Each test installs its own handler.
class LocalServer {
public:
    explicit LocalServer(httplib::Server::Handler handler) {
        server_.Post("/v1/chat/completions", handler);
        server_.Post("/v1/embeddings", handler);
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LocalServer() {
        server_.stop();
        thread_.join();
    }
    std::string base() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

struct Captured {
    std::mutex mu;
    std::vector<std::string> bodies;
    std::vector<std::string> auth;
    std::atomic<int> hits{0};
};

EngineConfig config_for(const std::string& endpoint) {
    EngineConfig c;
    c.endpoint = endpoint;
    c.model = "local-model";
    c.timeout_s = 5.0;
    c.retry_count = 2;
    c.api_key_env = "NESY_TEST_HTTP_KEY";
    return c;
}

EngineRequest hello() {
    EngineRequest r;
    r[Segment::operation] = "Reply politely.";
    r[Segment::user_input] = "Hello";
    return r;
}

const char* kOk = R"({"choices":[{"message":{"role":"assistant","content":"Hi there"}}]})";

}  // namespace

TEST(HttpCompletion, SendsChatCompletionsBody) {
    Captured cap;
    LocalServer srv([&](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard<std::mutex> lock(cap.mu);
        cap.bodies.push_back(req.body);
        cap.auth.push_back(req.get_header_value("Authorization"));
        res.set_content(kOk, "application/json");
    });
    unsetenv("NESY_TEST_HTTP_KEY");
    HttpCompletion engine(config_for(srv.base() + "/v1/chat/completions"));
    EXPECT_EQ(engine.complete(hello()).text, "Hi there");
    ASSERT_EQ(cap.bodies.size(), 1u);
    auto body = nlohmann::json::parse(cap.bodies[0]);
    EXPECT_EQ(body["model"], "local-model");
    EXPECT_EQ(body["messages"][0]["role"], "system");
    EXPECT_EQ(body["messages"][1]["content"], "[INPUT]\nHello");
    EXPECT_EQ(cap.auth[0], "");
}

TEST(HttpCompletion, BearerKeyOnlyInHeader) {
    Captured cap;
    LocalServer srv([&](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard<std::mutex> lock(cap.mu);
        cap.bodies.push_back(req.body);
        cap.auth.push_back(req.get_header_value("Authorization"));
        res.set_content(kOk, "application/json");
    });
    setenv("NESY_TEST_HTTP_KEY", "sk-local-123", 1);
    HttpCompletion engine(config_for(srv.base() + "/v1/chat/completions"));
    auto r = engine.complete(hello());
    unsetenv("NESY_TEST_HTTP_KEY");
    ASSERT_EQ(cap.auth.size(), 1u);
    EXPECT_EQ(cap.auth[0], "Bearer sk-local-123");
    EXPECT_EQ(cap.bodies[0].find("sk-local-123"), std::string::npos);
    EXPECT_EQ(r.raw.find("sk-local-123"), std::string::npos);
}

TEST(HttpCompletion, RetriesTransientStatus) {
    Captured cap;
    LocalServer srv([&](const httplib::Request&, httplib::Response& res) {
        if (cap.hits.fetch_add(1) < 2) {
            res.status = 503;
            return;
        }
        res.set_content(kOk, "application/json");
    });
    HttpCompletion engine(config_for(srv.base() + "/v1/chat/completions"));
    EXPECT_EQ(engine.complete(hello()).text, "Hi there");
    EXPECT_EQ(cap.hits.load(), 3);
}

TEST(HttpCompletion, GivesUpAfterRetryCount) {
    Captured cap;
    LocalServer srv([&](const httplib::Request&, httplib::Response& res) {
        cap.hits.fetch_add(1);
        res.status = 503;
    });
    auto cfg = config_for(srv.base() + "/v1/chat/completions");
    cfg.retry_count = 1;
    HttpCompletion engine(cfg);
    EXPECT_THROW(engine.complete(hello()), EngineUnavailableError);
    EXPECT_EQ(cap.hits.load(), 2);
}

TEST(HttpCompletion, ClientErrorsAreNotRetried) {
    Captured cap;
    LocalServer srv([&](const httplib::Request&, httplib::Response& res) {
        cap.hits.fetch_add(1);
        res.status = 401;
    });
    HttpCompletion engine(config_for(srv.base() + "/v1/chat/completions"));
    EXPECT_THROW(engine.complete(hello()), EngineUnavailableError);
    EXPECT_EQ(cap.hits.load(), 1);
}

TEST(HttpCompletion, MalformedBodyIsProtocolError) {
    LocalServer srv([](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"unexpected":true})", "application/json");
    });
    HttpCompletion engine(config_for(srv.base() + "/v1/chat/completions"));
    try {
        engine.complete(hello());
        FAIL() << "expected ProtocolError";
    } catch (const ProtocolError& e) {
        EXPECT_EQ(e.raw_body(), R"({"unexpected":true})");
        EXPECT_EQ(exit_code_for(e.kind()), 3);
    }
}

TEST(HttpCompletion, UnreachableEndpoint) {
    int port;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    auto cfg = config_for("http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions");
    cfg.retry_count = 1;
    cfg.timeout_s = 1.0;
    HttpCompletion engine(cfg);
    EXPECT_THROW(engine.complete(hello()), EngineUnavailableError);
}

TEST(HttpCompletion, RelativeEndpointIsConfigError) {
    HttpCompletion engine(config_for("localhost/v1"));
    EXPECT_THROW(engine.complete(hello()), ConfigError);
}

TEST(HttpEmbedding, ReadsDataVectors) {
    Captured cap;
    LocalServer srv([&](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard<std::mutex> lock(cap.mu);
        cap.bodies.push_back(req.body);
        res.set_content(R"({"data":[{"embedding":[0.6,0.8]},{"embedding":[1,0]}]})", "application/json");
    });
    HttpEmbedding engine(config_for(srv.base() + "/v1/embeddings"));
    auto v = engine.embed({"a", "b"});
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[0], (Embedding{0.6, 0.8}));
    auto body = nlohmann::json::parse(cap.bodies[0]);
    EXPECT_EQ(body["input"], (nlohmann::json{"a", "b"}));
    EXPECT_EQ(body["model"], "local-model");
    EXPECT_THROW(engine.embed({"only one"}), ProtocolError);
}
