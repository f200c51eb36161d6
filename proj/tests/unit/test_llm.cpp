// SPDX-License-Identifier: Apache-2.0
#include "esforge/corpus_io.hpp"
#include "esforge/errors.hpp"
#include "esforge/llm.hpp"

#include "support.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <thread>

using namespace esforge;
using nlohmann::json;

namespace {

ChatRequest req(std::string tag, std::string text = "go") {
    ChatRequest r;
    r.role_tag = std::move(tag);
    r.system_prompt = "system";
    r.messages.push_back({ChatRole::User, std::move(text)});
    return r;
}

std::string completion(const std::string& text) {
    return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", text}}}}})}}.dump();
}

/// Loopback stub speaking the chat-completions shape.
class StubServer {
public:
    explicit StubServer(httplib::Server::Handler handler) {
        server_.Post("/v1/chat/completions", std::move(handler));
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }
    BackendConfig config(int max_retries = 2, std::size_t max_concurrent = 4) const {
        BackendConfig c;
        c.kind = BackendKind::Http;
        c.endpoint_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
        c.model_name = "stub-model";
        c.max_retries = max_retries;
        c.max_concurrent = max_concurrent;
        c.backoff_base = std::chrono::milliseconds(1);
        c.timeout = std::chrono::milliseconds(5000);
        return c;
    }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace

TEST(ChatRequest, Validation) {
    auto r = req("seeker");
    EXPECT_NO_THROW(r.validate());
    r.temperature = 2.5;
    EXPECT_THROW(r.validate(), Error);
    r.temperature = 0.0;
    r.max_tokens = 0;
    EXPECT_THROW(r.validate(), Error);
    r.max_tokens = 1;
    r.messages.clear();
    EXPECT_THROW(r.validate(), Error);
}

TEST(Scripted, ReplaysPerRoleTag) {
    ScriptedBackend b(std::vector<ScriptedBackend::Entry>{{"seeker", "I failed my exam."}, {"supporter", "That sounds hard."}, {"seeker", "Yes."}});
    EXPECT_EQ(b.complete(req("seeker")), "I failed my exam.");
    EXPECT_EQ(b.complete(req("supporter")), "That sounds hard.");
    EXPECT_EQ(b.remaining("seeker"), 1u);
    EXPECT_EQ(b.complete(req("seeker")), "Yes.");
    EXPECT_THROW(b.complete(req("seeker")), FixtureUnderrunError);
    EXPECT_THROW(b.complete(req("counselor")), FixtureUnderrunError);
    EXPECT_EQ(b.requests().size(), 5u);
}

TEST(Scripted, EmptyCompletionIsProtocolError) {
    ScriptedBackend b(std::vector<ScriptedBackend::Entry>{{"seeker", "  \n"}});
    EXPECT_THROW(b.complete(req("seeker")), ProtocolError);
}

TEST(Scripted, IdenticalCallSequencesGiveIdenticalOutputs) {
    const auto entries = ScriptedBackend::read_fixture(test::data_dir() / "generate_fixture.jsonl");
    ScriptedBackend a(entries), b(entries);
    for (const char* tag : {"scenario", "seeker", "supporter", "profile", "seeker", "supporter"}) {
        EXPECT_EQ(a.complete(req(tag)), b.complete(req(tag)));
    }
}

TEST(Scripted, FixtureParseErrors) {
    test::TempDir dir;
    write_text_file(dir / "f.jsonl", "{\"role_tag\":\"seeker\",\"text\":\"a\"}\n{\"role_tag\":1}\n");
    try {
        ScriptedBackend::read_fixture(dir / "f.jsonl");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(BackendConfig, FromJsonAndInvariants) {
    const auto c = BackendConfig::from_json({{"kind", "scripted"}, {"fixture_path", "f.jsonl"}}, "/base");
    EXPECT_EQ(c.fixture_path, std::filesystem::path("/base/f.jsonl"));
    EXPECT_THROW(BackendConfig::from_json({{"kind", "scripted"}}), ConfigError);
    EXPECT_THROW(BackendConfig::from_json({{"kind", "http"}, {"model_name", "m"}}), ConfigError);
    EXPECT_THROW(BackendConfig::from_json({{"kind", "http"}, {"endpoint_url", "http://x"}}), ConfigError);
    EXPECT_THROW(BackendConfig::from_json({{"kind", "grpc"}}), ConfigError);
    const auto h = BackendConfig::from_json(
        {{"kind", "http"}, {"endpoint_url", "http://x/v1"}, {"model_name", "m"}, {"api_key_env_var", "KEY"}});
    EXPECT_EQ(h.api_key_env_var, "KEY");
    EXPECT_EQ(h.max_retries, 3);
    EXPECT_EQ(h.backoff_base, std::chrono::milliseconds(500));
}

TEST(BackendConfig, InlineApiKeyIsRejected) {
    EXPECT_THROW(BackendConfig::from_json(
                     {{"kind", "http"}, {"endpoint_url", "http://x"}, {"model_name", "m"}, {"api_key", "sk-123"}}),
                 ConfigError);
}

TEST(Backoff, UpperBoundDoubles) {
    using ms = std::chrono::milliseconds;
    EXPECT_EQ(backoff_upper_bound(ms(500), 0), ms(500));
    EXPECT_EQ(backoff_upper_bound(ms(500), 1), ms(1000));
    EXPECT_EQ(backoff_upper_bound(ms(500), 3), ms(4000));
}

TEST(Http, RequestBodyShape) {
    auto r = req("seeker", "hello");
    r.messages.push_back({ChatRole::Assistant, "hi"});
    const auto body = HttpBackend::request_body(r, "m");
    EXPECT_EQ(body["model"], "m");
    ASSERT_EQ(body["messages"].size(), 3u);
    EXPECT_EQ(body["messages"][0]["role"], "system");
    EXPECT_EQ(body["messages"][1]["role"], "user");
    EXPECT_EQ(body["messages"][2]["role"], "assistant");
    EXPECT_EQ(body["stream"], false);
    EXPECT_EQ(body["max_tokens"], 256);
}

TEST(Http, RetriesOn429ThenSucceeds) {
    std::atomic<int> calls{0};
    StubServer stub([&](const httplib::Request&, httplib::Response& res) {
        if (calls++ == 0) {
            res.status = 429;
            res.set_content("slow down", "text/plain");
        } else {
            res.set_content(completion("ok"), "application/json");
        }
    });
    HttpBackend backend(stub.config(2));
    EXPECT_EQ(backend.complete(req("seeker")), "ok");
    EXPECT_EQ(HttpBackend::last_retry_count(), 1);
    EXPECT_EQ(calls.load(), 2);
}

TEST(Http, RetryBudgetIsBounded) {
    std::atomic<int> calls{0};
    StubServer stub([&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 503;
    });
    HttpBackend backend(stub.config(2));
    EXPECT_THROW(backend.complete(req("seeker")), TransportError);
    EXPECT_EQ(calls.load(), 3);
    EXPECT_LE(HttpBackend::last_retry_count(), 2);
}

TEST(Http, ClientErrorIsNotRetried) {
    std::atomic<int> calls{0};
    StubServer stub([&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 400;
    });
    HttpBackend backend(stub.config(3));
    EXPECT_THROW(backend.complete(req("seeker")), TransportError);
    EXPECT_EQ(calls.load(), 1);
}

TEST(Http, MalformedOrEmptyCompletionIsProtocolError) {
    std::atomic<int> calls{0};
    StubServer stub([&](const httplib::Request&, httplib::Response& res) {
        res.set_content(calls++ == 0 ? std::string("not json") : completion("   "), "application/json");
    });
    HttpBackend backend(stub.config(0));
    EXPECT_THROW(backend.complete(req("seeker")), ProtocolError);
    EXPECT_THROW(backend.complete(req("seeker")), ProtocolError);
}

TEST(Http, ApiKeyComesFromNamedEnvironmentVariable) {
    std::string seen;
    std::mutex m;
    StubServer stub([&](const httplib::Request& r, httplib::Response& res) {
        std::lock_guard lock(m);
        seen = r.get_header_value("Authorization");
        res.set_content(completion("ok"), "application/json");
    });
    test::EnvGuard env("ESFORGE_TEST_KEY", "secret-value");
    auto cfg = stub.config();
    cfg.api_key_env_var = "ESFORGE_TEST_KEY";
    HttpBackend backend(cfg);
    backend.complete(req("seeker"));
    std::lock_guard lock(m);
    EXPECT_EQ(seen, "Bearer secret-value");
}

TEST(Http, InFlightRequestsNeverExceedMaxConcurrent) {
    std::atomic<int> in_flight{0}, peak{0};
    StubServer stub([&](const httplib::Request&, httplib::Response& res) {
        const int now = ++in_flight;
        int p = peak.load();
        while (now > p && !peak.compare_exchange_weak(p, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(30));
        --in_flight;
        res.set_content(completion("ok"), "application/json");
    });
    HttpBackend backend(stub.config(0, 2));
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) threads.emplace_back([&] { EXPECT_EQ(backend.complete(req("seeker")), "ok"); });
    for (auto& t : threads) t.join();
    EXPECT_LE(peak.load(), 2);
    EXPECT_GE(peak.load(), 1);
}

TEST(Http, ConnectionRefusedExhaustsRetries) {
    BackendConfig c;
    c.kind = BackendKind::Http;
    c.endpoint_url = "http://127.0.0.1:1/v1";
    c.model_name = "m";
    c.max_retries = 1;
    c.backoff_base = std::chrono::milliseconds(1);
    c.timeout = std::chrono::milliseconds(500);
    HttpBackend backend(c);
    EXPECT_THROW(backend.complete(req("seeker")), TransportError);
}

TEST(MakeBackend, ScriptedFromConfig) {
    BackendConfig c;
    c.fixture_path = test::data_dir() / "generate_fixture.jsonl";
    const auto b = make_backend(c);
    EXPECT_TRUE(b->deterministic());
    EXPECT_EQ(b->max_concurrent(), 1u);
}
