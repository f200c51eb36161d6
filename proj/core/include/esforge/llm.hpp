// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace esforge {

enum class ChatRole { User, Assistant };

struct ChatMessage {
    ChatRole role = ChatRole::User;
    std::string text;
};

struct ChatRequest {
    /// Which pipeline role is asking ("seeker", "counselor", ...). The scripted
    /// backend keys its replay queues on it; the HTTP backend ignores it.
    std::string role_tag;
    std::string system_prompt;
    std::vector<ChatMessage> messages;
    double temperature = 0.7;
    int max_tokens = 256;

    /// Throws Error unless messages is non-empty, temperature is in [0, 2] and
    /// max_tokens is positive.
    void validate() const;
};

enum class BackendKind { Http, Scripted };

struct BackendConfig {
    BackendKind kind = BackendKind::Scripted;
    std::string endpoint_url;
    std::string model_name;
    std::string api_key_env_var;
    std::chrono::milliseconds timeout{60'000};
    int max_retries = 3;
    std::size_t max_concurrent = 4;
    std::chrono::milliseconds backoff_base{500};
    std::filesystem::path fixture_path;

    void validate() const;

    /// Relative fixture paths resolve against `base_dir`.
    static BackendConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
};

/// Chat-completion backend. Implementations are safe to call concurrently.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;

    /// Returns non-empty completion text or throws (TransportError,
    /// FixtureUnderrunError, ProtocolError).
    virtual std::string complete(const ChatRequest& request) = 0;

    virtual std::size_t max_concurrent() const noexcept = 0;

    /// True when identical call sequences always yield identical outputs.
    virtual bool deterministic() const noexcept = 0;
};

/// Replays fixture responses from per-role-tag FIFO queues. Fixture format:
/// JSONL of `{"role_tag": "...", "text": "..."}`. Consumption is serialized
/// internally; every request is recorded for inspection.
class ScriptedBackend final : public ChatBackend {
public:
    struct Entry {
        std::string role_tag;
        std::string text;
    };

    explicit ScriptedBackend(std::vector<Entry> entries);
    static std::unique_ptr<ScriptedBackend> from_file(const std::filesystem::path& fixture);
    static std::vector<Entry> read_fixture(const std::filesystem::path& fixture);

    std::string complete(const ChatRequest& request) override;
    std::size_t max_concurrent() const noexcept override { return 1; }
    bool deterministic() const noexcept override { return true; }

    std::size_t remaining(std::string_view role_tag) const;
    std::vector<ChatRequest> requests() const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::deque<std::string>, std::less<>> queues_;
    std::vector<ChatRequest> log_;
};

/// Retry schedule for the HTTP backend: exponential with full jitter.
/// Attempt `k` (0-based) sleeps uniformly in [0, base * 2^k].
std::chrono::milliseconds backoff_upper_bound(std::chrono::milliseconds base, int attempt) noexcept;

/// OpenAI-compatible `POST {endpoint}/chat/completions` client. Retries on
/// connection failures, timeouts, 429 and 5xx; at most max_concurrent requests
/// are in flight at once.
class HttpBackend final : public ChatBackend {
public:
    explicit HttpBackend(BackendConfig config);
    ~HttpBackend() override;

    std::string complete(const ChatRequest& request) override;
    std::size_t max_concurrent() const noexcept override { return config_.max_concurrent; }
    bool deterministic() const noexcept override { return false; }

    /// Retries performed by the most recent complete() on this thread.
    static int last_retry_count() noexcept;

    static nlohmann::json request_body(const ChatRequest& request, std::string_view model);

private:
    struct Impl;
    BackendConfig config_;
    std::unique_ptr<Impl> impl_;
};

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config);

}  // namespace esforge
