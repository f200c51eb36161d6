// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "esforge/counselor.hpp"
#include "esforge/dialogue.hpp"
#include "esforge/llm.hpp"
#include "esforge/prompts.hpp"
#include "esforge/seed_pools.hpp"
#include "esforge/taxonomy.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

namespace esforge {

/// A named counselor + supporter stack a session can talk to.
struct ModelBinding {
    ChatBackend* backend = nullptr;
    std::shared_ptr<const Counselor> counselor;
};

struct ServiceOptions {
    /// Seeds session ids and the hidden A/B orders.
    std::uint64_t seed = 0;
    /// Append-only JSONL event log; empty disables persistence.
    std::filesystem::path session_log;
    /// Static UI bundle served at `/`; empty disables static serving.
    std::filesystem::path ui_dir;
    std::string cors_origin = "*";
    PromptTemplates templates = PromptTemplates::builtin();
    /// Exemplar dialogues for the supporter; may be null.
    std::shared_ptr<const SeedPools> pools;
    /// Resolves the category of a session's problem type; may be null.
    std::shared_ptr<const Taxonomy> taxonomy;
};

struct ServiceResponse {
    int status = 200;
    nlohmann::json body;
};

/// The seven questionnaire dimensions, each rated 1..5.
inline constexpr std::array<std::string_view, 7> kRatingMetrics = {
    "Empathy", "Informativeness", "Coherence", "Suggestion", "Understanding", "Helpfulness", "Overall",
};

inline constexpr std::array<std::string_view, 3> kAbChoices = {"A wins", "Tie", "B wins"};

/// Transport-independent session logic behind the HTTP endpoints. Sessions are
/// independent; calls on one session are serialized in arrival order.
class SessionService {
public:
    SessionService(std::map<std::string, ModelBinding> models, ServiceOptions options);

    /// Body: `{"arm": "single", "model": name}` or `{"arm": "ab", "models": [a, b]}`,
    /// optionally `"scenario"` and `"problem_type"`.
    ServiceResponse create_session(const nlohmann::json& body);
    ServiceResponse post_message(const std::string& session_id, const nlohmann::json& body);
    ServiceResponse submit_rating(const std::string& session_id, const nlohmann::json& body);
    ServiceResponse export_session(const std::string& session_id);
    ServiceResponse strategies() const;
    ServiceResponse health() const;

    /// Hidden mapping label -> model name; test and audit hook.
    std::optional<std::map<std::string, std::string>> hidden_mapping(const std::string& session_id);

    const ServiceOptions& options() const noexcept { return options_; }

private:
    struct Session;

    std::shared_ptr<Session> find(const std::string& id);
    void log_event(const nlohmann::json& event);

    std::map<std::string, ModelBinding> models_;
    ServiceOptions options_;

    std::shared_mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;

    std::mutex rng_mutex_;
    std::mt19937_64 rng_;

    std::mutex log_mutex_;
};

/// HTTP binding of SessionService: POST /sessions, POST /sessions/{id}/messages,
/// POST /sessions/{id}/rating, GET /sessions/{id}/export, GET /strategies,
/// GET /healthz, plus CORS and static UI files.
class HttpServer {
public:
    explicit HttpServer(SessionService& service);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds; port 0 picks a free port. Returns the bound port. Throws Error on failure.
    int bind(const std::string& host, int port);

    /// Serves on the calling thread until stop().
    void listen();

    /// Serves on a background thread.
    void start();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace esforge
