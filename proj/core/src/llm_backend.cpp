// SPDX-License-Identifier: Apache-2.0
#include "esforge/errors.hpp"
#include "esforge/llm.hpp"

namespace esforge {

void ChatRequest::validate() const {
    if (messages.empty()) throw Error("chat request has no messages");
    if (!(temperature >= 0.0 && temperature <= 2.0)) throw Error("temperature outside [0, 2]");
    if (max_tokens <= 0) throw Error("max_tokens must be positive");
}

void BackendConfig::validate() const {
    if (kind == BackendKind::Http) {
        if (endpoint_url.empty()) throw ConfigError("http backend requires endpoint_url");
        if (model_name.empty()) throw ConfigError("http backend requires model_name");
    } else if (fixture_path.empty()) {
        throw ConfigError("scripted backend requires fixture_path");
    }
    if (max_concurrent == 0) throw ConfigError("max_concurrent must be positive");
    if (max_retries < 0) throw ConfigError("max_retries must be non-negative");
}

BackendConfig BackendConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("backend config must be an object");
    BackendConfig c;
    const std::string kind = j.value("kind", "scripted");
    if (kind == "http") {
        c.kind = BackendKind::Http;
    } else if (kind == "scripted") {
        c.kind = BackendKind::Scripted;
    } else {
        throw ConfigError("unknown backend kind \"" + kind + "\"");
    }
    c.endpoint_url = j.value("endpoint_url", "");
    c.model_name = j.value("model_name", "");
    c.api_key_env_var = j.value("api_key_env_var", "");
    c.timeout = std::chrono::milliseconds(j.value("timeout_ms", 60'000));
    c.max_retries = j.value("max_retries", 3);
    c.max_concurrent = j.value("max_concurrent", std::size_t{4});
    c.backoff_base = std::chrono::milliseconds(j.value("backoff_base_ms", 500));
    if (j.contains("api_key")) throw ConfigError("API keys must come from the environment (api_key_env_var)");
    if (auto f = j.value("fixture_path", std::string{}); !f.empty()) {
        std::filesystem::path p(f);
        c.fixture_path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    c.validate();
    return c;
}

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config) {
    config.validate();
    if (config.kind == BackendKind::Scripted) return ScriptedBackend::from_file(config.fixture_path);
    return std::make_unique<HttpBackend>(config);
}

}  // namespace esforge
