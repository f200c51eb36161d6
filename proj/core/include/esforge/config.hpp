// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "esforge/counselor.hpp"
#include "esforge/engine.hpp"
#include "esforge/llm.hpp"
#include "esforge/postprocess.hpp"
#include "esforge/prompts.hpp"
#include "esforge/seed_pools.hpp"
#include "esforge/service.hpp"
#include "esforge/supporter.hpp"
#include "esforge/taxonomy.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace esforge {

/// Directory holding the shipped taxonomy, seed pools, prompts and lexicons.
/// `ESFORGE_DATA_DIR` in the environment overrides the build-time location.
std::filesystem::path default_data_dir();

/// One JSON manifest for every subcommand. Relative paths resolve against the
/// directory of the config file; unset data paths fall back to default_data_dir().
struct AppConfig {
    struct Roles {
        std::string scenario;
        std::string profile;
        std::string seeker;
        std::string counselor;
        std::string supporter;
    };

    struct Paths {
        std::filesystem::path taxonomy;
        std::filesystem::path scenario_pool;
        std::filesystem::path profile_pool;
        std::filesystem::path prompts_dir;
        std::filesystem::path farewell_lexicon;
        std::filesystem::path role_patterns;
        /// Fitted counselor model; when unset the model is fit from the scenario pool.
        std::filesystem::path transition_model;
    };

    struct ServedModel {
        std::string backend;
        CounselorMode counselor = CounselorMode::Statistical;
        /// Backend for prompted/hybrid counselors; empty means `backend`.
        std::string counselor_backend;
    };

    struct Service {
        std::string host = "127.0.0.1";
        int port = 8080;
        std::uint64_t seed = 0;
        std::filesystem::path session_log;
        std::filesystem::path ui_dir;
        std::string cors_origin = "*";
        std::map<std::string, ServedModel> models;
    };

    std::filesystem::path base_dir;
    std::map<std::string, BackendConfig> backends;
    Roles roles;
    Paths paths;
    EngineConfig engine;
    FilterPolicy postprocess;
    Service service;

    /// Built-in defaults with data paths under default_data_dir() and no backends.
    static AppConfig defaults();
    static AppConfig load(const std::filesystem::path& path);
    /// Unknown keys are rejected with ConfigError.
    static AppConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
};

/// Live objects built from an AppConfig.
class Runtime {
public:
    explicit Runtime(AppConfig config);

    const AppConfig& config() const noexcept { return config_; }

    /// Lazily constructed; one instance per backend name. Throws ConfigError for
    /// unknown names.
    ChatBackend& backend(const std::string& name);
    ChatBackend* role_backend(const std::string& name);

    const Taxonomy& taxonomy() const noexcept { return taxonomy_; }
    const PromptTemplates& templates() const noexcept { return templates_; }
    const FarewellLexicon& farewells() const noexcept { return farewells_; }
    const RolePatternLexicon& role_patterns() const noexcept { return role_patterns_; }
    const SeedPools& pools() const noexcept { return pools_; }

    /// Loaded from paths.transition_model, or fit from the scenario pool.
    const TransitionModel& transition_model();

    EngineContext engine_context();

    std::map<std::string, ModelBinding> service_models();

private:
    AppConfig config_;
    Taxonomy taxonomy_;
    PromptTemplates templates_;
    FarewellLexicon farewells_;
    RolePatternLexicon role_patterns_;
    SeedPools pools_;
    std::optional<TransitionModel> model_;
    std::map<std::string, std::unique_ptr<ChatBackend>> backends_;
    std::mutex backends_mutex_;
};

}  // namespace esforge
