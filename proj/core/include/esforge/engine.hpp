// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "esforge/counselor.hpp"
#include "esforge/dialogue.hpp"
#include "esforge/llm.hpp"
#include "esforge/postprocess.hpp"
#include "esforge/prompts.hpp"
#include "esforge/seed_pools.hpp"
#include "esforge/supporter.hpp"
#include "esforge/taxonomy.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace esforge {

/// Backend per pipeline role. The counselor backend may be null for a purely
/// statistical counselor.
struct RoleBackends {
    ChatBackend* scenario = nullptr;
    ChatBackend* profile = nullptr;
    ChatBackend* seeker = nullptr;
    ChatBackend* counselor = nullptr;
    ChatBackend* supporter = nullptr;

    /// Smallest max_concurrent among the set backends; 1 if any is deterministic.
    std::size_t parallelism() const noexcept;
};

struct EngineConfig {
    std::size_t max_rounds = 12;
    std::size_t min_rounds_for_acceptance = 4;
    CounselorMode counselor_mode = CounselorMode::Statistical;
    bool sample_strategies = false;
    std::uint64_t rng_seed = 0;
    bool self_iterate = true;
    std::string generator_tag = "esforge";
    /// When set, every dialogue is stamped with this RFC 3339 time instead of
    /// the wall clock.
    std::optional<std::string> fixed_created_at;
    /// Upper bound on dialogues in flight; further capped by the backends.
    std::size_t max_parallel = 4;
    GenerationParams scenario_params{0.9, 256};
    GenerationParams profile_params{0.9, 256};
    GenerationParams seeker_params{0.8, 160};
    GenerationParams supporter_params{0.7, 200};
    GenerationParams counselor_params{0.2, 32};
    FilterPolicy acceptance;

    /// Throws ConfigError on inconsistent settings.
    void validate() const;
};

/// Read-only collaborators shared by every dialogue of a run.
struct EngineContext {
    const PromptTemplates* templates = nullptr;
    const FarewellLexicon* farewells = nullptr;
    const RolePatternLexicon* role_patterns = nullptr;
    const TransitionModel* transition_model = nullptr;
    RoleBackends backends;
};

struct Persona {
    ProblemType problem_type;
    std::string scenario;
    SeekerProfile profile;
};

enum class Termination { Farewell, MaxRounds, Aborted };

std::string_view to_string(Termination t) noexcept;

struct PromptRecord {
    std::string role_tag;
    std::string system_prompt;
};

struct DialogueRun {
    Dialogue dialogue;
    Termination termination = Termination::MaxRounds;
    std::string abort_reason;
    /// One entry per supporter turn, logged before the turn is generated.
    std::vector<StrategyDecision> decisions;
    std::vector<PromptRecord> prompts;
};

/// Derives the child seed for dialogue `index` from the master seed.
std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Current UTC time in RFC 3339 with second precision.
std::string utc_now_rfc3339();

/// Seeker -> counselor -> supporter rounds until both latest utterances are
/// farewells, max_rounds is reached, or a role backend fails (aborted).
DialogueRun run_dialogue(const Persona& persona, const Dialogue* exemplar, const EngineContext& ctx,
                         const EngineConfig& cfg, std::mt19937_64& rng, std::string id = {},
                         std::uint64_t seed = 0);

struct RunReport {
    std::size_t requested = 0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t aborted = 0;
    std::size_t pool_growth = 0;
    std::uint64_t master_seed = 0;
    /// `{"index", "id", "stage", "reason"}` per non-accepted dialogue.
    nlohmann::json failures = nlohmann::json::array();

    nlohmann::json to_json() const;
};

struct BatchResult {
    std::vector<Dialogue> corpus;
    SeedPools pools;
    RunReport report;
    std::vector<DialogueRun> runs;
};

/// Generates `n` dialogues. Dialogues run in waves of up to the effective
/// parallelism; each wave samples from the pools as they stood when the wave
/// started, and pool appends are applied in dialogue-index order afterwards, so
/// output never depends on scheduling. Throws Error when either pool is empty.
BatchResult run_batch(std::size_t n, const Taxonomy& taxonomy, SeedPools pools, const EngineContext& ctx,
                      const EngineConfig& cfg);

}  // namespace esforge
