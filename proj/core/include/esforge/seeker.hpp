// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "esforge/dialogue.hpp"
#include "esforge/llm.hpp"
#include "esforge/prompts.hpp"
#include "esforge/seed_pools.hpp"
#include "esforge/supporter.hpp"
#include "esforge/taxonomy.hpp"

#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>

namespace esforge {

inline constexpr int kMaxGenerationAttempts = 3;

/// Uniform draw over the taxonomy. Throws Error on an empty taxonomy.
const ProblemType& sample_problem_type(const Taxonomy& taxonomy, std::mt19937_64& rng);

/// Uniform over seeds whose problem type matches `type`, else over the whole
/// pool. Throws Error on an empty pool.
const ScenarioSeed& pick_scenario_seed(const SeedPools& pools, const ProblemType& type, std::mt19937_64& rng);
const ProfileSeed& pick_profile_seed(const SeedPools& pools, const ProblemType& type, std::mt19937_64& rng);

ChatRequest scenario_request(const ProblemType& type, const ScenarioSeed& seed, const PromptTemplates& templates,
                             const GenerationParams& params = {});

/// New scenario for `type` modeled on `seed`. Re-prompts with the same seed up
/// to kMaxGenerationAttempts times until the text has at least 20 words;
/// otherwise throws ScenarioTooShortError.
std::string generate_scenario(const ProblemType& type, const ScenarioSeed& seed, ChatBackend& backend,
                              const PromptTemplates& templates, const GenerationParams& params = {});

/// Line-oriented `Key: value` extraction with case-insensitive keys. Returns
/// nullopt unless all six attributes are present and non-empty.
std::optional<SeekerProfile> parse_profile(std::string_view text);

ChatRequest profile_request(const ProblemType& type, const std::string& scenario, const ProfileSeed& seed,
                            const PromptTemplates& templates, const GenerationParams& params = {});

/// Throws ProfileParseError after kMaxGenerationAttempts unparseable completions.
SeekerProfile generate_profile(const ProblemType& type, const std::string& scenario, const ProfileSeed& seed,
                               ChatBackend& backend, const PromptTemplates& templates,
                               const GenerationParams& params = {});

/// generate_profile followed by appending (type, scenario, profile) to the
/// profile pool.
SeekerProfile generate_profile(const ProblemType& type, const std::string& scenario, const ProfileSeed& seed,
                               ChatBackend& backend, const PromptTemplates& templates, SeedPools& pools,
                               const GenerationParams& params = {});

ChatRequest seeker_request(const SeekerProfile& profile, const std::string& scenario,
                           std::span<const Utterance> history, const PromptTemplates& templates,
                           const GenerationParams& params = {});

/// Next seeker utterance, capped at kSentenceCap sentences.
Utterance seeker_turn(const SeekerProfile& profile, const std::string& scenario, std::span<const Utterance> history,
                      ChatBackend& backend, const PromptTemplates& templates, const GenerationParams& params = {});

}  // namespace esforge
