// SPDX-License-Identifier: Apache-2.0
#include "esforge/seeker.hpp"

#include "esforge/errors.hpp"
#include "esforge/text.hpp"

#include <sstream>

namespace esforge {

namespace {

template <typename Seed>
const Seed& pick_matching(const std::vector<Seed>& seeds, const ProblemType& type, std::mt19937_64& rng,
                          const char* pool_name) {
    if (seeds.empty()) throw Error(std::string(pool_name) + " pool is empty");
    std::vector<const Seed*> matching;
    for (const auto& s : seeds) {
        if (iequals(s.problem_type.name, type.name)) matching.push_back(&s);
    }
    if (matching.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, seeds.size() - 1);
        return seeds[pick(rng)];
    }
    std::uniform_int_distribution<std::size_t> pick(0, matching.size() - 1);
    return *matching[pick(rng)];
}

ChatRequest make_request(std::string tag, std::string system, std::string instruction,
                         const GenerationParams& params) {
    ChatRequest req;
    req.role_tag = std::move(tag);
    req.system_prompt = std::move(system);
    req.messages.push_back({ChatRole::User, std::move(instruction)});
    req.temperature = params.temperature;
    req.max_tokens = params.max_tokens;
    return req;
}

}  // namespace

const ProblemType& sample_problem_type(const Taxonomy& taxonomy, std::mt19937_64& rng) {
    const auto& all = taxonomy.types();
    if (all.empty()) throw Error("taxonomy is empty");
    std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
    return all[pick(rng)];
}

const ScenarioSeed& pick_scenario_seed(const SeedPools& pools, const ProblemType& type, std::mt19937_64& rng) {
    return pick_matching(pools.scenarios(), type, rng, "scenario");
}

const ProfileSeed& pick_profile_seed(const SeedPools& pools, const ProblemType& type, std::mt19937_64& rng) {
    return pick_matching(pools.profiles(), type, rng, "profile");
}

ChatRequest scenario_request(const ProblemType& type, const ScenarioSeed& seed, const PromptTemplates& templates,
                             const GenerationParams& params) {
    auto system = render_template(templates.scenario,
                                  {{"problem_type", type.name},
                                   {"category", type.category},
                                   {"example_scenario", seed.scenario},
                                   {"example_dialogue", render_history(seed.dialogue.utterances)}});
    return make_request("scenario", std::move(system), "Write the new scenario.", params);
}

std::string generate_scenario(const ProblemType& type, const ScenarioSeed& seed, ChatBackend& backend,
                              const PromptTemplates& templates, const GenerationParams& params) {
    const auto req = scenario_request(type, seed, templates, params);
    std::size_t last_words = 0;
    for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
        auto text = clean_completion(backend.complete(req));
        last_words = word_count(text);
        if (last_words >= SeedPools::kMinScenarioWords) return text;
    }
    throw ScenarioTooShortError("scenario for '" + type.name + "' stayed under " +
                                std::to_string(SeedPools::kMinScenarioWords) + " words (last attempt: " +
                                std::to_string(last_words) + ")");
}

std::optional<SeekerProfile> parse_profile(std::string_view text) {
    SeekerProfile p;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        auto t = trim(line);
        while (!t.empty() && (t.front() == '-' || t.front() == '*')) t = trim(std::string_view(t).substr(1));
        const auto colon = t.find(':');
        if (colon == std::string::npos) continue;
        const auto key = to_lower(trim(std::string_view(t).substr(0, colon)));
        auto value = trim(std::string_view(t).substr(colon + 1));
        std::string* slot = nullptr;
        if (key == "name") slot = &p.name;
        else if (key == "gender") slot = &p.gender;
        else if (key == "address") slot = &p.address;
        else if (key == "occupation") slot = &p.occupation;
        else if (key == "personality") slot = &p.personality;
        else if (key == "hobbies" || key == "hobby") slot = &p.hobbies;
        if (slot && slot->empty()) *slot = std::move(value);
    }
    if (!p.complete()) return std::nullopt;
    return p;
}

ChatRequest profile_request(const ProblemType& type, const std::string& scenario, const ProfileSeed& seed,
                            const PromptTemplates& templates, const GenerationParams& params) {
    auto system = render_template(templates.profile, {{"problem_type", type.name},
                                                      {"category", type.category},
                                                      {"scenario", scenario},
                                                      {"example_profile", seed.profile.render()}});
    return make_request("profile", std::move(system), "Write the profile.", params);
}

SeekerProfile generate_profile(const ProblemType& type, const std::string& scenario, const ProfileSeed& seed,
                               ChatBackend& backend, const PromptTemplates& templates,
                               const GenerationParams& params) {
    const auto req = profile_request(type, scenario, seed, templates, params);
    for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
        if (auto p = parse_profile(backend.complete(req))) return *std::move(p);
    }
    throw ProfileParseError("no parseable profile for '" + type.name + "' after " +
                            std::to_string(kMaxGenerationAttempts) + " attempts");
}

SeekerProfile generate_profile(const ProblemType& type, const std::string& scenario, const ProfileSeed& seed,
                               ChatBackend& backend, const PromptTemplates& templates, SeedPools& pools,
                               const GenerationParams& params) {
    auto profile = generate_profile(type, scenario, seed, backend, templates, params);
    pools.add_profile({type, scenario, profile});
    return profile;
}

ChatRequest seeker_request(const SeekerProfile& profile, const std::string& scenario,
                           std::span<const Utterance> history, const PromptTemplates& templates,
                           const GenerationParams& params) {
    auto system = render_template(templates.seeker, {{"profile", profile.render()},
                                                     {"scenario", scenario},
                                                     {"history", render_history(history_window(history))}});
    return make_request("seeker", std::move(system), "Write the seeker's next message.", params);
}

Utterance seeker_turn(const SeekerProfile& profile, const std::string& scenario, std::span<const Utterance> history,
                      ChatBackend& backend, const PromptTemplates& templates, const GenerationParams& params) {
    const auto req = seeker_request(profile, scenario, history, templates, params);
    auto text = truncate_sentences(clean_completion(backend.complete(req)), kSentenceCap);
    if (text.empty()) throw ProtocolError("empty seeker completion");
    return {Speaker::Seeker, std::move(text), std::nullopt};
}

}  // namespace esforge
