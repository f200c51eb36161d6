// SPDX-License-Identifier: Apache-2.0
#include "esforge/prompts.hpp"

#include "esforge/corpus_io.hpp"

#include <algorithm>

namespace esforge {

PromptTemplates PromptTemplates::builtin() {
    PromptTemplates t;
    t.scenario = R"~~(You write case descriptions for an emotional support conversation corpus.

Problem type: {problem_type}

Example scenario for a related problem:
{example_scenario}

Example conversation that grew out of that scenario:
{example_dialogue}

Write one new scenario for the problem type above. Describe a specific event from the help seeker's point of view in more than 20 words. Do not fall back on vague phrases such as "relationship problems" or "mood swings". Reply with the scenario text only.
)~~";
    t.profile = R"~~(You create seeker profiles for role-played emotional support conversations.

Problem type: {problem_type}

Scenario:
{scenario}

Example profile:
{example_profile}

Invent a different person who could plausibly be living through this scenario. Reply with exactly these six lines and nothing else:
Name: ...
Gender: ...
Address: ...
Occupation: ...
Personality: ...
Hobbies: ...
)~~";
    t.seeker = R"~~(You are role-playing a person who is looking for emotional support. Stay in this role: talk about your own situation and feelings, and never give advice to the other person.

Your profile:
{profile}

Your situation:
{scenario}

Conversation so far (most recent last):
{history}

Write your next message to the supporter in at most three sentences. Once your concern feels addressed, thank the supporter and say goodbye.
)~~";
    t.counselor = R"~~(You are a counseling supervisor. Pick the support strategy the supporter should use in the next reply.

Conversation so far (most recent last):
{history}

Which strategy fits the next supporter reply best? Options:
{strategy_list}

Answer with the name of one option only.
)~~";
    t.supporter = R"~~(You are an emotional supporter talking with someone who is going through a hard time.

Reference conversation showing how a supporter works through a similar case:
{example_dialogue}

Conversation so far (most recent last):
{history}

Write the next supporter reply using the strategy "{strategy}". Keep it warm, specific to what the seeker said, and no longer than three sentences.
)~~";
    return t;
}

PromptTemplates PromptTemplates::load_dir(const std::filesystem::path& dir) {
    PromptTemplates t = builtin();
    const std::pair<const char*, std::string*> files[] = {
        {"scenario.txt", &t.scenario}, {"profile.txt", &t.profile},       {"seeker.txt", &t.seeker},
        {"counselor.txt", &t.counselor}, {"supporter.txt", &t.supporter},
    };
    for (const auto& [name, slot] : files) {
        const auto path = dir / name;
        if (std::filesystem::exists(path)) *slot = read_text_file(path);
    }
    return t;
}

std::span<const Utterance> history_window(std::span<const Utterance> history, std::size_t window) noexcept {
    if (history.size() <= window) return history;
    return history.subspan(history.size() - window);
}

std::string render_history(std::span<const Utterance> history, bool with_strategies) {
    if (history.empty()) return "(no messages yet)";
    std::string out;
    for (const auto& u : history) {
        if (!out.empty()) out += '\n';
        out += u.speaker == Speaker::Seeker ? "Seeker" : "Supporter";
        if (with_strategies && u.strategy) {
            out += " (";
            out += to_string(*u.strategy);
            out += ')';
        }
        out += ": ";
        out += u.text;
    }
    return out;
}

std::string render_strategy_list() {
    std::string out;
    for (std::size_t i = 0; i < kStrategyCount; ++i) {
        if (i) out += '\n';
        out += std::to_string(i + 1) + ". " + std::string(to_string(kAllStrategies[i]));
    }
    return out;
}

}  // namespace esforge
