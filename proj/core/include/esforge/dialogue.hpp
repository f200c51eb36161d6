// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "esforge/strategy.hpp"
#include "esforge/taxonomy.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace esforge {

enum class Speaker : std::uint8_t { Seeker, Supporter };

std::string_view to_string(Speaker s) noexcept;
std::optional<Speaker> parse_speaker(std::string_view text) noexcept;

struct Utterance {
    Speaker speaker = Speaker::Seeker;
    std::string text;
    std::optional<Strategy> strategy;

    friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct SeekerProfile {
    std::string name;
    std::string gender;
    std::string address;
    std::string occupation;
    std::string personality;
    std::string hobbies;

    bool complete() const noexcept;

    /// "Name: ...\nGender: ..." rendering, the same format the profile parser reads.
    std::string render() const;

    friend bool operator==(const SeekerProfile&, const SeekerProfile&) = default;
};

struct DialogueMeta {
    std::string generator_tag;
    std::uint64_t rng_seed = 0;
    std::string created_at;
    bool aborted = false;
    /// Fields not covered above, including unknown top-level record fields.
    nlohmann::json extra = nlohmann::json::object();

    friend bool operator==(const DialogueMeta&, const DialogueMeta&) = default;
};

struct Dialogue {
    std::string id;
    ProblemType problem_type;
    std::string scenario;
    SeekerProfile profile;
    std::vector<Utterance> utterances;
    DialogueMeta meta;

    friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

/// Count of maximal non-whitespace runs.
std::size_t word_count(std::string_view text) noexcept;

/// Concatenates adjacent same-speaker utterances with a single space. A merged
/// supporter utterance keeps the strategy of its first constituent.
Dialogue merge_consecutive(const Dialogue& d);
std::vector<Utterance> merge_consecutive(std::span<const Utterance> utterances);

enum class Violation : std::uint8_t {
    TooShort,
    TooLong,
    MissingStrategy,
    NonAlternating,
    EmptyUtterance,
    ShortScenario,
};

std::string_view to_string(Violation v) noexcept;

struct ValidationPolicy {
    std::size_t min_utterances = 8;
    std::size_t max_utterances = 30;
    /// 0 disables the scenario check.
    std::size_t min_scenario_words = 20;
};

/// Empty result means the dialogue is valid under the policy. Each violation is
/// reported at most once, in enum order.
std::vector<Violation> validate_dialogue(const Dialogue& d, const ValidationPolicy& policy = {});

/// True when speakers strictly alternate and the first speaker is the seeker.
bool alternates(std::span<const Utterance> utterances) noexcept;

std::size_t count_speaker(std::span<const Utterance> utterances, Speaker s) noexcept;

/// Speaker-free concatenation of all utterance texts, single-space separated.
std::string plain_text(const Dialogue& d);

}  // namespace esforge
