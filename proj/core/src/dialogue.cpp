// SPDX-License-Identifier: Apache-2.0
#include "esforge/dialogue.hpp"

#include "esforge/text.hpp"

#include <cctype>

namespace esforge {

std::string_view to_string(Speaker s) noexcept { return s == Speaker::Seeker ? "seeker" : "supporter"; }

std::optional<Speaker> parse_speaker(std::string_view text) noexcept {
    if (text == "seeker") return Speaker::Seeker;
    if (text == "supporter") return Speaker::Supporter;
    return std::nullopt;
}

bool SeekerProfile::complete() const noexcept {
    for (const std::string* f : {&name, &gender, &address, &occupation, &personality, &hobbies}) {
        if (f->find_first_not_of(" \t\r\n") == std::string::npos) return false;
    }
    return true;
}

std::string SeekerProfile::render() const {
    return "Name: " + name + "\nGender: " + gender + "\nAddress: " + address + "\nOccupation: " + occupation +
           "\nPersonality: " + personality + "\nHobbies: " + hobbies;
}

std::size_t word_count(std::string_view text) noexcept {
    std::size_t n = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        const bool space = std::isspace(c) != 0;
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

std::vector<Utterance> merge_consecutive(std::span<const Utterance> utterances) {
    std::vector<Utterance> out;
    out.reserve(utterances.size());
    for (const auto& u : utterances) {
        if (!out.empty() && out.back().speaker == u.speaker) {
            auto& last = out.back();
            if (last.text.empty()) {
                last.text = u.text;
            } else if (!u.text.empty()) {
                last.text += ' ';
                last.text += u.text;
            }
            if (!last.strategy) last.strategy = u.strategy;
        } else {
            out.push_back(u);
        }
    }
    return out;
}

Dialogue merge_consecutive(const Dialogue& d) {
    Dialogue out = d;
    out.utterances = merge_consecutive(std::span<const Utterance>(d.utterances));
    return out;
}

std::string_view to_string(Violation v) noexcept {
    switch (v) {
        case Violation::TooShort: return "too_short";
        case Violation::TooLong: return "too_long";
        case Violation::MissingStrategy: return "missing_strategy";
        case Violation::NonAlternating: return "non_alternating";
        case Violation::EmptyUtterance: return "empty_utterance";
        case Violation::ShortScenario: return "short_scenario";
    }
    return "unknown";
}

bool alternates(std::span<const Utterance> utterances) noexcept {
    if (utterances.empty()) return true;
    if (utterances.front().speaker != Speaker::Seeker) return false;
    for (std::size_t i = 1; i < utterances.size(); ++i) {
        if (utterances[i].speaker == utterances[i - 1].speaker) return false;
    }
    return true;
}

std::size_t count_speaker(std::span<const Utterance> utterances, Speaker s) noexcept {
    std::size_t n = 0;
    for (const auto& u : utterances) n += u.speaker == s;
    return n;
}

std::vector<Violation> validate_dialogue(const Dialogue& d, const ValidationPolicy& policy) {
    std::vector<Violation> out;
    const auto n = d.utterances.size();
    if (n < policy.min_utterances) out.push_back(Violation::TooShort);
    if (n > policy.max_utterances) out.push_back(Violation::TooLong);

    bool missing = false;
    bool empty = false;
    for (const auto& u : d.utterances) {
        if (u.speaker == Speaker::Supporter && !u.strategy) missing = true;
        if (trim(u.text).empty()) empty = true;
    }
    if (missing) out.push_back(Violation::MissingStrategy);
    if (!alternates(d.utterances)) out.push_back(Violation::NonAlternating);
    if (empty) out.push_back(Violation::EmptyUtterance);
    if (policy.min_scenario_words > 0 && word_count(d.scenario) < policy.min_scenario_words) {
        out.push_back(Violation::ShortScenario);
    }
    return out;
}

std::string plain_text(const Dialogue& d) {
    std::string out;
    for (const auto& u : d.utterances) {
        if (!out.empty()) out += ' ';
        out += u.text;
    }
    return out;
}

}  // namespace esforge
