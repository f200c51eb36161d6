// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "esforge/dialogue.hpp"
#include "esforge/llm.hpp"
#include "esforge/supporter.hpp"

#include <filesystem>
#include <regex>
#include <span>
#include <string>
#include <vector>

namespace esforge {

/// Drops surplus closings from the trailing run of farewell utterances. Within
/// that run the first farewell of each speaker is kept, so at most one seeker
/// and one supporter closing survive. Interior utterances are never touched.
Dialogue trim_redundant_greetings(const Dialogue& d, const FarewellLexicon& lexicon = {});

struct RoleFlag {
    std::size_t index = 0;
    std::string reason;

    friend bool operator==(const RoleFlag&, const RoleFlag&) = default;
};

/// Supporter-style phrasing patterns, matched case-insensitively against seeker
/// utterances only.
///
/// File format: one ECMAScript regex per line, `#` starts a comment line. A line
/// may start with `[reason]` to name the flag; the default reason is
/// "supporter-style". Each pattern is tried against every sentence of the
/// utterance, so `^` anchors at sentence starts.
class RolePatternLexicon {
public:
    struct Pattern {
        std::string reason;
        std::string source;
        std::regex regex;
    };

    RolePatternLexicon();
    static RolePatternLexicon load(const std::filesystem::path& path);
    static RolePatternLexicon parse(std::string_view text);

    const std::vector<Pattern>& patterns() const noexcept { return patterns_; }

private:
    explicit RolePatternLexicon(std::vector<Pattern> patterns) : patterns_(std::move(patterns)) {}

    std::vector<Pattern> patterns_;
};

std::vector<RoleFlag> detect_role_inconsistency(const Dialogue& d, const RolePatternLexicon& lexicon = {});

/// Optional LLM judge: asks `backend` (role tag "role_judge") about each seeker
/// utterance and flags those answered with "yes". Off unless a caller opts in.
std::vector<RoleFlag> judge_role_inconsistency(const Dialogue& d, ChatBackend& backend);

struct FilterPolicy {
    std::size_t min_utterances = 8;
    std::size_t max_utterances = 30;
    std::size_t max_flags = 0;
};

/// Machine-readable drop reasons.
inline constexpr std::string_view kDropTooShort = "too_short";
inline constexpr std::string_view kDropTooLong = "too_long";
inline constexpr std::string_view kDropRoleInconsistency = "role_inconsistency";
inline constexpr std::string_view kDropAborted = "aborted";

struct DroppedDialogue {
    Dialogue dialogue;
    std::string reason;
    std::string detail;
};

struct FilterResult {
    std::vector<Dialogue> kept;
    std::vector<DroppedDialogue> dropped;
};

/// Trims greetings, then drops aborted dialogues, length-bound violations and
/// dialogues with more than max_flags role flags, checked in that order. Kept
/// dialogues stay in input order.
FilterResult filter_corpus(std::span<const Dialogue> corpus, const FilterPolicy& policy = {},
                           const FarewellLexicon& farewells = {}, const RolePatternLexicon& patterns = {},
                           ChatBackend* judge = nullptr);

/// `{"id", "reason"}` per line (plus "detail" when non-empty).
std::string drop_report_jsonl(std::span<const DroppedDialogue> dropped);

}  // namespace esforge
