// SPDX-License-Identifier: Apache-2.0
#include "esforge/postprocess.hpp"

#include "esforge/corpus_io.hpp"
#include "esforge/errors.hpp"
#include "esforge/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <sstream>

namespace esforge {

namespace {

constexpr std::string_view kDefaultPatterns = R"(# Supporter-style openers. Matched case-insensitively at the start of any
# sentence of a seeker utterance. Optional [reason] prefix names the flag.
[empathy-opener] ^I understand how you feel
[empathy-opener] ^It sounds like you
[suggestion-opener] ^Have you considered
[suggestion-opener] ^I recommend
[advice-opener] ^You should\b
[advice-opener] ^You could try\b
)";

}  // namespace

Dialogue trim_redundant_greetings(const Dialogue& d, const FarewellLexicon& lexicon) {
    const auto& u = d.utterances;
    std::size_t run_start = u.size();
    while (run_start > 0 && lexicon.is_farewell(u[run_start - 1].text)) --run_start;

    Dialogue out = d;
    out.utterances.assign(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(run_start));
    bool seeker_kept = false, supporter_kept = false;
    for (std::size_t i = run_start; i < u.size(); ++i) {
        bool& kept = u[i].speaker == Speaker::Seeker ? seeker_kept : supporter_kept;
        if (kept) continue;
        kept = true;
        out.utterances.push_back(u[i]);
    }
    return out;
}

RolePatternLexicon::RolePatternLexicon() : RolePatternLexicon(parse(kDefaultPatterns)) {}

RolePatternLexicon RolePatternLexicon::parse(std::string_view text) {
    std::vector<Pattern> patterns;
    std::istringstream in{std::string(text)};
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        std::string reason = "supporter-style";
        if (t.front() == '[') {
            const auto close = t.find(']');
            if (close == std::string::npos) throw ParseError("unterminated [reason] in role pattern", line_no);
            reason = trim(std::string_view(t).substr(1, close - 1));
            t = trim(std::string_view(t).substr(close + 1));
            if (reason.empty() || t.empty()) throw ParseError("empty role pattern or reason", line_no);
        }
        try {
            std::regex re(t, std::regex::ECMAScript | std::regex::icase);
            patterns.push_back({std::move(reason), t, std::move(re)});
        } catch (const std::regex_error& e) {
            throw ParseError("invalid role pattern \"" + t + "\": " + e.what(), line_no);
        }
    }
    return RolePatternLexicon(std::move(patterns));
}

RolePatternLexicon RolePatternLexicon::load(const std::filesystem::path& path) { return parse(read_text_file(path)); }

std::vector<RoleFlag> detect_role_inconsistency(const Dialogue& d, const RolePatternLexicon& lexicon) {
    std::vector<RoleFlag> flags;
    for (std::size_t i = 0; i < d.utterances.size(); ++i) {
        const auto& u = d.utterances[i];
        if (u.speaker != Speaker::Seeker) continue;
        const auto sentences = split_sentences(u.text);
        for (const auto& p : lexicon.patterns()) {
            const bool hit = std::any_of(sentences.begin(), sentences.end(),
                                         [&](const std::string& s) { return std::regex_search(s, p.regex); });
            if (hit) {
                flags.push_back({i, p.reason});
                break;
            }
        }
    }
    return flags;
}

std::vector<RoleFlag> judge_role_inconsistency(const Dialogue& d, ChatBackend& backend) {
    std::vector<RoleFlag> flags;
    for (std::size_t i = 0; i < d.utterances.size(); ++i) {
        const auto& u = d.utterances[i];
        if (u.speaker != Speaker::Seeker) continue;
        ChatRequest req;
        req.role_tag = "role_judge";
        req.system_prompt =
            "You review role-played emotional support conversations. The help seeker must talk about their own "
            "problem and must not comfort or advise the other person.";
        req.messages.push_back({ChatRole::User, "Seeker utterance: \"" + u.text +
                                                    "\"\nDoes the seeker act like a supporter here? Answer yes or no."});
        req.temperature = 0.0;
        req.max_tokens = 4;
        if (to_lower(trim(backend.complete(req))).rfind("yes", 0) == 0) flags.push_back({i, "llm-judge"});
    }
    return flags;
}

FilterResult filter_corpus(std::span<const Dialogue> corpus, const FilterPolicy& policy,
                           const FarewellLexicon& farewells, const RolePatternLexicon& patterns, ChatBackend* judge) {
    FilterResult result;
    for (const auto& original : corpus) {
        auto d = trim_redundant_greetings(original, farewells);
        const auto n = d.utterances.size();
        if (d.meta.aborted) {
            result.dropped.push_back({std::move(d), std::string(kDropAborted), {}});
            continue;
        }
        if (n < policy.min_utterances) {
            result.dropped.push_back({std::move(d), std::string(kDropTooShort),
                                      std::to_string(n) + " < " + std::to_string(policy.min_utterances)});
            continue;
        }
        if (n > policy.max_utterances) {
            result.dropped.push_back({std::move(d), std::string(kDropTooLong),
                                      std::to_string(n) + " > " + std::to_string(policy.max_utterances)});
            continue;
        }
        auto flags = detect_role_inconsistency(d, patterns);
        if (judge) {
            auto judged = judge_role_inconsistency(d, *judge);
            flags.insert(flags.end(), judged.begin(), judged.end());
        }
        if (flags.size() > policy.max_flags) {
            std::string detail;
            for (const auto& f : flags) {
                if (!detail.empty()) detail += ", ";
                detail += std::to_string(f.index) + ":" + f.reason;
            }
            result.dropped.push_back({std::move(d), std::string(kDropRoleInconsistency), std::move(detail)});
            continue;
        }
        result.kept.push_back(std::move(d));
    }
    return result;
}

std::string drop_report_jsonl(std::span<const DroppedDialogue> dropped) {
    std::string out;
    for (const auto& dd : dropped) {
        nlohmann::json j{{"id", dd.dialogue.id}, {"reason", dd.reason}};
        if (!dd.detail.empty()) j["detail"] = dd.detail;
        out += j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
        out += '\n';
    }
    return out;
}

}  // namespace esforge
