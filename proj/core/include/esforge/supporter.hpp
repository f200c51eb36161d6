// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "esforge/dialogue.hpp"
#include "esforge/llm.hpp"
#include "esforge/prompts.hpp"
#include "esforge/seed_pools.hpp"

#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace esforge {

/// Splits on `.`, `!` or `?` followed by whitespace or end of text. Terminators
/// stay attached to their sentence; pieces are trimmed. "Dr." splits.
std::vector<std::string> split_sentences(std::string_view text);

/// First `cap` sentences joined by single spaces. Text with at most `cap`
/// sentences comes back unchanged apart from outer whitespace.
std::string truncate_sentences(std::string_view text, std::size_t cap);

/// Trims a completion and drops a leading "Seeker:" / "Supporter:" label and
/// wrapping double quotes.
std::string clean_completion(std::string_view text);

/// Closing-phrase lexicon used for termination and greeting trimming.
class FarewellLexicon {
public:
    static constexpr std::size_t kMaxWords = 8;

    FarewellLexicon();
    explicit FarewellLexicon(std::vector<std::string> phrases);

    /// One phrase per line; blank lines and `#` comments skipped.
    static FarewellLexicon load(const std::filesystem::path& path);

    /// True iff the normalized text has at most kMaxWords words and contains a
    /// lexicon phrase on word boundaries. Normalization lowercases and strips
    /// punctuation.
    bool is_farewell(std::string_view text) const;

    const std::vector<std::string>& phrases() const noexcept { return phrases_; }

private:
    std::vector<std::string> phrases_;
    std::vector<std::vector<std::string>> tokenized_;
};

/// is_farewell against the default lexicon.
bool is_farewell(std::string_view text);

struct GenerationParams {
    double temperature = 0.7;
    int max_tokens = 256;
};

/// One seed dialogue sharing the problem type, uniformly; falls back to a
/// pool-wide uniform draw. Null only for an empty pool.
const Dialogue* pick_exemplar(const SeedPools& pools, const ProblemType& type, std::mt19937_64& rng);

ChatRequest supporter_request(Strategy strategy, std::span<const Utterance> history, const Dialogue* exemplar,
                              const std::string& scenario, const PromptTemplates& templates,
                              const GenerationParams& params = {});

/// Strategy-conditioned reply, capped at kSentenceCap sentences and tagged with
/// `strategy`. Only the last kHistoryWindow utterances reach the prompt.
Utterance supporter_turn(Strategy strategy, std::span<const Utterance> history, const Dialogue* exemplar,
                         ChatBackend& backend, const PromptTemplates& templates,
                         const std::string& scenario = {}, const GenerationParams& params = {});

}  // namespace esforge
