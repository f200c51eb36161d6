// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "esforge/counselor.hpp"
#include "esforge/dialogue.hpp"
#include "esforge/text.hpp"
#include "esforge/tfidf.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace esforge {

struct SpeakerStats {
    std::size_t utterances = 0;
    double avg_utterances_per_dialogue = 0.0;
    double avg_utterance_length = 0.0;
};

/// The rows of the corpus statistics table.
struct StatsReport {
    std::size_t dialogues = 0;
    std::size_t utterances = 0;
    double avg_dialogue_length = 0.0;
    double avg_utterance_length = 0.0;
    SpeakerStats seeker;
    SpeakerStats supporter;

    nlohmann::json to_json() const;
};

/// Expects merged dialogues. Utterance length is measured in tokens.
StatsReport corpus_statistics(std::span<const Dialogue> corpus, const Tokenizer& tokenize = default_tokenizer());

enum class Grouping { Global, ByProblemType, ByStrategy };

struct GroupSimilarity {
    std::string group;
    std::size_t members = 0;
    SimilaritySummary summary;
};

/// Global and by_problem_type compare whole-dialogue texts without speaker tags;
/// by_strategy compares supporter responses sharing a label. TF-IDF is fit once
/// over all documents under analysis. Groups with fewer than two members are
/// skipped and listed in `skipped`.
std::vector<GroupSimilarity> pairwise_similarity(std::span<const Dialogue> corpus, Grouping grouping,
                                                 std::vector<std::string>* skipped = nullptr,
                                                 const Tokenizer& tokenize = default_tokenizer());

/// Distinct n-grams over the whole corpus divided by the total n-gram count.
/// N-grams never span documents. Throws Error when there are no n-grams.
double distinct_n_corpus(std::span<const std::string> docs, std::size_t n,
                         const Tokenizer& tokenize = default_tokenizer());

/// Share of each strategy among labeled supporter utterances. Throws Error if
/// there are none.
StrategyRow strategy_distribution(std::span<const Dialogue> corpus);

struct TransitionTable {
    std::array<StrategyRow, kProgressBuckets> rows{};
    std::array<std::size_t, kProgressBuckets> totals{};
    /// True for buckets without observations (row left at zero).
    std::array<bool, kProgressBuckets> empty{};

    std::string to_csv() const;
};

/// Within-bucket strategy proportions; bucket of the k-th of K labeled
/// supporter turns in a dialogue is progress_bucket(k, K).
TransitionTable strategy_transition(std::span<const Dialogue> corpus);

/// Number of distinct strategy labels per dialogue -> dialogue count.
std::map<std::size_t, std::size_t> unique_strategy_histogram(std::span<const Dialogue> corpus);

struct ScenarioSimilarity {
    std::vector<std::string> ids;
    std::vector<double> values;
    SimilaritySummary summary;
    std::vector<std::string> skipped;
};

/// Cosine between each scenario and its dialogue text, TF-IDF fit on the union
/// of both. Dialogues with empty scenarios are skipped.
ScenarioSimilarity scenario_dialogue_similarity(std::span<const Dialogue> corpus,
                                                const Tokenizer& tokenize = default_tokenizer());

nlohmann::json to_json(const SimilaritySummary& s);
/// `bin_low,bin_high,count` rows.
std::string histogram_csv(const SimilaritySummary& s);

/// Writes every analysis into `dir` and returns the list of files written.
std::vector<std::filesystem::path> write_analysis_reports(std::span<const Dialogue> corpus,
                                                          const std::filesystem::path& dir,
                                                          const Tokenizer& tokenize = default_tokenizer());

}  // namespace esforge
