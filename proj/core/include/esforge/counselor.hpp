// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "esforge/dialogue.hpp"
#include "esforge/llm.hpp"
#include "esforge/prompts.hpp"
#include "esforge/strategy.hpp"
#include "esforge/supporter.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace esforge {

/// Tolerant mapping of free-form LLM output onto a canonical strategy. Strips
/// list markers, quotes and trailing punctuation, then tries exact and alias
/// matches, then the earliest canonical name or alias found inside the text.
/// Anything else maps to Others.
Strategy normalize_strategy_label(std::string_view text);

/// Number of conversation-progress buckets.
inline constexpr std::size_t kProgressBuckets = 6;

/// Bucket of the k-th (1-based) supporter turn out of `total`:
/// floor(6 * (k - 1) / total), clamped to 5.
std::size_t progress_bucket(std::size_t k, std::size_t total) noexcept;

using StrategyRow = std::array<double, kStrategyCount>;
using CountRow = std::array<std::uint64_t, kStrategyCount>;

/// First-order strategy chain conditioned on progress.
///
/// transitions[b][prev] is the distribution of the strategy that follows a
/// supporter turn labeled `prev` whose own progress bucket is `b`. Rows without
/// observations hold the global marginal and are flagged in `fallback`.
struct TransitionModel {
    StrategyRow prior{};
    std::array<std::array<StrategyRow, kStrategyCount>, kProgressBuckets> transitions{};
    CountRow prior_counts{};
    std::array<std::array<CountRow, kStrategyCount>, kProgressBuckets> counts{};
    std::array<std::array<bool, kStrategyCount>, kProgressBuckets> fallback{};
    StrategyRow marginal{};

    const StrategyRow& row(std::size_t bucket, Strategy previous) const noexcept {
        return transitions[bucket][index_of(previous)];
    }

    nlohmann::json to_json() const;
    static TransitionModel from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static TransitionModel load(const std::filesystem::path& path);
};

/// Maximum-likelihood fit from per-dialogue strategy sequences (one entry per
/// supporter turn, in order). Throws Error when no sequence is non-empty.
TransitionModel fit_transition_model(std::span<const std::vector<Strategy>> sequences);

/// Sequences are taken from the labeled supporter turns of each dialogue.
TransitionModel fit_transition_model(std::span<const Dialogue> corpus);

/// Labeled supporter strategies of a dialogue, in order.
std::vector<Strategy> strategy_sequence(const Dialogue& d);

/// Highest-probability strategy; ties go to the earliest canonical label.
Strategy argmax_strategy(const StrategyRow& row) noexcept;

/// Inverse-CDF draw from a row (which need not be normalized).
Strategy sample_strategy(const StrategyRow& row, std::mt19937_64& rng);

enum class CounselorMode {
    /// LLM picks the strategy; backend failure falls back to the model if one is loaded.
    Prompted,
    /// Transition-model argmax (or draw when sampling is enabled).
    Statistical,
    /// Prompted, but output that matches no strategy defers to the model.
    Hybrid,
};

std::string_view to_string(CounselorMode m) noexcept;
CounselorMode parse_counselor_mode(std::string_view text);

struct CounselorOptions {
    /// Expected number of supporter turns, used for live bucket computation.
    std::size_t expected_length = 12;
    bool sample = false;
    GenerationParams params{0.2, 32};
};

struct StrategyDecision {
    Strategy strategy = Strategy::Others;
    /// "prompted", "statistical", or "fallback".
    std::string source;
    std::string raw_output;
};

/// Picks the next support strategy from the dialogue history. Thread-safe as
/// long as callers pass distinct RNGs.
class Counselor {
public:
    Counselor(CounselorMode mode, ChatBackend* backend, std::optional<TransitionModel> model,
              PromptTemplates templates = PromptTemplates::builtin(), CounselorOptions options = {});

    /// `history` must end with a seeker utterance.
    StrategyDecision decide(std::span<const Utterance> history, std::mt19937_64& rng) const;

    Strategy select_strategy(std::span<const Utterance> history, std::mt19937_64& rng) const {
        return decide(history, rng).strategy;
    }

    /// Statistical choice regardless of mode. Throws Error without a model.
    Strategy statistical_choice(std::span<const Utterance> history, std::mt19937_64& rng) const;

    ChatRequest prompt(std::span<const Utterance> history) const;

    CounselorMode mode() const noexcept { return mode_; }
    bool has_model() const noexcept { return model_.has_value(); }

private:
    CounselorMode mode_;
    ChatBackend* backend_;
    std::optional<TransitionModel> model_;
    PromptTemplates templates_;
    CounselorOptions options_;
};

}  // namespace esforge
