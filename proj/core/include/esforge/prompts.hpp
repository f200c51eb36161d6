// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "esforge/dialogue.hpp"

#include <filesystem>
#include <span>
#include <string>

namespace esforge {

/// Role prompt templates with `{placeholder}` slots. Recognized placeholders:
/// {problem_type} {category} {scenario} {example_scenario} {example_dialogue}
/// {example_profile} {profile} {history} {strategy} {strategy_list}.
struct PromptTemplates {
    std::string scenario;
    std::string profile;
    std::string seeker;
    std::string counselor;
    std::string supporter;

    static PromptTemplates builtin();

    /// Reads `<role>.txt` for each role present in `dir`; missing files keep the
    /// built-in text.
    static PromptTemplates load_dir(const std::filesystem::path& dir);
};

/// Utterances the roles are allowed to see.
inline constexpr std::size_t kHistoryWindow = 6;

/// Sentence cap applied to every generated seeker and supporter utterance.
inline constexpr std::size_t kSentenceCap = 3;

/// Last `window` utterances of `history`.
std::span<const Utterance> history_window(std::span<const Utterance> history,
                                          std::size_t window = kHistoryWindow) noexcept;

/// One line per utterance: "Seeker: ..." / "Supporter (Question): ...".
std::string render_history(std::span<const Utterance> history, bool with_strategies = false);

/// Numbered list of the eight strategy names.
std::string render_strategy_list();

}  // namespace esforge
