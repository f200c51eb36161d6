// SPDX-License-Identifier: Apache-2.0
#include "esforge/strategy.hpp"

#include "esforge/errors.hpp"
#include "esforge/text.hpp"


namespace esforge {

namespace {

constexpr std::array<std::string_view, kStrategyCount> kNames = {
    "Question",
    "Others",
    "Providing Suggestions",
    "Affirmation and Reassurance",
    "Self-disclosure",
    "Reflection of Feelings",
    "Information",
    "Restatement or Paraphrasing",
};

// Lowercase aliases; canonical names are matched separately.
constexpr StrategyAlias kAliases[] = {
    {"questions", Strategy::Question},
    {"questioning", Strategy::Question},
    {"asking questions", Strategy::Question},
    {"other", Strategy::Others},
    {"providing suggestion", Strategy::ProvidingSuggestions},
    {"provide suggestions", Strategy::ProvidingSuggestions},
    {"giving suggestions", Strategy::ProvidingSuggestions},
    {"suggestions", Strategy::ProvidingSuggestions},
    {"suggestion", Strategy::ProvidingSuggestions},
    {"affirmation & reassurance", Strategy::AffirmationAndReassurance},
    {"affirmation", Strategy::AffirmationAndReassurance},
    {"reassurance", Strategy::AffirmationAndReassurance},
    {"self disclosure", Strategy::SelfDisclosure},
    {"selfdisclosure", Strategy::SelfDisclosure},
    {"reflection of feeling", Strategy::ReflectionOfFeelings},
    {"reflecting feelings", Strategy::ReflectionOfFeelings},
    {"reflection", Strategy::ReflectionOfFeelings},
    {"providing information", Strategy::Information},
    {"information providing", Strategy::Information},
    {"restatement or paraphrase", Strategy::RestatementOrParaphrasing},
    {"restatement", Strategy::RestatementOrParaphrasing},
    {"paraphrasing", Strategy::RestatementOrParaphrasing},
};

}  // namespace

std::string_view to_string(Strategy s) noexcept { return kNames[index_of(s)]; }

std::span<const StrategyAlias> strategy_aliases() noexcept { return kAliases; }

std::optional<Strategy> parse_strategy(std::string_view text) {
    const std::string key = to_lower(trim(text));
    if (key.empty()) return std::nullopt;
    for (std::size_t i = 0; i < kStrategyCount; ++i) {
        if (iequals(key, kNames[i])) return kAllStrategies[i];
    }
    for (const auto& alias : kAliases) {
        if (key == alias.text) return alias.strategy;
    }
    return std::nullopt;
}

Strategy strategy_from_string(std::string_view text) {
    if (auto s = parse_strategy(text)) return *s;
    throw ParseError("unknown strategy \"" + std::string(text) + "\"");
}

}  // namespace esforge
