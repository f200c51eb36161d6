// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace esforge {

/// The eight canonical support strategies. Enumerator order is the canonical
/// label order used for tie-breaking everywhere.
enum class Strategy : std::uint8_t {
    Question,
    Others,
    ProvidingSuggestions,
    AffirmationAndReassurance,
    SelfDisclosure,
    ReflectionOfFeelings,
    Information,
    RestatementOrParaphrasing,
};

inline constexpr std::size_t kStrategyCount = 8;

inline constexpr std::array<Strategy, kStrategyCount> kAllStrategies = {
    Strategy::Question,
    Strategy::Others,
    Strategy::ProvidingSuggestions,
    Strategy::AffirmationAndReassurance,
    Strategy::SelfDisclosure,
    Strategy::ReflectionOfFeelings,
    Strategy::Information,
    Strategy::RestatementOrParaphrasing,
};

constexpr std::size_t index_of(Strategy s) noexcept { return static_cast<std::size_t>(s); }

constexpr Strategy strategy_at(std::size_t i) noexcept { return kAllStrategies[i]; }

/// Canonical display name, e.g. "Affirmation and Reassurance".
std::string_view to_string(Strategy s) noexcept;

/// Strict lookup: trimmed, case-insensitive match against canonical names and
/// the alias table. Returns nullopt when nothing matches.
std::optional<Strategy> parse_strategy(std::string_view text);

struct StrategyAlias {
    std::string_view text;  // lowercase
    Strategy strategy;
};

/// Alias table shared by the strict and tolerant normalizers (canonical names excluded).
std::span<const StrategyAlias> strategy_aliases() noexcept;

/// Like parse_strategy but throws ParseError on failure.
Strategy strategy_from_string(std::string_view text);

}  // namespace esforge
