// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace esforge {

/// Pluggable tokenizer used by the analyzer and the metrics.
using Tokenizer = std::function<std::vector<std::string>(std::string_view)>;

/// Lowercases ASCII and splits on runs of non-alphanumeric characters. Bytes
/// >= 0x80 count as alphanumeric, so UTF-8 letters stay inside tokens.
std::vector<std::string> default_tokenize(std::string_view text);

inline Tokenizer default_tokenizer() { return &default_tokenize; }

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b) noexcept;

/// Replaces every `{name}` placeholder present in `vars`; unknown placeholders stay.
std::string render_template(std::string_view tmpl,
                            const std::vector<std::pair<std::string, std::string>>& vars);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace esforge
