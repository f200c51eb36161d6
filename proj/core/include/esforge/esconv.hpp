// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "esforge/dialogue.hpp"

#include <filesystem>
#include <vector>

namespace esforge {

/// Converts the public ESConv release (a single JSON array) into corpus
/// dialogues. Strategy annotations go through the strict normalizer. The
/// result is not merged; callers apply merge_consecutive as needed.
std::vector<Dialogue> load_esconv(const std::filesystem::path& path);

}  // namespace esforge
