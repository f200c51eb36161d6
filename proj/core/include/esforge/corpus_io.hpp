// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "esforge/dialogue.hpp"
#include "esforge/errors.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace esforge {

nlohmann::json to_json(const Dialogue& d);
nlohmann::json to_json(const SeekerProfile& p);
nlohmann::json to_json(const Utterance& u);

/// Parses one corpus record. Unknown top-level fields land in meta.extra.
/// Strategy strings go through the strict normalizer; unmatched strings throw.
/// `line` is only used for error messages.
Dialogue dialogue_from_json(const nlohmann::json& record, std::size_t line = 0);
SeekerProfile profile_from_json(const nlohmann::json& j);

/// One compact JSON object per line.
std::string to_jsonl_line(const Dialogue& d);

std::vector<Dialogue> read_corpus(std::istream& in);
std::vector<Dialogue> load_corpus(const std::filesystem::path& path);

void write_corpus(std::ostream& out, const std::vector<Dialogue>& corpus);
void save_corpus(const std::filesystem::path& path, const std::vector<Dialogue>& corpus);

/// Writes `content` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

/// Calls `fn(json, line_number)` for each non-blank line; malformed JSON throws
/// ParseError naming the line.
template <typename Fn>
void for_each_jsonl(std::istream& in, Fn&& fn);

}  // namespace esforge

#include <istream>

template <typename Fn>
void esforge::for_each_jsonl(std::istream& in, Fn&& fn) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError("malformed JSON", lineno);
        fn(j, lineno);
    }
}
