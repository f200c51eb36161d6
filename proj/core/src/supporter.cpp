// SPDX-License-Identifier: Apache-2.0
#include "esforge/supporter.hpp"

#include "esforge/corpus_io.hpp"
#include "esforge/errors.hpp"
#include "esforge/text.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace esforge {

namespace {

bool is_terminator(char c) noexcept { return c == '.' || c == '!' || c == '?'; }

// Lowercase, drop apostrophes, turn other punctuation into spaces, split.
std::vector<std::string> farewell_words(std::string_view text) {
    std::string norm;
    norm.reserve(text.size());
    for (unsigned char c : text) {
        if (c == '\'') continue;
        if (c >= 0x80 || std::isalnum(c)) {
            norm.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
        } else {
            norm.push_back(' ');
        }
    }
    std::vector<std::string> words;
    std::istringstream in(norm);
    for (std::string w; in >> w;) words.push_back(std::move(w));
    return words;
}

const std::vector<std::string>& default_farewells() {
    static const std::vector<std::string> phrases = {
        "goodbye",         "good bye",         "bye",         "bye bye",           "take care",
        "farewell",        "thanks for your help", "thank you for your help", "have a good day",
        "have a nice day", "have a great day", "see you later", "talk to you later", "good night",
    };
    return phrases;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!is_terminator(text[i])) continue;
        const bool boundary = i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]));
        if (!boundary) continue;
        auto piece = trim(text.substr(start, i + 1 - start));
        if (!piece.empty()) out.push_back(std::move(piece));
        start = i + 1;
    }
    if (start < text.size()) {
        auto tail = trim(text.substr(start));
        if (!tail.empty()) out.push_back(std::move(tail));
    }
    return out;
}

std::string truncate_sentences(std::string_view text, std::size_t cap) {
    if (cap == 0) throw Error("sentence cap must be at least 1");
    auto sentences = split_sentences(text);
    if (sentences.size() <= cap) return trim(text);
    sentences.resize(cap);
    return join(sentences, " ");
}

std::string clean_completion(std::string_view text) {
    std::string t = trim(text);
    for (std::string_view label : {"supporter:", "seeker:"}) {
        if (t.size() >= label.size() && iequals(std::string_view(t).substr(0, label.size()), label)) {
            t = trim(std::string_view(t).substr(label.size()));
            break;
        }
    }
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = trim(std::string_view(t).substr(1, t.size() - 2));
    return t;
}

FarewellLexicon::FarewellLexicon() : FarewellLexicon(default_farewells()) {}

FarewellLexicon::FarewellLexicon(std::vector<std::string> phrases) : phrases_(std::move(phrases)) {
    for (const auto& p : phrases_) {
        auto words = farewell_words(p);
        if (!words.empty()) tokenized_.push_back(std::move(words));
    }
}

FarewellLexicon FarewellLexicon::load(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    std::vector<std::string> phrases;
    for (std::string line; std::getline(in, line);) {
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        phrases.push_back(std::move(t));
    }
    return FarewellLexicon(std::move(phrases));
}

bool FarewellLexicon::is_farewell(std::string_view text) const {
    const auto words = farewell_words(text);
    if (words.empty() || words.size() > kMaxWords) return false;
    for (const auto& phrase : tokenized_) {
        if (std::search(words.begin(), words.end(), phrase.begin(), phrase.end()) != words.end()) return true;
    }
    return false;
}

bool is_farewell(std::string_view text) {
    static const FarewellLexicon lexicon;
    return lexicon.is_farewell(text);
}

const Dialogue* pick_exemplar(const SeedPools& pools, const ProblemType& type, std::mt19937_64& rng) {
    const auto& seeds = pools.scenarios();
    if (seeds.empty()) return nullptr;
    std::vector<const Dialogue*> matching;
    for (const auto& s : seeds) {
        if (iequals(s.problem_type.name, type.name)) matching.push_back(&s.dialogue);
    }
    if (matching.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, seeds.size() - 1);
        return &seeds[pick(rng)].dialogue;
    }
    std::uniform_int_distribution<std::size_t> pick(0, matching.size() - 1);
    return matching[pick(rng)];
}

ChatRequest supporter_request(Strategy strategy, std::span<const Utterance> history, const Dialogue* exemplar,
                              const std::string& scenario, const PromptTemplates& templates,
                              const GenerationParams& params) {
    ChatRequest req;
    req.role_tag = "supporter";
    req.system_prompt = render_template(
        templates.supporter,
        {{"strategy", std::string(to_string(strategy))},
         {"history", render_history(history_window(history))},
         {"example_dialogue", exemplar ? render_history(exemplar->utterances, true) : "(none)"},
         {"scenario", scenario},
         {"strategy_list", render_strategy_list()}});
    req.messages.push_back({ChatRole::User, "Write the supporter's next reply."});
    req.temperature = params.temperature;
    req.max_tokens = params.max_tokens;
    return req;
}

Utterance supporter_turn(Strategy strategy, std::span<const Utterance> history, const Dialogue* exemplar,
                         ChatBackend& backend, const PromptTemplates& templates, const std::string& scenario,
                         const GenerationParams& params) {
    const auto req = supporter_request(strategy, history, exemplar, scenario, templates, params);
    auto text = truncate_sentences(clean_completion(backend.complete(req)), kSentenceCap);
    if (text.empty()) throw ProtocolError("empty supporter completion");
    return {Speaker::Supporter, std::move(text), strategy};
}

}  // namespace esforge
