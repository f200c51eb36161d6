// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "esforge/counselor.hpp"
#include "esforge/dialogue.hpp"
#include "esforge/llm.hpp"
#include "esforge/metrics.hpp"
#include "esforge/prompts.hpp"
#include "esforge/text.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace esforge {

/// A response generator under evaluation. `history` is a dialogue prefix
/// ending with a seeker utterance (or empty when the gold dialogue opens with
/// the supporter).
class ModelAdapter {
public:
    virtual ~ModelAdapter() = default;
    virtual std::string respond(const Dialogue& history) = 0;
    virtual std::string name() const = 0;
};

/// Repeats the last seeker utterance.
class EchoModel final : public ModelAdapter {
public:
    std::string respond(const Dialogue& history) override;
    std::string name() const override { return "echo"; }
};

/// Fixture-driven responses keyed by (dialogue id, history length).
class CannedModel final : public ModelAdapter {
public:
    explicit CannedModel(std::map<std::pair<std::string, std::size_t>, std::string> responses);

    /// Canned responses equal to the gold supporter turns of `corpus`.
    static CannedModel from_gold(std::span<const Dialogue> corpus);

    /// JSONL of `{"dialogue_id", "position", "text"}` where position is the
    /// history length.
    static CannedModel load(const std::filesystem::path& path);

    std::string respond(const Dialogue& history) override;
    std::string name() const override { return "canned"; }

private:
    std::map<std::pair<std::string, std::size_t>, std::string> responses_;
};

/// Counselor + supporter stack behind a chat backend.
class BackendModel final : public ModelAdapter {
public:
    BackendModel(std::string name, ChatBackend& backend, std::shared_ptr<const Counselor> counselor,
                 PromptTemplates templates = PromptTemplates::builtin(), std::uint64_t seed = 0);

    std::string respond(const Dialogue& history) override;
    std::string name() const override { return name_; }

private:
    std::string name_;
    ChatBackend& backend_;
    std::shared_ptr<const Counselor> counselor_;
    PromptTemplates templates_;
    std::mutex rng_mutex_;
    std::mt19937_64 rng_;
};

enum class EvalMode { GeneratedContext, ReferenceContext };

std::string_view to_string(EvalMode m) noexcept;
EvalMode parse_eval_mode(std::string_view text);

struct EvalReport {
    double bleu2 = 0.0;
    double bleu4 = 0.0;
    double rouge2_f1 = 0.0;
    double rougeL_f1 = 0.0;
    double distinct2 = 0.0;
    double distinct3 = 0.0;
    std::size_t n_responses = 0;
    std::size_t skipped_positions = 0;
    EvalMode mode = EvalMode::ReferenceContext;

    nlohmann::json to_json() const;
};

struct EvalPosition {
    std::string dialogue_id;
    /// Index of the gold supporter utterance in the dialogue.
    std::size_t index = 0;
    std::vector<Utterance> history;
    std::string candidate;
    std::string reference;
};

struct EvalResult {
    EvalReport report;
    std::vector<EvalPosition> positions;
};

/// Scores `model` at every supporter position of every dialogue. Reference
/// context feeds the gold prefix; generated context keeps gold seeker turns but
/// substitutes the model's own earlier replies for gold supporter turns.
/// Adapter failures skip the position; in generated context they also skip the
/// rest of that dialogue, whose history would otherwise need a gold reply.
/// Dialogues are spread over up to `max_parallel` threads, so the adapter must
/// tolerate concurrent calls when it is above 1. Throws Error on an empty corpus.
EvalResult run_eval(ModelAdapter& model, std::span<const Dialogue> test_corpus, EvalMode mode,
                    const Tokenizer& tokenize = default_tokenizer(), std::size_t max_parallel = 1);

}  // namespace esforge
