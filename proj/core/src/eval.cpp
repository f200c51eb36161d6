// SPDX-License-Identifier: Apache-2.0
#include "esforge/eval.hpp"

#include "esforge/corpus_io.hpp"
#include "esforge/errors.hpp"
#include "esforge/supporter.hpp"

#include <algorithm>
#include <fstream>
#include <future>

namespace esforge {

namespace {

std::vector<EvalPosition> eval_dialogue(ModelAdapter& model, const Dialogue& gold, EvalMode mode,
                                        std::size_t& skipped) {
    std::vector<EvalPosition> out;
    Dialogue context = gold;
    context.utterances.clear();
    for (std::size_t j = 0; j < gold.utterances.size(); ++j) {
        const auto& u = gold.utterances[j];
        if (u.speaker == Speaker::Seeker) {
            context.utterances.push_back(u);
            continue;
        }
        std::string candidate;
        try {
            candidate = model.respond(context);
        } catch (const std::exception&) {
            if (mode == EvalMode::GeneratedContext) {
                skipped += static_cast<std::size_t>(std::count_if(
                    gold.utterances.begin() + static_cast<std::ptrdiff_t>(j), gold.utterances.end(),
                    [](const Utterance& x) { return x.speaker == Speaker::Supporter; }));
                return out;
            }
            ++skipped;
            context.utterances.push_back(u);
            continue;
        }
        out.push_back({gold.id, j, context.utterances, candidate, u.text});
        if (mode == EvalMode::ReferenceContext) context.utterances.push_back(u);
        else context.utterances.push_back({Speaker::Supporter, std::move(candidate), u.strategy});
    }
    return out;
}

}  // namespace

std::string EchoModel::respond(const Dialogue& history) {
    for (auto it = history.utterances.rbegin(); it != history.utterances.rend(); ++it) {
        if (it->speaker == Speaker::Seeker) return it->text;
    }
    throw Error("echo model needs a seeker utterance in the history");
}

CannedModel::CannedModel(std::map<std::pair<std::string, std::size_t>, std::string> responses)
    : responses_(std::move(responses)) {}

CannedModel CannedModel::from_gold(std::span<const Dialogue> corpus) {
    std::map<std::pair<std::string, std::size_t>, std::string> responses;
    for (const auto& d : corpus)
        for (std::size_t j = 0; j < d.utterances.size(); ++j)
            if (d.utterances[j].speaker == Speaker::Supporter) responses[{d.id, j}] = d.utterances[j].text;
    return CannedModel(std::move(responses));
}

CannedModel CannedModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::map<std::pair<std::string, std::size_t>, std::string> responses;
    for_each_jsonl(in, [&](const nlohmann::json& j, std::size_t line) {
        try {
            responses[{j.at("dialogue_id").get<std::string>(), j.at("position").get<std::size_t>()}] =
                j.at("text").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("canned response: ") + e.what(), line);
        }
    });
    return CannedModel(std::move(responses));
}

std::string CannedModel::respond(const Dialogue& history) {
    const auto it = responses_.find({history.id, history.utterances.size()});
    if (it == responses_.end())
        throw Error("no canned response for " + history.id + " at " + std::to_string(history.utterances.size()));
    return it->second;
}

BackendModel::BackendModel(std::string name, ChatBackend& backend, std::shared_ptr<const Counselor> counselor,
                           PromptTemplates templates, std::uint64_t seed)
    : name_(std::move(name)), backend_(backend), counselor_(std::move(counselor)), templates_(std::move(templates)),
      rng_(seed) {
    if (!counselor_) throw ConfigError("backend model needs a counselor");
}

std::string BackendModel::respond(const Dialogue& history) {
    Strategy strategy;
    {
        std::lock_guard lock(rng_mutex_);
        strategy = counselor_->select_strategy(history.utterances, rng_);
    }
    return supporter_turn(strategy, history.utterances, nullptr, backend_, templates_, history.scenario).text;
}

std::string_view to_string(EvalMode m) noexcept {
    return m == EvalMode::GeneratedContext ? "generated_context" : "reference_context";
}

EvalMode parse_eval_mode(std::string_view text) {
    const auto key = to_lower(trim(text));
    if (key == "generated_context" || key == "generated") return EvalMode::GeneratedContext;
    if (key == "reference_context" || key == "reference") return EvalMode::ReferenceContext;
    throw ConfigError("unknown eval mode \"" + std::string(text) + "\"");
}

nlohmann::json EvalReport::to_json() const {
    return {{"bleu2", bleu2},
            {"bleu4", bleu4},
            {"rouge2_f1", rouge2_f1},
            {"rougeL_f1", rougeL_f1},
            {"distinct2", distinct2},
            {"distinct3", distinct3},
            {"n_responses", n_responses},
            {"skipped_positions", skipped_positions},
            {"mode", std::string(to_string(mode))}};
}

EvalResult run_eval(ModelAdapter& model, std::span<const Dialogue> test_corpus, EvalMode mode,
                    const Tokenizer& tokenize, std::size_t max_parallel) {
    if (test_corpus.empty()) throw Error("evaluation corpus is empty");
    EvalResult result;
    result.report.mode = mode;

    const std::size_t wave = std::max<std::size_t>(1, max_parallel);
    std::vector<std::size_t> skipped(test_corpus.size(), 0);
    for (std::size_t start = 0; start < test_corpus.size(); start += wave) {
        const std::size_t end = std::min(test_corpus.size(), start + wave);
        std::vector<std::future<std::vector<EvalPosition>>> futures;
        for (std::size_t i = start; i < end; ++i) {
            futures.push_back(std::async(wave == 1 ? std::launch::deferred : std::launch::async,
                                         [&, i] { return eval_dialogue(model, test_corpus[i], mode, skipped[i]); }));
        }
        for (auto& f : futures) {
            auto positions = f.get();
            std::move(positions.begin(), positions.end(), std::back_inserter(result.positions));
        }
    }
    for (auto s : skipped) result.report.skipped_positions += s;

    auto& r = result.report;
    r.n_responses = result.positions.size();
    if (r.n_responses == 0) return result;
    std::vector<Tokens> cands, refs;
    for (const auto& p : result.positions) {
        cands.push_back(tokenize(p.candidate));
        refs.push_back(tokenize(p.reference));
    }
    r.bleu2 = corpus_bleu(cands, refs, 2);
    r.bleu4 = corpus_bleu(cands, refs, 4);
    r.rouge2_f1 = 100.0 * mean_rouge2(cands, refs);
    r.rougeL_f1 = 100.0 * mean_rouge_l(cands, refs);
    try {
        r.distinct2 = distinct_n_responses(cands, 2);
        r.distinct3 = distinct_n_responses(cands, 3);
    } catch (const Error&) {
        // every response shorter than n: leave the score at 0
    }
    return result;
}

}  // namespace esforge
