// SPDX-License-Identifier: Apache-2.0
#include "esforge/engine.hpp"

#include "esforge/errors.hpp"
#include "esforge/seeker.hpp"

#include <algorithm>
#include <ctime>
#include <future>
#include <limits>

namespace esforge {

namespace {

// Forwards to the wrapped backend and keeps the rendered system prompts.
class RecordingBackend final : public ChatBackend {
public:
    RecordingBackend(ChatBackend& inner, std::vector<PromptRecord>& log) : inner_(inner), log_(log) {}

    std::string complete(const ChatRequest& request) override {
        log_.push_back({request.role_tag, request.system_prompt});
        return inner_.complete(request);
    }
    std::size_t max_concurrent() const noexcept override { return inner_.max_concurrent(); }
    bool deterministic() const noexcept override { return inner_.deterministic(); }

private:
    ChatBackend& inner_;
    std::vector<PromptRecord>& log_;
};

bool both_farewell(const std::vector<Utterance>& u, const FarewellLexicon& lexicon) {
    if (u.size() < 2) return false;
    return lexicon.is_farewell(u[u.size() - 1].text) && lexicon.is_farewell(u[u.size() - 2].text);
}

std::string dialogue_id(const std::string& tag, std::size_t index) {
    std::string digits = std::to_string(index);
    if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
    return tag + "-" + digits;
}

struct Outcome {
    std::optional<Persona> persona;
    std::optional<DialogueRun> run;
    std::string stage;
    std::string reason;
};

}  // namespace

std::size_t RoleBackends::parallelism() const noexcept {
    std::size_t p = std::numeric_limits<std::size_t>::max();
    bool any = false;
    for (ChatBackend* b : {scenario, profile, seeker, counselor, supporter}) {
        if (!b) continue;
        any = true;
        if (b->deterministic()) return 1;
        p = std::min(p, std::max<std::size_t>(1, b->max_concurrent()));
    }
    return any ? p : 1;
}

void EngineConfig::validate() const {
    if (max_rounds == 0) throw ConfigError("max_rounds must be positive");
    if (min_rounds_for_acceptance == 0) throw ConfigError("min_rounds_for_acceptance must be positive");
    if (min_rounds_for_acceptance > max_rounds) throw ConfigError("min_rounds_for_acceptance exceeds max_rounds");
    if (max_parallel == 0) throw ConfigError("max_parallel must be positive");
    if (acceptance.min_utterances > acceptance.max_utterances)
        throw ConfigError("acceptance min_utterances exceeds max_utterances");
}

std::string_view to_string(Termination t) noexcept {
    switch (t) {
        case Termination::Farewell: return "farewell";
        case Termination::MaxRounds: return "max_rounds";
        case Termination::Aborted: return "aborted";
    }
    return "max_rounds";
}

std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) noexcept {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::string utc_now_rfc3339() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

DialogueRun run_dialogue(const Persona& persona, const Dialogue* exemplar, const EngineContext& ctx,
                         const EngineConfig& cfg, std::mt19937_64& rng, std::string id, std::uint64_t seed) {
    cfg.validate();
    if (!ctx.templates || !ctx.farewells) throw ConfigError("engine context lacks templates or farewell lexicon");
    if (!ctx.backends.seeker || !ctx.backends.supporter) throw ConfigError("seeker and supporter backends are required");
    if (cfg.counselor_mode == CounselorMode::Statistical && !ctx.transition_model)
        throw ConfigError("statistical counselor mode needs a transition model");

    DialogueRun run;
    RecordingBackend seeker(*ctx.backends.seeker, run.prompts);
    RecordingBackend supporter(*ctx.backends.supporter, run.prompts);
    std::optional<RecordingBackend> counselor_backend;
    if (ctx.backends.counselor) counselor_backend.emplace(*ctx.backends.counselor, run.prompts);

    std::optional<TransitionModel> model;
    if (ctx.transition_model) model = *ctx.transition_model;
    const Counselor counselor(cfg.counselor_mode, counselor_backend ? &*counselor_backend : nullptr, std::move(model),
                              *ctx.templates, {cfg.max_rounds, cfg.sample_strategies, cfg.counselor_params});

    Dialogue& d = run.dialogue;
    d.id = std::move(id);
    d.problem_type = persona.problem_type;
    d.scenario = persona.scenario;
    d.profile = persona.profile;
    d.meta.generator_tag = cfg.generator_tag;
    d.meta.rng_seed = seed;
    d.meta.created_at = cfg.fixed_created_at ? *cfg.fixed_created_at : utc_now_rfc3339();

    try {
        for (std::size_t round = 0; round < cfg.max_rounds; ++round) {
            d.utterances.push_back(
                seeker_turn(persona.profile, persona.scenario, d.utterances, seeker, *ctx.templates, cfg.seeker_params));
            run.decisions.push_back(counselor.decide(d.utterances, rng));
            d.utterances.push_back(supporter_turn(run.decisions.back().strategy, d.utterances, exemplar, supporter,
                                                  *ctx.templates, persona.scenario, cfg.supporter_params));
            if (both_farewell(d.utterances, *ctx.farewells)) {
                run.termination = Termination::Farewell;
                break;
            }
        }
    } catch (const TransportError& e) {
        run.termination = Termination::Aborted;
        run.abort_reason = e.what();
    } catch (const ProtocolError& e) {
        run.termination = Termination::Aborted;
        run.abort_reason = e.what();
    } catch (const FixtureUnderrunError& e) {
        run.termination = Termination::Aborted;
        run.abort_reason = e.what();
    }
    d.meta.aborted = run.termination == Termination::Aborted;
    d.meta.extra["termination"] = std::string(to_string(run.termination));
    if (d.meta.aborted) d.meta.extra["abort_reason"] = run.abort_reason;
    return run;
}

nlohmann::json RunReport::to_json() const {
    return {{"requested", requested}, {"accepted", accepted},       {"rejected", rejected}, {"aborted", aborted},
            {"pool_growth", pool_growth}, {"master_seed", master_seed}, {"failures", failures}};
}

BatchResult run_batch(std::size_t n, const Taxonomy& taxonomy, SeedPools pools, const EngineContext& ctx,
                      const EngineConfig& cfg) {
    cfg.validate();
    if (pools.scenarios().empty()) throw Error("scenario pool is empty");
    if (pools.profiles().empty()) throw Error("profile pool is empty");
    if (taxonomy.empty()) throw Error("taxonomy is empty");
    if (!ctx.backends.scenario || !ctx.backends.profile) throw ConfigError("scenario and profile backends are required");
    if (!ctx.templates) throw ConfigError("engine context lacks templates");

    BatchResult result;
    result.report.requested = n;
    result.report.master_seed = cfg.rng_seed;
    const std::size_t wave = std::max<std::size_t>(1, std::min(cfg.max_parallel, ctx.backends.parallelism()));
    const FarewellLexicon default_farewells;
    const RolePatternLexicon default_patterns;
    const auto& farewells = ctx.farewells ? *ctx.farewells : default_farewells;
    const auto& patterns = ctx.role_patterns ? *ctx.role_patterns : default_patterns;

    // Reads `pools` only; every mutation happens between waves.
    auto job = [&](std::size_t index) {
        Outcome out;
        const auto seed = child_seed(cfg.rng_seed, index);
        std::mt19937_64 rng(seed);
        const auto id = dialogue_id(cfg.generator_tag, index);
        Persona persona;
        try {
            out.stage = "scenario";
            persona.problem_type = sample_problem_type(taxonomy, rng);
            const auto& sseed = pick_scenario_seed(pools, persona.problem_type, rng);
            persona.scenario = generate_scenario(persona.problem_type, sseed, *ctx.backends.scenario, *ctx.templates,
                                                 cfg.scenario_params);
            out.stage = "profile";
            const auto& pseed = pick_profile_seed(pools, persona.problem_type, rng);
            persona.profile = generate_profile(persona.problem_type, persona.scenario, pseed, *ctx.backends.profile,
                                               *ctx.templates, cfg.profile_params);
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            out.reason = e.what();
            return out;
        }
        out.persona = persona;
        out.stage = "dialogue";
        const Dialogue* exemplar = pick_exemplar(pools, persona.problem_type, rng);
        out.run = run_dialogue(persona, exemplar, ctx, cfg, rng, id, seed);
        return out;
    };

    for (std::size_t start = 0; start < n; start += wave) {
        const std::size_t end = std::min(n, start + wave);
        std::vector<Outcome> outcomes;
        outcomes.reserve(end - start);
        if (end - start == 1) {
            outcomes.push_back(job(start));
        } else {
            std::vector<std::future<Outcome>> futures;
            for (std::size_t i = start; i < end; ++i) futures.push_back(std::async(std::launch::async, job, i));
            for (auto& f : futures) outcomes.push_back(f.get());
        }

        for (std::size_t k = 0; k < outcomes.size(); ++k) {
            auto& out = outcomes[k];
            const std::size_t index = start + k;
            const auto id = dialogue_id(cfg.generator_tag, index);
            auto fail = [&](const std::string& stage, const std::string& reason) {
                result.report.failures.push_back({{"index", index}, {"id", id}, {"stage", stage}, {"reason", reason}});
            };
            if (!out.persona) {
                ++result.report.aborted;
                fail(out.stage, out.reason);
                continue;
            }
            if (cfg.self_iterate) pools.add_profile({out.persona->problem_type, out.persona->scenario, out.persona->profile});
            auto& run = *out.run;
            result.corpus.push_back(run.dialogue);
            if (run.termination == Termination::Aborted) {
                ++result.report.aborted;
                fail("dialogue", run.abort_reason);
                result.runs.push_back(std::move(run));
                continue;
            }
            const std::size_t rounds = count_speaker(run.dialogue.utterances, Speaker::Supporter);
            std::string rejection;
            std::optional<Dialogue> kept;
            if (rounds < cfg.min_rounds_for_acceptance) {
                rejection = "too_few_rounds";
            } else {
                auto filtered = filter_corpus(std::span<const Dialogue>(&run.dialogue, 1), cfg.acceptance, farewells,
                                              patterns);
                if (filtered.kept.empty()) rejection = filtered.dropped.front().reason;
                else kept = std::move(filtered.kept.front());
            }
            if (kept) {
                ++result.report.accepted;
                if (cfg.self_iterate) {
                    pools.add_scenario({out.persona->problem_type, out.persona->scenario, *std::move(kept)});
                    ++result.report.pool_growth;
                }
            } else {
                ++result.report.rejected;
                fail("filter", rejection);
            }
            result.runs.push_back(std::move(run));
        }
    }
    result.pools = std::move(pools);
    return result;
}

}  // namespace esforge
