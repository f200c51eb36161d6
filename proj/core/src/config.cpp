// SPDX-License-Identifier: Apache-2.0
#include "esforge/config.hpp"

#include "esforge/corpus_io.hpp"
#include "esforge/errors.hpp"

#include <cstdlib>
#include <set>

#ifndef ESFORGE_DATA_DIR
#define ESFORGE_DATA_DIR "data"
#endif

namespace esforge {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!keys.count(key)) throw ConfigError("unknown key \"" + key + "\" in " + where);
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    std::filesystem::path p(value);
    return p.is_relative() && !base.empty() ? base / p : p;
}

void read_path(const json& j, const char* key, const std::filesystem::path& base, std::filesystem::path& out) {
    if (j.contains(key)) out = resolve(base, j.at(key).get<std::string>());
}

GenerationParams read_params(const json& j, GenerationParams p, const std::string& where) {
    check_keys(j, {"temperature", "max_tokens"}, where);
    p.temperature = j.value("temperature", p.temperature);
    p.max_tokens = j.value("max_tokens", p.max_tokens);
    return p;
}

void read_engine(const json& j, EngineConfig& e) {
    check_keys(j,
               {"max_rounds", "min_rounds_for_acceptance", "counselor_mode", "sample_strategies", "rng_seed",
                "self_iterate", "generator_tag", "fixed_created_at", "max_parallel", "params"},
               "engine");
    e.max_rounds = j.value("max_rounds", e.max_rounds);
    e.min_rounds_for_acceptance = j.value("min_rounds_for_acceptance", e.min_rounds_for_acceptance);
    if (j.contains("counselor_mode")) e.counselor_mode = parse_counselor_mode(j.at("counselor_mode").get<std::string>());
    e.sample_strategies = j.value("sample_strategies", e.sample_strategies);
    e.rng_seed = j.value("rng_seed", e.rng_seed);
    e.self_iterate = j.value("self_iterate", e.self_iterate);
    e.generator_tag = j.value("generator_tag", e.generator_tag);
    if (j.contains("fixed_created_at")) e.fixed_created_at = j.at("fixed_created_at").get<std::string>();
    e.max_parallel = j.value("max_parallel", e.max_parallel);
    if (j.contains("params")) {
        const auto& p = j.at("params");
        check_keys(p, {"scenario", "profile", "seeker", "counselor", "supporter"}, "engine.params");
        if (p.contains("scenario")) e.scenario_params = read_params(p["scenario"], e.scenario_params, "engine.params.scenario");
        if (p.contains("profile")) e.profile_params = read_params(p["profile"], e.profile_params, "engine.params.profile");
        if (p.contains("seeker")) e.seeker_params = read_params(p["seeker"], e.seeker_params, "engine.params.seeker");
        if (p.contains("counselor"))
            e.counselor_params = read_params(p["counselor"], e.counselor_params, "engine.params.counselor");
        if (p.contains("supporter"))
            e.supporter_params = read_params(p["supporter"], e.supporter_params, "engine.params.supporter");
    }
}

}  // namespace

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("ESFORGE_DATA_DIR"); env && *env) return env;
    return ESFORGE_DATA_DIR;
}

AppConfig AppConfig::defaults() {
    AppConfig c;
    const auto data = default_data_dir();
    c.paths.taxonomy = data / "taxonomy.tsv";
    c.paths.scenario_pool = data / "seeds" / "scenario_pool.jsonl";
    c.paths.profile_pool = data / "seeds" / "profile_pool.jsonl";
    c.paths.prompts_dir = data / "prompts";
    c.paths.farewell_lexicon = data / "farewell.txt";
    c.paths.role_patterns = data / "role_patterns.txt";
    c.engine.acceptance = c.postprocess;
    return c;
}

AppConfig AppConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
    AppConfig c = defaults();
    c.base_dir = base_dir;
    try {
        check_keys(j, {"backends", "roles", "paths", "engine", "postprocess", "service"}, "config");
        if (j.contains("backends")) {
            if (!j["backends"].is_object()) throw ConfigError("backends must be an object");
            for (const auto& [name, b] : j["backends"].items()) c.backends.emplace(name, BackendConfig::from_json(b, base_dir));
        }
        if (j.contains("roles")) {
            const auto& r = j["roles"];
            check_keys(r, {"scenario", "profile", "seeker", "counselor", "supporter"}, "roles");
            c.roles.scenario = r.value("scenario", "");
            c.roles.profile = r.value("profile", "");
            c.roles.seeker = r.value("seeker", "");
            c.roles.counselor = r.value("counselor", "");
            c.roles.supporter = r.value("supporter", "");
            for (const auto* name : {&c.roles.scenario, &c.roles.profile, &c.roles.seeker, &c.roles.counselor,
                                     &c.roles.supporter}) {
                if (!name->empty() && !c.backends.count(*name)) throw ConfigError("role refers to unknown backend \"" + *name + "\"");
            }
        }
        if (j.contains("paths")) {
            const auto& p = j["paths"];
            check_keys(p,
                       {"taxonomy", "scenario_pool", "profile_pool", "prompts_dir", "farewell_lexicon", "role_patterns",
                        "transition_model"},
                       "paths");
            read_path(p, "taxonomy", base_dir, c.paths.taxonomy);
            read_path(p, "scenario_pool", base_dir, c.paths.scenario_pool);
            read_path(p, "profile_pool", base_dir, c.paths.profile_pool);
            read_path(p, "prompts_dir", base_dir, c.paths.prompts_dir);
            read_path(p, "farewell_lexicon", base_dir, c.paths.farewell_lexicon);
            read_path(p, "role_patterns", base_dir, c.paths.role_patterns);
            read_path(p, "transition_model", base_dir, c.paths.transition_model);
        }
        if (j.contains("engine")) read_engine(j["engine"], c.engine);
        if (j.contains("postprocess")) {
            const auto& p = j["postprocess"];
            check_keys(p, {"min_utterances", "max_utterances", "max_flags"}, "postprocess");
            c.postprocess.min_utterances = p.value("min_utterances", c.postprocess.min_utterances);
            c.postprocess.max_utterances = p.value("max_utterances", c.postprocess.max_utterances);
            c.postprocess.max_flags = p.value("max_flags", c.postprocess.max_flags);
        }
        c.engine.acceptance = c.postprocess;
        if (j.contains("service")) {
            const auto& s = j["service"];
            check_keys(s, {"host", "port", "seed", "session_log", "ui_dir", "cors_origin", "models"}, "service");
            c.service.host = s.value("host", c.service.host);
            c.service.port = s.value("port", c.service.port);
            c.service.seed = s.value("seed", c.service.seed);
            read_path(s, "session_log", base_dir, c.service.session_log);
            read_path(s, "ui_dir", base_dir, c.service.ui_dir);
            c.service.cors_origin = s.value("cors_origin", c.service.cors_origin);
            if (s.contains("models")) {
                for (const auto& [name, m] : s["models"].items()) {
                    check_keys(m, {"backend", "counselor", "counselor_backend"}, "service.models." + name);
                    ServedModel served;
                    served.backend = m.at("backend").get<std::string>();
                    if (m.contains("counselor")) served.counselor = parse_counselor_mode(m["counselor"].get<std::string>());
                    served.counselor_backend = m.value("counselor_backend", "");
                    for (const auto* b : {&served.backend, &served.counselor_backend}) {
                        if (!b->empty() && !c.backends.count(*b))
                            throw ConfigError("service model \"" + name + "\" refers to unknown backend \"" + *b + "\"");
                    }
                    c.service.models.emplace(name, std::move(served));
                }
            }
        }
        c.engine.validate();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

AppConfig AppConfig::load(const std::filesystem::path& path) {
    const auto text = read_text_file(path);
    auto j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
    const auto base = std::filesystem::absolute(path).parent_path();
    return from_json(j, base);
}

Runtime::Runtime(AppConfig config)
    : config_(std::move(config)),
      taxonomy_(Taxonomy::load(config_.paths.taxonomy)),
      templates_(PromptTemplates::load_dir(config_.paths.prompts_dir)),
      farewells_(FarewellLexicon::load(config_.paths.farewell_lexicon)),
      role_patterns_(RolePatternLexicon::load(config_.paths.role_patterns)),
      pools_(SeedPools::load(config_.paths.scenario_pool, config_.paths.profile_pool)) {}

ChatBackend& Runtime::backend(const std::string& name) {
    std::lock_guard lock(backends_mutex_);
    if (auto it = backends_.find(name); it != backends_.end()) return *it->second;
    const auto cfg = config_.backends.find(name);
    if (cfg == config_.backends.end()) throw ConfigError("unknown backend \"" + name + "\"");
    return *backends_.emplace(name, make_backend(cfg->second)).first->second;
}

ChatBackend* Runtime::role_backend(const std::string& name) { return name.empty() ? nullptr : &backend(name); }

const TransitionModel& Runtime::transition_model() {
    if (!model_) {
        if (!config_.paths.transition_model.empty()) {
            model_ = TransitionModel::load(config_.paths.transition_model);
        } else {
            std::vector<Dialogue> seeds;
            for (const auto& s : pools_.scenarios()) seeds.push_back(s.dialogue);
            model_ = fit_transition_model(std::span<const Dialogue>(seeds));
        }
    }
    return *model_;
}

EngineContext Runtime::engine_context() {
    EngineContext ctx;
    ctx.templates = &templates_;
    ctx.farewells = &farewells_;
    ctx.role_patterns = &role_patterns_;
    ctx.transition_model = &transition_model();
    ctx.backends.scenario = role_backend(config_.roles.scenario);
    ctx.backends.profile = role_backend(config_.roles.profile);
    ctx.backends.seeker = role_backend(config_.roles.seeker);
    ctx.backends.counselor = role_backend(config_.roles.counselor);
    ctx.backends.supporter = role_backend(config_.roles.supporter);
    return ctx;
}

std::map<std::string, ModelBinding> Runtime::service_models() {
    std::map<std::string, ModelBinding> out;
    const CounselorOptions options{config_.engine.max_rounds, false, config_.engine.counselor_params};
    for (const auto& [name, served] : config_.service.models) {
        ModelBinding binding;
        binding.backend = &backend(served.backend);
        ChatBackend* counselor_backend =
            served.counselor == CounselorMode::Statistical
                ? nullptr
                : &backend(served.counselor_backend.empty() ? served.backend : served.counselor_backend);
        binding.counselor = std::make_shared<const Counselor>(served.counselor, counselor_backend, transition_model(),
                                                              templates_, options);
        out.emplace(name, std::move(binding));
    }
    return out;
}

}  // namespace esforge
