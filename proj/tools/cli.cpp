// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include "esforge/analysis.hpp"
#include "esforge/config.hpp"
#include "esforge/corpus_io.hpp"
#include "esforge/engine.hpp"
#include "esforge/errors.hpp"
#include "esforge/esconv.hpp"
#include "esforge/eval.hpp"
#include "esforge/metrics.hpp"
#include "esforge/postprocess.hpp"
#include "esforge/service.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <optional>
#include <sstream>

namespace esforge::cli {

namespace {

using nlohmann::json;

/// Timestamp stamped on dialogues when every role backend is scripted, so that
/// reruns are byte-identical.
constexpr const char* kScriptedCreatedAt = "1970-01-01T00:00:00Z";

struct GenerateArgs {
    std::size_t n = 0;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string report;
    std::string pools_out;
    std::string prompt_log;
    std::string created_at;
    std::string counselor_mode;
    std::optional<std::size_t> max_rounds;
    bool no_self_iterate = false;
};

struct PostprocessArgs {
    std::string in, out, report;
    std::optional<std::size_t> min_utterances, max_utterances, max_flags;
};

struct AnalyzeArgs {
    std::string in, report_dir;
};

struct EvalArgs {
    std::string model, test, mode = "reference_context", out, responses;
    std::size_t parallel = 1;
};

struct FitArgs {
    std::string in, out;
};

struct ServeArgs {
    std::string host;
    std::optional<int> port;
};

struct ChatArgs {
    std::string model, scenario, problem_type, export_path;
};

struct KappaArgs {
    std::string ratings;
};

struct ConvertArgs {
    std::string in, out;
    bool merge = false;
};

AppConfig load_config(const std::string& path) { return path.empty() ? AppConfig::defaults() : AppConfig::load(path); }

bool all_scripted(const RoleBackends& b) {
    for (ChatBackend* backend : {b.scenario, b.profile, b.seeker, b.counselor, b.supporter}) {
        if (backend && !backend->deterministic()) return false;
    }
    return true;
}

std::string dump(const json& j) { return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n"; }

int cmd_generate(const std::string& config_path, const GenerateArgs& a, std::ostream& out) {
    Runtime rt(load_config(config_path));
    EngineConfig cfg = rt.config().engine;
    if (a.seed) cfg.rng_seed = *a.seed;
    if (a.max_rounds) cfg.max_rounds = *a.max_rounds;
    if (!a.counselor_mode.empty()) cfg.counselor_mode = parse_counselor_mode(a.counselor_mode);
    if (a.no_self_iterate) cfg.self_iterate = false;
    const auto ctx = rt.engine_context();
    if (!a.created_at.empty()) cfg.fixed_created_at = a.created_at;
    else if (!cfg.fixed_created_at && all_scripted(ctx.backends)) cfg.fixed_created_at = kScriptedCreatedAt;

    const auto result = run_batch(a.n, rt.taxonomy(), rt.pools(), ctx, cfg);
    save_corpus(a.out, result.corpus);
    if (!a.report.empty()) write_text_file(a.report, dump(result.report.to_json()));
    if (!a.pools_out.empty()) {
        const std::filesystem::path dir(a.pools_out);
        result.pools.save(dir / "scenario_pool.jsonl", dir / "profile_pool.jsonl");
    }
    if (!a.prompt_log.empty()) {
        std::ostringstream log;
        for (const auto& run : result.runs)
            for (const auto& p : run.prompts)
                log << json{{"dialogue_id", run.dialogue.id}, {"role_tag", p.role_tag}, {"system_prompt", p.system_prompt}}
                           .dump(-1, ' ', false, json::error_handler_t::replace)
                    << '\n';
        write_text_file(a.prompt_log, log.str());
    }
    const auto& r = result.report;
    out << "generated " << result.corpus.size() << " dialogues: accepted " << r.accepted << ", rejected " << r.rejected
        << ", aborted " << r.aborted << ", pool growth " << r.pool_growth << "\n";
    return 0;
}

int cmd_postprocess(const std::string& config_path, const PostprocessArgs& a, std::ostream& out) {
    const auto config = load_config(config_path);
    FilterPolicy policy = config.postprocess;
    if (a.min_utterances) policy.min_utterances = *a.min_utterances;
    if (a.max_utterances) policy.max_utterances = *a.max_utterances;
    if (a.max_flags) policy.max_flags = *a.max_flags;
    if (policy.min_utterances > policy.max_utterances) throw ConfigError("min_utterances exceeds max_utterances");
    const auto farewells = FarewellLexicon::load(config.paths.farewell_lexicon);
    const auto patterns = RolePatternLexicon::load(config.paths.role_patterns);
    const auto corpus = load_corpus(a.in);
    const auto result = filter_corpus(corpus, policy, farewells, patterns);
    save_corpus(a.out, result.kept);
    if (!a.report.empty()) write_text_file(a.report, drop_report_jsonl(result.dropped));
    out << "kept " << result.kept.size() << ", dropped " << result.dropped.size() << "\n";
    return 0;
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
    const auto corpus = load_corpus(a.in);
    for (const auto& path : write_analysis_reports(corpus, a.report_dir)) out << path.string() << "\n";
    return 0;
}

int cmd_eval(const std::string& config_path, const EvalArgs& a, std::ostream& out) {
    const auto test = load_corpus(a.test);
    const auto mode = parse_eval_mode(a.mode);
    std::unique_ptr<ModelAdapter> model;
    std::optional<Runtime> rt;
    if (a.model == "echo") {
        model = std::make_unique<EchoModel>();
    } else if (a.model == "gold") {
        model = std::make_unique<CannedModel>(CannedModel::from_gold(test));
    } else if (a.model == "canned") {
        if (a.responses.empty()) throw ConfigError("--model canned needs --responses");
        model = std::make_unique<CannedModel>(CannedModel::load(a.responses));
    } else {
        rt.emplace(load_config(config_path));
        auto served = rt->service_models();
        std::shared_ptr<const Counselor> counselor;
        ChatBackend* backend = nullptr;
        if (auto it = served.find(a.model); it != served.end()) {
            backend = it->second.backend;
            counselor = it->second.counselor;
        } else {
            backend = &rt->backend(a.model);
            const auto& e = rt->config().engine;
            counselor = std::make_shared<const Counselor>(
                e.counselor_mode, e.counselor_mode == CounselorMode::Statistical ? nullptr : backend,
                rt->transition_model(), rt->templates(), CounselorOptions{e.max_rounds, false, e.counselor_params});
        }
        model = std::make_unique<BackendModel>(a.model, *backend, counselor, rt->templates(), rt->config().engine.rng_seed);
    }
    const auto result = run_eval(*model, test, mode, default_tokenizer(), a.parallel);
    json report = result.report.to_json();
    report["model"] = model->name();
    if (!a.out.empty()) write_text_file(a.out, dump(report));
    out << dump(report);
    return 0;
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
    const auto corpus = load_corpus(a.in);
    const auto model = fit_transition_model(std::span<const Dialogue>(corpus));
    model.save(a.out);
    std::size_t fallback = 0;
    for (const auto& bucket : model.fallback)
        for (bool f : bucket) fallback += f ? 1 : 0;
    out << "fitted transition model from " << corpus.size() << " dialogues; " << fallback
        << " of 48 rows use the marginal fallback\n";
    return 0;
}

std::shared_ptr<const SeedPools> shared_pools(const Runtime& rt) { return std::make_shared<const SeedPools>(rt.pools()); }

ServiceOptions service_options(Runtime& rt) {
    const auto& s = rt.config().service;
    ServiceOptions o;
    o.seed = s.seed;
    o.session_log = s.session_log;
    o.ui_dir = s.ui_dir;
    o.cors_origin = s.cors_origin;
    o.templates = rt.templates();
    o.pools = shared_pools(rt);
    o.taxonomy = std::make_shared<const Taxonomy>(rt.taxonomy());
    return o;
}

HttpServer* g_server = nullptr;

extern "C" void on_signal(int) {
    if (g_server) g_server->stop();
}

int cmd_serve(const std::string& config_path, const ServeArgs& a, std::ostream& out) {
    Runtime rt(load_config(config_path));
    auto models = rt.service_models();
    if (models.empty()) throw ConfigError("service.models is empty; nothing to serve");
    SessionService service(std::move(models), service_options(rt));
    HttpServer server(service);
    const std::string host = a.host.empty() ? rt.config().service.host : a.host;
    const int port = server.bind(host, a.port.value_or(rt.config().service.port));
    out << "listening on http://" << host << ":" << port << std::endl;
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.listen();
    g_server = nullptr;
    return 0;
}

int cmd_chat(const std::string& config_path, const ChatArgs& a, std::istream& in, std::ostream& out) {
    Runtime rt(load_config(config_path));
    auto models = rt.service_models();
    std::string model = a.model;
    if (models.empty()) {
        const auto& roles = rt.config().roles;
        if (roles.supporter.empty()) throw ConfigError("chat needs service.models or a supporter role backend");
        const auto& e = rt.config().engine;
        ChatBackend* counselor_backend = e.counselor_mode == CounselorMode::Statistical ? nullptr
                                         : roles.counselor.empty()                     ? &rt.backend(roles.supporter)
                                                                                       : &rt.backend(roles.counselor);
        models["default"] = {&rt.backend(roles.supporter),
                             std::make_shared<const Counselor>(e.counselor_mode, counselor_backend, rt.transition_model(),
                                                               rt.templates(),
                                                               CounselorOptions{e.max_rounds, false, e.counselor_params})};
    }
    if (model.empty()) model = models.begin()->first;
    SessionService service(std::move(models), service_options(rt));
    json create{{"arm", "single"}, {"model", model}};
    if (!a.scenario.empty()) create["scenario"] = a.scenario;
    if (!a.problem_type.empty()) create["problem_type"] = a.problem_type;
    const auto created = service.create_session(create);
    if (created.status != 200) throw Error(created.body.value("error", "cannot create session"));
    const auto id = created.body["session_id"].get<std::string>();
    out << "Chatting with " << model << ". Type /quit to leave.\n";
    for (std::string line; out << "Seeker> " << std::flush, std::getline(in, line);) {
        const auto text = trim(line);
        if (text == "/quit") break;
        if (text.empty()) continue;
        const auto r = service.post_message(id, {{"text", text}});
        if (r.status != 200) {
            out << "[error " << r.status << "] " << r.body.value("error", "") << "\n";
            continue;
        }
        for (const auto& reply : r.body["replies"])
            out << "Supporter [" << reply["strategy"].get<std::string>() << "]: " << reply["text"].get<std::string>()
                << "\n";
    }
    out << "\n";
    if (!a.export_path.empty()) write_text_file(a.export_path, dump(service.export_session(id).body));
    return 0;
}

int cmd_kappa(const KappaArgs& a, std::ostream& out) {
    const auto k = fleiss_kappa(parse_ratings_csv(read_text_file(a.ratings)));
    out << dump(json{{"fleiss_kappa", k.value}, {"degenerate", k.degenerate}});
    return 0;
}

int cmd_convert(const ConvertArgs& a, std::ostream& out) {
    auto corpus = load_esconv(a.in);
    if (a.merge)
        for (auto& d : corpus) d = merge_consecutive(d);
    save_corpus(a.out, corpus);
    out << "converted " << corpus.size() << " dialogues\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Emotional-support dialogue synthesis toolkit"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("-c,--config", config_path, "JSON config manifest")->check(CLI::ExistingFile);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Generate a synthetic corpus");
    generate->add_option("--n", gen.n, "Number of dialogues")->required()->check(CLI::PositiveNumber);
    generate->add_option("--seed", gen.seed, "Master RNG seed");
    generate->add_option("--out", gen.out, "Output corpus JSONL")->required();
    generate->add_option("--report", gen.report, "Run report JSON");
    generate->add_option("--pools-out", gen.pools_out, "Directory for the grown seed pools");
    generate->add_option("--prompt-log", gen.prompt_log, "JSONL log of every rendered prompt");
    generate->add_option("--created-at", gen.created_at, "Fixed RFC 3339 timestamp for every dialogue");
    generate->add_option("--counselor-mode", gen.counselor_mode, "prompted, statistical or hybrid");
    generate->add_option("--max-rounds", gen.max_rounds, "Round cap per dialogue")->check(CLI::PositiveNumber);
    generate->add_flag("--no-self-iterate", gen.no_self_iterate, "Keep the scenario pool fixed");

    PostprocessArgs pp;
    auto* postprocess = app.add_subcommand("postprocess", "Trim greetings and filter a corpus");
    postprocess->add_option("--in", pp.in, "Input corpus")->required()->check(CLI::ExistingFile);
    postprocess->add_option("--out", pp.out, "Kept dialogues")->required();
    postprocess->add_option("--report", pp.report, "Drop report JSONL");
    postprocess->add_option("--min-utterances", pp.min_utterances);
    postprocess->add_option("--max-utterances", pp.max_utterances);
    postprocess->add_option("--max-flags", pp.max_flags);

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "Write corpus analysis reports");
    analyze->add_option("--in", an.in, "Input corpus")->required()->check(CLI::ExistingFile);
    analyze->add_option("--report-dir", an.report_dir, "Output directory")->required();

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "Score a response model against a test corpus");
    eval->add_option("--model", ev.model, "echo, gold, canned, a service model or a backend name")->required();
    eval->add_option("--test", ev.test, "Test corpus")->required()->check(CLI::ExistingFile);
    eval->add_option("--mode", ev.mode, "generated_context or reference_context");
    eval->add_option("--out", ev.out, "Report JSON");
    eval->add_option("--responses", ev.responses, "Canned responses JSONL")->check(CLI::ExistingFile);
    eval->add_option("--parallel", ev.parallel, "Dialogues evaluated concurrently")->check(CLI::PositiveNumber);

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit-counselor", "Fit the statistical counselor");
    fit_cmd->add_option("--in", fit.in, "Labeled corpus")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("--out", fit.out, "Model JSON")->required();

    ServeArgs sv;
    auto* serve = app.add_subcommand("serve", "Run the HTTP session service");
    serve->add_option("--host", sv.host);
    serve->add_option("--port", sv.port, "0 picks a free port")->check(CLI::Range(0, 65535));

    ChatArgs ch;
    auto* chat = app.add_subcommand("chat", "Talk to the supporter stack in the terminal");
    chat->add_option("--model", ch.model, "Service model name");
    chat->add_option("--scenario", ch.scenario);
    chat->add_option("--problem-type", ch.problem_type);
    chat->add_option("--export", ch.export_path, "Write the transcript record here on exit");

    KappaArgs ka;
    auto* kappa = app.add_subcommand("kappa", "Fleiss' kappa over an item_id,rater_id,label CSV");
    kappa->add_option("--ratings", ka.ratings)->required()->check(CLI::ExistingFile);

    ConvertArgs cv;
    auto* convert = app.add_subcommand("convert-esconv", "Convert the ESConv JSON release to corpus JSONL");
    convert->add_option("--in", cv.in)->required()->check(CLI::ExistingFile);
    convert->add_option("--out", cv.out)->required();
    convert->add_flag("--merge", cv.merge, "Merge consecutive same-speaker utterances");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << "Run with --help for usage.\n";
        return 2;
    }

    try {
        if (generate->parsed()) return cmd_generate(config_path, gen, out);
        if (postprocess->parsed()) return cmd_postprocess(config_path, pp, out);
        if (analyze->parsed()) return cmd_analyze(an, out);
        if (eval->parsed()) return cmd_eval(config_path, ev, out);
        if (fit_cmd->parsed()) return cmd_fit(fit, out);
        if (serve->parsed()) return cmd_serve(config_path, sv, out);
        if (chat->parsed()) return cmd_chat(config_path, ch, in, out);
        if (kappa->parsed()) return cmd_kappa(ka, out);
        if (convert->parsed()) return cmd_convert(cv, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    err << "usage error: no subcommand\n";
    return 2;
}

}  // namespace esforge::cli
