// SPDX-License-Identifier: Apache-2.0
#include "esforge/service.hpp"

#include "esforge/corpus_io.hpp"
#include "esforge/engine.hpp"
#include "esforge/errors.hpp"
#include "esforge/supporter.hpp"
#include "esforge/text.hpp"

#include <cstdio>
#include <fstream>

namespace esforge {

using nlohmann::json;

namespace {

ServiceResponse error_response(int status, const std::string& message) { return {status, json{{"error", message}}}; }

json utterances_json(const std::vector<Utterance>& utterances) {
    json out = json::array();
    for (const auto& u : utterances) out.push_back(to_json(u));
    return out;
}

}  // namespace

struct SessionService::Session {
    struct Branch {
        std::string label;
        std::string model;
        std::vector<Utterance> utterances;
    };

    std::mutex mutex;
    std::string id;
    std::string arm;
    std::string scenario;
    ProblemType problem_type;
    std::string created_at;
    std::uint64_t seed = 0;
    std::mt19937_64 rng;
    std::vector<Branch> branches;
    bool closed = false;
    json rating;
};

SessionService::SessionService(std::map<std::string, ModelBinding> models, ServiceOptions options)
    : models_(std::move(models)), options_(std::move(options)), rng_(options_.seed) {
    for (const auto& [name, binding] : models_) {
        if (!binding.backend || !binding.counselor) throw ConfigError("model \"" + name + "\" lacks a backend or counselor");
    }
}

std::shared_ptr<SessionService::Session> SessionService::find(const std::string& id) {
    std::shared_lock lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

void SessionService::log_event(const json& event) {
    if (options_.session_log.empty()) return;
    std::lock_guard lock(log_mutex_);
    if (options_.session_log.has_parent_path()) std::filesystem::create_directories(options_.session_log.parent_path());
    std::ofstream out(options_.session_log, std::ios::app);
    out << event.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
}

ServiceResponse SessionService::create_session(const json& body) {
    if (!body.is_object()) return error_response(400, "body must be a JSON object");
    const std::string arm = body.value("arm", std::string("single"));
    std::vector<std::string> chosen;
    if (arm == "single") {
        std::string model;
        if (body.contains("model")) {
            if (!body["model"].is_string()) return error_response(400, "\"model\" must be a string");
            model = body["model"].get<std::string>();
        } else if (models_.size() == 1) {
            model = models_.begin()->first;
        } else {
            return error_response(400, "\"model\" is required");
        }
        chosen.push_back(model);
    } else if (arm == "ab") {
        const auto it = body.find("models");
        if (it == body.end() || !it->is_array() || it->size() != 2 || !(*it)[0].is_string() || !(*it)[1].is_string())
            return error_response(400, "\"models\" must list two model names");
        chosen = {(*it)[0].get<std::string>(), (*it)[1].get<std::string>()};
    } else {
        return error_response(400, "\"arm\" must be \"single\" or \"ab\"");
    }
    for (const auto& m : chosen) {
        if (!models_.count(m)) return error_response(400, "unknown model \"" + m + "\"");
    }

    auto session = std::make_shared<Session>();
    session->arm = arm;
    if (body.contains("scenario")) {
        if (!body["scenario"].is_string()) return error_response(400, "\"scenario\" must be a string");
        session->scenario = body["scenario"].get<std::string>();
    }
    if (body.contains("problem_type")) {
        if (!body["problem_type"].is_string()) return error_response(400, "\"problem_type\" must be a string");
        session->problem_type.name = body["problem_type"].get<std::string>();
        if (options_.taxonomy) {
            if (const auto* pt = options_.taxonomy->find(session->problem_type.name)) session->problem_type = *pt;
        }
    }
    {
        std::lock_guard lock(rng_mutex_);
        if (arm == "ab" && (rng_() & 1U)) std::swap(chosen[0], chosen[1]);
        session->seed = rng_();
    }
    session->rng.seed(session->seed);
    char id_buf[17];
    std::snprintf(id_buf, sizeof id_buf, "%016llx", static_cast<unsigned long long>(session->seed));
    session->id = id_buf;
    session->created_at = utc_now_rfc3339();
    if (arm == "single") {
        session->branches.push_back({"single", chosen[0], {}});
    } else {
        session->branches.push_back({"A", chosen[0], {}});
        session->branches.push_back({"B", chosen[1], {}});
    }
    {
        std::unique_lock lock(sessions_mutex_);
        if (sessions_.count(session->id)) return error_response(500, "session id collision");
        sessions_.emplace(session->id, session);
    }

    json labels = json::array(), mapping = json::object();
    for (const auto& b : session->branches) {
        labels.push_back(b.label);
        mapping[b.label] = b.model;
    }
    log_event({{"event", "create"},
               {"session_id", session->id},
               {"arm", arm},
               {"mapping", mapping},
               {"scenario", session->scenario},
               {"problem_type", session->problem_type.name},
               {"at", session->created_at}});
    json out{{"session_id", session->id}, {"arm", arm}, {"labels", labels}};
    if (!session->scenario.empty()) out["scenario"] = session->scenario;
    return {200, std::move(out)};
}

ServiceResponse SessionService::post_message(const std::string& session_id, const json& body) {
    const auto session = find(session_id);
    if (!session) return error_response(404, "unknown session");
    std::lock_guard lock(session->mutex);
    if (session->closed) return error_response(409, "session is closed");
    if (!body.is_object() || !body.contains("text") || !body["text"].is_string())
        return error_response(400, "\"text\" must be a string");
    const auto text = trim(body["text"].get<std::string>());
    if (text.empty()) return error_response(400, "\"text\" must not be empty");

    // A seeker turn left behind by a failed round is extended instead of duplicated.
    for (auto& b : session->branches) {
        if (!b.utterances.empty() && b.utterances.back().speaker == Speaker::Seeker) b.utterances.back().text += " " + text;
        else b.utterances.push_back({Speaker::Seeker, text, std::nullopt});
    }

    std::vector<Utterance> replies;
    try {
        for (const auto& b : session->branches) {
            const auto& binding = models_.at(b.model);
            const Strategy strategy = binding.counselor->select_strategy(b.utterances, session->rng);
            const Dialogue* exemplar =
                options_.pools ? pick_exemplar(*options_.pools, session->problem_type, session->rng) : nullptr;
            replies.push_back(supporter_turn(strategy, b.utterances, exemplar, *binding.backend, options_.templates,
                                             session->scenario));
        }
    } catch (const std::exception& e) {
        log_event({{"event", "backend_failure"}, {"session_id", session->id}, {"reason", e.what()}, {"at", utc_now_rfc3339()}});
        return error_response(502, std::string("backend failure: ") + e.what());
    }

    json out = json::array();
    for (std::size_t i = 0; i < replies.size(); ++i) {
        auto& b = session->branches[i];
        out.push_back({{"label", b.label}, {"text", replies[i].text}, {"strategy", std::string(to_string(*replies[i].strategy))}});
        b.utterances.push_back(std::move(replies[i]));
    }
    log_event({{"event", "message"},
               {"session_id", session->id},
               {"seeker", session->branches.front().utterances.at(session->branches.front().utterances.size() - 2).text},
               {"replies", out},
               {"at", utc_now_rfc3339()}});
    return {200, json{{"replies", std::move(out)}}};
}

ServiceResponse SessionService::submit_rating(const std::string& session_id, const json& body) {
    const auto session = find(session_id);
    if (!session) return error_response(404, "unknown session");
    std::lock_guard lock(session->mutex);
    if (!session->rating.is_null()) return error_response(409, "session already rated");
    if (!body.is_object()) return error_response(400, "body must be a JSON object");

    json rating = json::object();
    if (session->arm == "ab") {
        const auto it = body.find("ab_choice");
        if (it == body.end() || !it->is_string()) return error_response(400, "\"ab_choice\" is required");
        const auto choice = it->get<std::string>();
        if (std::find(kAbChoices.begin(), kAbChoices.end(), choice) == kAbChoices.end())
            return error_response(400, "\"ab_choice\" must be one of \"A wins\", \"Tie\", \"B wins\"");
        rating["ab_choice"] = choice;
    } else {
        json scores = json::object();
        for (auto metric : kRatingMetrics) {
            const std::string key(metric);
            const auto it = body.find(key);
            if (it == body.end()) return error_response(400, "missing metric \"" + key + "\"");
            if (!it->is_number_integer()) return error_response(400, "metric \"" + key + "\" must be an integer");
            const auto v = it->get<long long>();
            if (v < 1 || v > 5) return error_response(400, "metric \"" + key + "\" must be between 1 and 5");
            scores[key] = v;
        }
        rating["scores"] = std::move(scores);
    }
    if (body.contains("comment")) {
        if (!body["comment"].is_string()) return error_response(400, "\"comment\" must be a string");
        rating["comment"] = body["comment"];
    }
    json mapping = json::object();
    for (const auto& b : session->branches) mapping[b.label] = b.model;
    session->rating = rating;
    session->closed = true;
    log_event({{"event", "rating"},
               {"session_id", session->id},
               {"rating", rating},
               {"mapping", mapping},
               {"at", utc_now_rfc3339()}});
    return {200, json{{"stored", true}, {"unblinded_mapping", std::move(mapping)}}};
}

ServiceResponse SessionService::export_session(const std::string& session_id) {
    const auto session = find(session_id);
    if (!session) return error_response(404, "unknown session");
    std::lock_guard lock(session->mutex);
    Dialogue d;
    d.id = session->id;
    d.problem_type = session->problem_type;
    d.scenario = session->scenario;
    d.utterances = session->branches.front().utterances;
    d.meta.generator_tag = "esforge-service";
    d.meta.rng_seed = session->seed;
    d.meta.created_at = session->created_at;
    d.meta.extra["arm"] = session->arm;
    d.meta.extra["status"] = session->closed ? "closed" : "open";
    if (session->arm == "ab") {
        json branches = json::object();
        for (const auto& b : session->branches) branches[b.label] = utterances_json(b.utterances);
        d.meta.extra["branches"] = std::move(branches);
    }
    if (!session->rating.is_null()) {
        d.meta.extra["rating"] = session->rating;
        json mapping = json::object();
        for (const auto& b : session->branches) mapping[b.label] = b.model;
        d.meta.extra["mapping"] = std::move(mapping);
    }
    return {200, to_json(d)};
}

ServiceResponse SessionService::strategies() const {
    json names = json::array();
    for (Strategy s : kAllStrategies) names.push_back(std::string(to_string(s)));
    return {200, json{{"strategies", std::move(names)}}};
}

ServiceResponse SessionService::health() const {
    json names = json::array();
    for (const auto& [name, binding] : models_) names.push_back(name);
    return {200, json{{"status", "ok"}, {"models", std::move(names)}}};
}

std::optional<std::map<std::string, std::string>> SessionService::hidden_mapping(const std::string& session_id) {
    const auto session = find(session_id);
    if (!session) return std::nullopt;
    std::lock_guard lock(session->mutex);
    std::map<std::string, std::string> mapping;
    for (const auto& b : session->branches) mapping[b.label] = b.model;
    return mapping;
}

}  // namespace esforge
