// SPDX-License-Identifier: Apache-2.0
#include "esforge/corpus_io.hpp"

#include "esforge/errors.hpp"
#include "esforge/seed_pools.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace esforge {

using nlohmann::json;

namespace {

const std::set<std::string, std::less<>> kRecordKeys = {"id", "problem_type", "category", "scenario",
                                                         "profile", "utterances", "meta"};
const std::set<std::string, std::less<>> kMetaKeys = {"generator_tag", "rng_seed", "created_at", "aborted"};

std::string string_field(const json& obj, const char* key, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return {};
    if (!it->is_string()) throw ParseError(std::string("field \"") + key + "\" must be a string", line);
    return it->get<std::string>();
}

std::string dump_line(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

}  // namespace

json to_json(const SeekerProfile& p) {
    return {{"name", p.name},         {"gender", p.gender},           {"address", p.address},
            {"occupation", p.occupation}, {"personality", p.personality}, {"hobbies", p.hobbies}};
}

json to_json(const Utterance& u) {
    json j = {{"speaker", to_string(u.speaker)}, {"text", u.text}};
    j["strategy"] = u.strategy ? json(to_string(*u.strategy)) : json(nullptr);
    return j;
}

json to_json(const Dialogue& d) {
    json utts = json::array();
    for (const auto& u : d.utterances) utts.push_back(to_json(u));

    json meta = d.meta.extra.is_object() ? d.meta.extra : json::object();
    meta["generator_tag"] = d.meta.generator_tag;
    meta["rng_seed"] = d.meta.rng_seed;
    meta["created_at"] = d.meta.created_at;
    if (d.meta.aborted) meta["aborted"] = true;

    return {{"id", d.id},
            {"problem_type", d.problem_type.name},
            {"category", d.problem_type.category},
            {"scenario", d.scenario},
            {"profile", to_json(d.profile)},
            {"utterances", std::move(utts)},
            {"meta", std::move(meta)}};
}

SeekerProfile profile_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("profile must be an object");
    SeekerProfile p;
    p.name = string_field(j, "name", 0);
    p.gender = string_field(j, "gender", 0);
    p.address = string_field(j, "address", 0);
    p.occupation = string_field(j, "occupation", 0);
    p.personality = string_field(j, "personality", 0);
    p.hobbies = string_field(j, "hobbies", 0);
    return p;
}

Dialogue dialogue_from_json(const json& record, std::size_t line) {
    if (!record.is_object()) throw ParseError("record must be a JSON object", line);
    Dialogue d;
    d.id = string_field(record, "id", line);
    d.problem_type.name = string_field(record, "problem_type", line);
    d.problem_type.category = string_field(record, "category", line);
    d.scenario = string_field(record, "scenario", line);

    if (auto it = record.find("profile"); it != record.end() && !it->is_null()) {
        try {
            d.profile = profile_from_json(*it);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line);
        }
    }

    const auto utts = record.find("utterances");
    if (utts == record.end() || !utts->is_array()) throw ParseError("missing utterances array", line);
    d.utterances.reserve(utts->size());
    for (const auto& u : *utts) {
        if (!u.is_object()) throw ParseError("utterance must be an object", line);
        const auto speaker = parse_speaker(string_field(u, "speaker", line));
        if (!speaker) throw ParseError("unknown speaker", line);
        Utterance out{*speaker, string_field(u, "text", line), std::nullopt};
        if (auto s = u.find("strategy"); s != u.end() && !s->is_null()) {
            if (!s->is_string()) throw ParseError("strategy must be a string or null", line);
            const auto parsed = parse_strategy(s->get<std::string>());
            if (!parsed) throw ParseError("unknown strategy \"" + s->get<std::string>() + "\"", line);
            out.strategy = *parsed;
        }
        d.utterances.push_back(std::move(out));
    }

    if (auto m = record.find("meta"); m != record.end() && !m->is_null()) {
        if (!m->is_object()) throw ParseError("meta must be an object", line);
        d.meta.generator_tag = string_field(*m, "generator_tag", line);
        d.meta.created_at = string_field(*m, "created_at", line);
        if (auto s = m->find("rng_seed"); s != m->end() && !s->is_null()) {
            if (!s->is_number_integer()) throw ParseError("rng_seed must be an integer", line);
            d.meta.rng_seed = s->is_number_unsigned() ? s->get<std::uint64_t>()
                                                      : static_cast<std::uint64_t>(s->get<std::int64_t>());
        }
        if (auto a = m->find("aborted"); a != m->end() && a->is_boolean()) d.meta.aborted = a->get<bool>();
        for (auto it = m->begin(); it != m->end(); ++it) {
            if (!kMetaKeys.contains(it.key())) d.meta.extra[it.key()] = it.value();
        }
    }
    for (auto it = record.begin(); it != record.end(); ++it) {
        if (!kRecordKeys.contains(it.key())) d.meta.extra[it.key()] = it.value();
    }
    return d;
}

std::string to_jsonl_line(const Dialogue& d) { return dump_line(to_json(d)); }

std::vector<Dialogue> read_corpus(std::istream& in) {
    std::vector<Dialogue> out;
    for_each_jsonl(in, [&](const json& j, std::size_t line) { out.push_back(dialogue_from_json(j, line)); });
    return out;
}

std::vector<Dialogue> load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open corpus " + path.string());
    return read_corpus(in);
}

void write_corpus(std::ostream& out, const std::vector<Dialogue>& corpus) {
    for (const auto& d : corpus) out << to_jsonl_line(d) << '\n';
}

void save_corpus(const std::filesystem::path& path, const std::vector<Dialogue>& corpus) {
    std::ostringstream buf;
    write_corpus(buf, corpus);
    write_text_file(path, buf.str());
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---------------------------------------------------------------------------
// Seed pools

void SeedPools::add_scenario(ScenarioSeed seed) {
    if (word_count(seed.scenario) < kMinScenarioWords) {
        throw Error("scenario seed shorter than " + std::to_string(kMinScenarioWords) + " words");
    }
    scenarios_.push_back(std::move(seed));
}

void SeedPools::add_profile(ProfileSeed seed) { profiles_.push_back(std::move(seed)); }

SeedPools SeedPools::load(const std::filesystem::path& scenario_pool, const std::filesystem::path& profile_pool) {
    SeedPools pools;
    for (const auto& d : load_corpus(scenario_pool)) {
        ScenarioSeed seed{d.problem_type, d.scenario, d};
        seed.dialogue.meta.extra.erase("pool_role");
        pools.add_scenario(std::move(seed));
    }
    for (const auto& d : load_corpus(profile_pool)) {
        if (!d.profile.complete()) throw ParseError("profile seed " + d.id + " has empty attributes");
        pools.add_profile({d.problem_type, d.scenario, d.profile});
    }
    return pools;
}

void SeedPools::save(const std::filesystem::path& scenario_pool, const std::filesystem::path& profile_pool) const {
    std::ostringstream s;
    for (const auto& seed : scenarios_) {
        Dialogue d = seed.dialogue;
        d.problem_type = seed.problem_type;
        d.scenario = seed.scenario;
        d.meta.extra["pool_role"] = "scenario_seed";
        s << to_jsonl_line(d) << '\n';
    }
    write_text_file(scenario_pool, s.str());

    std::ostringstream p;
    std::size_t i = 0;
    for (const auto& seed : profiles_) {
        Dialogue d;
        d.id = "profile-" + std::to_string(i++);
        d.problem_type = seed.problem_type;
        d.scenario = seed.scenario;
        d.profile = seed.profile;
        d.meta.extra["pool_role"] = "profile_seed";
        p << to_jsonl_line(d) << '\n';
    }
    write_text_file(profile_pool, p.str());
}

}  // namespace esforge
