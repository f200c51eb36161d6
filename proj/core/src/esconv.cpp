// SPDX-License-Identifier: Apache-2.0
#include "esforge/esconv.hpp"

#include "esforge/corpus_io.hpp"
#include "esforge/errors.hpp"
#include "esforge/text.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>

namespace esforge {

std::vector<Dialogue> load_esconv(const std::filesystem::path& path) {
    const auto j = nlohmann::json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_array()) throw ParseError("ESConv file must hold a JSON array: " + path.string());
    const auto taxonomy = Taxonomy::builtin();
    std::vector<Dialogue> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& rec = j[i];
        try {
            Dialogue d;
            char id[32];
            std::snprintf(id, sizeof id, "esconv-%04zu", i);
            d.id = id;
            d.problem_type.name = rec.value("problem_type", "");
            if (const auto* pt = taxonomy.find(d.problem_type.name)) d.problem_type = *pt;
            else d.problem_type.category = "ESConv";
            d.scenario = rec.value("situation", "");
            d.meta.generator_tag = "esconv";
            for (const char* key : {"emotion_type", "experience_type"}) {
                if (rec.contains(key)) d.meta.extra[key] = rec[key];
            }
            for (const auto& turn : rec.at("dialog")) {
                const auto speaker = parse_speaker(turn.at("speaker").get<std::string>());
                if (!speaker) throw ParseError("unknown speaker in ESConv dialogue " + std::to_string(i));
                Utterance u{*speaker, trim(turn.at("content").get<std::string>()), std::nullopt};
                if (u.speaker == Speaker::Supporter && turn.contains("annotation")) {
                    const auto& ann = turn["annotation"];
                    if (ann.is_object() && ann.contains("strategy") && ann["strategy"].is_string())
                        u.strategy = parse_strategy(ann["strategy"].get<std::string>());
                }
                d.utterances.push_back(std::move(u));
            }
            out.push_back(std::move(d));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("ESConv dialogue " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace esforge
