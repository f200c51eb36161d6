// SPDX-License-Identifier: Apache-2.0
#include "esforge/corpus_io.hpp"
#include "esforge/errors.hpp"
#include "esforge/llm.hpp"

#include <fstream>

namespace esforge {

ScriptedBackend::ScriptedBackend(std::vector<Entry> entries) {
    for (auto& e : entries) queues_[e.role_tag].push_back(std::move(e.text));
}

std::vector<ScriptedBackend::Entry> ScriptedBackend::read_fixture(const std::filesystem::path& fixture) {
    std::ifstream in(fixture);
    if (!in) throw Error("cannot open fixture " + fixture.string());
    std::vector<Entry> entries;
    for_each_jsonl(in, [&](const nlohmann::json& j, std::size_t line) {
        if (!j.is_object() || !j.contains("role_tag") || !j["role_tag"].is_string() || !j.contains("text") ||
            !j["text"].is_string()) {
            throw ParseError("fixture entry needs string role_tag and text", line);
        }
        entries.push_back({j["role_tag"].get<std::string>(), j["text"].get<std::string>()});
    });
    return entries;
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& fixture) {
    return std::make_unique<ScriptedBackend>(read_fixture(fixture));
}

std::string ScriptedBackend::complete(const ChatRequest& request) {
    request.validate();
    std::lock_guard lock(mutex_);
    log_.push_back(request);
    auto it = queues_.find(request.role_tag);
    if (it == queues_.end() || it->second.empty()) {
        throw FixtureUnderrunError("scripted fixture exhausted for role tag \"" + request.role_tag + "\"");
    }
    std::string text = std::move(it->second.front());
    it->second.pop_front();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ProtocolError("empty completion");
    return text;
}

std::size_t ScriptedBackend::remaining(std::string_view role_tag) const {
    std::lock_guard lock(mutex_);
    const auto it = queues_.find(role_tag);
    return it == queues_.end() ? 0 : it->second.size();
}

std::vector<ChatRequest> ScriptedBackend::requests() const {
    std::lock_guard lock(mutex_);
    return log_;
}

}  // namespace esforge
