// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "esforge/dialogue.hpp"
#include "esforge/llm.hpp"

#include <filesystem>
#include <functional>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace esforge::test {

inline std::filesystem::path data_dir() { return ESFORGE_TEST_DATA_DIR; }
inline std::filesystem::path source_data_dir() { return ESFORGE_SOURCE_DATA_DIR; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Alternating dialogue starting with the seeker. Supporter turns take the
/// strategy from `strategies` in order (Others when the list runs out).
Dialogue make_dialogue(std::string id, const std::vector<std::string>& texts,
                       const std::vector<Strategy>& strategies = {});

/// Dialogue of `supporter_turns` rounds with the given supporter strategies.
Dialogue labeled_dialogue(std::string id, const std::vector<Strategy>& strategies);

/// Twenty-word scenario text.
std::string long_scenario(const std::string& topic = "work");

/// Backend answering with a pure function of the request; never deterministic
/// in the replay sense, so callers can exercise the parallel paths.
class FunctionBackend final : public ChatBackend {
public:
    using Fn = std::function<std::string(const ChatRequest&)>;
    FunctionBackend(Fn fn, std::size_t max_concurrent = 4) : fn_(std::move(fn)), max_(max_concurrent) {}
    std::string complete(const ChatRequest& r) override { return fn_(r); }
    std::size_t max_concurrent() const noexcept override { return max_; }
    bool deterministic() const noexcept override { return false; }

private:
    Fn fn_;
    std::size_t max_;
};

/// Backend that always throws the given error type.
class FailingBackend final : public ChatBackend {
public:
    std::string complete(const ChatRequest&) override;
    std::size_t max_concurrent() const noexcept override { return 1; }
    bool deterministic() const noexcept override { return true; }
};

/// Sets an environment variable for the lifetime of the guard.
class EnvGuard {
public:
    EnvGuard(const char* name, const std::string& value);
    ~EnvGuard();

private:
    std::string name_;
    std::optional<std::string> old_;
};

/// Runs the CLI in-process and captures both streams.
struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};
CliResult run(std::initializer_list<std::string> args, const std::string& stdin_text = {});

}  // namespace esforge::test

namespace esforge::test {

/// Seeded 20-dialogue corpus: 13 clean, 3 too short, 2 with redundant closing
/// runs (one survives trimming, one falls under the minimum), 2 with
/// supporter-style seeker turns. `expected` maps id to drop reason, "" = kept.
struct PostprocessFixture {
    std::vector<Dialogue> corpus;
    std::vector<std::pair<std::string, std::string>> expected;
};
PostprocessFixture postprocess_fixture(std::uint64_t seed = 20);

}  // namespace esforge::test
