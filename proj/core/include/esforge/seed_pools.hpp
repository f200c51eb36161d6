// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "esforge/dialogue.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace esforge {

/// (problem type, scenario, dialogue) triple from the scenario pool.
struct ScenarioSeed {
    ProblemType problem_type;
    std::string scenario;
    Dialogue dialogue;
};

/// (problem type, scenario, profile) triple from the profile pool.
struct ProfileSeed {
    ProblemType problem_type;
    std::string scenario;
    SeekerProfile profile;
};

/// Scenario and profile seed pools. Both only ever grow: the add_* members are
/// the only mutators and they append.
class SeedPools {
public:
    static constexpr std::size_t kMinScenarioWords = 20;

    const std::vector<ScenarioSeed>& scenarios() const noexcept { return scenarios_; }
    const std::vector<ProfileSeed>& profiles() const noexcept { return profiles_; }

    /// Throws Error when the scenario is shorter than kMinScenarioWords.
    void add_scenario(ScenarioSeed seed);
    void add_profile(ProfileSeed seed);

    /// Scenario-pool file: corpus records tagged `"pool_role": "scenario_seed"`.
    /// Profile-pool file: corpus records tagged `"pool_role": "profile_seed"`,
    /// utterances may be empty.
    static SeedPools load(const std::filesystem::path& scenario_pool, const std::filesystem::path& profile_pool);
    void save(const std::filesystem::path& scenario_pool, const std::filesystem::path& profile_pool) const;

private:
    std::vector<ScenarioSeed> scenarios_;
    std::vector<ProfileSeed> profiles_;
};

}  // namespace esforge
