// SPDX-License-Identifier: Apache-2.0
#include "support.hpp"

#include "cli.hpp"
#include "esforge/errors.hpp"

#include <algorithm>
#include <atomic>
#include <iterator>
#include <cstdlib>
#include <random>
#include <sstream>
#include <unistd.h>

namespace esforge::test {

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("esforge-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

Dialogue make_dialogue(std::string id, const std::vector<std::string>& texts, const std::vector<Strategy>& strategies) {
    Dialogue d;
    d.id = std::move(id);
    d.problem_type = {"Life and Work Stress", "Workplace Stress"};
    d.scenario = long_scenario();
    d.profile = {"Alex", "Female", "Leeds", "Nurse", "Calm", "Reading"};
    d.meta.generator_tag = "test";
    std::size_t next = 0;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        Utterance u;
        u.speaker = i % 2 == 0 ? Speaker::Seeker : Speaker::Supporter;
        u.text = texts[i];
        if (u.speaker == Speaker::Supporter) u.strategy = next < strategies.size() ? strategies[next++] : Strategy::Others;
        d.utterances.push_back(std::move(u));
    }
    return d;
}

Dialogue labeled_dialogue(std::string id, const std::vector<Strategy>& strategies) {
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        texts.push_back("seeker line " + std::to_string(i));
        texts.push_back("supporter line " + std::to_string(i));
    }
    return make_dialogue(std::move(id), texts, strategies);
}

std::string long_scenario(const std::string& topic) {
    return "Over the past few weeks my " + topic +
           " situation has become much harder to handle and I am struggling to sleep, eat and keep up with my usual "
           "responsibilities.";
}

std::string FailingBackend::complete(const ChatRequest&) { throw TransportError("backend unavailable"); }

EnvGuard::EnvGuard(const char* name, const std::string& value) : name_(name) {
    if (const char* v = std::getenv(name)) old_ = v;
    ::setenv(name, value.c_str(), 1);
}

EnvGuard::~EnvGuard() {
    if (old_) ::setenv(name_.c_str(), old_->c_str(), 1);
    else ::unsetenv(name_.c_str());
}

CliResult run(std::initializer_list<std::string> args, const std::string& stdin_text) {
    std::vector<std::string> storage{"esforge"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : storage) argv.push_back(s.c_str());
    std::istringstream in(stdin_text);
    std::ostringstream out, err;
    CliResult r;
    r.code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), in, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

}  // namespace esforge::test

namespace esforge::test {

namespace {

const char* const kSeekerLines[] = {
    "My manager keeps moving deadlines and I feel stuck.",
    "I have not been sleeping well for a while now.",
    "It makes me anxious whenever my phone buzzes.",
    "My partner thinks I am overreacting about all of it.",
    "I used to enjoy painting but lately nothing feels fun.",
    "Some days I just stay in bed until noon.",
    "I worry that my friends are tired of hearing about this.",
    "The rent went up again and money is tight.",
};

const char* const kSupporterLines[] = {
    "What part of the week feels heaviest for you?",
    "It makes sense that you feel worn out after all that.",
    "Maybe a short walk after work could help you reset.",
    "Many people find that writing worries down eases them a little.",
    "It sounds like you are carrying a lot right now.",
    "You are doing your best in a difficult situation.",
    "So the changing deadlines leave you feeling powerless?",
    "I once went through a stressful move and it was exhausting.",
};

std::vector<std::string> clean_texts(std::size_t n, std::mt19937_64& rng) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.emplace_back(i % 2 == 0 ? kSeekerLines[rng() % std::size(kSeekerLines)]
                                    : kSupporterLines[rng() % std::size(kSupporterLines)]);
    }
    return out;
}

std::vector<Strategy> random_strategies(std::size_t n, std::mt19937_64& rng) {
    std::vector<Strategy> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(strategy_at(rng() % kStrategyCount));
    return out;
}

}  // namespace

PostprocessFixture postprocess_fixture(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    PostprocessFixture f;
    auto add = [&](std::vector<std::string> texts, std::string reason) {
        const std::string id = "pp-" + std::to_string(f.corpus.size());
        f.corpus.push_back(make_dialogue(id, texts, random_strategies(texts.size(), rng)));
        f.expected.emplace_back(id, std::move(reason));
    };
    const std::vector<std::string> closing_tail{"Take care!", "Bye!", "Goodbye!", "Bye bye!"};

    for (int i = 0; i < 13; ++i) {
        auto texts = clean_texts(10 + 2 * (rng() % 3), rng);
        if (i % 4 == 0) {
            texts.emplace_back("Thank you for your help.");
            texts.emplace_back("Take care.");
        }
        add(std::move(texts), "");
    }
    for (int i = 0; i < 3; ++i) add(clean_texts(2 + 2 * i, rng), "too_short");

    // 9 + 4 utterances, trimmed to 11: kept.
    auto long_tail = clean_texts(9, rng);
    long_tail.insert(long_tail.end(), closing_tail.begin(), closing_tail.end());
    add(std::move(long_tail), "");
    // 5 + 4 utterances, trimmed to 7: too short only after trimming.
    auto short_tail = clean_texts(5, rng);
    short_tail.insert(short_tail.end(), closing_tail.begin(), closing_tail.end());
    add(std::move(short_tail), "too_short");

    auto advice = clean_texts(10, rng);
    advice[4] = "You should try meditation.";
    add(std::move(advice), "role_inconsistency");
    auto empathy = clean_texts(12, rng);
    empathy[6] = "Honestly? I understand how you feel about that.";
    add(std::move(empathy), "role_inconsistency");

    // Interleave so reasons are not clustered by position.
    std::vector<std::size_t> order(f.corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    PostprocessFixture shuffled;
    for (auto i : order) {
        shuffled.corpus.push_back(f.corpus[i]);
        shuffled.expected.push_back(f.expected[i]);
    }
    return shuffled;
}

}  // namespace esforge::test
