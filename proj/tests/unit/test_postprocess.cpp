// SPDX-License-Identifier: Apache-2.0
#include "esforge/errors.hpp"
#include "esforge/postprocess.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>

using namespace esforge;

namespace {

std::vector<std::string> texts(const Dialogue& d) {
    std::vector<std::string> out;
    for (const auto& u : d.utterances) out.push_back(u.text);
    return out;
}

}  // namespace

TEST(Trim, KeepsFirstFarewellPerSpeakerInTail) {
    const auto d = test::make_dialogue("d", {"I feel lost at work lately.", "Take care!", "Bye!", "Goodbye!", "Bye bye!"});
    // Speakers alternate from the seeker, so the tail here starts with a supporter.
    EXPECT_EQ(texts(trim_redundant_greetings(d)),
              (std::vector<std::string>{"I feel lost at work lately.", "Take care!", "Bye!"}));
}

TEST(Trim, NoFarewellsUnchanged) {
    const auto d = test::labeled_dialogue("d", {Strategy::Question, Strategy::Information});
    EXPECT_EQ(trim_redundant_greetings(d), d);
}

TEST(Trim, SingleTrailingGoodbyeUnchanged) {
    const auto d = test::make_dialogue("d", {"My week was awful honestly.", "Goodbye!"}, {Strategy::Others});
    EXPECT_EQ(trim_redundant_greetings(d), d);
}

TEST(Trim, InteriorFarewellsUntouched) {
    const auto d = test::make_dialogue("d", {"Bye!", "Take care.", "Wait, one more thing is bothering me.",
                                             "Go on, I am listening to you.", "Bye!", "Bye!"});
    EXPECT_EQ(trim_redundant_greetings(d).utterances.size(), 6u);
}

TEST(Trim, PropertiesOnRandomDialogues) {
    std::mt19937_64 rng(99);
    const std::vector<std::string> pool{"Bye!", "Goodbye.", "Take care!", "Thanks for your help.",
                                        "My exams start next week and I am scared.", "What scares you the most?"};
    const FarewellLexicon lex;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<std::string> t;
        const auto n = rng() % 10;
        for (std::size_t i = 0; i < n; ++i) t.push_back(pool[rng() % pool.size()]);
        const auto d = test::make_dialogue("r", t);
        const auto out = trim_redundant_greetings(d, lex);
        ASSERT_LE(out.utterances.size(), d.utterances.size());
        // Prefix preserved, alternation preserved, at most one farewell per speaker in the tail.
        std::size_t prefix = d.utterances.size();
        while (prefix > 0 && lex.is_farewell(d.utterances[prefix - 1].text)) --prefix;
        for (std::size_t i = 0; i < prefix; ++i) EXPECT_EQ(out.utterances[i], d.utterances[i]);
        EXPECT_LE(out.utterances.size(), prefix + 2);
        EXPECT_TRUE(alternates(out.utterances));
        EXPECT_EQ(trim_redundant_greetings(out, lex), out);
    }
}

TEST(RoleFlags, Examples) {
    const auto flagged = test::make_dialogue("d", {"You should try meditation."});
    EXPECT_EQ(detect_role_inconsistency(flagged), (std::vector<RoleFlag>{{0, "advice-opener"}}));
    const auto clean = test::make_dialogue("d", {"I tried meditation."});
    EXPECT_TRUE(detect_role_inconsistency(clean).empty());
    const auto supporter = test::make_dialogue("d", {"I am tired.", "You should try meditation."});
    EXPECT_TRUE(detect_role_inconsistency(supporter).empty());
}

TEST(RoleFlags, SentenceAnchoredAndCaseInsensitive) {
    const auto d = test::make_dialogue("d", {"Thanks. it sounds like you had a rough day too.", "ok",
                                             "My friend said I should rest.", "ok", "HAVE YOU CONSIDERED that?"});
    const auto flags = detect_role_inconsistency(d);
    ASSERT_EQ(flags.size(), 2u);
    EXPECT_EQ(flags[0], (RoleFlag{0, "empathy-opener"}));
    EXPECT_EQ(flags[1], (RoleFlag{4, "suggestion-opener"}));
}

TEST(RoleFlags, LexiconFileMatchesBuiltinAndParses) {
    const auto file = RolePatternLexicon::load(test::source_data_dir() / "role_patterns.txt");
    const RolePatternLexicon builtin;
    ASSERT_EQ(file.patterns().size(), builtin.patterns().size());
    for (std::size_t i = 0; i < file.patterns().size(); ++i) {
        EXPECT_EQ(file.patterns()[i].reason, builtin.patterns()[i].reason);
        EXPECT_EQ(file.patterns()[i].source, builtin.patterns()[i].source);
    }
    const auto custom = RolePatternLexicon::parse("# comment\n\n^calm down\n[x] ^relax\n");
    ASSERT_EQ(custom.patterns().size(), 2u);
    EXPECT_EQ(custom.patterns()[0].reason, "supporter-style");
    EXPECT_EQ(custom.patterns()[1].reason, "x");
    EXPECT_THROW(RolePatternLexicon::parse("[bad] ([unclosed\n"), ParseError);
}

TEST(RoleFlags, OptionalJudge) {
    ScriptedBackend judge(std::vector<ScriptedBackend::Entry>{{"role_judge", "No."}, {"role_judge", "Yes, clearly."}});
    const auto d = test::make_dialogue("d", {"I am sad.", "Why?", "Cheer up, it will pass."});
    EXPECT_EQ(judge_role_inconsistency(d, judge), (std::vector<RoleFlag>{{2, "llm-judge"}}));
}

TEST(Filter, Examples) {
    const auto clean = test::labeled_dialogue("clean", std::vector<Strategy>(5, Strategy::Question));
    const auto short6 = test::labeled_dialogue("short", std::vector<Strategy>(3, Strategy::Question));
    const auto trimmed = test::make_dialogue(
        "trimmed", {"My boss yells at me every single day.", "That sounds exhausting.",
                    "I do not know what to do anymore.", "What have you tried so far?",
                    "Talking to HR, but nothing changed.", "Take care!", "Bye!", "Goodbye!", "Bye bye!"},
        std::vector<Strategy>(4, Strategy::Question));
    auto aborted = clean;
    aborted.id = "aborted";
    aborted.meta.aborted = true;

    const std::vector<Dialogue> corpus{clean, short6, trimmed, aborted};
    const auto r = filter_corpus(corpus, {8, 30, 0});
    ASSERT_EQ(r.kept.size(), 1u);
    EXPECT_EQ(r.kept[0].id, "clean");
    ASSERT_EQ(r.dropped.size(), 3u);
    EXPECT_EQ(r.dropped[0].dialogue.id, "short");
    EXPECT_EQ(r.dropped[0].reason, "too_short");
    EXPECT_EQ(r.dropped[0].detail, "6 < 8");
    EXPECT_EQ(r.dropped[1].dialogue.id, "trimmed");
    EXPECT_EQ(r.dropped[1].reason, "too_short");
    EXPECT_EQ(r.dropped[1].detail, "7 < 8");
    EXPECT_EQ(r.dropped[2].reason, "aborted");
    EXPECT_EQ(filter_corpus(std::vector<Dialogue>{trimmed}, {7, 30, 0}).kept.at(0).utterances.size(), 7u);
}

TEST(Filter, TooLongAndFlagBudget) {
    const auto d = test::labeled_dialogue("long", std::vector<Strategy>(20, Strategy::Question));
    const std::vector<Dialogue> one{d};
    EXPECT_EQ(filter_corpus(one, {8, 30, 0}).dropped.at(0).reason, "too_long");
    auto flagged = test::labeled_dialogue("flag", std::vector<Strategy>(5, Strategy::Question));
    flagged.utterances[2].text = "You should rest more.";
    const std::vector<Dialogue> two{flagged};
    const auto r = filter_corpus(two, {8, 30, 0});
    EXPECT_EQ(r.dropped.at(0).reason, "role_inconsistency");
    EXPECT_EQ(r.dropped.at(0).detail, "2:advice-opener");
    EXPECT_EQ(filter_corpus(two, {8, 30, 1}).kept.size(), 1u);
}

TEST(Filter, SeededTwentyDialogueFixturePartition) {
    const auto fx = test::postprocess_fixture();
    ASSERT_EQ(fx.corpus.size(), 20u);
    const auto r = filter_corpus(fx.corpus, {8, 30, 0});
    std::map<std::string, std::string> actual;
    for (const auto& d : r.kept) actual[d.id] = "";
    for (const auto& d : r.dropped) actual[d.dialogue.id] = d.reason;
    ASSERT_EQ(actual.size(), 20u);
    for (const auto& [id, reason] : fx.expected) EXPECT_EQ(actual.at(id), reason) << id;
    EXPECT_EQ(r.kept.size(), 14u);
    EXPECT_EQ(r.dropped.size(), 6u);
}

TEST(Filter, PartitionPropertyAndOrder) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto fx = test::postprocess_fixture(seed);
        const auto r = filter_corpus(fx.corpus, {8, 30, 0});
        EXPECT_EQ(r.kept.size() + r.dropped.size(), fx.corpus.size());
        std::size_t cursor = 0;
        for (const auto& k : r.kept) {
            while (cursor < fx.corpus.size() && fx.corpus[cursor].id != k.id) ++cursor;
            ASSERT_LT(cursor, fx.corpus.size()) << "kept order differs from input order";
        }
    }
}

TEST(Filter, DropReport) {
    std::vector<DroppedDialogue> dropped{{test::make_dialogue("a", {"x"}), "too_short", "1 < 8"},
                                         {test::make_dialogue("b", {"x"}), "aborted", ""}};
    EXPECT_EQ(drop_report_jsonl(dropped),
              "{\"detail\":\"1 < 8\",\"id\":\"a\",\"reason\":\"too_short\"}\n{\"id\":\"b\",\"reason\":\"aborted\"}\n");
}
