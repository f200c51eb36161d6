// SPDX-License-Identifier: Apache-2.0
#include "esforge/text.hpp"

#include <gtest/gtest.h>

using namespace esforge;
using V = std::vector<std::string>;

TEST(Tokenizer, LowercasesAndSplitsOnNonAlnum) {
    EXPECT_EQ(default_tokenize("Hello, World! It's 2am."), (V{"hello", "world", "it", "s", "2am"}));
    EXPECT_EQ(default_tokenize(""), V{});
    EXPECT_EQ(default_tokenize(" ... "), V{});
}

TEST(Tokenizer, KeepsMultibyteSequencesInsideWords) {
    EXPECT_EQ(default_tokenize("Café naïve"), (V{"café", "naïve"}));
    EXPECT_EQ(default_tokenize("日本語 text"), (V{"日本語", "text"}));
}

TEST(Text, TrimLowerIequals) {
    EXPECT_EQ(trim("  a b \n"), "a b");
    EXPECT_EQ(trim(" \t"), "");
    EXPECT_EQ(to_lower("AbC"), "abc");
    EXPECT_TRUE(iequals("Bye", "bYE"));
    EXPECT_FALSE(iequals("Bye", "Byes"));
}

TEST(Text, RenderTemplateReplacesKnownPlaceholdersOnly) {
    EXPECT_EQ(render_template("{a} and {b} and {c}", {{"a", "1"}, {"b", "{a}"}}), "1 and {a} and {c}");
    EXPECT_EQ(render_template("no braces", {}), "no braces");
    EXPECT_EQ(render_template("open { only", {{"x", "y"}}), "open { only");
}

TEST(Text, Join) {
    EXPECT_EQ(join({"a", "b", "c"}, ", "), "a, b, c");
    EXPECT_EQ(join({}, ","), "");
}
