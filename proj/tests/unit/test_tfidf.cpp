// SPDX-License-Identifier: Apache-2.0
#include "esforge/errors.hpp"
#include "esforge/tfidf.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace esforge;

namespace {

std::vector<std::string> random_docs(std::mt19937_64& rng, std::size_t n) {
    static const char* words[] = {"sad", "work", "Sleep", "friend", "money", "exam", "tired", "café", "home", "cry"};
    std::vector<std::string> docs;
    for (std::size_t i = 0; i < n; ++i) {
        std::string d;
        const auto len = rng() % 12;
        for (std::size_t k = 0; k < len; ++k) d += std::string(words[rng() % std::size(words)]) + (rng() % 3 ? " " : ", ");
        docs.push_back(d);
    }
    return docs;
}

}  // namespace

TEST(Tfidf, IdenticalDocsHaveCosineOne) {
    const std::vector<std::string> docs{"a b", "a b"};
    const auto v = tfidf_vectors(docs);
    EXPECT_NEAR(cosine(v[0], v[1]), 1.0, 1e-12);
}

TEST(Tfidf, DisjointDocsHaveCosineZero) {
    const std::vector<std::string> docs{"a", "b"};
    const auto v = tfidf_vectors(docs);
    EXPECT_DOUBLE_EQ(cosine(v[0], v[1]), 0.0);
}

TEST(Tfidf, WeightsFollowSmoothedIdf) {
    const std::vector<std::string> docs{"a a b", "b c"};
    const auto v = tfidf_vectors(docs);
    // Term ids in order of first appearance: a=0, b=1, c=2.
    const double ia = std::log(3.0 / 2.0) + 1, ib = 1.0;
    const double norm = std::sqrt(4 * ia * ia + ib * ib);
    ASSERT_EQ(v[0].weights.size(), 2u);
    EXPECT_EQ(v[0].weights[0].first, 0u);
    EXPECT_NEAR(v[0].weights[0].second, 2 * ia / norm, 1e-12);
    EXPECT_NEAR(v[0].weights[1].second, ib / norm, 1e-12);
    EXPECT_NEAR(v[0].norm, norm, 1e-12);
}

TEST(Tfidf, EmptyDocumentsAllowedUnlessAllEmpty) {
    const std::vector<std::string> some{"", "a"};
    const auto v = tfidf_vectors(some);
    EXPECT_TRUE(v[0].weights.empty());
    EXPECT_DOUBLE_EQ(v[0].norm, 0.0);
    EXPECT_DOUBLE_EQ(cosine(v[0], v[1]), 0.0);
    const std::vector<std::string> none{"", " !! "};
    EXPECT_THROW(tfidf_vectors(none), Error);
}

TEST(Tfidf, MatchesDenseOracleOnRandomCorpora) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        const auto docs = random_docs(rng, 2 + rng() % 20);
        bool any = false;
        for (const auto& d : docs) any |= !d.empty();
        if (!any) continue;
        const auto v = tfidf_vectors(docs);
        const auto dense = oracle::tfidf_cosine_matrix(docs);
        for (std::size_t i = 0; i < docs.size(); ++i)
            for (std::size_t j = 0; j < docs.size(); ++j) {
                const double c = cosine(v[i], v[j]);
                EXPECT_NEAR(c, dense[i][j], 1e-9);
                EXPECT_GE(c, 0.0);
                EXPECT_LE(c, 1.0);
            }
    }
}

TEST(Summary, TwoIdenticalDocs) {
    const std::vector<std::string> docs{"x y", "x y"};
    const auto s = pairwise_similarity(tfidf_vectors(docs));
    EXPECT_EQ(s.count, 1u);
    EXPECT_NEAR(s.mean, 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(s.stdev, 0.0);
    EXPECT_EQ(s.histogram[kHistogramBins - 1], 1u);
}

TEST(Summary, MutuallyDisjoint) {
    const std::vector<std::string> docs{"a", "b", "c"};
    const auto s = pairwise_similarity(tfidf_vectors(docs));
    EXPECT_EQ(s.count, 3u);
    EXPECT_DOUBLE_EQ(s.mean, 0.0);
    EXPECT_EQ(s.histogram[0], 3u);
}

TEST(Summary, TenDocsMatchPairEnumeration) {
    std::mt19937_64 rng(17);
    auto docs = random_docs(rng, 10);
    docs[0] += " anchor";
    const auto v = tfidf_vectors(docs);
    const auto dense = oracle::tfidf_cosine_matrix(docs);
    double sum = 0;
    std::vector<double> all;
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = i + 1; j < 10; ++j) {
            sum += dense[i][j];
            all.push_back(dense[i][j]);
        }
    ASSERT_EQ(all.size(), 45u);
    const auto s = pairwise_similarity(v);
    EXPECT_EQ(s.count, 45u);
    EXPECT_NEAR(s.mean, sum / 45, 1e-9);
    std::sort(all.begin(), all.end());
    EXPECT_NEAR(s.median, all[22], 1e-9);
}

TEST(Summary, StatisticsAndBins) {
    const auto s = summarize({0.0, 0.5, 1.0, 0.25});
    EXPECT_EQ(s.count, 4u);
    EXPECT_NEAR(s.mean, 0.4375, 1e-12);
    EXPECT_NEAR(s.median, 0.375, 1e-12);
    const double var = (0.4375 * 0.4375 + 0.0625 * 0.0625 + 0.5625 * 0.5625 + 0.1875 * 0.1875) / 4;
    EXPECT_NEAR(s.stdev, std::sqrt(var), 1e-12);
    EXPECT_EQ(s.histogram[0], 1u);
    EXPECT_EQ(s.histogram[5], 1u);
    EXPECT_EQ(s.histogram[10], 1u);
    EXPECT_EQ(s.histogram[19], 1u);
    std::size_t total = 0;
    for (auto c : s.histogram) total += c;
    EXPECT_EQ(total, 4u);
}

TEST(Summary, PairwiseNeedsTwo) {
    const std::vector<std::string> one{"a"};
    EXPECT_THROW(pairwise_cosines(tfidf_vectors(one)), Error);
}
