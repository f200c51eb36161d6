// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "esforge/text.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace esforge {

/// Sparse L2-normalized TF-IDF vector. `weights` is sorted by term id; `norm`
/// is the L2 norm before normalization (0 for a document with no terms).
struct TfidfVector {
    std::vector<std::pair<std::uint32_t, double>> weights;
    double norm = 0.0;
};

/// tf = raw count, idf(t) = ln((1 + N) / (1 + df(t))) + 1, weight = tf * idf,
/// then L2 normalization. Vocabulary comes from `docs` only. Throws Error if
/// every document is empty after tokenization.
std::vector<TfidfVector> tfidf_vectors(std::span<const std::string> docs, const Tokenizer& tokenize = default_tokenizer());

/// Dot product of two normalized vectors, clamped to [0, 1].
double cosine(const TfidfVector& a, const TfidfVector& b) noexcept;

inline constexpr std::size_t kHistogramBins = 20;

struct SimilaritySummary {
    std::size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    /// Population standard deviation.
    double stdev = 0.0;
    std::array<std::size_t, kHistogramBins> histogram{};
};

/// Summary of a list of values in [0, 1]. 1.0 falls into the last bin.
SimilaritySummary summarize(std::vector<double> values);

/// Cosine over all unordered distinct pairs. Needs at least two vectors.
std::vector<double> pairwise_cosines(std::span<const TfidfVector> vectors);
SimilaritySummary pairwise_similarity(std::span<const TfidfVector> vectors);

}  // namespace esforge
