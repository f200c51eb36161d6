// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "esforge/text.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace esforge {

using Tokens = std::vector<std::string>;

/// Corpus BLEU with uniform weights over 1..max_n, clipped n-gram counts
/// aggregated over the corpus, and the standard brevity penalty. No smoothing:
/// any zero precision yields 0. Result is scaled by 100. Throws Error on a size
/// mismatch or an empty corpus.
double corpus_bleu(std::span<const Tokens> candidates, std::span<const Tokens> references, std::size_t max_n);

struct PrfScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Clipped bigram overlap.
PrfScore rouge2(const Tokens& candidate, const Tokens& reference) noexcept;

/// Longest-common-subsequence based.
PrfScore rouge_l(const Tokens& candidate, const Tokens& reference) noexcept;

std::size_t lcs_length(const Tokens& a, const Tokens& b) noexcept;

/// Mean F1 over pairs, in [0, 1].
double mean_rouge2(std::span<const Tokens> candidates, std::span<const Tokens> references);
double mean_rouge_l(std::span<const Tokens> candidates, std::span<const Tokens> references);

/// Distinct n-grams over total n-grams of one sequence; -1 when it is shorter than n.
double distinct_ratio(const Tokens& tokens, std::size_t n) noexcept;

/// Macro-average of per-response distinct-n ratios, scaled by 100. Responses
/// shorter than n are skipped; throws Error if all are.
double distinct_n_responses(std::span<const Tokens> candidates, std::size_t n, std::size_t* skipped = nullptr);

struct KappaResult {
    double value = 0.0;
    /// Set when expected agreement is 1 and kappa is undefined; value is 1.0.
    bool degenerate = false;
};

/// Fleiss' kappa over an item x rater matrix of categorical labels. Every item
/// needs the same number of raters, at least two.
KappaResult fleiss_kappa(const std::vector<std::vector<std::string>>& ratings);

/// Item x rater matrix from `item_id,rater_id,label` CSV rows (optional header
/// starting with "item_id"). Items and raters come out in sorted order. Throws
/// ParseError on malformed rows or when items have different rater counts.
std::vector<std::vector<std::string>> parse_ratings_csv(std::string_view text);

}  // namespace esforge
