// SPDX-License-Identifier: Apache-2.0
#include "esforge/metrics.hpp"

#include "esforge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace esforge {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngram_counts(const Tokens& toks, std::size_t n) {
    NgramCounts counts;
    for (std::size_t i = 0; i + n <= toks.size(); ++i)
        ++counts[Tokens(toks.begin() + static_cast<std::ptrdiff_t>(i), toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
    return counts;
}

std::size_t clipped_overlap(const NgramCounts& cand, const NgramCounts& ref) {
    std::size_t hits = 0;
    for (const auto& [gram, c] : cand) {
        if (auto it = ref.find(gram); it != ref.end()) hits += std::min(c, it->second);
    }
    return hits;
}

PrfScore prf(std::size_t overlap, std::size_t cand_total, std::size_t ref_total) noexcept {
    PrfScore s;
    if (cand_total == 0 || ref_total == 0 || overlap == 0) return s;
    s.precision = static_cast<double>(overlap) / static_cast<double>(cand_total);
    s.recall = static_cast<double>(overlap) / static_cast<double>(ref_total);
    s.f1 = 2 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

void check_pairs(std::size_t a, std::size_t b) {
    if (a != b) throw Error("candidate and reference counts differ");
    if (a == 0) throw Error("no candidate/reference pairs");
}

}  // namespace

double corpus_bleu(std::span<const Tokens> candidates, std::span<const Tokens> references, std::size_t max_n) {
    check_pairs(candidates.size(), references.size());
    if (max_n == 0) throw Error("BLEU order must be at least 1");
    std::size_t cand_len = 0, ref_len = 0;
    std::vector<std::size_t> hits(max_n, 0), totals(max_n, 0);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        cand_len += candidates[i].size();
        ref_len += references[i].size();
        for (std::size_t n = 1; n <= max_n; ++n) {
            const auto c = ngram_counts(candidates[i], n);
            hits[n - 1] += clipped_overlap(c, ngram_counts(references[i], n));
            totals[n - 1] += candidates[i].size() >= n ? candidates[i].size() - n + 1 : 0;
        }
    }
    double log_sum = 0;
    for (std::size_t n = 0; n < max_n; ++n) {
        if (hits[n] == 0 || totals[n] == 0) return 0.0;
        log_sum += std::log(static_cast<double>(hits[n]) / static_cast<double>(totals[n]));
    }
    const double bp = cand_len >= ref_len ? 1.0 : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
    return 100.0 * bp * std::exp(log_sum / static_cast<double>(max_n));
}

PrfScore rouge2(const Tokens& candidate, const Tokens& reference) noexcept {
    if (candidate.size() < 2 || reference.size() < 2) return {};
    const auto c = ngram_counts(candidate, 2);
    const auto r = ngram_counts(reference, 2);
    return prf(clipped_overlap(c, r), candidate.size() - 1, reference.size() - 1);
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) noexcept {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

PrfScore rouge_l(const Tokens& candidate, const Tokens& reference) noexcept {
    return prf(lcs_length(candidate, reference), candidate.size(), reference.size());
}

double mean_rouge2(std::span<const Tokens> candidates, std::span<const Tokens> references) {
    check_pairs(candidates.size(), references.size());
    double sum = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) sum += rouge2(candidates[i], references[i]).f1;
    return sum / static_cast<double>(candidates.size());
}

double mean_rouge_l(std::span<const Tokens> candidates, std::span<const Tokens> references) {
    check_pairs(candidates.size(), references.size());
    double sum = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) sum += rouge_l(candidates[i], references[i]).f1;
    return sum / static_cast<double>(candidates.size());
}

double distinct_ratio(const Tokens& tokens, std::size_t n) noexcept {
    if (n == 0 || tokens.size() < n) return -1.0;
    const auto counts = ngram_counts(tokens, n);
    return static_cast<double>(counts.size()) / static_cast<double>(tokens.size() - n + 1);
}

double distinct_n_responses(std::span<const Tokens> candidates, std::size_t n, std::size_t* skipped) {
    double sum = 0;
    std::size_t used = 0, short_ones = 0;
    for (const auto& c : candidates) {
        const double r = distinct_ratio(c, n);
        if (r < 0) {
            ++short_ones;
            continue;
        }
        sum += r;
        ++used;
    }
    if (skipped) *skipped = short_ones;
    if (used == 0) throw Error("distinct-" + std::to_string(n) + ": every response is shorter than n");
    return 100.0 * sum / static_cast<double>(used);
}

KappaResult fleiss_kappa(const std::vector<std::vector<std::string>>& ratings) {
    if (ratings.empty()) throw Error("fleiss kappa needs at least one item");
    const std::size_t raters = ratings.front().size();
    if (raters < 2) throw Error("fleiss kappa needs at least two raters per item");
    std::map<std::string, std::size_t> category_totals;
    double p_bar = 0;
    for (const auto& item : ratings) {
        if (item.size() != raters) throw Error("every item needs the same number of raters");
        std::map<std::string, std::size_t> counts;
        for (const auto& label : item) ++counts[label];
        double agree = 0;
        for (const auto& [label, c] : counts) {
            agree += static_cast<double>(c) * static_cast<double>(c);
            category_totals[label] += c;
        }
        const double r = static_cast<double>(raters);
        p_bar += (agree - r) / (r * (r - 1));
    }
    const double items = static_cast<double>(ratings.size());
    p_bar /= items;
    double p_e = 0;
    for (const auto& [label, c] : category_totals) {
        const double p = static_cast<double>(c) / (items * static_cast<double>(raters));
        p_e += p * p;
    }
    if (std::abs(1.0 - p_e) < 1e-12) return {1.0, true};
    return {(p_bar - p_e) / (1.0 - p_e), false};
}

std::vector<std::vector<std::string>> parse_ratings_csv(std::string_view text) {
    std::map<std::string, std::map<std::string, std::string>> by_item;
    std::istringstream in{std::string(text)};
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto t = trim(line);
        if (t.empty()) continue;
        if (line_no == 1 && t.rfind("item_id", 0) == 0) continue;
        std::vector<std::string> fields;
        std::istringstream row(t);
        for (std::string f; std::getline(row, f, ',');) fields.push_back(trim(f));
        if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty())
            throw ParseError("expected item_id,rater_id,label", line_no);
        if (!by_item[fields[0]].emplace(fields[1], fields[2]).second)
            throw ParseError("duplicate rating for item " + fields[0] + " by rater " + fields[1], line_no);
    }
    std::vector<std::vector<std::string>> matrix;
    for (const auto& [item, raters] : by_item) {
        if (!matrix.empty() && raters.size() != matrix.front().size())
            throw ParseError("item " + item + " has a different number of raters");
        auto& row = matrix.emplace_back();
        for (const auto& [rater, label] : raters) row.push_back(label);
    }
    return matrix;
}

}  // namespace esforge
