// SPDX-License-Identifier: Apache-2.0
#include "esforge/tfidf.hpp"

#include "esforge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

namespace esforge {

std::vector<TfidfVector> tfidf_vectors(std::span<const std::string> docs, const Tokenizer& tokenize) {
    std::unordered_map<std::string, std::uint32_t> vocab;
    std::vector<std::map<std::uint32_t, std::size_t>> tf(docs.size());
    std::vector<std::size_t> df;
    bool any = false;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        for (auto& tok : tokenize(docs[i])) {
            auto [it, inserted] = vocab.try_emplace(std::move(tok), static_cast<std::uint32_t>(vocab.size()));
            if (inserted) df.push_back(0);
            if (tf[i][it->second]++ == 0) ++df[it->second];
            any = true;
        }
    }
    if (!any) throw Error("tf-idf needs at least one non-empty document");

    const double n = static_cast<double>(docs.size());
    std::vector<TfidfVector> out(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        auto& v = out[i];
        v.weights.reserve(tf[i].size());
        double sq = 0;
        for (const auto& [term, count] : tf[i]) {
            const double idf = std::log((1.0 + n) / (1.0 + static_cast<double>(df[term]))) + 1.0;
            const double w = static_cast<double>(count) * idf;
            v.weights.emplace_back(term, w);
            sq += w * w;
        }
        v.norm = std::sqrt(sq);
        if (v.norm > 0) {
            for (auto& [term, w] : v.weights) w /= v.norm;
        }
    }
    return out;
}

double cosine(const TfidfVector& a, const TfidfVector& b) noexcept {
    double dot = 0;
    auto ia = a.weights.begin(), ib = b.weights.begin();
    while (ia != a.weights.end() && ib != b.weights.end()) {
        if (ia->first < ib->first) ++ia;
        else if (ib->first < ia->first) ++ib;
        else dot += (ia++)->second * (ib++)->second;
    }
    return std::clamp(dot, 0.0, 1.0);
}

SimilaritySummary summarize(std::vector<double> values) {
    SimilaritySummary s;
    s.count = values.size();
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    const std::size_t mid = values.size() / 2;
    s.median = values.size() % 2 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
    double var = 0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.stdev = std::sqrt(var / n);
    for (double v : values) {
        const auto bin = static_cast<std::size_t>(std::clamp(v, 0.0, 1.0) * kHistogramBins);
        ++s.histogram[std::min(bin, kHistogramBins - 1)];
    }
    return s;
}

std::vector<double> pairwise_cosines(std::span<const TfidfVector> vectors) {
    if (vectors.size() < 2) throw Error("pairwise similarity needs at least two documents");
    std::vector<double> out;
    out.reserve(vectors.size() * (vectors.size() - 1) / 2);
    for (std::size_t i = 0; i < vectors.size(); ++i)
        for (std::size_t j = i + 1; j < vectors.size(); ++j) out.push_back(cosine(vectors[i], vectors[j]));
    return out;
}

SimilaritySummary pairwise_similarity(std::span<const TfidfVector> vectors) {
    return summarize(pairwise_cosines(vectors));
}

}  // namespace esforge
