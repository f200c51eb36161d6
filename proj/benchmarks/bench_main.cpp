// SPDX-License-Identifier: Apache-2.0
#include "esforge/counselor.hpp"
#include "esforge/metrics.hpp"
#include "esforge/tfidf.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace esforge;

namespace {

std::vector<std::string> random_docs(std::size_t n, std::size_t len, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::string> docs(n);
    for (auto& d : docs)
        for (std::size_t k = 0; k < len; ++k) d += "w" + std::to_string(rng() % 2000) + " ";
    return docs;
}

void BM_TfidfPairwise(benchmark::State& state) {
    const auto docs = random_docs(static_cast<std::size_t>(state.range(0)), 120, 1);
    for (auto _ : state) {
        const auto vecs = tfidf_vectors(docs);
        benchmark::DoNotOptimize(pairwise_similarity(vecs));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TfidfPairwise)->RangeMultiplier(2)->Range(64, 512)->Complexity();

void BM_CorpusBleu4(benchmark::State& state) {
    const auto c = random_docs(static_cast<std::size_t>(state.range(0)), 25, 2);
    const auto r = random_docs(static_cast<std::size_t>(state.range(0)), 25, 3);
    std::vector<Tokens> cands, refs;
    for (const auto& d : c) cands.push_back(default_tokenize(d));
    for (const auto& d : r) refs.push_back(default_tokenize(d));
    for (auto _ : state) benchmark::DoNotOptimize(corpus_bleu(cands, refs, 4));
}
BENCHMARK(BM_CorpusBleu4)->Arg(1000)->Arg(10000);

void BM_FitTransitionModel(benchmark::State& state) {
    std::mt19937_64 rng(4);
    std::vector<std::vector<Strategy>> seqs(static_cast<std::size_t>(state.range(0)));
    for (auto& s : seqs)
        for (int k = 0; k < 12; ++k) s.push_back(kAllStrategies[rng() % kStrategyCount]);
    for (auto _ : state) benchmark::DoNotOptimize(fit_transition_model(std::span<const std::vector<Strategy>>(seqs)));
}
BENCHMARK(BM_FitTransitionModel)->Arg(1300)->Arg(20000);

}  // namespace
BENCHMARK_MAIN();
