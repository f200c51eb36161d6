// SPDX-License-Identifier: Apache-2.0
#include "esforge/analysis.hpp"

#include "esforge/corpus_io.hpp"
#include "esforge/errors.hpp"

#include <set>
#include <sstream>

namespace esforge {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(10);
    out << v;
    return out.str();
}

}  // namespace

nlohmann::json StatsReport::to_json() const {
    auto speaker = [](const SpeakerStats& s) {
        return json{{"utterances", s.utterances},
                    {"avg_utterances_per_dialogue", s.avg_utterances_per_dialogue},
                    {"avg_utterance_length", s.avg_utterance_length}};
    };
    return {{"dialogues", dialogues},
            {"utterances", utterances},
            {"avg_dialogue_length", avg_dialogue_length},
            {"avg_utterance_length", avg_utterance_length},
            {"seeker", speaker(seeker)},
            {"supporter", speaker(supporter)}};
}

StatsReport corpus_statistics(std::span<const Dialogue> corpus, const Tokenizer& tokenize) {
    if (corpus.empty()) throw Error("corpus statistics need at least one dialogue");
    StatsReport r;
    r.dialogues = corpus.size();
    std::size_t tokens = 0, seeker_tokens = 0, supporter_tokens = 0;
    for (const auto& d : corpus) {
        for (const auto& u : d.utterances) {
            const auto n = tokenize(u.text).size();
            tokens += n;
            if (u.speaker == Speaker::Seeker) {
                ++r.seeker.utterances;
                seeker_tokens += n;
            } else {
                ++r.supporter.utterances;
                supporter_tokens += n;
            }
        }
    }
    r.utterances = r.seeker.utterances + r.supporter.utterances;
    auto ratio = [](std::size_t a, std::size_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0; };
    r.avg_dialogue_length = ratio(r.utterances, r.dialogues);
    r.avg_utterance_length = ratio(tokens, r.utterances);
    r.seeker.avg_utterances_per_dialogue = ratio(r.seeker.utterances, r.dialogues);
    r.seeker.avg_utterance_length = ratio(seeker_tokens, r.seeker.utterances);
    r.supporter.avg_utterances_per_dialogue = ratio(r.supporter.utterances, r.dialogues);
    r.supporter.avg_utterance_length = ratio(supporter_tokens, r.supporter.utterances);
    return r;
}

std::vector<GroupSimilarity> pairwise_similarity(std::span<const Dialogue> corpus, Grouping grouping,
                                                 std::vector<std::string>* skipped, const Tokenizer& tokenize) {
    std::vector<std::string> docs;
    std::map<std::string, std::vector<std::size_t>> groups;
    std::vector<std::string> order;
    auto add = [&](const std::string& group, std::string text) {
        auto [it, inserted] = groups.try_emplace(group);
        if (inserted) order.push_back(group);
        it->second.push_back(docs.size());
        docs.push_back(std::move(text));
    };
    switch (grouping) {
        case Grouping::Global:
            for (const auto& d : corpus) add("all", plain_text(d));
            break;
        case Grouping::ByProblemType:
            for (const auto& d : corpus) add(d.problem_type.name, plain_text(d));
            std::sort(order.begin(), order.end());
            break;
        case Grouping::ByStrategy:
            for (const auto& d : corpus)
                for (const auto& u : d.utterances)
                    if (u.speaker == Speaker::Supporter && u.strategy) add(std::string(to_string(*u.strategy)), u.text);
            std::sort(order.begin(), order.end(), [](const std::string& a, const std::string& b) {
                return index_of(strategy_from_string(a)) < index_of(strategy_from_string(b));
            });
            break;
    }
    std::vector<GroupSimilarity> out;
    if (docs.empty()) return out;
    const auto vectors = tfidf_vectors(docs, tokenize);
    for (const auto& name : order) {
        const auto& members = groups.at(name);
        if (members.size() < 2) {
            if (skipped) skipped->push_back(name);
            continue;
        }
        std::vector<TfidfVector> group;
        group.reserve(members.size());
        for (auto i : members) group.push_back(vectors[i]);
        out.push_back({name, members.size(), pairwise_similarity(std::span<const TfidfVector>(group))});
    }
    return out;
}

double distinct_n_corpus(std::span<const std::string> docs, std::size_t n, const Tokenizer& tokenize) {
    if (n == 0) throw Error("distinct-n needs n >= 1");
    std::set<std::vector<std::string>> distinct;
    std::size_t total = 0;
    for (const auto& doc : docs) {
        const auto toks = tokenize(doc);
        if (toks.size() < n) continue;
        for (std::size_t i = 0; i + n <= toks.size(); ++i) {
            distinct.emplace(toks.begin() + static_cast<std::ptrdiff_t>(i),
                             toks.begin() + static_cast<std::ptrdiff_t>(i + n));
            ++total;
        }
    }
    if (total == 0) throw Error("distinct-" + std::to_string(n) + ": no n-grams in corpus");
    return static_cast<double>(distinct.size()) / static_cast<double>(total);
}

StrategyRow strategy_distribution(std::span<const Dialogue> corpus) {
    CountRow counts{};
    std::uint64_t total = 0;
    for (const auto& d : corpus)
        for (Strategy s : strategy_sequence(d)) {
            ++counts[index_of(s)];
            ++total;
        }
    if (total == 0) throw Error("strategy distribution: no labeled supporter turns");
    StrategyRow row{};
    for (std::size_t i = 0; i < kStrategyCount; ++i) row[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    return row;
}

std::string TransitionTable::to_csv() const {
    std::string out = "bucket";
    for (Strategy s : kAllStrategies) out += "," + std::string(to_string(s));
    out += ",total,empty\n";
    for (std::size_t b = 0; b < kProgressBuckets; ++b) {
        out += std::to_string(b);
        for (double p : rows[b]) out += "," + fmt(p);
        out += "," + std::to_string(totals[b]) + "," + (empty[b] ? "1" : "0") + "\n";
    }
    return out;
}

TransitionTable strategy_transition(std::span<const Dialogue> corpus) {
    std::array<CountRow, kProgressBuckets> counts{};
    TransitionTable t;
    for (const auto& d : corpus) {
        const auto seq = strategy_sequence(d);
        for (std::size_t k = 1; k <= seq.size(); ++k) {
            const auto b = progress_bucket(k, seq.size());
            ++counts[b][index_of(seq[k - 1])];
            ++t.totals[b];
        }
    }
    for (std::size_t b = 0; b < kProgressBuckets; ++b) {
        t.empty[b] = t.totals[b] == 0;
        if (t.empty[b]) continue;
        for (std::size_t i = 0; i < kStrategyCount; ++i)
            t.rows[b][i] = static_cast<double>(counts[b][i]) / static_cast<double>(t.totals[b]);
    }
    return t;
}

std::map<std::size_t, std::size_t> unique_strategy_histogram(std::span<const Dialogue> corpus) {
    std::map<std::size_t, std::size_t> hist;
    for (const auto& d : corpus) {
        const auto seq = strategy_sequence(d);
        ++hist[std::set<Strategy>(seq.begin(), seq.end()).size()];
    }
    return hist;
}

ScenarioSimilarity scenario_dialogue_similarity(std::span<const Dialogue> corpus, const Tokenizer& tokenize) {
    ScenarioSimilarity out;
    std::vector<std::string> docs;
    for (const auto& d : corpus) {
        if (trim(d.scenario).empty()) {
            out.skipped.push_back(d.id);
            continue;
        }
        out.ids.push_back(d.id);
        docs.push_back(d.scenario);
        docs.push_back(plain_text(d));
    }
    if (docs.empty()) return out;
    const auto vectors = tfidf_vectors(docs, tokenize);
    for (std::size_t i = 0; i + 1 < vectors.size(); i += 2) out.values.push_back(cosine(vectors[i], vectors[i + 1]));
    out.summary = summarize(out.values);
    return out;
}

nlohmann::json to_json(const SimilaritySummary& s) {
    return {{"count", s.count},
            {"mean", s.mean},
            {"median", s.median},
            {"stdev", s.stdev},
            {"histogram", std::vector<std::size_t>(s.histogram.begin(), s.histogram.end())}};
}

std::string histogram_csv(const SimilaritySummary& s) {
    std::string out = "bin_low,bin_high,count\n";
    for (std::size_t i = 0; i < kHistogramBins; ++i) {
        out += fmt(static_cast<double>(i) / kHistogramBins) + "," + fmt(static_cast<double>(i + 1) / kHistogramBins) +
               "," + std::to_string(s.histogram[i]) + "\n";
    }
    return out;
}

std::vector<std::filesystem::path> write_analysis_reports(std::span<const Dialogue> input,
                                                          const std::filesystem::path& dir,
                                                          const Tokenizer& tokenize) {
    std::vector<Dialogue> corpus;
    corpus.reserve(input.size());
    for (const auto& d : input) corpus.push_back(merge_consecutive(d));

    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::string& name, const std::string& content) {
        written.push_back(dir / name);
        write_text_file(written.back(), content);
    };
    json report = json::object();
    json warnings = json::array();
    auto attempt = [&](const char* what, auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            warnings.push_back(std::string(what) + ": " + e.what());
        }
    };

    attempt("statistics", [&] { report["statistics"] = corpus_statistics(corpus, tokenize).to_json(); });

    attempt("similarity", [&] {
        json sim = json::object();
        for (auto [grouping, key] : {std::pair{Grouping::Global, "global"}, std::pair{Grouping::ByProblemType, "by_problem_type"},
                                     std::pair{Grouping::ByStrategy, "by_strategy"}}) {
            std::vector<std::string> skipped;
            const auto groups = pairwise_similarity(corpus, grouping, &skipped, tokenize);
            json g = json::array();
            for (const auto& gs : groups) g.push_back({{"group", gs.group}, {"members", gs.members}, {"summary", to_json(gs.summary)}});
            sim[key] = {{"groups", std::move(g)}, {"skipped", skipped}};
            for (const auto& s : skipped) warnings.push_back(std::string(key) + ": group '" + s + "' has fewer than two members");
            if (grouping == Grouping::Global && !groups.empty()) emit("similarity_histogram.csv", histogram_csv(groups.front().summary));
        }
        report["similarity"] = std::move(sim);
    });

    attempt("scenario_dialogue_similarity", [&] {
        const auto s = scenario_dialogue_similarity(corpus, tokenize);
        report["scenario_dialogue_similarity"] = {{"summary", to_json(s.summary)}, {"skipped", s.skipped}};
        for (const auto& id : s.skipped) warnings.push_back("scenario_dialogue_similarity: " + id + " has no scenario");
        emit("scenario_similarity_histogram.csv", histogram_csv(s.summary));
    });

    attempt("distinct_n", [&] {
        std::vector<std::string> docs;
        for (const auto& d : corpus) docs.push_back(plain_text(d));
        json dn = json::object();
        for (std::size_t n = 1; n <= 3; ++n) {
            attempt("distinct_n", [&] { dn["distinct-" + std::to_string(n)] = 100.0 * distinct_n_corpus(docs, n, tokenize); });
        }
        report["distinct_n"] = std::move(dn);
    });

    attempt("strategy_distribution", [&] {
        const auto dist = strategy_distribution(corpus);
        std::string csv = "strategy,proportion\n";
        json j = json::object();
        for (std::size_t i = 0; i < kStrategyCount; ++i) {
            csv += std::string(to_string(strategy_at(i))) + "," + fmt(dist[i]) + "\n";
            j[std::string(to_string(strategy_at(i)))] = dist[i];
        }
        report["strategy_distribution"] = std::move(j);
        emit("strategy_distribution.csv", csv);
    });

    {
        const auto t = strategy_transition(corpus);
        emit("strategy_transition.csv", t.to_csv());
        const auto q = index_of(Strategy::Question), ps = index_of(Strategy::ProvidingSuggestions);
        const auto last = kProgressBuckets - 1;
        report["transition_shape"] = {{"question_first_bucket", t.rows[0][q]},
                                      {"question_last_bucket", t.rows[last][q]},
                                      {"suggestions_first_bucket", t.rows[0][ps]},
                                      {"suggestions_last_bucket", t.rows[last][ps]},
                                      {"holds", t.rows[0][q] > t.rows[last][q] && t.rows[last][ps] > t.rows[0][ps]}};
    }

    {
        const auto hist = unique_strategy_histogram(corpus);
        std::string csv = "distinct_strategies,dialogues\n";
        json j = json::object();
        for (const auto& [k, count] : hist) {
            csv += std::to_string(k) + "," + std::to_string(count) + "\n";
            j[std::to_string(k)] = count;
        }
        report["unique_strategy_histogram"] = std::move(j);
        emit("unique_strategies.csv", csv);
    }

    report["warnings"] = std::move(warnings);
    emit("report.json", report.dump(2, ' ', false, json::error_handler_t::replace) + "\n");
    return written;
}

}  // namespace esforge
