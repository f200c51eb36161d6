// SPDX-License-Identifier: Apache-2.0
#include "esforge/counselor.hpp"

#include "esforge/corpus_io.hpp"
#include "esforge/errors.hpp"
#include "esforge/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

namespace esforge {

namespace {

using nlohmann::json;

bool is_alnum(char c) noexcept { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string strip_decorations(std::string_view text) {
    std::string s = trim(text);
    // list markers: "3.", "3)", "-", "*", "(c)"
    std::size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')' || s[i] == ':')) s = trim(std::string_view(s).substr(i + 1));
    while (!s.empty() && (s.front() == '-' || s.front() == '*' || s.front() == '#')) s = trim(std::string_view(s).substr(1));
    auto is_wrapper = [](char c) { return c == '"' || c == '\'' || c == '`' || c == '*' || c == '[' || c == ']'; };
    while (!s.empty() && is_wrapper(s.front())) s.erase(s.begin());
    while (!s.empty() && (is_wrapper(s.back()) || s.back() == '.' || s.back() == '!' || s.back() == ',' ||
                          s.back() == ';' || s.back() == ':'))
        s.pop_back();
    return trim(s);
}

// Earliest occurrence starting on a word boundary; longer match wins at equal position.
std::optional<Strategy> find_embedded_label(const std::string& lower) {
    std::size_t best_pos = std::numeric_limits<std::size_t>::max();
    std::size_t best_len = 0;
    std::optional<Strategy> best;
    auto consider = [&](std::string_view needle, Strategy s) {
        for (auto pos = lower.find(needle); pos != std::string::npos; pos = lower.find(needle, pos + 1)) {
            if (pos > 0 && is_alnum(lower[pos - 1])) continue;
            if (pos < best_pos || (pos == best_pos && needle.size() > best_len)) {
                best_pos = pos;
                best_len = needle.size();
                best = s;
            }
            break;
        }
    };
    for (Strategy s : kAllStrategies) consider(to_lower(to_string(s)), s);
    for (const auto& alias : strategy_aliases()) consider(alias.text, alias.strategy);
    return best;
}

std::optional<Strategy> match_strategy_label(std::string_view text) {
    const auto stripped = strip_decorations(text);
    if (auto exact = parse_strategy(stripped)) return exact;
    return find_embedded_label(to_lower(text));
}

StrategyRow normalized(const CountRow& counts) {
    StrategyRow row{};
    const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
    if (total == 0) return row;
    for (std::size_t i = 0; i < kStrategyCount; ++i) row[i] = static_cast<double>(counts[i]) / total;
    return row;
}

json row_json(const StrategyRow& row) { return json(std::vector<double>(row.begin(), row.end())); }
json count_json(const CountRow& row) { return json(std::vector<std::uint64_t>(row.begin(), row.end())); }

template <typename Row>
Row read_row(const json& j, const std::array<std::size_t, kStrategyCount>& perm, const char* what) {
    if (!j.is_array() || j.size() != kStrategyCount)
        throw ParseError(std::string("transition model: ") + what + " must have 8 entries");
    Row row{};
    for (std::size_t i = 0; i < kStrategyCount; ++i) row[perm[i]] = j[i].get<typename Row::value_type>();
    return row;
}

void check_probability_row(const StrategyRow& row, const char* what) {
    double sum = 0;
    for (double p : row) {
        if (!(p >= 0)) throw ParseError(std::string("transition model: negative entry in ") + what);
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw ParseError(std::string("transition model: ") + what + " does not sum to 1");
}

}  // namespace

Strategy normalize_strategy_label(std::string_view text) {
    return match_strategy_label(text).value_or(Strategy::Others);
}

std::size_t progress_bucket(std::size_t k, std::size_t total) noexcept {
    if (k == 0 || total == 0) return 0;
    return std::min<std::size_t>(kProgressBuckets - 1, kProgressBuckets * (k - 1) / total);
}

std::vector<Strategy> strategy_sequence(const Dialogue& d) {
    std::vector<Strategy> seq;
    for (const auto& u : d.utterances) {
        if (u.speaker == Speaker::Supporter && u.strategy) seq.push_back(*u.strategy);
    }
    return seq;
}

TransitionModel fit_transition_model(std::span<const std::vector<Strategy>> sequences) {
    TransitionModel m;
    CountRow marginal_counts{};
    bool any = false;
    for (const auto& seq : sequences) {
        if (seq.empty()) continue;
        any = true;
        ++m.prior_counts[index_of(seq.front())];
        for (Strategy s : seq) ++marginal_counts[index_of(s)];
        for (std::size_t k = 1; k < seq.size(); ++k) {
            const auto b = progress_bucket(k, seq.size());
            ++m.counts[b][index_of(seq[k - 1])][index_of(seq[k])];
        }
    }
    if (!any) throw Error("cannot fit a transition model: no labeled supporter turns");
    m.marginal = normalized(marginal_counts);
    m.prior = normalized(m.prior_counts);
    for (std::size_t b = 0; b < kProgressBuckets; ++b) {
        for (std::size_t p = 0; p < kStrategyCount; ++p) {
            const auto& c = m.counts[b][p];
            const bool empty = std::all_of(c.begin(), c.end(), [](std::uint64_t n) { return n == 0; });
            m.fallback[b][p] = empty;
            m.transitions[b][p] = empty ? m.marginal : normalized(c);
        }
    }
    return m;
}

TransitionModel fit_transition_model(std::span<const Dialogue> corpus) {
    std::vector<std::vector<Strategy>> sequences;
    sequences.reserve(corpus.size());
    for (const auto& d : corpus) sequences.push_back(strategy_sequence(d));
    return fit_transition_model(std::span<const std::vector<Strategy>>(sequences));
}

nlohmann::json TransitionModel::to_json() const {
    json labels = json::array();
    for (Strategy s : kAllStrategies) labels.push_back(std::string(to_string(s)));
    json trans = json::array(), cnt = json::array(), flags = json::array();
    for (std::size_t b = 0; b < kProgressBuckets; ++b) {
        json tb = json::array(), cb = json::array(), fb = json::array();
        for (std::size_t p = 0; p < kStrategyCount; ++p) {
            tb.push_back(row_json(transitions[b][p]));
            cb.push_back(count_json(counts[b][p]));
            fb.push_back(fallback[b][p]);
        }
        trans.push_back(std::move(tb));
        cnt.push_back(std::move(cb));
        flags.push_back(std::move(fb));
    }
    return json{{"labels", std::move(labels)},
                {"prior", row_json(prior)},
                {"transitions", std::move(trans)},
                {"marginal", row_json(marginal)},
                {"fallback", std::move(flags)},
                {"counts", json{{"prior", count_json(prior_counts)}, {"transitions", std::move(cnt)}}}};
}

TransitionModel TransitionModel::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("prior") || !j.contains("transitions"))
        throw ParseError("transition model: expected an object with prior and transitions");
    std::array<std::size_t, kStrategyCount> perm{};
    for (std::size_t i = 0; i < kStrategyCount; ++i) perm[i] = i;
    try {
        if (j.contains("labels")) {
            const auto& labels = j.at("labels");
            if (!labels.is_array() || labels.size() != kStrategyCount)
                throw ParseError("transition model: labels must list the 8 strategies");
            std::array<bool, kStrategyCount> seen{};
            for (std::size_t i = 0; i < kStrategyCount; ++i) {
                const auto idx = index_of(strategy_from_string(labels[i].get<std::string>()));
                if (seen[idx]) throw ParseError("transition model: duplicate label");
                seen[idx] = true;
                perm[i] = idx;
            }
        }
        TransitionModel m;
        m.prior = read_row<StrategyRow>(j.at("prior"), perm, "prior");
        check_probability_row(m.prior, "prior");
        const auto& t = j.at("transitions");
        if (!t.is_array() || t.size() != kProgressBuckets)
            throw ParseError("transition model: transitions must have 6 buckets");
        for (std::size_t b = 0; b < kProgressBuckets; ++b) {
            if (!t[b].is_array() || t[b].size() != kStrategyCount)
                throw ParseError("transition model: each bucket must have 8 rows");
            for (std::size_t p = 0; p < kStrategyCount; ++p) {
                m.transitions[b][perm[p]] = read_row<StrategyRow>(t[b][p], perm, "transition row");
                check_probability_row(m.transitions[b][perm[p]], "transition row");
            }
        }
        m.marginal = j.contains("marginal") ? read_row<StrategyRow>(j.at("marginal"), perm, "marginal") : m.prior;
        if (j.contains("fallback")) {
            for (std::size_t b = 0; b < kProgressBuckets; ++b)
                for (std::size_t p = 0; p < kStrategyCount; ++p)
                    m.fallback[b][perm[p]] = j.at("fallback").at(b).at(p).get<bool>();
        }
        if (j.contains("counts")) {
            const auto& c = j.at("counts");
            m.prior_counts = read_row<CountRow>(c.at("prior"), perm, "prior counts");
            for (std::size_t b = 0; b < kProgressBuckets; ++b)
                for (std::size_t p = 0; p < kStrategyCount; ++p)
                    m.counts[b][perm[p]] = read_row<CountRow>(c.at("transitions").at(b).at(p), perm, "count row");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("transition model: ") + e.what());
    }
}

void TransitionModel::save(const std::filesystem::path& path) const { write_text_file(path, to_json().dump(2) + "\n"); }

TransitionModel TransitionModel::load(const std::filesystem::path& path) {
    const auto text = read_text_file(path);
    auto j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError("transition model: malformed JSON in " + path.string());
    return from_json(j);
}

Strategy argmax_strategy(const StrategyRow& row) noexcept {
    std::size_t best = 0;
    for (std::size_t i = 1; i < kStrategyCount; ++i) {
        if (row[i] > row[best]) best = i;
    }
    return strategy_at(best);
}

Strategy sample_strategy(const StrategyRow& row, std::mt19937_64& rng) {
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    if (!(total > 0)) throw Error("cannot sample from an all-zero strategy row");
    std::uniform_real_distribution<double> u(0.0, total);
    const double x = u(rng);
    double acc = 0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < kStrategyCount; ++i) {
        if (row[i] <= 0) continue;
        last_positive = i;
        acc += row[i];
        if (x < acc) return strategy_at(i);
    }
    return strategy_at(last_positive);
}

std::string_view to_string(CounselorMode m) noexcept {
    switch (m) {
        case CounselorMode::Prompted: return "prompted";
        case CounselorMode::Statistical: return "statistical";
        case CounselorMode::Hybrid: return "hybrid";
    }
    return "statistical";
}

CounselorMode parse_counselor_mode(std::string_view text) {
    const auto key = to_lower(trim(text));
    if (key == "prompted") return CounselorMode::Prompted;
    if (key == "statistical") return CounselorMode::Statistical;
    if (key == "hybrid") return CounselorMode::Hybrid;
    throw ConfigError("unknown counselor mode \"" + std::string(text) + "\"");
}

Counselor::Counselor(CounselorMode mode, ChatBackend* backend, std::optional<TransitionModel> model,
                     PromptTemplates templates, CounselorOptions options)
    : mode_(mode), backend_(backend), model_(std::move(model)), templates_(std::move(templates)),
      options_(options) {
    if (mode_ == CounselorMode::Statistical && !model_) throw ConfigError("statistical counselor needs a transition model");
    if (mode_ != CounselorMode::Statistical && !backend_) throw ConfigError("prompted counselor needs a backend");
    if (options_.expected_length == 0) throw ConfigError("counselor expected_length must be positive");
}

ChatRequest Counselor::prompt(std::span<const Utterance> history) const {
    ChatRequest req;
    req.role_tag = "counselor";
    req.system_prompt = render_template(templates_.counselor, {{"history", render_history(history_window(history))},
                                                               {"strategy_list", render_strategy_list()}});
    req.messages.push_back({ChatRole::User, "Name the strategy for the next supporter reply."});
    req.temperature = options_.params.temperature;
    req.max_tokens = options_.params.max_tokens;
    return req;
}

Strategy Counselor::statistical_choice(std::span<const Utterance> history, std::mt19937_64& rng) const {
    if (!model_) throw Error("no transition model loaded");
    std::size_t completed = 0;
    std::optional<Strategy> previous;
    for (const auto& u : history) {
        if (u.speaker != Speaker::Supporter) continue;
        ++completed;
        if (u.strategy) previous = u.strategy;
    }
    const StrategyRow& row =
        previous ? model_->row(progress_bucket(completed, options_.expected_length), *previous) : model_->prior;
    return options_.sample ? sample_strategy(row, rng) : argmax_strategy(row);
}

StrategyDecision Counselor::decide(std::span<const Utterance> history, std::mt19937_64& rng) const {
    if (history.empty() || history.back().speaker != Speaker::Seeker)
        throw Error("counselor history must end with a seeker utterance");
    if (mode_ == CounselorMode::Statistical) return {statistical_choice(history, rng), "statistical", {}};

    std::string raw;
    try {
        raw = backend_->complete(prompt(history));
    } catch (const TransportError&) {
        if (!model_) throw;
        return {statistical_choice(history, rng), "fallback", {}};
    } catch (const ProtocolError&) {
        if (!model_) throw;
        return {statistical_choice(history, rng), "fallback", {}};
    }
    auto matched = match_strategy_label(raw);
    if (!matched && mode_ == CounselorMode::Hybrid && model_)
        return {statistical_choice(history, rng), "fallback", std::move(raw)};
    return {matched.value_or(Strategy::Others), "prompted", std::move(raw)};
}

}  // namespace esforge
