// SPDX-License-Identifier: Apache-2.0
#include "esforge/corpus_io.hpp"
#include "esforge/errors.hpp"
#include "esforge/service.hpp"

#include "support.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <set>
#include <sstream>
#include <thread>

using namespace esforge;
using nlohmann::json;

namespace {

TransitionModel fixed_model(Strategy first, Strategy then) {
    TransitionModel m;
    m.prior[index_of(first)] = 1.0;
    for (auto& b : m.transitions)
        for (auto& row : b) {
            row.fill(0.0);
            row[index_of(then)] = 1.0;
        }
    m.marginal = m.prior;
    return m;
}

struct Fixture {
    test::FunctionBackend alpha{[](const ChatRequest&) { return "Alpha hears you. One. Two. Three."; }};
    test::FunctionBackend beta{[](const ChatRequest&) { return "Beta is here for you."; }};
    test::FailingBackend broken;
    std::unique_ptr<SessionService> service;

    explicit Fixture(std::uint64_t seed = 1, std::filesystem::path log = {}) {
        auto counselor = std::make_shared<const Counselor>(
            CounselorMode::Statistical, nullptr, fixed_model(Strategy::Question, Strategy::ReflectionOfFeelings));
        ServiceOptions o;
        o.seed = seed;
        o.session_log = std::move(log);
        service = std::make_unique<SessionService>(
            std::map<std::string, ModelBinding>{
                {"alpha", {&alpha, counselor}}, {"beta", {&beta, counselor}}, {"broken", {&broken, counselor}}},
            o);
    }

    std::string create(const json& body) {
        const auto r = service->create_session(body);
        EXPECT_EQ(r.status, 200) << r.body.dump();
        return r.body.value("session_id", "");
    }
};

json all_scores(int v) {
    json j = json::object();
    for (auto m : kRatingMetrics) j[std::string(m)] = v;
    return j;
}

}  // namespace

TEST(Service, SingleArmSession) {
    Fixture f;
    const auto id = f.create({{"arm", "single"}, {"model", "alpha"}, {"scenario", "Lost my job."}});
    EXPECT_EQ(id.size(), 16u);
    const auto r = f.service->post_message(id, {{"text", "I failed my exam"}});
    ASSERT_EQ(r.status, 200);
    ASSERT_EQ(r.body["replies"].size(), 1u);
    EXPECT_EQ(r.body["replies"][0]["label"], "single");
    EXPECT_EQ(r.body["replies"][0]["strategy"], "Question");
    EXPECT_EQ(r.body["replies"][0]["text"], "Alpha hears you. One. Two.");
    EXPECT_TRUE(parse_strategy(r.body["replies"][0]["strategy"].get<std::string>()));
}

TEST(Service, CreateErrors) {
    Fixture f;
    EXPECT_EQ(f.service->create_session({{"arm", "single"}, {"model", "gamma"}}).status, 400);
    EXPECT_TRUE(f.service->create_session({{"arm", "single"}, {"model", "gamma"}}).body.contains("error"));
    EXPECT_EQ(f.service->create_session({{"arm", "single"}}).status, 400);
    EXPECT_EQ(f.service->create_session({{"arm", "ab"}, {"models", {"alpha"}}}).status, 400);
    EXPECT_EQ(f.service->create_session({{"arm", "triple"}}).status, 400);
    EXPECT_EQ(f.service->create_session(json::array()).status, 400);
}

TEST(Service, AbArmTwoLabeledRepliesWithHiddenMapping) {
    Fixture f;
    const auto created = f.service->create_session({{"arm", "ab"}, {"models", {"alpha", "beta"}}});
    ASSERT_EQ(created.status, 200);
    EXPECT_EQ(created.body["labels"], json({"A", "B"}));
    EXPECT_EQ(created.body.dump().find("alpha"), std::string::npos);
    const auto id = created.body["session_id"].get<std::string>();
    const auto r = f.service->post_message(id, {{"text", "hello"}});
    ASSERT_EQ(r.body["replies"].size(), 2u);
    EXPECT_EQ(r.body["replies"][0]["label"], "A");
    EXPECT_EQ(r.body["replies"][1]["label"], "B");
    EXPECT_EQ(r.body.dump().find("alpha"), std::string::npos);
    const auto mapping = *f.service->hidden_mapping(id);
    EXPECT_EQ(std::set<std::string>({mapping.at("A"), mapping.at("B")}), std::set<std::string>({"alpha", "beta"}));
}

TEST(Service, AbOrderReproducibleUnderSeed) {
    auto orders = [](std::uint64_t seed) {
        Fixture f(seed);
        std::string out;
        for (int i = 0; i < 32; ++i) {
            const auto id = f.create({{"arm", "ab"}, {"models", {"alpha", "beta"}}});
            out += f.service->hidden_mapping(id)->at("A")[0];
        }
        return out;
    };
    EXPECT_EQ(orders(5), orders(5));
    EXPECT_NE(orders(5), orders(6));
}

TEST(Service, MessageErrors) {
    Fixture f;
    const auto id = f.create({{"model", "alpha"}});
    EXPECT_EQ(f.service->post_message(id, {{"text", "   "}}).status, 400);
    EXPECT_EQ(f.service->post_message(id, {{"nope", 1}}).status, 400);
    EXPECT_EQ(f.service->post_message("ffffffffffffffff", {{"text", "hi"}}).status, 404);
}

TEST(Service, BackendFailureLeavesSeekerTurn) {
    Fixture f;
    const auto id = f.create({{"model", "broken"}});
    EXPECT_EQ(f.service->post_message(id, {{"text", "first"}}).status, 502);
    EXPECT_EQ(f.service->post_message(id, {{"text", "second"}}).status, 502);
    const auto exported = dialogue_from_json(f.service->export_session(id).body);
    ASSERT_EQ(exported.utterances.size(), 1u);
    EXPECT_EQ(exported.utterances[0].speaker, Speaker::Seeker);
    EXPECT_EQ(exported.utterances[0].text, "first second");
}

TEST(Service, RatingFlow) {
    Fixture f;
    const auto id = f.create({{"model", "alpha"}});
    f.service->post_message(id, {{"text", "hi"}});
    auto bad = all_scores(5);
    bad["Empathy"] = 6;
    EXPECT_EQ(f.service->submit_rating(id, bad).status, 400);
    auto missing = all_scores(5);
    missing.erase("Overall");
    EXPECT_EQ(f.service->submit_rating(id, missing).status, 400);
    auto fractional = all_scores(3);
    fractional["Coherence"] = 2.5;
    EXPECT_EQ(f.service->submit_rating(id, fractional).status, 400);
    auto good = all_scores(5);
    good["comment"] = "lovely";
    const auto r = f.service->submit_rating(id, good);
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.body["stored"], true);
    EXPECT_EQ(r.body["unblinded_mapping"]["single"], "alpha");
    EXPECT_EQ(f.service->submit_rating(id, good).status, 409);
    EXPECT_EQ(f.service->post_message(id, {{"text", "more"}}).status, 409);
    const auto exported = f.service->export_session(id).body;
    EXPECT_EQ(exported["meta"]["status"], "closed");
    EXPECT_EQ(exported["meta"]["rating"]["scores"]["Empathy"], 5);
    EXPECT_EQ(exported["meta"]["rating"]["comment"], "lovely");
}

TEST(Service, AbRatingTieStoresMapping) {
    Fixture f;
    const auto id = f.create({{"arm", "ab"}, {"models", {"alpha", "beta"}}});
    f.service->post_message(id, {{"text", "hi"}});
    EXPECT_EQ(f.service->submit_rating(id, {{"ab_choice", "Maybe"}}).status, 400);
    EXPECT_EQ(f.service->submit_rating(id, all_scores(3)).status, 400);
    const auto r = f.service->submit_rating(id, {{"ab_choice", "Tie"}});
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.body["unblinded_mapping"].size(), 2u);
    const auto exported = f.service->export_session(id).body;
    EXPECT_EQ(exported["meta"]["rating"]["ab_choice"], "Tie");
    EXPECT_EQ(exported["meta"]["mapping"], r.body["unblinded_mapping"]);
}

TEST(Service, ExportSchemaAndBranches) {
    Fixture f;
    const auto id = f.create({{"arm", "ab"}, {"models", {"alpha", "beta"}}, {"scenario", "Exam stress."}});
    for (const char* t : {"one", "two", "three"}) f.service->post_message(id, {{"text", t}});
    const auto e = f.service->export_session(id);
    ASSERT_EQ(e.status, 200);
    const auto d = dialogue_from_json(e.body);
    EXPECT_EQ(d.utterances.size(), 6u);
    EXPECT_TRUE(validate_dialogue(d, {6, 30, 0}).empty());
    EXPECT_EQ(d.utterances[1].strategy, Strategy::Question);
    EXPECT_EQ(d.utterances[3].strategy, Strategy::ReflectionOfFeelings);
    EXPECT_EQ(e.body["meta"]["branches"]["A"].size(), 6u);
    EXPECT_EQ(e.body["meta"]["branches"]["B"].size(), 6u);
    EXPECT_FALSE(e.body["meta"].contains("mapping"));
    EXPECT_EQ(f.service->export_session("nope").status, 404);
}

TEST(Service, StrategiesAndHealth) {
    Fixture f;
    const auto s = f.service->strategies().body;
    ASSERT_EQ(s["strategies"].size(), kStrategyCount);
    EXPECT_EQ(s["strategies"][0], "Question");
    const auto h = f.service->health().body;
    EXPECT_EQ(h["status"], "ok");
}

TEST(Service, SessionLogIsAppendOnlyJsonl) {
    test::TempDir dir;
    {
        Fixture f(3, dir / "log.jsonl");
        const auto id = f.create({{"model", "alpha"}});
        f.service->post_message(id, {{"text", "hi"}});
        f.service->submit_rating(id, all_scores(4));
    }
    const auto text = read_text_file(dir / "log.jsonl");
    std::istringstream in(text);
    std::vector<std::string> events;
    for_each_jsonl(in, [&](const json& j, std::size_t) { events.push_back(j["event"]); });
    EXPECT_EQ(events, (std::vector<std::string>{"create", "message", "rating"}));
}

TEST(Service, ConcurrentSessions) {
    Fixture f;
    std::vector<std::thread> threads;
    std::atomic<int> ok{0};
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&] {
            const auto id = f.service->create_session({{"model", "beta"}}).body["session_id"].get<std::string>();
            for (int i = 0; i < 5; ++i) ok += f.service->post_message(id, {{"text", "msg"}}).status == 200;
            const auto d = dialogue_from_json(f.service->export_session(id).body);
            ok += d.utterances.size() == 10 && alternates(d.utterances);
        });
    }
    for (auto& t : threads) t.join();
    EXPECT_EQ(ok.load(), 8 * 6);
}

TEST(HttpService, EndpointsOverLoopback) {
    Fixture f;
    HttpServer server(*f.service);
    const int port = server.bind("127.0.0.1", 0);
    ASSERT_GT(port, 0);
    server.start();
    httplib::Client c("127.0.0.1", port);

    auto health = c.Get("/healthz");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);
    EXPECT_EQ(health->get_header_value("Access-Control-Allow-Origin"), "*");

    auto created = c.Post("/sessions", R"({"arm":"single","model":"alpha"})", "application/json");
    ASSERT_TRUE(created);
    ASSERT_EQ(created->status, 200);
    const auto id = json::parse(created->body)["session_id"].get<std::string>();
    auto msg = c.Post("/sessions/" + id + "/messages", R"({"text":"hello"})", "application/json");
    ASSERT_TRUE(msg);
    EXPECT_EQ(msg->status, 200);
    auto bad = c.Post("/sessions/" + id + "/messages", "{not json", "application/json");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);
    auto missing = c.Get("/sessions/unknown/export");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);
    auto pre = c.Options("/sessions");
    ASSERT_TRUE(pre);
    EXPECT_EQ(pre->status, 204);
    auto strategies = c.Get("/strategies");
    ASSERT_TRUE(strategies);
    EXPECT_EQ(json::parse(strategies->body)["strategies"].size(), kStrategyCount);
    server.stop();
}

TEST(HttpService, StaticUiBundle) {
    test::TempDir ui;
    write_text_file(ui / "index.html", "<html>rater</html>");
    test::FunctionBackend b([](const ChatRequest&) { return "ok"; });
    ServiceOptions o;
    o.ui_dir = ui.path();
    SessionService svc({{"m", {&b, std::make_shared<const Counselor>(CounselorMode::Statistical, nullptr,
                                                                      fixed_model(Strategy::Others, Strategy::Others))}}},
                       o);
    HttpServer server(svc);
    const int port = server.bind("127.0.0.1", 0);
    server.start();
    httplib::Client c("127.0.0.1", port);
    auto page = c.Get("/index.html");
    ASSERT_TRUE(page);
    EXPECT_EQ(page->status, 200);
    EXPECT_EQ(page->body, "<html>rater</html>");
    server.stop();
}
