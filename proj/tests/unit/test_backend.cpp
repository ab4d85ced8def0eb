// SPDX-License-Identifier: Apache-2.0
#include "disputekit/backend.hpp"
#include "disputekit/error.hpp"

#include <doctest.h>
#include <httplib.h>

#include <cstdlib>
#include <thread>

using namespace disputekit;

namespace {

BackendRequest request(AgentRole role, std::vector<std::string> user_messages) {
    BackendRequest r;
    r.role = role;
    r.role_prompt = "prompt";
    for (auto& m : user_messages) {
        r.messages.push_back({"user", m});
        r.messages.push_back({"assistant", "ok"});
    }
    r.messages.pop_back();
    return r;
}

} // namespace

TEST_CASE("scripted backend matches role, substring, turn and fingerprint") {
    const auto fp_req = request(AgentRole::refiner, {"exact"});
    const auto script = nlohmann::json{
        {"rules",
         {{{"fingerprint", request_fingerprint(fp_req)}, {"response", "fingerprinted"}},
          {{"role", "analyst"}, {"response", "analyst says {{last}}"}},
          {{"role", "adjudicator"}, {"turn", 2}, {"response", "second turn"}},
          {{"role", "adjudicator"}, {"contains", "detour"}, {"response", "detour seen"}}}},
        {"default", "fallback {{turn}}"}};
    auto b = ScriptedBackend::from_json(script);
    CHECK(b.complete(fp_req) == "fingerprinted");
    CHECK(b.complete(request(AgentRole::refiner, {"other"})) == "fallback 1");
    CHECK(b.complete(request(AgentRole::analyst, {"where?"})) == "analyst says where?");
    CHECK(b.complete(request(AgentRole::adjudicator, {"a", "b"})) == "second turn");
    CHECK(b.complete(request(AgentRole::adjudicator, {"a detour"})) == "detour seen");
    CHECK(b.complete(request(AgentRole::adjudicator, {"a", "b", "c"})) == "fallback 3");

    ScriptedBackend strict({}, std::nullopt);
    try {
        strict.complete(request(AgentRole::adjudicator, {"x"}));
        FAIL("expected error");
    } catch (const BackendError& ex) {
        CHECK(!ex.retriable());
    }
    CHECK_THROWS_AS(ScriptedBackend::from_json(nlohmann::json{{"rules", {{{"role", "judge"}, {"response", "x"}}}}}),
                    BackendError);
}

TEST_CASE("label policy backends answer every role") {
    auto oracle = LabelPolicyBackend::oracle({{"o1", "full_liability"}});
    const auto adj = oracle->complete(request(AgentRole::adjudicator, {"Order o1\nDriver ..."}));
    CHECK(adj.find("<verdict>full_liability</verdict>") != std::string::npos);
    const auto ref = oracle->complete(request(AgentRole::refiner, {"Order o1\n..."}));
    CHECK(ref.find("<result>full_liability</result>") != std::string::npos);
    CHECK(oracle->complete(request(AgentRole::analyst, {"q"})).find("<answer>") != std::string::npos);
    CHECK_THROWS_AS(oracle->complete(request(AgentRole::adjudicator, {"Order o2\n"})), BackendError);
    auto fixed = LabelPolicyBackend::fixed("no_liability");
    CHECK(fixed->complete(request(AgentRole::adjudicator, {"Order zz\n"})).find("no_liability") != std::string::npos);
    CHECK(make_backend("fixed:no_liability")->name() == "fixed:no_liability");
    CHECK_THROWS_AS(make_backend("carrier-pigeon:x"), ConfigError);
}

TEST_CASE("http backend posts the request and reads the reply") {
    httplib::Server server;
    std::string seen_auth;
    nlohmann::json seen_body;
    server.Post("/v1/complete", [&](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        seen_body = nlohmann::json::parse(req.body);
        res.set_content(nlohmann::json{{"text", "<verdict>no_liability</verdict>"}}.dump(), "application/json");
    });
    server.Post("/busy", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    server.Post("/bad", [](const httplib::Request&, httplib::Response& res) { res.status = 400; });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    setenv("DISPUTEKIT_TEST_KEY", "secret", 1);
    const std::string base = "http://127.0.0.1:" + std::to_string(port);
    HttpBackend backend(base + "/v1/complete", "DISPUTEKIT_TEST_KEY", 5);
    auto req = request(AgentRole::analyst, {"is the car at k_1?"});
    req.image_ref = "/nonexistent/image.png";
    CHECK(backend.complete(req) == "<verdict>no_liability</verdict>");
    CHECK(seen_auth == "Bearer secret");
    CHECK(seen_body["role"] == "analyst");
    CHECK(seen_body["messages"][0]["content"] == "is the car at k_1?");
    CHECK(seen_body["image_ref"] == "/nonexistent/image.png");
    CHECK(seen_body["image"].is_null());
    CHECK(!backend.deterministic());

    try {
        HttpBackend(base + "/busy", "DISPUTEKIT_TEST_KEY", 5).complete(req);
        FAIL("expected error");
    } catch (const BackendError& ex) {
        CHECK(ex.retriable());
    }
    try {
        HttpBackend(base + "/bad", "DISPUTEKIT_TEST_KEY", 5).complete(req);
        FAIL("expected error");
    } catch (const BackendError& ex) {
        CHECK(!ex.retriable());
    }
    server.stop();
    th.join();
    CHECK_THROWS_AS(HttpBackend("ftp://host"), ConfigError);
}
