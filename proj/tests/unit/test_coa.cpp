// SPDX-License-Identifier: Apache-2.0
#include "../support/corpus.hpp"

#include "disputekit/backend.hpp"
#include "disputekit/coa.hpp"
#include "disputekit/error.hpp"

#include <doctest.h>

#include <fstream>

using namespace disputekit;

namespace {

const std::string kFixtures = DISPUTEKIT_FIXTURES;

OrdinalLabelSpace labels() { return OrdinalLabelSpace::load(kFixtures + "/labels.json"); }

OrderRecord sample_order() {
    auto o = testcorpus::planted_orders(1, 77)[0];
    o.id = "golden-1";
    o.image_ref = "images/golden-1.png";
    o.ground_truth = "partial_liability";
    return o;
}

class Adversary final : public ReasoningBackend {
public:
    explicit Adversary(const RuleBase& rules) : rules_(rules) {}
    std::string complete(const BackendRequest& req) override {
        // Quotes rule text and asks several questions every turn, never concluding.
        std::string out = "Thinking. ";
        for (const auto& r : rules_.rules()) {
            out += "<map>Does this match: " + r.clause + "</map> ";
        }
        return out + "<map>unclosed " + std::to_string(req.messages.size());
    }
    std::string name() const override { return "adversary"; }

private:
    const RuleBase& rules_;
};

class Flaky final : public ReasoningBackend {
public:
    explicit Flaky(int failures) : failures_(failures) {}
    std::string complete(const BackendRequest&) override {
        if (failures_-- > 0) {
            throw BackendError("temporary outage");
        }
        return "<verdict>no_liability</verdict>";
    }
    std::string name() const override { return "flaky"; }

private:
    int failures_;
};

CalibratorEnsemble constant_ensemble(const RuleBase& base, double value) {
    std::vector<RuleCalibrator> rules;
    for (const auto& r : base.rules()) {
        RuleCalibrator rc;
        rc.rule_id = r.id;
        rc.family = Family::constant;
        rc.model = make_constant(value);
        rules.push_back(std::move(rc));
    }
    return CalibratorEnsemble(FeatureSpace::fit(testcorpus::planted_orders(4, 1)),
                              std::make_shared<HashingEmbedder>(64), std::move(rules), {});
}

bool mentions(const BackendRequest& req, const std::string& needle) {
    if (req.role_prompt.find(needle) != std::string::npos) {
        return true;
    }
    for (const auto& m : req.messages) {
        if (m.content.find(needle) != std::string::npos) {
            return true;
        }
    }
    return false;
}

} // namespace

TEST_CASE("map queries are extracted in order") {
    CHECK(parse_map_queries("no tags here").queries.empty());
    const auto one = parse_map_queries("so <map>did the driver pass k_2?</map> then");
    CHECK(one.queries == std::vector<std::string>{"did the driver pass k_2?"});
    CHECK(one.malformed == 0);
    const auto two = parse_map_queries("<map>first</map> and <map>second");
    CHECK(two.queries == std::vector<std::string>{"first"});
    CHECK(two.malformed == 1);
    CHECK(parse_verdict_marker("x <verdict> full_liability </verdict>") == std::optional<std::string>("full_liability"));
    CHECK(!parse_verdict_marker("<verdict>open"));
}

TEST_CASE("a verdict on the first turn ends the session") {
    ScriptedBackend adj({}, std::string("<verdict>no_liability</verdict>"));
    ScriptedBackend ana({}, std::string("<answer>n/a</answer>"));
    const auto t = run_adjudication_session(sample_order(), testcorpus::planted_rules(), nullptr, labels(), adj, ana);
    CHECK(t.adjudicator_turns() == 1);
    CHECK(t.analyst_turns() == 0);
    CHECK(t.raw_verdict == "no_liability");
    CHECK(t.verdict_marked);
    CHECK(!t.forced);
}

TEST_CASE("endless inquiry stops at the cap with a forced verdict turn") {
    for (int cap : {1, 3, 8}) {
        ScriptedBackend adj({{AgentRole::adjudicator, std::string("inquiry limit"), std::nullopt, std::nullopt,
                              "<verdict>full_liability</verdict>"}},
                            std::string("<map>where is the car at turn {{turn}}?</map>"));
        ScriptedBackend ana({}, std::string("<answer>near k_1</answer>"));
        CoaOptions opts;
        opts.max_turns = cap;
        const auto t =
            run_adjudication_session(sample_order(), testcorpus::planted_rules(), nullptr, labels(), adj, ana, opts);
        CAPTURE(cap);
        CHECK(t.adjudicator_turns() == static_cast<std::size_t>(cap) + 1);
        CHECK(t.analyst_turns() == static_cast<std::size_t>(cap) - 1);
        CHECK(t.turns.size() <= static_cast<std::size_t>(2 * cap));
        CHECK(t.backend_calls <= static_cast<std::size_t>(2 * cap + 1));
        CHECK(t.forced);
        CHECK(t.raw_verdict == "full_liability");
        CHECK(t.map_queries.size() == static_cast<std::size_t>(cap) - 1);
    }
}

TEST_CASE("modality isolation holds against an adversarial adjudicator") {
    const auto base = testcorpus::planted_rules();
    Adversary adversary(base);
    ScriptedBackend ana_inner({}, std::string("<answer>The image images/golden-1.png shows a detour.</answer>"));
    RecordingBackend adj(adversary);
    RecordingBackend ana(ana_inner);
    const auto order = sample_order();
    const auto t = run_adjudication_session(order, base, nullptr, labels(), adj, ana);
    CHECK(t.forced);
    CHECK(t.backend_calls <= 17);
    CHECK(t.dropped_queries > 0);
    CHECK(t.malformed_tags > 0);
    for (const auto& req : adj.requests()) {
        CHECK(!req.image_ref);
        CHECK(!mentions(req, order.image_ref));
    }
    REQUIRE(ana.calls() > 0);
    for (const auto& req : ana.requests()) {
        CHECK(req.image_ref == std::optional<std::string>(order.image_ref));
        for (const auto& r : base.rules()) {
            CHECK(!mentions(req, r.clause));
        }
        CHECK(!mentions(req, order.notes.begin()->second));
    }
}

TEST_CASE("only the first query of a turn is answered") {
    ScriptedBackend adj({{AgentRole::adjudicator, std::nullopt, std::size_t{1}, std::nullopt,
                          "<map>q one</map><map>q two</map>"}},
                        std::string("<verdict>no_liability</verdict>"));
    ScriptedBackend ana({}, std::string("<answer>{{last}}</answer>"));
    RecordingBackend rec(adj);
    const auto t = run_adjudication_session(sample_order(), testcorpus::planted_rules(), nullptr, labels(), rec, ana);
    REQUIRE(t.map_queries.size() == 1);
    CHECK(t.map_queries[0].query == "q one");
    CHECK(t.dropped_queries == 1);
    const auto second = rec.requests().at(1);
    CHECK(second.messages.back().content.find("Only the first map question") != std::string::npos);
}

TEST_CASE("backend errors are retried twice before the session fails") {
    ScriptedBackend ana({}, std::string("<answer>x</answer>"));
    Flaky ok(2);
    const auto t = run_adjudication_session(sample_order(), testcorpus::planted_rules(), nullptr, labels(), ok, ana);
    CHECK(!t.failed);
    CHECK(t.backend_calls == 3);
    Flaky bad(3);
    const auto f = run_adjudication_session(sample_order(), testcorpus::planted_rules(), nullptr, labels(), bad, ana);
    CHECK(f.failed);
    CHECK(f.failure.find("temporary outage") != std::string::npos);
    CHECK(f.backend_calls == 3);
}

TEST_CASE("refiner output is parsed into four stages") {
    const auto script = ScriptedBackend::load(kFixtures + "/mock_script.json");
    ScriptedBackend refiner = script;
    AdjudicationTranscript t;
    t.raw_verdict = "partial_liability";
    t.turns.push_back({Speaker::adjudicator, "<verdict>partial_liability</verdict>"});
    const auto r = refine_transcript(t, sample_order(), testcorpus::planted_rules(), labels(), refiner);
    CHECK(r.result == "partial_liability");
    CHECK(r.judge == "unintentional route deviation");
    CHECK(r.reason[0] == "The passenger disputes the route taken after pickup.");
    CHECK(r.reason[3] == "The deviation was real but recovered, so liability is partial.");

    ScriptedBackend no_result({}, std::string("<reason>Information Analysis: a Visual Evidence Integration: b "
                                              "Rule Grounding: c Comprehensive Adjudication: d</reason>"
                                              "<judge>x</judge>"));
    RecordingBackend rec(no_result);
    CHECK_THROWS_AS(refine_transcript(t, sample_order(), testcorpus::planted_rules(), labels(), rec),
                    RefineParseError);
    CHECK(rec.calls() == 3);

    ScriptedBackend seven({}, std::string("<reason>Information Analysis: a Visual Evidence Integration: b "
                                          "Rule Grounding: c Comprehensive Adjudication: d</reason>"
                                          "<judge>x</judge><result>LabelSeven</result>"));
    CHECK_THROWS_AS(refine_transcript(t, sample_order(), testcorpus::planted_rules(), labels(), seven),
                    LabelSpaceError);

    ScriptedBackend missing_stage({}, std::string("<reason>Information Analysis: a Rule Grounding: c "
                                                  "Comprehensive Adjudication: d</reason><judge>x</judge>"
                                                  "<result>no_liability</result>"));
    CHECK_THROWS_AS(parse_refined(missing_stage.complete({}), labels()), RefineParseError);

    AdjudicationTranscript empty;
    CHECK_THROWS_AS(refine_transcript(empty, sample_order(), testcorpus::planted_rules(), labels(), refiner),
                    RefineParseError);
}

TEST_CASE("training samples are kept only on agreement without ambiguity") {
    RefinedReasoning r;
    r.result = "partial_liability";
    auto order = sample_order();
    CHECK(select_training_sample(r, order).keep);
    order.ambiguous = true;
    CHECK(!select_training_sample(r, order).keep);
    order.ambiguous = false;
    order.ground_truth = "full_liability";
    const auto d = select_training_sample(r, order);
    CHECK(!d.keep);
    CHECK(d.reason.find("diverges") != std::string::npos);
    order.ground_truth.reset();
    CHECK_THROWS_AS(select_training_sample(r, order), Error);
}

TEST_CASE("adjudicate reproduces the golden refined reasoning") {
    auto script = ScriptedBackend::load(kFixtures + "/mock_script.json");
    const Backends backends{&script, &script, &script, &script};
    const auto base = testcorpus::planted_rules();
    const auto ens = constant_ensemble(base, 1.0);
    HashingEmbedder emb(64);
    PrecedentStore store(64, emb.name());
    for (const auto& o : testcorpus::planted_orders(12, 3, 1'600'000'000)) {
        store.insert(order_text(o), "partial_liability", o.timestamp, emb);
    }
    const auto order = sample_order();
    const auto res = adjudicate(order, base, &ens, store, emb, labels(), backends);
    std::ifstream in(kFixtures + "/golden_refined.json");
    auto golden = nlohmann::json::parse(in);
    REQUIRE(res.refined);
    auto got = to_json(*res.refined);
    got.erase("raw");
    CHECK(got == golden);
    CHECK(res.verdict == "partial_liability");
    CHECK(res.pruned_rules.size() == 4);
    CHECK(res.precedents.size() == 4);
    CHECK(res.transcript.adjudicator_turns() == 2);
    CHECK(res.transcript.analyst_turns() == 1);
    const auto again = adjudicate(order, base, &ens, store, emb, labels(), backends);
    CHECK(to_json(again).dump() == to_json(res).dump());
}

TEST_CASE("adjudicate handles an empty store and an empty rule subset") {
    auto script = ScriptedBackend::load(kFixtures + "/mock_script.json");
    RecordingBackend adj(script);
    RecordingBackend summarizer(script);
    const Backends backends{&adj, &script, &script, &summarizer};
    const auto base = testcorpus::planted_rules();
    const auto ens = constant_ensemble(base, 0.0);
    HashingEmbedder emb(64);
    PrecedentStore store(64, emb.name());
    const auto res = adjudicate(sample_order(), base, &ens, store, emb, labels(), backends);
    CHECK(res.pruned_rules.empty());
    CHECK(res.precedents.empty());
    CHECK(res.insight.text.find("No precedent") != std::string::npos);
    CHECK(summarizer.calls() == 0);
    CHECK(mentions(adj.requests().front(), "No specific rules matched"));
    CHECK(res.verdict == "partial_liability");

    AdjudicateOptions no_cal;
    no_cal.use_calibration = false;
    no_cal.use_refinement = false;
    no_cal.coa.include_insight = false;
    const auto raw = adjudicate(sample_order(), base, nullptr, store, emb, labels(), backends, no_cal);
    CHECK(raw.pruned_rules.size() == 4);
    CHECK(!raw.refined);
    CHECK(raw.in_space);
    CHECK(raw.verdict == "partial_liability");
}

TEST_CASE("adjudicate labels failing stages") {
    Flaky down(100);
    ScriptedBackend ok({}, std::string("<answer>x</answer>"));
    const Backends backends{&down, &ok, &ok, &ok};
    HashingEmbedder emb(64);
    PrecedentStore store(64, emb.name());
    AdjudicateOptions opts;
    opts.use_calibration = false;
    try {
        adjudicate(sample_order(), testcorpus::planted_rules(), nullptr, store, emb, labels(), backends, opts);
        FAIL("expected failure");
    } catch (const AdjudicationError& ex) {
        CHECK(ex.stage() == "session");
    }
    HashingEmbedder wrong(32);
    try {
        adjudicate(sample_order(), testcorpus::planted_rules(), nullptr, store, wrong, labels(), backends, opts);
        FAIL("expected failure");
    } catch (const AdjudicationError& ex) {
        CHECK(ex.stage() == "retrieve");
    }
    CHECK_THROWS_AS(adjudicate(sample_order(), testcorpus::planted_rules(), nullptr, store, emb, labels(), backends),
                    AdjudicationError);
}

TEST_CASE("ground truth is shown only in synthesis mode") {
    const auto order = sample_order();
    CoaOptions opts;
    const auto plain = render_adjudicator_context(order, testcorpus::planted_rules(), nullptr, labels(), opts);
    CHECK(plain.find("Human-annotated") == std::string::npos);
    opts.reveal_ground_truth = true;
    const auto synth = render_adjudicator_context(order, testcorpus::planted_rules(), nullptr, labels(), opts);
    CHECK(synth.find("Human-annotated result: partial_liability") != std::string::npos);
    CHECK(synth.find(order.image_ref) == std::string::npos);
}
