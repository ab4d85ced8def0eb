// SPDX-License-Identifier: Apache-2.0
#include "disputekit/bench.hpp"

#include "disputekit/coa.hpp"
#include "disputekit/corpus.hpp"
#include "disputekit/error.hpp"
#include "disputekit/log.hpp"
#include "disputekit/parallel.hpp"

#include <chrono>
#include <fstream>

namespace disputekit {

std::unique_ptr<ReasoningBackend> make_role_backend(const PipelineConfig& cfg, AgentRole role,
                                                    const std::map<std::string, std::string>& truth) {
    const auto it = cfg.coa.role_backends.find(role);
    const std::string spec = it == cfg.coa.role_backends.end() ? cfg.coa.backend : it->second;
    if (spec == "oracle") {
        return LabelPolicyBackend::oracle(truth);
    }
    if (spec.rfind("mock:", 0) == 0) {
        return make_backend("mock:" + cfg.resolve(spec.substr(5)));
    }
    if (spec.rfind("oracle:", 0) == 0) {
        return make_backend("oracle:" + cfg.resolve(spec.substr(7)));
    }
    return make_backend(spec);
}

namespace {

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << j.dump(2) << "\n";
}

struct OrderOutcome {
    std::string verdict; // empty on failure
    std::string error;
    std::string stage;
    double answer_reward = 0.0;
    double total = 0.0;
    bool keep = false;
    nlohmann::json audit;
};

} // namespace

Corpus synthesize_corpus(const PipelineConfig& cfg, std::size_t n, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    Corpus c;
    c.network = generate_network(cfg.network);
    write_json(out_dir / "network.json", to_json(c.network));

    DatasetOptions dopts;
    dopts.seed = cfg.seed_for("dataset");
    dopts.min_poi_distance = cfg.dataset.min_poi_distance;
    dopts.max_attempts = cfg.dataset.max_attempts;
    dopts.workers = cfg.workers;
    c.records = build_dataset(c.network, n, cfg.dataset.class_mix, cfg.mutation, cfg.render, out_dir / "dataset", dopts);

    if (cfg.bench.rules.empty()) {
        c.rules = default_rule_base();
    } else {
        const auto path = cfg.resolve(cfg.bench.rules);
        std::ifstream in(path);
        if (!in) {
            throw ConfigError("bench.rules", "cannot open " + path);
        }
        c.rules = linked_rules_from_json(nlohmann::json::parse(in));
    }
    write_json(out_dir / "rules.json", to_json(c.rules));

    if (cfg.labels.present) {
        write_json(out_dir / "labels.json", cfg.label_space().to_json());
        OrderSynthesis osyn;
        osyn.seed = cfg.seed_for("orders");
        osyn.class_verdicts = cfg.labels.class_verdicts;
        osyn.ambiguous_share = cfg.bench.ambiguous_share;
        osyn.image_root = "dataset"; // image refs stay relative to out_dir
        c.orders = orders_from_dataset(c.records, c.rules.links, osyn);
        write_orders_jsonl(c.orders, (out_dir / "orders.jsonl").string());
    }
    return c;
}

BenchResult run_benchmark(const PipelineConfig& cfg, const std::filesystem::path& out_dir) {
    const auto started = std::chrono::steady_clock::now();
    const OrdinalLabelSpace space = cfg.label_space();

    const std::size_t n = cfg.bench.history + cfg.bench.eval;
    const Corpus corpus = synthesize_corpus(cfg, n, out_dir);
    const auto& records = corpus.records;
    const auto& rules = corpus.rules;
    const auto& orders = corpus.orders;
    const std::vector<OrderRecord> history(orders.begin(), orders.begin() + static_cast<std::ptrdiff_t>(cfg.bench.history));
    const std::vector<OrderRecord> evals(orders.begin() + static_cast<std::ptrdiff_t>(cfg.bench.history), orders.end());

    const auto embedder = make_embedder(cfg.retrieval.embedder);
    const CalibratorEnsemble ensemble = train_calibrators(history, rules.base, embedder, cfg.calibration);
    ensemble.save((out_dir / "ensemble.json").string());

    PrecedentStore store(embedder->dimension(), embedder->name());
    for (const auto& o : history) {
        store.insert(order_text(o), o.ground_truth.value_or(""), o.timestamp, *embedder);
    }
    store.save((out_dir / "store.jsonl").string());

    std::map<std::string, std::string> truth;
    for (const auto& o : orders) {
        if (o.ground_truth) {
            truth[o.id] = *o.ground_truth;
        }
    }
    const auto adj = make_role_backend(cfg, AgentRole::adjudicator, truth);
    const auto ana = make_role_backend(cfg, AgentRole::analyst, truth);
    const auto ref = make_role_backend(cfg, AgentRole::refiner, truth);
    const auto sum = make_role_backend(cfg, AgentRole::summarizer, truth);
    const Backends backends{adj.get(), ana.get(), ref.get(), sum.get()};
    const CoaOptions coa = cfg.coa_options();

    std::vector<std::string> variant_names{"full"};
    for (const auto& a : cfg.bench.ablations) {
        variant_names.push_back(a);
    }

    std::vector<std::string> gts;
    for (const auto& o : evals) {
        gts.push_back(*o.ground_truth);
    }

    BenchResult result;
    std::ofstream audit(out_dir / "audit.jsonl");
    if (!audit) {
        throw Error("cannot write audit log under " + out_dir.string());
    }
    std::vector<OrderOutcome> full_outcomes;
    for (const auto& name : variant_names) {
        RewardConfig reward = cfg.reward;
        reward.ordinal = name != "binary_reward";
        std::vector<OrderOutcome> outcomes;
        if (name == "binary_reward" && !full_outcomes.empty()) {
            // Same predictions as the full pipeline; only the reward changes.
            outcomes = full_outcomes;
            for (auto& oc : outcomes) {
                const double ans = oc.verdict.empty() ? 0.0 : ordinal_reward(oc.verdict, oc.audit["gt"].get<std::string>(), space, reward);
                oc.answer_reward = ans;
                oc.total = total_reward(ans, oc.audit["format_reward"].get<int>(), reward);
                oc.audit["answer_reward"] = ans;
                oc.audit["total_reward"] = oc.total;
            }
        } else {
            AdjudicateOptions opts;
            opts.coa = coa;
            opts.top_k = cfg.retrieval.k;
            opts.use_calibration = name != "no_calibration";
            opts.use_refinement = name != "no_refinement";
            opts.coa.include_insight = coa.include_insight && name != "no_insight";
            outcomes.resize(evals.size());
            parallel_for(evals.size(), cfg.workers, [&](std::size_t i) {
                const OrderRecord& order = evals[i];
                OrderOutcome& oc = outcomes[i];
                oc.audit = {{"id", order.id}, {"gt", *order.ground_truth}};
                try {
                    const auto res = adjudicate(order, rules.base, &ensemble, store, *embedder, space, backends, opts);
                    oc.verdict = res.in_space ? res.verdict : std::string{};
                    const std::string output = res.refined ? res.refined->raw : res.transcript.raw_verdict;
                    const int fmt = format_reward(output);
                    oc.answer_reward = ordinal_reward(res.verdict, *order.ground_truth, space, reward);
                    oc.total = total_reward(oc.answer_reward, fmt, reward);
                    if (res.refined) {
                        oc.keep = select_training_sample(*res.refined, order).keep;
                    }
                    oc.audit["verdict"] = res.verdict;
                    oc.audit["in_space"] = res.in_space;
                    oc.audit["pruned_rules"] = res.pruned_rules;
                    oc.audit["precedents"] = res.precedents;
                    oc.audit["backend_calls"] = res.transcript.backend_calls;
                    oc.audit["turns"] = res.transcript.turns.size();
                    oc.audit["forced"] = res.transcript.forced;
                    oc.audit["format_reward"] = fmt;
                    oc.audit["answer_reward"] = oc.answer_reward;
                    oc.audit["total_reward"] = oc.total;
                    oc.audit["kept"] = oc.keep;
                } catch (const AdjudicationError& ex) {
                    oc.error = ex.what();
                    oc.stage = ex.stage();
                    oc.audit["error"] = oc.error;
                    oc.audit["stage"] = oc.stage;
                    oc.audit["format_reward"] = 0;
                    oc.audit["answer_reward"] = 0.0;
                    oc.audit["total_reward"] = 0.0;
                }
            });
            if (name == "full") {
                full_outcomes = outcomes;
            }
        }

        VariantResult v;
        v.name = name;
        std::vector<std::string> preds;
        double ans_sum = 0.0;
        double tot_sum = 0.0;
        for (auto& oc : outcomes) {
            preds.push_back(oc.verdict);
            v.failures += !oc.error.empty();
            ans_sum += oc.answer_reward;
            tot_sum += oc.total;
            v.kept_for_training += oc.keep;
            oc.audit["variant"] = name;
            audit << oc.audit.dump() << "\n";
        }
        v.report = evaluate(preds, gts, space, cfg.labels.grouping);
        v.mean_answer_reward = ans_sum / static_cast<double>(outcomes.size());
        v.mean_total_reward = tot_sum / static_cast<double>(outcomes.size());
        result.variants.push_back(std::move(v));
    }

    nlohmann::json class_counts = nlohmann::json::object();
    for (const auto& r : records) {
        class_counts[label_name(r.label)] = class_counts.value(label_name(r.label), 0) + 1;
    }
    nlohmann::json variants = nlohmann::json::object();
    for (const auto& v : result.variants) {
        variants[v.name] = {{"metrics", to_json(v.report)},
                            {"failures", v.failures},
                            {"failure_rate", static_cast<double>(v.failures) / static_cast<double>(evals.size())},
                            {"mean_answer_reward", v.mean_answer_reward},
                            {"mean_total_reward", v.mean_total_reward},
                            {"kept_for_training", v.kept_for_training}};
    }
    result.report = {{"schema_version", 1},
                     {"seed", cfg.seed},
                     {"corpus", {{"history", history.size()}, {"eval", evals.size()}, {"class_counts", class_counts}}},
                     {"backends",
                      {{"adjudicator", adj->name()},
                       {"analyst", ana->name()},
                       {"refiner", ref->name()},
                       {"summarizer", sum->name()}}},
                     {"rules", rules.base.size()},
                     {"variants", variants},
                     {"variant_order", variant_names}};
    write_json(out_dir / "report.json", result.report);
    log::event(log::Level::info, "bench.done",
               {{"out", out_dir.string()},
                {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count()}});
    return result;
}

} // namespace disputekit
