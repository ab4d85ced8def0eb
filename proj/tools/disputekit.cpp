// SPDX-License-Identifier: Apache-2.0
// Command-line entry point. Every subcommand writes its outputs, the
// effective configuration and a JSON-lines log under --out.
#include "disputekit/bench.hpp"
#include "disputekit/error.hpp"
#include "disputekit/log.hpp"
#include "disputekit/parallel.hpp"
#include "disputekit/text.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace disputekit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CommonArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::string log_level;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
    auto* opt = cmd->add_option("--config", args.config, "pipeline config (JSON, comments allowed)");
    if (config_required) {
        opt->required();
    }
    opt->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out, "output directory")->required();
    cmd->add_option("--seed", args.seed, "override the root seed");
    cmd->add_option("--workers", args.workers, "worker threads (0 = all cores)");
    cmd->add_option("--log-level", args.log_level, "debug, info, warn, error or off")
        ->check(CLI::IsMember({"debug", "info", "warn", "error", "off"}));
}

log::Level parse_level(const std::string& s) {
    if (s == "debug") return log::Level::debug;
    if (s == "info") return log::Level::info;
    if (s == "error") return log::Level::error;
    if (s == "off") return log::Level::off;
    return log::Level::warn;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << j.dump(2) << "\n";
}

void write_jsonl(const fs::path& path, const std::vector<json>& rows) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    for (const auto& r : rows) {
        out << r.dump() << "\n";
    }
}

std::vector<json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open " + path);
    }
    std::vector<json> rows;
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (text::trim(line).empty()) {
            continue;
        }
        try {
            rows.push_back(json::parse(line));
        } catch (const json::parse_error& ex) {
            throw Error(path + ":" + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return rows;
}

// Holds the loaded config and the log file for one subcommand run.
class Session {
public:
    explicit Session(const CommonArgs& args) : out_(args.out) {
        json raw = json::object();
        fs::path base;
        if (!args.config.empty()) {
            std::ifstream in(args.config);
            try {
                raw = json::parse(in, nullptr, true, true);
            } catch (const json::parse_error& ex) {
                throw ConfigError("<file>", args.config + ": " + ex.what());
            }
            base = fs::path(args.config).parent_path();
        }
        if (args.seed) {
            raw["seed"] = *args.seed;
        }
        if (args.workers) {
            raw["workers"] = *args.workers;
        }
        if (!args.log_level.empty()) {
            raw["log_level"] = args.log_level;
        }
        cfg_ = config_from_json(raw, base);
        fs::create_directories(out_);
        log_.open(out_ / "log.jsonl", std::ios::app);
        log::set_sink(&log_);
        log::set_level(parse_level(cfg_.log_level));
        write_json(out_ / "config.effective.json", to_json(cfg_));
    }
    ~Session() { log::set_sink(nullptr); }
    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    const PipelineConfig& cfg() const { return cfg_; }
    const fs::path& out() const { return out_; }

private:
    PipelineConfig cfg_;
    fs::path out_;
    std::ofstream log_;
};

OrdinalLabelSpace label_space(const Session& s, const std::string& labels_path) {
    return labels_path.empty() ? s.cfg().label_space() : OrdinalLabelSpace::load(labels_path);
}

std::map<std::string, std::string> truth_of(const std::vector<OrderRecord>& a, const std::vector<OrderRecord>& b = {}) {
    std::map<std::string, std::string> truth;
    for (const auto* set : {&a, &b}) {
        for (const auto& o : *set) {
            if (o.ground_truth) {
                truth[o.id] = *o.ground_truth;
            }
        }
    }
    return truth;
}

PrecedentStore store_from_history(const std::vector<OrderRecord>& history, const Embedder& embedder) {
    PrecedentStore store(embedder.dimension(), embedder.name());
    for (const auto& o : history) {
        if (!o.ground_truth) {
            throw DatasetError("history order " + o.id + " has no ground_truth verdict");
        }
        store.insert(order_text(o), *o.ground_truth, o.timestamp, embedder);
    }
    return store;
}

PrecedentStore open_store(const std::string& store_path, const std::string& history_path, const Embedder& embedder,
                          const fs::path& out) {
    if (!store_path.empty()) {
        auto store = PrecedentStore::load(store_path);
        if (store.embedder_tag() != embedder.name()) {
            throw RetrievalError("store was built with " + store.embedder_tag() + " but the config uses " +
                                 embedder.name());
        }
        return store;
    }
    auto store = store_from_history(read_orders_jsonl(history_path), embedder);
    store.save((out / "store.jsonl").string());
    return store;
}

json neighbor_json(const Neighbor& n) {
    return {{"id", n.id}, {"similarity", n.similarity}, {"timestamp", n.timestamp}, {"verdict", n.verdict}};
}

// ---- subcommands ----------------------------------------------------------

int cmd_synth(const CommonArgs& args, std::optional<std::size_t> count) {
    Session s(args);
    const std::size_t n = count.value_or(s.cfg().dataset.count);
    const Corpus corpus = synthesize_corpus(s.cfg(), n, s.out());
    log::event(log::Level::info, "synth.done",
               {{"samples", corpus.records.size()}, {"orders", corpus.orders.size()}});
    return kExitOk;
}

int cmd_calibrate(const CommonArgs& args, const std::string& orders_path, const std::string& rules_path) {
    Session s(args);
    const auto orders = read_orders_jsonl(orders_path);
    const RuleBase rules = rules_path.empty() ? default_rule_base().base : read_rule_base(rules_path);
    const auto embedder = make_embedder(s.cfg().retrieval.embedder);
    const auto ensemble = train_calibrators(orders, rules, embedder, s.cfg().calibration);
    ensemble.save((s.out() / "ensemble.json").string());
    json summary = json::array();
    for (const auto& c : ensemble.rules()) {
        summary.push_back({{"rule", c.rule_id},
                           {"family", family_name(c.family)},
                           {"val_recall", c.val_recall},
                           {"val_precision", c.val_precision},
                           {"fail_open", c.fail_open},
                           {"positives", c.positives},
                           {"negatives", c.negatives}});
    }
    write_json(s.out() / "calibration.json", {{"orders", orders.size()}, {"rules", summary}});
    return kExitOk;
}

int cmd_retrieve(const CommonArgs& args, const std::string& orders_path, const std::string& store_path,
                 const std::string& history_path, std::optional<std::size_t> k, bool insight) {
    Session s(args);
    const auto embedder = make_embedder(s.cfg().retrieval.embedder);
    const auto store = open_store(store_path, history_path, *embedder, s.out());
    const auto queries = read_orders_jsonl(orders_path);
    const std::size_t top_k = k.value_or(s.cfg().retrieval.k);
    std::unique_ptr<ReasoningBackend> summarizer;
    std::string prompt;
    if (insight) {
        summarizer = make_role_backend(s.cfg(), AgentRole::summarizer, truth_of(queries));
        prompt = s.cfg().coa_options().prompts.summarizer;
    }
    std::vector<json> rows(queries.size());
    parallel_for(queries.size(), s.cfg().workers, [&](std::size_t i) {
        const auto& q = queries[i];
        const auto hits = store.retrieve_topk(order_text(q), q.timestamp, top_k, *embedder);
        json row{{"id", q.id}, {"neighbors", json::array()}};
        for (const auto& n : hits) {
            row["neighbors"].push_back(neighbor_json(n));
        }
        if (summarizer) {
            row["insight"] = to_json(summarize_insight(hits, *summarizer, prompt));
        }
        rows[i] = std::move(row);
    });
    write_jsonl(s.out() / "neighbors.jsonl", rows);
    return kExitOk;
}

struct AdjudicateArgs {
    std::string orders;
    std::string rules;
    std::string ensemble;
    std::string store;
    std::string history;
    bool no_refinement = false;
    bool no_insight = false;
};

int cmd_adjudicate(const CommonArgs& args, const AdjudicateArgs& a) {
    Session s(args);
    const auto& cfg = s.cfg();
    const OrdinalLabelSpace space = cfg.label_space();
    const auto orders = read_orders_jsonl(a.orders);
    const RuleBase rules = a.rules.empty() ? default_rule_base().base : read_rule_base(a.rules);
    const auto embedder = make_embedder(cfg.retrieval.embedder);
    const auto store = open_store(a.store, a.history, *embedder, s.out());
    std::optional<CalibratorEnsemble> ensemble;
    if (!a.ensemble.empty()) {
        ensemble = CalibratorEnsemble::load(a.ensemble);
    }
    const auto truth = truth_of(orders, a.history.empty() ? std::vector<OrderRecord>{} : read_orders_jsonl(a.history));
    const auto adj = make_role_backend(cfg, AgentRole::adjudicator, truth);
    const auto ana = make_role_backend(cfg, AgentRole::analyst, truth);
    const auto ref = make_role_backend(cfg, AgentRole::refiner, truth);
    const auto sum = make_role_backend(cfg, AgentRole::summarizer, truth);
    AdjudicateOptions opts;
    opts.coa = cfg.coa_options();
    opts.coa.include_insight = opts.coa.include_insight && !a.no_insight;
    opts.top_k = cfg.retrieval.k;
    opts.use_calibration = ensemble.has_value();
    opts.use_refinement = !a.no_refinement;

    std::vector<json> rows(orders.size());
    std::vector<std::string> preds(orders.size());
    parallel_for(orders.size(), cfg.workers, [&](std::size_t i) {
        try {
            const auto res = adjudicate(orders[i], rules, ensemble ? &*ensemble : nullptr, store, *embedder, space,
                                        Backends{adj.get(), ana.get(), ref.get(), sum.get()}, opts);
            rows[i] = to_json(res);
            rows[i]["id"] = orders[i].id;
            preds[i] = res.in_space ? res.verdict : std::string{};
        } catch (const AdjudicationError& ex) {
            rows[i] = {{"id", orders[i].id}, {"error", ex.what()}, {"stage", ex.stage()}};
        }
    });
    write_jsonl(s.out() / "verdicts.jsonl", rows);

    std::size_t failures = 0;
    for (const auto& r : rows) {
        failures += r.contains("error");
    }
    json summary{{"orders", orders.size()}, {"failures", failures}};
    if (!orders.empty() && truth.size() >= orders.size() && cfg.labels.present) {
        std::vector<std::string> gts;
        bool all = true;
        for (const auto& o : orders) {
            all = all && o.ground_truth.has_value();
            gts.push_back(o.ground_truth.value_or(""));
        }
        if (all) {
            summary["metrics"] = to_json(evaluate(preds, gts, space, cfg.labels.grouping));
        }
    }
    write_json(s.out() / "summary.json", summary);
    return kExitOk;
}

int cmd_score(const CommonArgs& args, const std::string& samples_path, const std::string& labels_path,
              bool binary) {
    Session s(args);
    const OrdinalLabelSpace space = label_space(s, labels_path);
    RewardConfig reward = s.cfg().reward;
    reward.ordinal = !binary;
    const auto samples = read_jsonl(samples_path);
    std::vector<json> rows;
    double sum = 0.0;
    for (const auto& sample : samples) {
        const auto id = sample.at("id").get<std::string>();
        const auto output = sample.at("output").get<std::string>();
        const auto gt = sample.at("ground_truth").get<std::string>();
        const auto answer = extract_result(output);
        const double r_ans = ordinal_reward(answer.value_or(""), gt, space, reward);
        const int r_fmt = format_reward(output);
        const double total = total_reward(r_ans, r_fmt, reward);
        sum += total;
        rows.push_back({{"id", id},
                        {"prediction", answer ? json(*answer) : json(nullptr)},
                        {"answer_reward", r_ans},
                        {"format_reward", r_fmt},
                        {"total_reward", total}});
    }
    write_jsonl(s.out() / "rewards.jsonl", rows);
    write_json(s.out() / "reward_summary.json",
               {{"samples", rows.size()}, {"mean_total_reward", rows.empty() ? 0.0 : sum / static_cast<double>(rows.size())}});
    return kExitOk;
}

int cmd_filter(const CommonArgs& args, const std::string& rollouts_path, const std::string& labels_path, double lo,
               double hi) {
    Session s(args);
    const OrdinalLabelSpace space = label_space(s, labels_path);
    const auto rollouts = read_jsonl(rollouts_path);
    std::vector<ScoredSample> scored;
    std::vector<json> rows;
    for (const auto& r : rollouts) {
        std::vector<std::string> verdicts;
        for (const auto& v : r.at("verdicts")) {
            const auto raw = v.get<std::string>();
            verdicts.push_back(extract_result(raw).value_or(raw));
        }
        const auto id = r.at("id").get<std::string>();
        const double s_avg = consistency_score(verdicts, r.at("ground_truth").get<std::string>(), space);
        scored.push_back({id, s_avg});
        rows.push_back({{"id", id}, {"s_avg", s_avg}});
    }
    const auto kept = divergence_filter(scored, lo, hi);
    const std::set<std::string> keep(kept.begin(), kept.end());
    std::vector<json> kept_rows;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i]["kept"] = keep.count(rows[i]["id"].get<std::string>()) == 1;
        if (rows[i]["kept"].get<bool>()) {
            kept_rows.push_back(rollouts[i]);
        }
    }
    write_jsonl(s.out() / "scores.jsonl", rows);
    write_jsonl(s.out() / "kept.jsonl", kept_rows);
    return kExitOk;
}

int cmd_bench(const CommonArgs& args) {
    Session s(args);
    run_benchmark(s.cfg(), s.out());
    return kExitOk;
}

void print_error(const std::string& kind, const std::string& message, const json& extra = json::object()) {
    json j{{"error", kind}, {"message", message}};
    j.update(extra);
    std::cerr << j.dump() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"disputekit: synthetic trajectory disputes, rule calibration, precedent retrieval and "
                 "multi-agent adjudication"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "disputekit 0.1.0");

    CommonArgs common;
    std::optional<std::size_t> count;
    std::string orders, rules, store, history, labels, samples, rollouts;
    std::optional<std::size_t> k;
    bool insight = false;
    bool binary = false;
    double lo = 0.2;
    double hi = 0.8;
    AdjudicateArgs adj;

    auto* synth = app.add_subcommand("synth", "build the road network, rendered dataset and disputed orders");
    add_common(synth, common, true);
    synth->add_option("--count", count, "number of samples (default: dataset.count)");

    auto* calibrate = app.add_subcommand("calibrate", "train per-rule applicability classifiers");
    add_common(calibrate, common, false);
    calibrate->add_option("--orders", orders, "orders JSONL with applicable_rules")->required()->check(CLI::ExistingFile);
    calibrate->add_option("--rules", rules, "rule base JSON (default: built-in)")->check(CLI::ExistingFile);

    auto* retrieve = app.add_subcommand("retrieve", "top-K precedents for each order");
    add_common(retrieve, common, false);
    retrieve->add_option("--orders", orders, "query orders JSONL")->required()->check(CLI::ExistingFile);
    auto* store_opt = retrieve->add_option("--store", store, "precedent store JSONL")->check(CLI::ExistingFile);
    auto* hist_opt =
        retrieve->add_option("--history", history, "history orders JSONL to build the store from")->check(CLI::ExistingFile);
    store_opt->excludes(hist_opt);
    retrieve->add_option("--k", k, "neighbors per order (default: retrieval.k)")->check(CLI::PositiveNumber);
    retrieve->add_flag("--insight", insight, "also summarize the neighbors with the summarizer backend");

    auto* adjudicate_cmd = app.add_subcommand("adjudicate", "run the adjudication pipeline on orders");
    add_common(adjudicate_cmd, common, true);
    adjudicate_cmd->add_option("--orders", adj.orders, "orders JSONL")->required()->check(CLI::ExistingFile);
    adjudicate_cmd->add_option("--rules", adj.rules, "rule base JSON (default: built-in)")->check(CLI::ExistingFile);
    adjudicate_cmd->add_option("--ensemble", adj.ensemble, "calibrator ensemble from `calibrate`")
        ->check(CLI::ExistingFile);
    auto* adj_store = adjudicate_cmd->add_option("--store", adj.store, "precedent store JSONL")->check(CLI::ExistingFile);
    auto* adj_hist =
        adjudicate_cmd->add_option("--history", adj.history, "history orders JSONL")->check(CLI::ExistingFile);
    adj_store->excludes(adj_hist);
    adjudicate_cmd->add_flag("--no-refinement", adj.no_refinement, "skip the refiner stage");
    adjudicate_cmd->add_flag("--no-insight", adj.no_insight, "omit the precedent insight from the context");

    auto* score = app.add_subcommand("score", "reward model outputs against ground truth");
    add_common(score, common, false);
    score->add_option("--samples", samples, "JSONL of {id, output, ground_truth}")->required()->check(CLI::ExistingFile);
    score->add_option("--labels", labels, "ordinal label space JSON (default: config labels)")->check(CLI::ExistingFile);
    score->add_flag("--binary", binary, "binary answer reward instead of ordinal");

    auto* filter = app.add_subcommand("filter", "keep samples whose rollout consistency lies in [lo, hi]");
    add_common(filter, common, false);
    filter->add_option("--rollouts", rollouts, "JSONL of {id, ground_truth, verdicts}")->required()->check(CLI::ExistingFile);
    filter->add_option("--labels", labels, "ordinal label space JSON (default: config labels)")->check(CLI::ExistingFile);
    filter->add_option("--lo", lo, "lower consistency bound")->check(CLI::Range(0.0, 1.0));
    filter->add_option("--hi", hi, "upper consistency bound")->check(CLI::Range(0.0, 1.0));

    auto* bench = app.add_subcommand("bench", "end-to-end benchmark with ablations");
    add_common(bench, common, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    // Decide the usage-level checks before doing any work.
    if (retrieve->parsed() && store.empty() && history.empty()) {
        print_error("usage", "retrieve needs --store or --history");
        return kExitUsage;
    }
    if (adjudicate_cmd->parsed() && adj.store.empty() && adj.history.empty()) {
        print_error("usage", "adjudicate needs --store or --history");
        return kExitUsage;
    }
    if (filter->parsed() && lo > hi) {
        print_error("usage", "--lo must not exceed --hi");
        return kExitUsage;
    }

    try {
        if (synth->parsed()) return cmd_synth(common, count);
        if (calibrate->parsed()) return cmd_calibrate(common, orders, rules);
        if (retrieve->parsed()) return cmd_retrieve(common, orders, store, history, k, insight);
        if (adjudicate_cmd->parsed()) return cmd_adjudicate(common, adj);
        if (score->parsed()) return cmd_score(common, samples, labels, binary);
        if (filter->parsed()) return cmd_filter(common, rollouts, labels, lo, hi);
        if (bench->parsed()) return cmd_bench(common);
    } catch (const ConfigError& ex) {
        print_error("config", ex.what(), {{"field", ex.field()}});
        return kExitUsage;
    } catch (const AdjudicationError& ex) {
        print_error("adjudication", ex.what(), {{"stage", ex.stage()}});
        return kExitRuntime;
    } catch (const std::exception& ex) {
        print_error("runtime", ex.what());
        return kExitRuntime;
    }
    return kExitUsage;
}
