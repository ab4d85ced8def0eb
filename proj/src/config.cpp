// SPDX-License-Identifier: Apache-2.0
#include "disputekit/config.hpp"

#include "disputekit/error.hpp"
#include "disputekit/log.hpp"
#include "disputekit/rng.hpp"

#include <fstream>
#include <set>

namespace disputekit {

namespace {

// Reads fields of one JSON object and rejects keys nobody asked for.
class Section {
public:
    Section(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw ConfigError(path_.empty() ? "<root>" : path_, "must be an object");
        }
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    template <typename T>
    void get(const std::string& key, T& out) {
        if (!has(key)) {
            return;
        }
        try {
            out = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(field(key), "has the wrong type");
        }
    }

    Section sub(const std::string& key) {
        seen_.insert(key);
        return Section(j_.at(key), field(key));
    }

    const nlohmann::json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    void finish() const {
        for (const auto& [k, v] : j_.items()) {
            if (!seen_.count(k)) {
                throw ConfigError(field(k), "unknown key");
            }
        }
    }

private:
    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <typename Fn>
void with_section(Section& parent, const std::string& key, Fn&& fn) {
    if (!parent.has(key)) {
        return;
    }
    Section s = parent.sub(key);
    fn(s);
    s.finish();
}

std::map<AgentRole, std::string> role_map(Section& parent, const std::string& key) {
    std::map<AgentRole, std::string> out;
    if (!parent.has(key)) {
        return out;
    }
    const auto& j = parent.raw(key);
    if (!j.is_object()) {
        throw ConfigError(parent.field(key), "must be an object keyed by role");
    }
    for (const auto& [k, v] : j.items()) {
        AgentRole role;
        try {
            role = parse_role(k);
        } catch (const Error&) {
            throw ConfigError(parent.field(key) + "." + k, "unknown role");
        }
        if (!v.is_string()) {
            throw ConfigError(parent.field(key) + "." + k, "must be a string");
        }
        out[role] = v.get<std::string>();
    }
    return out;
}

void require(bool ok, const std::string& field, const std::string& msg) {
    if (!ok) {
        throw ConfigError(field, msg);
    }
}

} // namespace

std::uint64_t PipelineConfig::seed_for(std::string_view component) const { return derive_seed(seed, component); }

std::string PipelineConfig::resolve(const std::string& path) const {
    if (path.empty()) {
        return path;
    }
    const std::filesystem::path p(path);
    return p.is_absolute() || base_dir.empty() ? p.string() : (base_dir / p).string();
}

OrdinalLabelSpace PipelineConfig::label_space() const {
    if (!labels.present) {
        throw ConfigError("labels", "a labels section is required for this command");
    }
    return OrdinalLabelSpace(labels.labels);
}

CoaOptions PipelineConfig::coa_options() const {
    CoaOptions o;
    o.max_turns = coa.max_turns;
    o.max_retries = coa.max_retries;
    o.refine_reprompts = coa.refine_reprompts;
    o.include_insight = coa.include_insight;
    o.reveal_ground_truth = coa.reveal_ground_truth;
    auto path = [&](AgentRole r) {
        const auto it = coa.prompt_paths.find(r);
        return it == coa.prompt_paths.end() ? std::string{} : resolve(it->second);
    };
    o.prompts = load_prompts(path(AgentRole::adjudicator), path(AgentRole::analyst), path(AgentRole::refiner),
                             path(AgentRole::summarizer));
    return o;
}

void PipelineConfig::validate() const {
    require(network.width >= 3, "network.width", "must be at least 3");
    require(network.height >= 3, "network.height", "must be at least 3");
    require(network.spacing > 0, "network.spacing", "must be positive");
    require(network.jitter >= 0 && network.jitter < network.spacing / 2, "network.jitter",
            "must lie in [0, spacing / 2)");
    require(network.knockout_fraction >= 0 && network.knockout_fraction <= 0.3, "network.knockout_fraction",
            "must lie in [0, 0.3]");

    require(mutation.sigma >= 0, "mutation.sigma", "must be non-negative");
    require(mutation.lambda_min > 0, "mutation.lambda_min", "must be positive");
    require(mutation.lambda_max >= mutation.lambda_min, "mutation.lambda_max", "must be at least lambda_min");
    require(mutation.delta > 0, "mutation.delta", "must be positive");
    require(mutation.tau_thresh > 0, "mutation.tau_thresh", "must be positive");
    require(mutation.spacing > 0, "mutation.spacing", "must be positive");
    try {
        disputekit::validate(mutation);
    } catch (const Error& ex) {
        throw ConfigError("mutation", ex.what());
    }
    try {
        disputekit::validate(render);
    } catch (const Error& ex) {
        throw ConfigError("render", ex.what());
    }

    require(dataset.count >= 1, "dataset.count", "must be at least 1");
    require(dataset.min_poi_distance > 0, "dataset.min_poi_distance", "must be positive");
    require(dataset.max_attempts >= 1, "dataset.max_attempts", "must be at least 1");
    try {
        class_counts(dataset.class_mix, dataset.count);
    } catch (const Error& ex) {
        throw ConfigError("dataset.class_mix", ex.what());
    }

    calibration.validate();
    require(retrieval.k >= 1, "retrieval.k", "must be at least 1");
    try {
        make_embedder(retrieval.embedder);
    } catch (const Error& ex) {
        throw ConfigError("retrieval.embedder", ex.what());
    }
    require(coa.max_turns >= 1, "coa.max_turns", "must be at least 1");
    require(coa.max_retries >= 0, "coa.max_retries", "must be non-negative");
    require(coa.refine_reprompts >= 0, "coa.refine_reprompts", "must be non-negative");
    require(!coa.backend.empty(), "coa.backend", "must be non-empty");
    reward.validate();

    if (labels.present) {
        try {
            OrdinalLabelSpace space(labels.labels);
            for (const auto& l : space.labels()) {
                require(labels.grouping.count(l) == 1, "labels.grouping", "label " + l + " has no group");
            }
            for (const auto& [l, g] : labels.grouping) {
                require(space.contains(l), "labels.grouping", "unknown label " + l);
                require(!g.empty(), "labels.grouping", "group names must be non-empty");
            }
            for (TrajectoryLabel t : kTrajectoryLabels) {
                const auto it = labels.class_verdicts.find(label_name(t));
                require(it != labels.class_verdicts.end(), "labels.class_verdicts",
                        std::string("class ") + label_name(t) + " has no verdict");
                require(space.contains(it->second), "labels.class_verdicts", "unknown label " + it->second);
            }
            for (const auto& [c, l] : labels.class_verdicts) {
                require(parse_trajectory_label(c).has_value(), "labels.class_verdicts", "unknown class " + c);
            }
        } catch (const LabelSpaceError& ex) {
            throw ConfigError("labels.labels", ex.what());
        }
    }

    require(bench.history >= 1, "bench.history", "must be at least 1");
    require(bench.eval >= 1, "bench.eval", "must be at least 1");
    require(bench.ambiguous_share >= 0 && bench.ambiguous_share <= 1, "bench.ambiguous_share",
            "must lie in [0, 1]");
    static const std::set<std::string> known{"no_refinement", "no_insight", "no_calibration", "binary_reward"};
    for (const auto& a : bench.ablations) {
        require(known.count(a) == 1, "bench.ablations", "unknown ablation " + a);
    }
    static const std::set<std::string> levels{"debug", "info", "warn", "error", "off"};
    require(levels.count(log_level) == 1, "log_level", "must be one of debug, info, warn, error, off");
}

PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    PipelineConfig cfg;
    cfg.base_dir = base_dir;
    Section root(j, "");
    root.get("seed", cfg.seed);
    root.get("workers", cfg.workers);
    root.get("log_level", cfg.log_level);
    with_section(root, "network", [&](Section& s) {
        s.get("width", cfg.network.width);
        s.get("height", cfg.network.height);
        s.get("jitter", cfg.network.jitter);
        s.get("knockout_fraction", cfg.network.knockout_fraction);
        s.get("spacing", cfg.network.spacing);
    });
    with_section(root, "mutation", [&](Section& s) {
        s.get("sigma", cfg.mutation.sigma);
        s.get("lambda_min", cfg.mutation.lambda_min);
        s.get("lambda_max", cfg.mutation.lambda_max);
        s.get("delta", cfg.mutation.delta);
        s.get("tau_thresh", cfg.mutation.tau_thresh);
        s.get("tag_drift", cfg.mutation.tag_drift);
        s.get("drift_violations", cfg.mutation.drift_violations);
        s.get("spacing", cfg.mutation.spacing);
    });
    with_section(root, "render", [&](Section& s) {
        s.get("width", cfg.render.width);
        s.get("height", cfg.render.height);
        s.get("margin", cfg.render.margin);
        s.get("road_px", cfg.render.road_px);
        s.get("nav_px", cfg.render.nav_px);
        s.get("real_px", cfg.render.real_px);
        s.get("marker_radius", cfg.render.marker_radius);
    });
    with_section(root, "dataset", [&](Section& s) {
        s.get("count", cfg.dataset.count);
        s.get("min_poi_distance", cfg.dataset.min_poi_distance);
        s.get("max_attempts", cfg.dataset.max_attempts);
        if (s.has("class_mix")) {
            const auto& mix = s.raw("class_mix");
            if (!mix.is_object()) {
                throw ConfigError("dataset.class_mix", "must map class names to shares");
            }
            cfg.dataset.class_mix.clear();
            for (const auto& [k, v] : mix.items()) {
                const auto label = parse_trajectory_label(k);
                if (!label) {
                    throw ConfigError("dataset.class_mix." + k, "unknown class");
                }
                if (!v.is_number()) {
                    throw ConfigError("dataset.class_mix." + k, "must be a number");
                }
                cfg.dataset.class_mix[*label] = v.get<double>();
            }
        }
    });
    with_section(root, "calibration", [&](Section& s) {
        if (s.has("families")) {
            std::vector<std::string> names;
            s.get("families", names);
            cfg.calibration.families.clear();
            for (const auto& n : names) {
                try {
                    cfg.calibration.families.push_back(parse_family(n));
                } catch (const Error&) {
                    throw ConfigError("calibration.families", "unknown family " + n);
                }
            }
        }
        s.get("val_split", cfg.calibration.val_split);
        s.get("max_ratio", cfg.calibration.max_ratio);
        s.get("threshold", cfg.calibration.threshold);
    });
    with_section(root, "retrieval", [&](Section& s) {
        s.get("k", cfg.retrieval.k);
        s.get("embedder", cfg.retrieval.embedder);
    });
    with_section(root, "coa", [&](Section& s) {
        s.get("max_turns", cfg.coa.max_turns);
        s.get("max_retries", cfg.coa.max_retries);
        s.get("refine_reprompts", cfg.coa.refine_reprompts);
        s.get("include_insight", cfg.coa.include_insight);
        s.get("reveal_ground_truth", cfg.coa.reveal_ground_truth);
        s.get("backend", cfg.coa.backend);
        cfg.coa.role_backends = role_map(s, "role_backends");
        cfg.coa.prompt_paths = role_map(s, "prompts");
    });
    with_section(root, "reward", [&](Section& s) {
        s.get("lambda_ans", cfg.reward.lambda_ans);
        s.get("lambda_fmt", cfg.reward.lambda_fmt);
        s.get("beta", cfg.reward.beta);
    });
    with_section(root, "labels", [&](Section& s) {
        cfg.labels.present = true;
        if (!s.has("labels") || !s.has("grouping") || !s.has("class_verdicts")) {
            throw ConfigError("labels", "needs labels, grouping and class_verdicts");
        }
        s.get("labels", cfg.labels.labels);
        s.get("grouping", cfg.labels.grouping);
        s.get("class_verdicts", cfg.labels.class_verdicts);
    });
    with_section(root, "bench", [&](Section& s) {
        s.get("history", cfg.bench.history);
        s.get("eval", cfg.bench.eval);
        s.get("ablations", cfg.bench.ablations);
        s.get("rules", cfg.bench.rules);
        s.get("ambiguous_share", cfg.bench.ambiguous_share);
    });
    root.finish();

    cfg.network.seed = cfg.seed_for("network");
    cfg.mutation.seed = cfg.seed_for("mutation");
    cfg.calibration.seed = cfg.seed_for("calibration");
    cfg.calibration.workers = cfg.workers;
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("<file>", "cannot open config " + path);
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& ex) {
        throw ConfigError("<file>", path + ": " + ex.what());
    }
    return config_from_json(j, std::filesystem::path(path).parent_path());
}

nlohmann::json to_json(const PipelineConfig& c) {
    nlohmann::json mix = nlohmann::json::object();
    for (const auto& [k, v] : c.dataset.class_mix) {
        mix[label_name(k)] = v;
    }
    nlohmann::json families = nlohmann::json::array();
    for (Family f : c.calibration.families) {
        families.push_back(family_name(f));
    }
    auto roles = [](const std::map<AgentRole, std::string>& m) {
        nlohmann::json out = nlohmann::json::object();
        for (const auto& [r, v] : m) {
            out[role_name(r)] = v;
        }
        return out;
    };
    nlohmann::json j{
        {"seed", c.seed},
        {"workers", c.workers},
        {"log_level", c.log_level},
        {"network",
         {{"width", c.network.width},
          {"height", c.network.height},
          {"jitter", c.network.jitter},
          {"knockout_fraction", c.network.knockout_fraction},
          {"spacing", c.network.spacing}}},
        {"mutation",
         {{"sigma", c.mutation.sigma},
          {"lambda_min", c.mutation.lambda_min},
          {"lambda_max", c.mutation.lambda_max},
          {"delta", c.mutation.delta},
          {"tau_thresh", c.mutation.tau_thresh},
          {"tag_drift", c.mutation.tag_drift},
          {"drift_violations", c.mutation.drift_violations},
          {"spacing", c.mutation.spacing}}},
        {"render",
         {{"width", c.render.width},
          {"height", c.render.height},
          {"margin", c.render.margin},
          {"road_px", c.render.road_px},
          {"nav_px", c.render.nav_px},
          {"real_px", c.render.real_px},
          {"marker_radius", c.render.marker_radius}}},
        {"dataset",
         {{"count", c.dataset.count},
          {"class_mix", mix},
          {"min_poi_distance", c.dataset.min_poi_distance},
          {"max_attempts", c.dataset.max_attempts}}},
        {"calibration",
         {{"families", families},
          {"val_split", c.calibration.val_split},
          {"max_ratio", c.calibration.max_ratio},
          {"threshold", c.calibration.threshold}}},
        {"retrieval", {{"k", c.retrieval.k}, {"embedder", c.retrieval.embedder}}},
        {"coa",
         {{"max_turns", c.coa.max_turns},
          {"max_retries", c.coa.max_retries},
          {"refine_reprompts", c.coa.refine_reprompts},
          {"include_insight", c.coa.include_insight},
          {"reveal_ground_truth", c.coa.reveal_ground_truth},
          {"backend", c.coa.backend},
          {"role_backends", roles(c.coa.role_backends)},
          {"prompts", roles(c.coa.prompt_paths)}}},
        {"reward", {{"lambda_ans", c.reward.lambda_ans}, {"lambda_fmt", c.reward.lambda_fmt}, {"beta", c.reward.beta}}},
        {"bench",
         {{"history", c.bench.history},
          {"eval", c.bench.eval},
          {"ablations", c.bench.ablations},
          {"rules", c.bench.rules},
          {"ambiguous_share", c.bench.ambiguous_share}}},
        {"derived_seeds",
         {{"network", c.network.seed},
          {"mutation", c.mutation.seed},
          {"calibration", c.calibration.seed},
          {"dataset", c.seed_for("dataset")},
          {"orders", c.seed_for("orders")}}},
    };
    if (c.labels.present) {
        j["labels"] = {{"labels", c.labels.labels},
                       {"grouping", c.labels.grouping},
                       {"class_verdicts", c.labels.class_verdicts}};
    }
    return j;
}

} // namespace disputekit
