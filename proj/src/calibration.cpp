// SPDX-License-Identifier: Apache-2.0
#include "disputekit/calibration.hpp"

#include "disputekit/error.hpp"
#include "disputekit/log.hpp"
#include "disputekit/parallel.hpp"
#include "disputekit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_set>

namespace disputekit {

RuleBase::RuleBase(std::vector<Rule> rules) : rules_(std::move(rules)) {
    std::unordered_set<std::string> seen;
    for (const auto& r : rules_) {
        if (r.id.empty()) {
            throw CalibrationError("rule id must be non-empty");
        }
        if (r.clause.empty()) {
            throw CalibrationError("rule " + r.id + " has an empty clause");
        }
        if (!seen.insert(r.id).second) {
            throw CalibrationError("duplicate rule id " + r.id);
        }
    }
}

const Rule* RuleBase::find(std::string_view id) const {
    for (const auto& r : rules_) {
        if (r.id == id) {
            return &r;
        }
    }
    return nullptr;
}

RuleBase rule_base_from_json(const nlohmann::json& j) {
    const nlohmann::json& arr = j.is_object() ? j.at("rules") : j;
    if (!arr.is_array()) {
        throw CalibrationError("rule base must be an array of rules");
    }
    std::vector<Rule> rules;
    for (const auto& r : arr) {
        rules.push_back({r.at("id").get<std::string>(), r.at("clause").get<std::string>()});
    }
    return RuleBase(std::move(rules));
}

nlohmann::json to_json(const RuleBase& base) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : base.rules()) {
        arr.push_back({{"id", r.id}, {"clause", r.clause}});
    }
    return {{"rules", arr}};
}

RuleBase read_rule_base(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw CalibrationError("cannot open rule base " + path);
    }
    try {
        return rule_base_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& ex) {
        throw CalibrationError(path + ": " + ex.what());
    }
}

std::vector<double> FeatureVector::concat() const {
    std::vector<double> out(tabular);
    out.insert(out.end(), semantic.begin(), semantic.end());
    return out;
}

namespace {

const std::vector<std::string> kFixedFields{"hour", "driver_x", "driver_y", "start_x", "start_y",
                                            "end_x", "end_y", "cancel_code"};

double fixed_value(const OrderRecord& o, std::size_t i) {
    switch (i) {
    case 0: return static_cast<double>(((o.timestamp / 3600) % 24 + 24) % 24);
    case 1: return o.init.driver_location.x;
    case 2: return o.init.driver_location.y;
    case 3: return o.init.start.x;
    case 4: return o.init.start.y;
    case 5: return o.init.end.x;
    case 6: return o.init.end.y;
    default: return static_cast<double>(o.cancel_code);
    }
}

double lookup(const std::map<std::string, double>& m, const std::string& key) {
    const auto it = m.find(key);
    return it == m.end() ? 0.0 : it->second;
}

} // namespace

FeatureSpace FeatureSpace::fit(std::span<const OrderRecord> corpus) {
    if (corpus.empty()) {
        throw CalibrationError("cannot fit features on an empty corpus");
    }
    std::set<std::string> driver_keys;
    std::set<std::string> pass_keys;
    for (const auto& o : corpus) {
        for (const auto& [k, v] : o.driver_stats) {
            driver_keys.insert(k);
        }
        for (const auto& [k, v] : o.passenger_stats) {
            pass_keys.insert(k);
        }
    }
    FeatureSpace fs;
    fs.names_ = kFixedFields;
    for (const auto& k : driver_keys) {
        fs.names_.push_back("driver." + k);
    }
    for (const auto& k : pass_keys) {
        fs.names_.push_back("pass." + k);
    }
    const std::size_t d = fs.names_.size();
    fs.min_.assign(d, std::numeric_limits<double>::infinity());
    fs.max_.assign(d, -std::numeric_limits<double>::infinity());
    for (const auto& o : corpus) {
        const auto raw = fs.raw_tabular(o);
        for (std::size_t i = 0; i < d; ++i) {
            fs.min_[i] = std::min(fs.min_[i], raw[i]);
            fs.max_[i] = std::max(fs.max_[i], raw[i]);
        }
    }
    return fs;
}

std::vector<double> FeatureSpace::raw_tabular(const OrderRecord& o) const {
    std::vector<double> out(names_.size());
    for (std::size_t i = 0; i < names_.size(); ++i) {
        const auto& name = names_[i];
        if (i < kFixedFields.size() && name == kFixedFields[i]) {
            out[i] = fixed_value(o, i);
        } else if (name.rfind("driver.", 0) == 0) {
            out[i] = lookup(o.driver_stats, name.substr(7));
        } else if (name.rfind("pass.", 0) == 0) {
            out[i] = lookup(o.passenger_stats, name.substr(5));
        }
        if (!std::isfinite(out[i])) {
            throw CalibrationError("order " + o.id + ": non-finite value for " + name);
        }
    }
    return out;
}

FeatureVector FeatureSpace::build(const OrderRecord& order, const Embedder& embedder) const {
    FeatureVector fv;
    fv.tabular = raw_tabular(order);
    for (std::size_t i = 0; i < fv.tabular.size(); ++i) {
        const double span = max_[i] - min_[i];
        fv.tabular[i] = span > 0.0 ? (fv.tabular[i] - min_[i]) / span : 0.0;
    }
    fv.semantic = embedder.embed(semantic_text(order));
    return fv;
}

nlohmann::json FeatureSpace::to_json() const { return {{"names", names_}, {"min", min_}, {"max", max_}}; }

FeatureSpace FeatureSpace::from_json(const nlohmann::json& j) {
    FeatureSpace fs;
    fs.names_ = j.at("names").get<std::vector<std::string>>();
    fs.min_ = j.at("min").get<std::vector<double>>();
    fs.max_ = j.at("max").get<std::vector<double>>();
    if (fs.min_.size() != fs.names_.size() || fs.max_.size() != fs.names_.size()) {
        throw CalibrationError("feature space statistics do not match its schema");
    }
    return fs;
}

FeatureVector build_features(const OrderRecord& order, const FeatureSpace& space, const Embedder& embedder) {
    return space.build(order, embedder);
}

std::size_t select_family(std::span<const FamilyScore> candidates) {
    if (candidates.empty()) {
        throw CalibrationError("no candidate families to select from");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        const auto& b = candidates[best];
        if (c.recall > b.recall || (c.recall == b.recall && c.precision > b.precision)) {
            best = i;
        }
    }
    return best;
}

void CalibrationOptions::validate() const {
    if (families.empty()) {
        throw ConfigError("calibration.families", "at least one classifier family is required");
    }
    for (Family f : families) {
        if (f == Family::constant) {
            throw ConfigError("calibration.families", "constant is not a trainable family");
        }
    }
    if (!(val_split > 0.0 && val_split < 1.0)) {
        throw ConfigError("calibration.val_split", "must lie in (0, 1)");
    }
    if (!(max_ratio >= 1.0)) {
        throw ConfigError("calibration.max_ratio", "must be at least 1");
    }
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw ConfigError("calibration.threshold", "must lie in (0, 1]");
    }
}

CalibratorEnsemble::CalibratorEnsemble(FeatureSpace features, std::shared_ptr<const Embedder> embedder,
                                       std::vector<RuleCalibrator> rules, CalibrationOptions options)
    : features_(std::move(features)), embedder_(std::move(embedder)), rules_(std::move(rules)),
      options_(std::move(options)) {
    if (!embedder_) {
        throw CalibrationError("ensemble requires an embedder");
    }
}

const RuleCalibrator* CalibratorEnsemble::find(std::string_view rule_id) const {
    for (const auto& r : rules_) {
        if (r.rule_id == rule_id) {
            return &r;
        }
    }
    return nullptr;
}

FeatureVector CalibratorEnsemble::build_features(const OrderRecord& order) const {
    return features_.build(order, *embedder_);
}

std::vector<std::string> CalibratorEnsemble::predict(const OrderRecord& order) const {
    const auto x = build_features(order).concat();
    std::vector<std::string> out;
    for (const auto& r : rules_) {
        if (r.predict(x)) {
            out.push_back(r.rule_id);
        }
    }
    return out;
}

nlohmann::json CalibratorEnsemble::to_json() const {
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& r : rules_) {
        nlohmann::json cands = nlohmann::json::array();
        for (const auto& c : r.candidates) {
            cands.push_back({{"family", family_name(c.family)}, {"recall", c.recall}, {"precision", c.precision}});
        }
        rules.push_back({{"rule_id", r.rule_id},
                         {"family", family_name(r.family)},
                         {"threshold", r.threshold},
                         {"val_recall", r.val_recall},
                         {"val_precision", r.val_precision},
                         {"fail_open", r.fail_open},
                         {"positives", r.positives},
                         {"negatives", r.negatives},
                         {"candidates", cands},
                         {"model", r.model->to_json()}});
    }
    nlohmann::json families = nlohmann::json::array();
    for (Family f : options_.families) {
        families.push_back(family_name(f));
    }
    return {{"format", "disputekit-ensemble"},
            {"version", 1},
            {"embedder", embedder_->name()},
            {"features", features_.to_json()},
            {"metadata",
             {{"seed", options_.seed},
              {"val_split", options_.val_split},
              {"max_ratio", options_.max_ratio},
              {"threshold", options_.threshold},
              {"families", families}}},
            {"rules", rules}};
}

CalibratorEnsemble CalibratorEnsemble::from_json(const nlohmann::json& j) {
    try {
        if (j.value("format", std::string{}) != "disputekit-ensemble") {
            throw CalibrationError("not an ensemble document");
        }
        CalibrationOptions opts;
        const auto& meta = j.at("metadata");
        opts.seed = meta.at("seed").get<std::uint64_t>();
        opts.val_split = meta.at("val_split").get<double>();
        opts.max_ratio = meta.at("max_ratio").get<double>();
        opts.threshold = meta.at("threshold").get<double>();
        opts.families.clear();
        for (const auto& f : meta.at("families")) {
            opts.families.push_back(parse_family(f.get<std::string>()));
        }
        std::vector<RuleCalibrator> rules;
        for (const auto& r : j.at("rules")) {
            RuleCalibrator rc;
            rc.rule_id = r.at("rule_id").get<std::string>();
            rc.family = parse_family(r.at("family").get<std::string>());
            rc.threshold = r.at("threshold").get<double>();
            rc.val_recall = r.at("val_recall").get<double>();
            rc.val_precision = r.at("val_precision").get<double>();
            rc.fail_open = r.at("fail_open").get<bool>();
            rc.positives = r.value("positives", std::size_t{0});
            rc.negatives = r.value("negatives", std::size_t{0});
            for (const auto& c : r.value("candidates", nlohmann::json::array())) {
                rc.candidates.push_back({parse_family(c.at("family").get<std::string>()),
                                         c.at("recall").get<double>(), c.at("precision").get<double>()});
            }
            rc.model = classifier_from_json(r.at("model"));
            rules.push_back(std::move(rc));
        }
        return CalibratorEnsemble(FeatureSpace::from_json(j.at("features")),
                                  make_embedder(j.at("embedder").get<std::string>()), std::move(rules),
                                  std::move(opts));
    } catch (const nlohmann::json::exception& ex) {
        throw CalibrationError(std::string("malformed ensemble: ") + ex.what());
    }
}

void CalibratorEnsemble::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) {
        throw CalibrationError("cannot write ensemble to " + path);
    }
    out << to_json().dump() << "\n";
}

CalibratorEnsemble CalibratorEnsemble::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw CalibrationError("cannot open ensemble " + path);
    }
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& ex) {
        throw CalibrationError(path + ": " + ex.what());
    }
}

namespace {

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
};

// Orders are split by hashing their ids so the split does not depend on
// dataset order.
Split split_indices(std::span<const OrderRecord> dataset, double val_split, std::uint64_t seed) {
    std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
    keyed.reserve(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        keyed.emplace_back(derive_seed(seed, "split:" + dataset[i].id), i);
    }
    std::sort(keyed.begin(), keyed.end());
    const auto n_val = static_cast<std::size_t>(std::llround(val_split * static_cast<double>(dataset.size())));
    Split s;
    for (std::size_t k = 0; k < keyed.size(); ++k) {
        (k < n_val ? s.val : s.train).push_back(keyed[k].second);
    }
    return s;
}

RuleCalibrator train_rule(const std::string& rule_id, const Matrix& x, const std::vector<std::vector<int>>& y_all,
                          std::size_t column, const Split& split, std::span<const OrderRecord> dataset,
                          const CalibrationOptions& opts) {
    RuleCalibrator rc;
    rc.rule_id = rule_id;
    rc.threshold = opts.threshold;

    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i : split.train) {
        (y_all[i][column] ? pos : neg).push_back(i);
    }
    if (pos.size() < 2 || neg.size() < 2) {
        rc.family = Family::constant;
        rc.fail_open = true;
        rc.positives = pos.size();
        rc.negatives = neg.size();
        rc.model = make_constant(1.0);
        log::event(log::Level::warn, "calibration.fail_open",
                   {{"rule", rule_id}, {"positives", pos.size()}, {"negatives", neg.size()}});
        return rc;
    }

    // Down-sample the majority class. Candidates are ordered by a per-order
    // key so the retained subset is independent of dataset order.
    auto& major = pos.size() > neg.size() ? pos : neg;
    const auto& minor = pos.size() > neg.size() ? neg : pos;
    const auto cap = static_cast<std::size_t>(std::floor(opts.max_ratio * static_cast<double>(minor.size())));
    if (major.size() > cap) {
        const std::uint64_t rule_seed = derive_seed(opts.seed, "downsample:" + rule_id);
        std::sort(major.begin(), major.end(), [&](std::size_t a, std::size_t b) {
            const auto ka = derive_seed(rule_seed, dataset[a].id);
            const auto kb = derive_seed(rule_seed, dataset[b].id);
            return ka != kb ? ka < kb : dataset[a].id < dataset[b].id;
        });
        major.resize(cap);
    }
    std::vector<std::size_t> rows(pos);
    rows.insert(rows.end(), neg.begin(), neg.end());
    std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) { return dataset[a].id < dataset[b].id; });
    rc.positives = pos.size();
    rc.negatives = neg.size();

    Matrix xt;
    std::vector<int> yt;
    xt.reserve(rows.size());
    for (std::size_t i : rows) {
        xt.push_back(x[i]);
        yt.push_back(y_all[i][column]);
    }

    std::vector<std::shared_ptr<const BinaryClassifier>> models;
    for (Family f : opts.families) {
        std::shared_ptr<const BinaryClassifier> model = train_family(f, xt, yt);
        double tp = 0.0;
        double fp = 0.0;
        double fn = 0.0;
        for (std::size_t i : split.val) {
            const bool predicted = model->score(x[i]) >= opts.threshold;
            const bool actual = y_all[i][column] != 0;
            tp += predicted && actual;
            fp += predicted && !actual;
            fn += !predicted && actual;
        }
        // An empty validation class counts as perfect so it does not bias selection.
        const double recall = tp + fn > 0 ? tp / (tp + fn) : 1.0;
        const double precision = tp + fp > 0 ? tp / (tp + fp) : 1.0;
        rc.candidates.push_back({f, recall, precision});
        models.push_back(std::move(model));
    }
    const std::size_t best = select_family(rc.candidates);
    rc.family = rc.candidates[best].family;
    rc.val_recall = rc.candidates[best].recall;
    rc.val_precision = rc.candidates[best].precision;
    rc.model = models[best];
    log::event(log::Level::debug, "calibration.rule",
               {{"rule", rule_id}, {"family", family_name(rc.family)}, {"val_recall", rc.val_recall}});
    return rc;
}

} // namespace

CalibratorEnsemble train_calibrators(std::span<const OrderRecord> dataset, const RuleBase& base,
                                     std::shared_ptr<const Embedder> embedder, const CalibrationOptions& options) {
    options.validate();
    if (!embedder) {
        throw CalibrationError("calibration requires an embedder");
    }
    if (base.empty()) {
        throw CalibrationError("rule base is empty");
    }
    FeatureSpace space = FeatureSpace::fit(dataset);
    Matrix x(dataset.size());
    std::vector<std::vector<int>> y(dataset.size(), std::vector<int>(base.size(), 0));
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        x[i] = space.build(dataset[i], *embedder).concat();
        for (const auto& id : dataset[i].applicable_rules) {
            for (std::size_t c = 0; c < base.size(); ++c) {
                if (base.rules()[c].id == id) {
                    y[i][c] = 1;
                }
            }
        }
    }
    const Split split = split_indices(dataset, options.val_split, options.seed);
    std::vector<RuleCalibrator> rules(base.size());
    parallel_for(base.size(), options.workers, [&](std::size_t c) {
        rules[c] = train_rule(base.rules()[c].id, x, y, c, split, dataset, options);
    });
    return CalibratorEnsemble(std::move(space), std::move(embedder), std::move(rules), options);
}

RuleBase prune_rules(const CalibratorEnsemble& ensemble, const RuleBase& base, const OrderRecord& order) {
    const auto x = ensemble.build_features(order).concat();
    std::vector<Rule> kept;
    for (const auto& r : base.rules()) {
        const RuleCalibrator* rc = ensemble.find(r.id);
        if (rc == nullptr) {
            throw CalibrationError("ensemble has no calibrator for rule " + r.id);
        }
        if (rc->predict(x)) {
            kept.push_back(r);
        }
    }
    return RuleBase(std::move(kept));
}

} // namespace disputekit
