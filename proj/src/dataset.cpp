// SPDX-License-Identifier: Apache-2.0
#include "disputekit/dataset.hpp"

#include "disputekit/error.hpp"
#include "disputekit/log.hpp"
#include "disputekit/parallel.hpp"
#include "disputekit/rng.hpp"
#include "disputekit/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace disputekit {

namespace {

std::string turns_phrase(std::size_t m) { return std::to_string(m) + (m == 1 ? " turn" : " turns"); }

std::string anchor_street(const Route& route, const Provenance& p) {
    if (!p.anchor_index || route.instructions.empty()) {
        return "an unnamed street";
    }
    return route.instructions[route.instruction_at(*p.anchor_index)].street;
}

std::string padded_id(char prefix, std::size_t i) { return text::format("%c%06zu", prefix, i); }

} // namespace

std::string instantiate_caption(const Route& route, const LabeledTrajectory& traj) {
    const std::size_t m = route.turn_count();
    const Provenance& p = traj.provenance;
    switch (traj.label) {
    case TrajectoryLabel::compliant:
        return "The driver followed the planned route through " + turns_phrase(m) + " without deviation.";
    case TrajectoryLabel::drift_only:
        return text::format("The driver followed the planned route through %s; the recorded positions show GPS "
                            "drift of about %.0f m.",
                            turns_phrase(m).c_str(), p.sigma.value_or(0.0));
    case TrajectoryLabel::unintentional_deviation:
        return text::format("The driver deviated from the planned route at intersection k_%zu on %s and rejoined "
                            "toward the destination; the plan had %s.",
                            p.anchor_intersection.value_or(0), anchor_street(route, p).c_str(),
                            turns_phrase(m).c_str());
    case TrajectoryLabel::reverse_driving:
        return text::format("The driver drove in reverse against the planned heading at intersection k_%zu on %s "
                            "for up to %.0f m and never reached the destination; the plan had %s.",
                            p.anchor_intersection.value_or(0), anchor_street(route, p).c_str(),
                            p.delta.value_or(0.0), turns_phrase(m).c_str());
    case TrajectoryLabel::arrival_then_leave:
        return text::format("The driver reached the destination after %s and departed after arriving, ending "
                            "about %.0f m away.",
                            turns_phrase(m).c_str(), p.escape_distance.value_or(0.0));
    }
    return {};
}

nlohmann::json to_json(const DatasetRecord& r) {
    return {{"image_path", r.image_path}, {"caption", r.caption},   {"label", label_name(r.label)},
            {"provenance", to_json(r.provenance)}, {"route_id", r.route_id}, {"sample_id", r.sample_id},
            {"start", {r.start.x, r.start.y}},
            {"end", {r.end.x, r.end.y}},
            {"route_length", r.route_length},
            {"turn_count", r.turn_count},
            {"stats",
             {{"reaches_destination", r.stats.reaches_destination},
              {"max_offset", r.stats.max_offset},
              {"post_arrival_travel", r.stats.post_arrival_travel},
              {"length", r.stats.length},
              {"detour", r.stats.detour}}}};
}

std::map<TrajectoryLabel, std::size_t> class_counts(const ClassMix& mix, std::size_t n) {
    double total = 0.0;
    for (const auto& [label, ratio] : mix) {
        if (!(ratio >= 0.0)) {
            throw DatasetError(std::string("negative class ratio for ") + label_name(label));
        }
        total += ratio;
    }
    if (std::abs(total - 1.0) > 1e-6) {
        throw DatasetError("class mix ratios must sum to 1");
    }
    std::map<TrajectoryLabel, std::size_t> counts;
    std::vector<std::pair<double, TrajectoryLabel>> remainders;
    std::size_t assigned = 0;
    for (const auto& [label, ratio] : mix) {
        const double exact = ratio * static_cast<double>(n);
        const auto whole = static_cast<std::size_t>(std::floor(exact + 1e-9));
        counts[label] = whole;
        assigned += whole;
        remainders.push_back({exact - static_cast<double>(whole), label});
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first + 1e-12; });
    for (std::size_t i = 0; assigned < n && i < remainders.size(); ++i, ++assigned) {
        ++counts[remainders[i].second];
    }
    return counts;
}

std::vector<DatasetRecord> build_dataset(const RoadNetwork& net, std::size_t n_samples, const ClassMix& mix,
                                         const MutationConfig& cfg, const RenderSpec& spec,
                                         const std::filesystem::path& out_dir, const DatasetOptions& options) {
    validate(cfg);
    validate(spec);
    const auto counts = class_counts(mix, n_samples);
    if (counts.count(TrajectoryLabel::drift_only) && counts.at(TrajectoryLabel::drift_only) > 0 && !(cfg.sigma > 0.0)) {
        throw DatasetError("drift_only samples requested with sigma = 0");
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir / "images", ec);
    if (ec) {
        throw DatasetError("cannot create " + (out_dir / "images").string() + ": " + ec.message());
    }
    std::ofstream manifest(out_dir / "manifest.jsonl", std::ios::trunc);
    if (!manifest) {
        throw DatasetError("cannot write " + (out_dir / "manifest.jsonl").string());
    }

    std::vector<TrajectoryLabel> plan;
    for (const auto& [label, count] : counts) {
        plan.insert(plan.end(), count, label);
    }
    Rng order_rng(derive_seed(options.seed, "class-order"));
    order_rng.shuffle(plan);

    std::vector<DatasetRecord> records(n_samples);
    parallel_for(n_samples, options.workers, [&](std::size_t i) {
        const std::uint64_t sample_seed = derive_seed(options.seed, "sample", i);
        for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
            const std::uint64_t seed = derive_seed(sample_seed, "attempt", static_cast<std::uint64_t>(attempt));
            try {
                const Route route = plan_route(net, sample_poi_pair(net, seed, options.min_poi_distance));
                MutationConfig local = cfg;
                local.seed = seed;
                const LabeledTrajectory traj = synthesize(plan[i], route, net, local);
                DatasetRecord& rec = records[i];
                rec.sample_id = padded_id('s', i);
                rec.route_id = padded_id('r', i);
                rec.image_path = "images/" + rec.sample_id + ".png";
                rec.caption = instantiate_caption(route, traj);
                rec.label = traj.label;
                rec.provenance = traj.provenance;
                rec.start = route.geo.front();
                rec.end = route.geo.back();
                rec.route_length = polyline_length(route.geo);
                rec.turn_count = route.turn_count();
                rec.stats = trajectory_stats(route, traj.path);
                write_png(out_dir / rec.image_path, render_pair(net, route, traj, spec));
                return;
            } catch (const MutationError& ex) {
                log::event(log::Level::info, "sample_resampled",
                           {{"sample", i}, {"attempt", attempt}, {"reason", ex.what()}});
            } catch (const RoutingError& ex) {
                log::event(log::Level::info, "sample_resampled",
                           {{"sample", i}, {"attempt", attempt}, {"reason", ex.what()}});
            } catch (const RenderError& ex) {
                throw DatasetError(ex.what());
            }
        }
        throw DatasetError(text::format("sample %zu: no feasible %s trajectory after %d attempts", i,
                                        label_name(plan[i]), options.max_attempts));
    });

    for (const DatasetRecord& rec : records) {
        manifest << to_json(rec).dump() << '\n';
    }
    if (!manifest) {
        throw DatasetError("failed writing manifest");
    }
    log::event(log::Level::info, "dataset_written", {{"records", records.size()}, {"out_dir", out_dir.string()}});
    return records;
}

} // namespace disputekit
