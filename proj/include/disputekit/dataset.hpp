// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "disputekit/mutation.hpp"
#include "disputekit/render.hpp"
#include "disputekit/road_network.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace disputekit {

/// Templated English description keyed by the trajectory label, filled from
/// the route's instruction list and the mutation provenance.
std::string instantiate_caption(const Route& route, const LabeledTrajectory& traj);

struct DatasetRecord {
    std::string image_path; // relative to the dataset root
    std::string caption;
    TrajectoryLabel label = TrajectoryLabel::compliant;
    Provenance provenance;
    std::string route_id;
    std::string sample_id;
    GeoPoint start;           // l_start
    GeoPoint end;             // l_end
    double route_length = 0.0;
    std::size_t turn_count = 0;
    TrajectoryStats stats;    // executed path against the plan
};

nlohmann::json to_json(const DatasetRecord& r);

using ClassMix = std::map<TrajectoryLabel, double>;

/// Realized per-class counts for n samples: floor shares plus largest
/// remainders (ties go to the earlier label). Throws DatasetError unless the
/// ratios are non-negative and sum to 1 within 1e-6.
std::map<TrajectoryLabel, std::size_t> class_counts(const ClassMix& mix, std::size_t n);

struct DatasetOptions {
    std::uint64_t seed = 0;
    double min_poi_distance = 500.0;
    int max_attempts = 50; // resamples per record before giving up
    unsigned workers = 0;  // 0 = hardware concurrency
};

/// Renders n image/caption pairs under out_dir/images and writes
/// out_dir/manifest.jsonl. Infeasible mutations are logged and resampled.
std::vector<DatasetRecord> build_dataset(const RoadNetwork& net, std::size_t n_samples, const ClassMix& mix,
                                         const MutationConfig& cfg, const RenderSpec& spec,
                                         const std::filesystem::path& out_dir, const DatasetOptions& options = {});

} // namespace disputekit
