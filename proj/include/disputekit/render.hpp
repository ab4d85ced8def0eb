// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Raster rendering of a planned route and an executed trajectory over the
/// road map, plus PNG I/O.

#include "disputekit/mutation.hpp"
#include "disputekit/road_network.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace disputekit {

struct Rgba {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    std::uint8_t a = 255;

    friend bool operator==(Rgba, Rgba) = default;
};

struct RenderSpec {
    int width = 768;
    int height = 768;
    double margin = 0.05; // viewport padding as a share of the larger extent
    Rgba bg_color{255, 255, 255, 255};
    Rgba road_color{170, 170, 170, 255};
    Rgba nav_color{40, 90, 220, 255};
    Rgba real_color{220, 40, 40, 255};
    Rgba start_color{30, 160, 70, 255};
    Rgba end_color{20, 20, 20, 255};
    double road_px = 4.0;
    double nav_px = 3.0;
    double real_px = 3.0;
    double marker_radius = 6.0;
};

/// Throws RenderError when the spec is out of range.
void validate(const RenderSpec& spec);

/// 8-bit RGBA raster, row-major from the top-left corner.
class Image {
public:
    Image() = default;
    Image(int width, int height, Rgba fill);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    Rgba at(int x, int y) const;
    void set(int x, int y, Rgba c);
    const std::vector<std::uint8_t>& bytes() const noexcept { return data_; }
    std::vector<std::uint8_t>& bytes() noexcept { return data_; }

    friend bool operator==(const Image&, const Image&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Background roads, then the planned route, then the executed path, then
/// start/end markers. The viewport frames route ∪ trajectory.
Image render_pair(const RoadNetwork& net, const Route& route, const LabeledTrajectory& traj, const RenderSpec& spec);

/// Same framing rules with only the planned route drawn over the roads.
Image render_route(const RoadNetwork& net, const Route& route, const RenderSpec& spec);

std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_png(const std::vector<std::uint8_t>& bytes);
void write_png(const std::filesystem::path& path, const Image& image);
Image read_png(const std::filesystem::path& path);

} // namespace disputekit
