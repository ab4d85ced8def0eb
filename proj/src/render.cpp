// SPDX-License-Identifier: Apache-2.0
#include "disputekit/render.hpp"

#include "disputekit/error.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>

namespace disputekit {

namespace {

/// World-to-pixel transform: uniform scale, north up, centered.
struct Viewport {
    double cx = 0.0;
    double cy = 0.0;
    double scale = 1.0;
    double half_w = 0.0;
    double half_h = 0.0;

    Vec2 to_pixel(GeoPoint p) const { return {half_w + (p.x - cx) * scale, half_h - (p.y - cy) * scale}; }
};

Viewport fit_viewport(const BBox& box, const RenderSpec& spec) {
    const double extent = std::max(box.width(), box.height());
    if (!(extent > 0.0)) {
        throw RenderError("degenerate viewport: route and trajectory have zero extent");
    }
    const double pad = spec.margin * extent;
    const double span_x = box.width() + 2.0 * pad;
    const double span_y = box.height() + 2.0 * pad;
    Viewport vp;
    vp.cx = 0.5 * (box.min_x + box.max_x);
    vp.cy = 0.5 * (box.min_y + box.max_y);
    vp.half_w = 0.5 * spec.width;
    vp.half_h = 0.5 * spec.height;
    vp.scale = std::min(spec.width / std::max(span_x, 1e-12), spec.height / std::max(span_y, 1e-12));
    return vp;
}

/// Per-pixel coverage of one layer; overlapping strokes take the max so
/// polyline joints are not blended twice.
class Coverage {
public:
    Coverage(int w, int h) : w_(w), h_(h), cov_(static_cast<std::size_t>(w) * h, 0.0f) {}

    void stroke(Vec2 a, Vec2 b, double width) {
        const double hw = 0.5 * width;
        const double reach = hw + 1.0;
        const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - reach)));
        const int x1 = std::min(w_ - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + reach)));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - reach)));
        const int y1 = std::min(h_ - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + reach)));
        const Vec2 ab = b - a;
        const double len2 = dot(ab, ab);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const Vec2 p{x + 0.5, y + 0.5};
                double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
                t = std::clamp(t, 0.0, 1.0);
                const double d = norm(p - (a + t * ab));
                put(x, y, hw + 0.5 - d);
            }
        }
    }

    void disc(Vec2 c, double radius) {
        const int x0 = std::max(0, static_cast<int>(std::floor(c.x - radius - 1.0)));
        const int x1 = std::min(w_ - 1, static_cast<int>(std::ceil(c.x + radius + 1.0)));
        const int y0 = std::max(0, static_cast<int>(std::floor(c.y - radius - 1.0)));
        const int y1 = std::min(h_ - 1, static_cast<int>(std::ceil(c.y + radius + 1.0)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double d = norm(Vec2{x + 0.5, y + 0.5} - c);
                put(x, y, radius + 0.5 - d);
            }
        }
    }

    void composite(Image& img, Rgba color) const {
        auto& px = img.bytes();
        const std::array<double, 3> src{static_cast<double>(color.r), static_cast<double>(color.g),
                                         static_cast<double>(color.b)};
        const double alpha = color.a / 255.0;
        for (std::size_t i = 0; i < cov_.size(); ++i) {
            const double c = cov_[i] * alpha;
            if (c <= 0.0) {
                continue;
            }
            for (std::size_t ch = 0; ch < 3; ++ch) {
                const double dst = px[4 * i + ch];
                px[4 * i + ch] = static_cast<std::uint8_t>(std::lround(dst + (src[ch] - dst) * c));
            }
        }
    }

private:
    void put(int x, int y, double v) {
        if (v <= 0.0) {
            return;
        }
        float& slot = cov_[static_cast<std::size_t>(y) * w_ + x];
        slot = std::max(slot, static_cast<float>(std::min(v, 1.0)));
    }

    int w_;
    int h_;
    std::vector<float> cov_;
};

void stroke_polyline(Coverage& cov, const Viewport& vp, const Polyline& line, double width) {
    if (line.size() == 1) {
        cov.disc(vp.to_pixel(line[0]), 0.5 * width);
        return;
    }
    for (std::size_t i = 1; i < line.size(); ++i) {
        cov.stroke(vp.to_pixel(line[i - 1]), vp.to_pixel(line[i]), width);
    }
}

Image render_impl(const RoadNetwork& net, const Route& route, const Polyline* executed, const RenderSpec& spec) {
    validate(spec);
    if (route.geo.empty()) {
        throw RenderError("route has no geometry");
    }
    std::vector<const Polyline*> framed{&route.geo};
    if (executed != nullptr && !executed->empty()) {
        framed.push_back(executed);
    }
    const Viewport vp = fit_viewport(bounding_box(framed), spec);

    Image img(spec.width, spec.height, spec.bg_color);

    Coverage roads(spec.width, spec.height);
    for (const Edge& e : net.edges()) {
        roads.stroke(vp.to_pixel(net.node(e.a)), vp.to_pixel(net.node(e.b)), spec.road_px);
    }
    roads.composite(img, spec.road_color);

    Coverage nav(spec.width, spec.height);
    stroke_polyline(nav, vp, route.geo, spec.nav_px);
    nav.composite(img, spec.nav_color);

    if (executed != nullptr && !executed->empty()) {
        Coverage real(spec.width, spec.height);
        stroke_polyline(real, vp, *executed, spec.real_px);
        real.composite(img, spec.real_color);
    }

    Coverage start(spec.width, spec.height);
    start.disc(vp.to_pixel(route.geo.front()), spec.marker_radius);
    start.composite(img, spec.start_color);
    Coverage end(spec.width, spec.height);
    end.disc(vp.to_pixel(route.geo.back()), spec.marker_radius);
    end.composite(img, spec.end_color);
    return img;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

struct ReadCursor {
    const std::vector<std::uint8_t>* bytes;
    std::size_t offset;
};

void png_read_from_vector(png_structp png, png_bytep data, png_size_t length) {
    auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
    if (cur->offset + length > cur->bytes->size()) {
        png_error(png, "truncated PNG stream");
    }
    std::memcpy(data, cur->bytes->data() + cur->offset, length);
    cur->offset += length;
}

// libpng reports failures by longjmp; only trivially destructible locals live
// between setjmp and the calls that may jump.
bool encode_rows(const Image& image, std::vector<png_bytep>& rows, std::vector<std::uint8_t>& out) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (png == nullptr) {
        return false;
    }
    png_infop info = png_create_info_struct(png);
    if (info == nullptr || setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), 8,
                 PNG_COLOR_TYPE_RGB_ALPHA, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

bool decode_rows(const std::vector<std::uint8_t>& bytes, Image& image) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
        return false;
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (png == nullptr) {
        return false;
    }
    png_infop info = png_create_info_struct(png);
    ReadCursor cursor{&bytes, 0};
    if (info == nullptr || setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        return false;
    }
    png_set_read_fn(png, &cursor, png_read_from_vector);
    png_read_info(png, info);
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_gray_to_rgb(png);
    png_set_add_alpha(png, 0xff, PNG_FILLER_AFTER);
    png_read_update_info(png, info);
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    image = Image(w, h, Rgba{});
    png_bytep base = image.bytes().data();
    for (int y = 0; y < h; ++y) {
        png_read_row(png, base + static_cast<std::size_t>(y) * w * 4, nullptr);
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return true;
}

} // namespace

void validate(const RenderSpec& spec) {
    if (spec.width < 64 || spec.height < 64) {
        throw RenderError("image dimensions must be at least 64 px");
    }
    if (spec.road_px < 1.0 || spec.nav_px < 1.0 || spec.real_px < 1.0) {
        throw RenderError("stroke widths must be at least 1 px");
    }
    if (!(spec.margin >= 0.0) || !(spec.marker_radius >= 0.0)) {
        throw RenderError("margin and marker radius must be non-negative");
    }
}

Image::Image(int width, int height, Rgba fill)
    : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height * 4) {
    for (std::size_t i = 0; i < data_.size(); i += 4) {
        data_[i] = fill.r;
        data_[i + 1] = fill.g;
        data_[i + 2] = fill.b;
        data_[i + 3] = fill.a;
    }
}

Rgba Image::at(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 4;
    return {data_.at(i), data_.at(i + 1), data_.at(i + 2), data_.at(i + 3)};
}

void Image::set(int x, int y, Rgba c) {
    const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 4;
    data_.at(i) = c.r;
    data_.at(i + 1) = c.g;
    data_.at(i + 2) = c.b;
    data_.at(i + 3) = c.a;
}

Image render_pair(const RoadNetwork& net, const Route& route, const LabeledTrajectory& traj, const RenderSpec& spec) {
    return render_impl(net, route, &traj.path, spec);
}

Image render_route(const RoadNetwork& net, const Route& route, const RenderSpec& spec) {
    return render_impl(net, route, nullptr, spec);
}

std::vector<std::uint8_t> encode_png(const Image& image) {
    if (image.width() <= 0 || image.height() <= 0) {
        throw RenderError("cannot encode an empty image");
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
    auto* base = const_cast<std::uint8_t*>(image.bytes().data());
    for (int y = 0; y < image.height(); ++y) {
        rows[static_cast<std::size_t>(y)] = base + static_cast<std::size_t>(y) * image.width() * 4;
    }
    std::vector<std::uint8_t> out;
    if (!encode_rows(image, rows, out)) {
        throw RenderError("PNG encoding failed");
    }
    return out;
}

Image decode_png(const std::vector<std::uint8_t>& bytes) {
    Image image;
    if (!decode_rows(bytes, image)) {
        throw RenderError("not a readable PNG stream");
    }
    return image;
}

void write_png(const std::filesystem::path& path, const Image& image) {
    const std::vector<std::uint8_t> bytes = encode_png(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw RenderError("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw RenderError("failed writing " + path.string());
    }
}

Image read_png(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw RenderError("cannot open " + path.string());
    }
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return decode_png(bytes);
}

} // namespace disputekit
