#include "swarmloc/raster.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>

namespace swarmloc {

namespace {

// Skips whitespace and '#' comment lines, then reads one unsigned decimal.
bool read_header_int(std::istream& in, int& value) {
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    if (c == EOF || !std::isdigit(c)) return false;
    long v = 0;
    while (c != EOF && std::isdigit(c)) {
        v = v * 10 + (c - '0');
        if (v > 1'000'000'000L) return false;
        c = in.get();
    }
    if (c != EOF) in.unget();
    value = static_cast<int>(v);
    return true;
}

} // namespace

Image load_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PpmError(PpmErrorKind::missing_file, "cannot open " + path.string());

    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (!in || m0 != 'P' || m1 != '6')
        throw PpmError(PpmErrorKind::bad_magic, path.string() + ": magic is not P6");

    int w = 0, h = 0, maxval = 0;
    if (!read_header_int(in, w) || !read_header_int(in, h) || !read_header_int(in, maxval))
        throw PpmError(PpmErrorKind::bad_header, path.string() + ": malformed header");
    if (w < 1 || h < 1)
        throw PpmError(PpmErrorKind::bad_header, path.string() + ": non-positive dimensions");
    if (maxval != 255)
        throw PpmError(PpmErrorKind::bad_maxval, path.string() + ": maxval must be 255");

    // Exactly one whitespace byte separates the header from pixel data.
    int sep = in.get();
    if (sep == EOF || !std::isspace(sep))
        throw PpmError(PpmErrorKind::bad_header, path.string() + ": missing header terminator");

    Image img;
    img.width = w;
    img.height = h;
    img.pixels.resize(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size() * 3));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size() * 3))
        throw PpmError(PpmErrorKind::truncated, path.string() + ": truncated pixel data");
    return img;
}

void save_ppm(const Image& image, const std::filesystem::path& path) {
    if (!image.valid())
        throw PpmError(PpmErrorKind::invalid_image, "refusing to write invalid image");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw PpmError(PpmErrorKind::unwritable, "cannot write " + path.string());

    out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size() * 3));
    if (!out) throw PpmError(PpmErrorKind::unwritable, "write failed for " + path.string());
}

namespace {

struct ChannelHistograms {
    std::array<std::array<int, 256>, 3> bins{};

    void add(const Rgb& p, int count) {
        bins[0][p.r] += count;
        bins[1][p.g] += count;
        bins[2][p.b] += count;
    }

    // rank is the 1-indexed order statistic to extract per channel.
    Rgb median(int rank) const {
        std::array<std::uint8_t, 3> out{};
        for (int c = 0; c < 3; ++c) {
            int cum = 0;
            for (int v = 0; v < 256; ++v) {
                cum += bins[c][v];
                if (cum >= rank) {
                    out[c] = static_cast<std::uint8_t>(v);
                    break;
                }
            }
        }
        return {out[0], out[1], out[2]};
    }
};

} // namespace

Image median_filter(const Image& image, int window) {
    if (!image.valid()) throw std::invalid_argument("median_filter: invalid image");
    if (window < 1 || window % 2 == 0)
        throw std::invalid_argument("median_filter: window must be odd and positive");
    if (window > std::min(image.width, image.height))
        throw std::invalid_argument("median_filter: window exceeds image dimensions");

    const int w = image.width;
    const int h = image.height;
    const int half = window / 2;
    const int rank = (window * window) / 2 + 1;

    Image out;
    out.width = w;
    out.height = h;
    out.pixels.resize(image.pixels.size());

    auto clampx = [w](int x) { return std::clamp(x, 0, w - 1); };
    auto clampy = [h](int y) { return std::clamp(y, 0, h - 1); };

    // Sliding histogram per row: moving the window one column right swaps
    // exactly one (clamped) column of samples for another.
    for (int y = 0; y < h; ++y) {
        ChannelHistograms hist;
        auto add_column = [&](int col, int count) {
            for (int dy = -half; dy <= half; ++dy)
                hist.add(image.at(col, clampy(y + dy)), count);
        };
        for (int dx = -half; dx <= half; ++dx) add_column(clampx(dx), 1);
        out.at(0, y) = hist.median(rank);
        for (int x = 1; x < w; ++x) {
            add_column(clampx(x - 1 - half), -1);
            add_column(clampx(x + half), 1);
            out.at(x, y) = hist.median(rank);
        }
    }
    return out;
}

HsvImage rgb_to_hsv(const Image& image) {
    if (!image.valid()) throw std::invalid_argument("rgb_to_hsv: invalid image");

    HsvImage out;
    out.width = image.width;
    out.height = image.height;
    out.pixels.resize(image.pixels.size());

    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        const Rgb& p = image.pixels[i];
        const double r = p.r, g = p.g, b = p.b;
        const double mx = std::max({r, g, b});
        const double mn = std::min({r, g, b});
        const double delta = mx - mn;

        Hsv& q = out.pixels[i];
        q.v = mx / 255.0;
        if (delta <= 0.0 || mx <= 0.0) {
            q.h = 0.0;
            q.s = 0.0;
            continue;
        }
        q.s = delta / mx;
        double hue;
        if (mx == r)
            hue = 60.0 * ((g - b) / delta);
        else if (mx == g)
            hue = 60.0 * (2.0 + (b - r) / delta);
        else
            hue = 60.0 * (4.0 + (r - g) / delta);
        if (hue < 0.0) hue += 360.0;
        if (hue >= 360.0) hue -= 360.0;
        q.h = hue;
    }
    return out;
}

} // namespace swarmloc
