#include "swarmloc/segment.hpp"

#include <cmath>

#include <json.hpp>

namespace swarmloc {

std::vector<ColorRange> default_color_ranges() {
    return {
        {"red", 340.0, 20.0, 0.5, 0.3},
        {"blue", 200.0, 260.0, 0.5, 0.3},
        {"yellow", 45.0, 75.0, 0.5, 0.3},
    };
}

std::vector<ColorRange> color_ranges_from_json(const std::string& json_text) {
    const auto doc = nlohmann::json::parse(json_text);
    if (!doc.is_array()) throw std::invalid_argument("color ranges: expected a JSON array");
    std::vector<ColorRange> out;
    for (const auto& item : doc) {
        ColorRange r;
        r.name = item.at("name").get<std::string>();
        r.hue_lo = item.at("hue_lo").get<double>();
        r.hue_hi = item.at("hue_hi").get<double>();
        r.sat_min = item.at("sat_min").get<double>();
        r.val_min = item.at("val_min").get<double>();
        if (r.hue_lo < 0.0 || r.hue_lo >= 360.0 || r.hue_hi < 0.0 || r.hue_hi >= 360.0 ||
            r.sat_min < 0.0 || r.sat_min > 1.0 || r.val_min < 0.0 || r.val_min > 1.0)
            throw std::invalid_argument("color range '" + r.name + "' out of bounds");
        out.push_back(std::move(r));
    }
    return out;
}

Mask color_mask(const HsvImage& image, const ColorRange& range) {
    Mask mask;
    mask.width = image.width;
    mask.height = image.height;
    mask.bits.resize(image.pixels.size());

    const bool wraps = range.hue_lo > range.hue_hi;
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        const Hsv& p = image.pixels[i];
        const bool hue_in = wraps ? (p.h >= range.hue_lo || p.h <= range.hue_hi)
                                  : (p.h >= range.hue_lo && p.h <= range.hue_hi);
        mask.bits[i] = (hue_in && p.s >= range.sat_min && p.v >= range.val_min) ? 1 : 0;
    }
    return mask;
}

Moments compute_moments(const Mask& mask) {
    Moments m;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.get(x, y)) continue;
            m.m00 += 1.0;
            m.m10 += x;
            m.m01 += y;
        }
    }
    if (m.m00 == 0.0) throw EmptyMaskError();
    m.cx = m.m10 / m.m00;
    m.cy = m.m01 / m.m00;

    // Second pass keeps the central moments exact rather than differencing
    // large raw sums.
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.get(x, y)) continue;
            const double dx = x - m.cx;
            const double dy = y - m.cy;
            m.mu20 += dx * dx;
            m.mu02 += dy * dy;
            m.mu11 += dx * dy;
        }
    }
    return m;
}

MarkerFeatures extract_features(const Image& image, const FeatureConfig& config) {
    const Image filtered = median_filter(image, config.median_window);
    const HsvImage hsv = rgb_to_hsv(filtered);

    const ColorRange* red = nullptr;
    const ColorRange* blue = nullptr;
    const ColorRange* yellow = nullptr;
    for (const auto& r : config.ranges) {
        if (r.name == "red") red = &r;
        else if (r.name == "blue") blue = &r;
        else if (r.name == "yellow") yellow = &r;
    }
    if (!red || !blue || !yellow)
        throw std::invalid_argument("extract_features: ranges must include red, blue and yellow");

    MarkerFeatures f;
    auto measure = [&](const ColorRange& range, double& area,
                       std::optional<PixelPoint>& centroid) -> std::optional<Moments> {
        const Mask mask = color_mask(hsv, range);
        double count = 0.0;
        for (auto b : mask.bits) count += b;
        area = count;
        if (count < config.min_area || count == 0.0) return std::nullopt;
        Moments m = compute_moments(mask);
        centroid = PixelPoint{m.cx, m.cy};
        return m;
    };

    measure(*red, f.red_area, f.red_centroid);
    measure(*blue, f.blue_area, f.blue_centroid);
    const auto yellow_m = measure(*yellow, f.yellow_area, f.yellow_centroid);

    if (f.red_centroid && f.blue_centroid) {
        f.ring_gap_px = std::abs(f.blue_centroid->y - f.red_centroid->y);
        const double midpoint_x = (f.red_centroid->x + f.blue_centroid->x) / 2.0;
        f.lateral_offset_px = midpoint_x - (image.width - 1) / 2.0;
    }
    if (f.blue_centroid && f.yellow_centroid)
        f.spiral_gap_px = std::abs(f.blue_centroid->y - f.yellow_centroid->y);
    if (yellow_m) f.yellow_spread_px = std::sqrt(yellow_m->mu02 / yellow_m->m00);
    return f;
}

std::string features_to_json(const MarkerFeatures& f) {
    nlohmann::json doc;
    auto put_point = [&](const char* key, const std::optional<PixelPoint>& p) {
        if (p)
            doc[key] = {{"x", p->x}, {"y", p->y}};
        else
            doc[key] = nullptr;
    };
    auto put_value = [&](const char* key, const std::optional<double>& v) {
        if (v)
            doc[key] = *v;
        else
            doc[key] = nullptr;
    };
    put_point("red_centroid", f.red_centroid);
    put_point("blue_centroid", f.blue_centroid);
    put_point("yellow_centroid", f.yellow_centroid);
    doc["red_area"] = f.red_area;
    doc["blue_area"] = f.blue_area;
    doc["yellow_area"] = f.yellow_area;
    put_value("ring_gap_px", f.ring_gap_px);
    put_value("spiral_gap_px", f.spiral_gap_px);
    put_value("lateral_offset_px", f.lateral_offset_px);
    put_value("yellow_spread_px", f.yellow_spread_px);
    return doc.dump(2);
}

} // namespace swarmloc
