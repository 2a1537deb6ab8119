#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmloc/raster.hpp"

namespace swarmloc {

/// HSV threshold band. hue_lo > hue_hi means the interval wraps through 0
/// (e.g. red as [340, 20]).
struct ColorRange {
    std::string name;
    double hue_lo = 0.0;
    double hue_hi = 0.0;
    double sat_min = 0.0;
    double val_min = 0.0;
};

/// Thresholds tuned to the pure corner hues the synthetic renderer emits;
/// override from JSON for real footage.
std::vector<ColorRange> default_color_ranges();

/// Parses a JSON array of {name, hue_lo, hue_hi, sat_min, val_min} objects.
std::vector<ColorRange> color_ranges_from_json(const std::string& json_text);

struct Mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits; // row-major, 0 or 1

    bool get(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
};

/// Raw and central moments of a binary region, with the centroid.
struct Moments {
    double m00 = 0.0;
    double m10 = 0.0;
    double m01 = 0.0;
    double mu20 = 0.0;
    double mu02 = 0.0;
    double mu11 = 0.0;
    double cx = 0.0;
    double cy = 0.0;
};

class EmptyMaskError : public std::runtime_error {
public:
    EmptyMaskError() : std::runtime_error("mask has no set bits; centroid undefined") {}
};

struct PixelPoint {
    double x = 0.0;
    double y = 0.0;
};

/// Pixel-space measurements extracted from one frame. Gaps are present only
/// when both contributing centroids are present. lateral_offset_px is signed,
/// positive when the ring midpoint sits right of the image centerline.
struct MarkerFeatures {
    std::optional<PixelPoint> red_centroid;
    std::optional<PixelPoint> blue_centroid;
    std::optional<PixelPoint> yellow_centroid;
    double red_area = 0.0;
    double blue_area = 0.0;
    double yellow_area = 0.0;
    std::optional<double> ring_gap_px;       // |blue_cy - red_cy|
    std::optional<double> spiral_gap_px;     // |blue_cy - yellow_cy|
    std::optional<double> lateral_offset_px; // ring midpoint x - centerline
    std::optional<double> yellow_spread_px;  // sqrt(mu02/m00) of the yellow mask
};

std::string features_to_json(const MarkerFeatures& f);

Mask color_mask(const HsvImage& image, const ColorRange& range);

Moments compute_moments(const Mask& mask);

struct FeatureConfig {
    std::vector<ColorRange> ranges = default_color_ranges();
    int median_window = 15;
    double min_area = 20.0;
};

/// Full front half of the pipeline: median filter, HSV conversion, one mask
/// and moment pass per color, then the gap/offset assembly. Colors whose mask
/// area falls below min_area report no centroid.
MarkerFeatures extract_features(const Image& image, const FeatureConfig& config = {});

} // namespace swarmloc
