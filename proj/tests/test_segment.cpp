#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "swarmloc/segment.hpp"
#include "swarmloc/synthcam.hpp"

using namespace swarmloc;

namespace {

HsvImage solid_hsv(int w, int h, double hue, double s, double v) {
    HsvImage img;
    img.width = w;
    img.height = h;
    img.pixels.assign(static_cast<std::size_t>(w) * h, Hsv{hue, s, v});
    return img;
}

Mask random_mask(std::mt19937& rng, int w, int h, double fill) {
    std::bernoulli_distribution bit(fill);
    Mask mask;
    mask.width = w;
    mask.height = h;
    mask.bits.resize(static_cast<std::size_t>(w) * h);
    for (auto& b : mask.bits) b = bit(rng) ? 1 : 0;
    return mask;
}

// Independent single-pass reference: raw sums first, then centered sums.
Moments brute_force_moments(const Mask& mask) {
    double m00 = 0, m10 = 0, m01 = 0;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.get(x, y)) {
                m00 += 1;
                m10 += x;
                m01 += y;
            }
    Moments m;
    m.m00 = m00;
    m.m10 = m10;
    m.m01 = m01;
    m.cx = m10 / m00;
    m.cy = m01 / m00;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.get(x, y)) {
                m.mu20 += (x - m.cx) * (x - m.cx);
                m.mu02 += (y - m.cy) * (y - m.cy);
                m.mu11 += (x - m.cx) * (y - m.cy);
            }
    return m;
}

bool close_rel(double a, double b, double tol = 1e-9) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

} // namespace

TEST_CASE("color_mask handles the wrapped red interval") {
    const ColorRange red{"red", 340.0, 20.0, 0.5, 0.3};

    const HsvImage pure_red = solid_hsv(4, 3, 0.0, 1.0, 1.0);
    Mask mask = color_mask(pure_red, red);
    for (auto b : mask.bits) CHECK(b == 1);

    const HsvImage pure_blue = solid_hsv(4, 3, 240.0, 1.0, 1.0);
    mask = color_mask(pure_blue, red);
    for (auto b : mask.bits) CHECK(b == 0);

    const HsvImage near_wrap = solid_hsv(2, 2, 350.0, 1.0, 1.0);
    mask = color_mask(near_wrap, red);
    for (auto b : mask.bits) CHECK(b == 1);
}

TEST_CASE("color_mask applies saturation and value floors") {
    const ColorRange red{"red", 340.0, 20.0, 0.5, 0.3};
    const HsvImage washed_out = solid_hsv(2, 2, 0.0, 0.4, 1.0);
    for (auto b : color_mask(washed_out, red).bits) CHECK(b == 0);
    const HsvImage too_dark = solid_hsv(2, 2, 0.0, 1.0, 0.2);
    for (auto b : color_mask(too_dark, red).bits) CHECK(b == 0);
}

TEST_CASE("color_mask is monotone under hue interval shrinking") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> hue(0.0, 360.0);
    HsvImage img;
    img.width = 16;
    img.height = 16;
    img.pixels.resize(256);
    for (auto& p : img.pixels) p = {hue(rng), 1.0, 1.0};

    const ColorRange wide{"band", 40.0, 120.0, 0.0, 0.0};
    const ColorRange narrow{"band", 60.0, 100.0, 0.0, 0.0};
    const Mask wide_mask = color_mask(img, wide);
    const Mask narrow_mask = color_mask(img, narrow);
    for (std::size_t i = 0; i < wide_mask.bits.size(); ++i)
        if (narrow_mask.bits[i]) CHECK(wide_mask.bits[i]);
}

TEST_CASE("compute_moments of a single pixel") {
    Mask mask;
    mask.width = 10;
    mask.height = 10;
    mask.bits.assign(100, 0);
    mask.set(5, 7, true);
    const Moments m = compute_moments(mask);
    CHECK(m.m00 == 1.0);
    CHECK(m.cx == 5.0);
    CHECK(m.cy == 7.0);
    CHECK(m.mu20 == 0.0);
    CHECK(m.mu02 == 0.0);
    CHECK(m.mu11 == 0.0);
}

TEST_CASE("compute_moments of a 2x2 block") {
    Mask mask;
    mask.width = 4;
    mask.height = 4;
    mask.bits.assign(16, 0);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) mask.set(x, y, true);
    const Moments m = compute_moments(mask);
    CHECK(m.m00 == 4.0);
    CHECK(m.cx == doctest::Approx(0.5));
    CHECK(m.cy == doctest::Approx(0.5));
}

TEST_CASE("compute_moments rejects an empty mask") {
    Mask mask;
    mask.width = 3;
    mask.height = 3;
    mask.bits.assign(9, 0);
    CHECK_THROWS_AS(compute_moments(mask), EmptyMaskError);
}

TEST_CASE("compute_moments matches brute force on 100 random masks") {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> dim(1, 40);
    std::uniform_real_distribution<double> fill(0.02, 0.9);
    int checked = 0;
    while (checked < 100) {
        const Mask mask = random_mask(rng, dim(rng), dim(rng), fill(rng));
        bool any = false;
        for (auto b : mask.bits) any |= b != 0;
        if (!any) continue;
        ++checked;

        const Moments got = compute_moments(mask);
        const Moments ref = brute_force_moments(mask);
        CHECK(close_rel(got.m00, ref.m00));
        CHECK(close_rel(got.m10, ref.m10));
        CHECK(close_rel(got.m01, ref.m01));
        CHECK(close_rel(got.mu20, ref.mu20));
        CHECK(close_rel(got.mu02, ref.mu02));
        CHECK(close_rel(got.mu11, ref.mu11));

        // popcount identity and centroid inside the bounding box
        int pop = 0, min_x = mask.width, max_x = -1, min_y = mask.height, max_y = -1;
        for (int y = 0; y < mask.height; ++y)
            for (int x = 0; x < mask.width; ++x)
                if (mask.get(x, y)) {
                    ++pop;
                    min_x = std::min(min_x, x);
                    max_x = std::max(max_x, x);
                    min_y = std::min(min_y, y);
                    max_y = std::max(max_y, y);
                }
        CHECK(got.m00 == static_cast<double>(pop));
        CHECK(got.cx >= min_x);
        CHECK(got.cx <= max_x);
        CHECK(got.cy >= min_y);
        CHECK(got.cy <= max_y);
        CHECK(got.mu20 >= 0.0);
        CHECK(got.mu02 >= 0.0);
    }
}

TEST_CASE("extract_features on an all-white frame reports nothing") {
    const Image blank(64, 48, Rgb{255, 255, 255});
    const MarkerFeatures f = extract_features(blank);
    CHECK(!f.red_centroid);
    CHECK(!f.blue_centroid);
    CHECK(!f.yellow_centroid);
    CHECK(!f.ring_gap_px);
    CHECK(!f.spiral_gap_px);
    CHECK(!f.lateral_offset_px);
}

TEST_CASE("extract_features requires all three color ranges") {
    const Image blank(32, 32, Rgb{255, 255, 255});
    FeatureConfig config;
    config.ranges = {{"red", 340.0, 20.0, 0.5, 0.3}};
    CHECK_THROWS_AS(extract_features(blank, config), std::invalid_argument);
}

TEST_CASE("extract_features centers an on-axis marker") {
    const CameraSpec cam;
    const MarkerSpec marker;
    const Image frame = render(ScenePose{30.0, 0.0, 180.0, std::nullopt}, cam, marker);
    const MarkerFeatures f = extract_features(frame);
    REQUIRE(f.red_centroid);
    REQUIRE(f.blue_centroid);
    REQUIRE(f.lateral_offset_px);
    CHECK(std::abs(*f.lateral_offset_px) <= 1.0);
    CHECK(f.red_centroid->y < f.blue_centroid->y); // red ring sits above blue
}

TEST_CASE("extract_features ring gap shrinks with distance") {
    const CameraSpec cam;
    const MarkerSpec marker;
    const auto gap_at = [&](double dv) {
        const Image frame = render(ScenePose{dv, 0.0, 180.0, std::nullopt}, cam, marker);
        const MarkerFeatures f = extract_features(frame);
        REQUIRE(f.ring_gap_px);
        return *f.ring_gap_px;
    };
    CHECK(gap_at(20.0) > gap_at(40.0));
}

TEST_CASE("extract_features is deterministic") {
    const Image frame =
        render(ScenePose{25.0, 3.0, 120.0, std::nullopt}, CameraSpec{}, MarkerSpec{});
    const MarkerFeatures a = extract_features(frame);
    const MarkerFeatures b = extract_features(frame);
    REQUIRE(a.ring_gap_px);
    REQUIRE(b.ring_gap_px);
    CHECK(*a.ring_gap_px == *b.ring_gap_px);
    CHECK(a.red_centroid->x == b.red_centroid->x);
    CHECK(a.yellow_area == b.yellow_area);
}

TEST_CASE("color ranges parse from JSON and reject out-of-bounds values") {
    const auto ranges = color_ranges_from_json(R"([
        {"name": "red", "hue_lo": 350, "hue_hi": 15, "sat_min": 0.4, "val_min": 0.2},
        {"name": "blue", "hue_lo": 210, "hue_hi": 250, "sat_min": 0.5, "val_min": 0.3}
    ])");
    REQUIRE(ranges.size() == 2);
    CHECK(ranges[0].hue_lo == 350.0);
    CHECK(ranges[1].name == "blue");

    CHECK_THROWS_AS(color_ranges_from_json(R"([{"name":"x","hue_lo":400,"hue_hi":10,
        "sat_min":0.5,"val_min":0.5}])"),
                    std::invalid_argument);
    CHECK_THROWS(color_ranges_from_json("{}"));
}
