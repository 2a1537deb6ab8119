#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "swarmloc/calibrate.hpp"

using namespace swarmloc;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "swarmloc_calibrate_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

// Synthetic generating model consistent with the estimator's laws. Feature
// values are produced from the truth without any rendering, so every fit can
// recover the generating constants almost exactly.
struct GeneratingModel {
    double k = 2600.0;
    double fx = 480.0;
    double k1_slope = 0.17;
    double k1_intercept = 0.3;
    double k2_a = 95.0;
    double k2_b = -0.004;

    SweepSample sample(double dv, double dh, double psi) const {
        SweepSample s;
        s.truth = {dv, dh, psi, std::nullopt};
        s.features.red_centroid = PixelPoint{320.0, 100.0};
        s.features.blue_centroid = PixelPoint{320.0, 100.0 + k / dv};
        s.features.red_area = s.features.blue_area = 400.0;
        s.features.ring_gap_px = k / dv;
        s.features.lateral_offset_px = dh * fx / dv;
        const double k1 = k1_slope * dv + k1_intercept;
        const double k2 = k2_a * std::exp(k2_b * dv);
        s.features.spiral_gap_px = (psi + k2) / k1;
        s.features.yellow_centroid =
            PixelPoint{320.0, 100.0 + *s.features.ring_gap_px - *s.features.spiral_gap_px};
        s.features.yellow_area = 150.0;
        s.features.yellow_spread_px = 0.1 * *s.features.ring_gap_px;
        return s;
    }

    std::vector<SweepSample> full_dataset() const {
        std::vector<SweepSample> out;
        for (double dv : {14.0, 19.0, 24.0, 29.0, 34.0})
            for (double psi : {45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0})
                out.push_back(sample(dv, 0.0, psi));
        for (double dv : {20.0, 30.0, 40.0})
            for (double dh : {-8.0, -4.0, 4.0, 8.0}) out.push_back(sample(dv, dh, 180.0));
        return out;
    }
};

} // namespace

TEST_CASE("fit_inverse_k recovers the reference constant from exact pairs") {
    const std::vector<std::pair<double, double>> pairs{{100.0, 31.937}, {200.0, 15.9685}};
    const auto [k, report] = fit_inverse_k(pairs);
    CHECK(k == doctest::Approx(3193.7).epsilon(1e-12));
    CHECK(report.n == 2);
    CHECK(report.r_squared == doctest::Approx(1.0));
    CHECK(report.residual_rms == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("fit_inverse_k input validation") {
    const std::vector<std::pair<double, double>> single{{100.0, 31.937}};
    CHECK_THROWS_AS(fit_inverse_k(single), FitError);
    const std::vector<std::pair<double, double>> bad_gap{{0.0, 10.0}, {100.0, 20.0}};
    CHECK_THROWS_AS(fit_inverse_k(bad_gap), FitError);
}

TEST_CASE("fit_inverse_k recovers a random constant to machine precision") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> k_dist(500.0, 5000.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double k_true = k_dist(rng);
        std::vector<std::pair<double, double>> pairs;
        for (double p = 40.0; p <= 400.0; p += 17.0) pairs.emplace_back(p, k_true / p);
        const auto [k, report] = fit_inverse_k(pairs);
        CHECK(std::abs(k - k_true) / k_true < 1e-12);
    }
}

TEST_CASE("fit_linear matches the two-point solve through the reference endpoints") {
    const std::vector<std::pair<double, double>> pairs{{12.0, 2.0951}, {37.0, 6.2095}};
    const LinearFit fit = fit_linear(pairs);
    CHECK(fit.slope == doctest::Approx(0.164576).epsilon(1e-9));
    CHECK(fit.intercept == doctest::Approx(0.120188).epsilon(1e-9));
}

TEST_CASE("fit_linear handles flat data and rejects rank-deficient input") {
    const std::vector<std::pair<double, double>> flat{{0.0, 5.0}, {1.0, 5.0}};
    const LinearFit fit = fit_linear(flat);
    CHECK(fit.slope == doctest::Approx(0.0));
    CHECK(fit.intercept == doctest::Approx(5.0));

    const std::vector<std::pair<double, double>> vertical{{2.0, 1.0}, {2.0, 3.0}};
    CHECK_THROWS_AS(fit_linear(vertical), FitError);
}

TEST_CASE("fit_linear recovers a noiseless line exactly") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> x_dist(-50.0, 50.0);
    const double slope = -1.75, intercept = 12.25;
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < 200; ++i) {
        const double x = x_dist(rng);
        pairs.emplace_back(x, slope * x + intercept);
    }
    const LinearFit fit = fit_linear(pairs);
    CHECK(std::abs(fit.slope - slope) < 1e-9);
    CHECK(std::abs(fit.intercept - intercept) < 1e-9);
    CHECK(fit.report.residual_rms < 1e-9);
    CHECK(fit.report.r_squared == doctest::Approx(1.0));
}

TEST_CASE("fit_exponential matches the two-point closed form at the reference endpoints") {
    const std::vector<std::pair<double, double>> pairs{{12.0, 97.179}, {37.0, 94.421}};
    const ExponentialFit fit = fit_exponential(pairs);
    const double b_expected = std::log(94.421 / 97.179) / 25.0;
    const double a_expected = 97.179 * std::exp(-12.0 * b_expected);
    CHECK(fit.b == doctest::Approx(b_expected).epsilon(1e-12));
    CHECK(fit.a == doctest::Approx(a_expected).epsilon(1e-12));
    CHECK(fit.b == doctest::Approx(-0.0011516).epsilon(1e-3));
    CHECK(fit.a == doctest::Approx(98.531).epsilon(1e-4));
}

TEST_CASE("fit_exponential constants, validation and recovery") {
    const std::vector<std::pair<double, double>> constant{{1.0, 7.5}, {2.0, 7.5}, {9.0, 7.5}};
    const ExponentialFit flat = fit_exponential(constant);
    CHECK(flat.b == doctest::Approx(0.0));
    CHECK(flat.a == doctest::Approx(7.5));

    const std::vector<std::pair<double, double>> negative{{1.0, 5.0}, {2.0, -1.0}};
    CHECK_THROWS_AS(fit_exponential(negative), FitError);

    std::vector<std::pair<double, double>> data;
    for (double x = 0.0; x <= 20.0; x += 0.5) data.emplace_back(x, 42.0 * std::exp(-0.13 * x));
    const ExponentialFit fit = fit_exponential(data);
    CHECK(std::abs(fit.a - 42.0) / 42.0 < 1e-6);
    CHECK(std::abs(fit.b - -0.13) / 0.13 < 1e-6);
}

TEST_CASE("fit_fx inverts a single sample exactly and rejects zero offsets") {
    const std::vector<LateralSample> one{{100.0, 5.0, 30.0}};
    const auto [fx, report] = fit_fx(one);
    CHECK(fx == doctest::Approx(600.0).epsilon(1e-12));
    CHECK(report.n == 1);

    const std::vector<LateralSample> zeros{{0.0, 0.0, 30.0}, {0.0, 0.0, 40.0}};
    CHECK_THROWS_AS(fit_fx(zeros), FitError);
    CHECK_THROWS_AS(fit_fx(std::vector<LateralSample>{}), FitError);
}

TEST_CASE("build_calibration recovers the generating model") {
    const GeneratingModel model;
    const auto dataset = model.full_dataset();
    const CalibrationBuild build = build_calibration(dataset);

    CHECK(build.calibration.k_range == doctest::Approx(model.k).epsilon(1e-9));
    CHECK(build.calibration.fx_px == doctest::Approx(model.fx).epsilon(1e-9));
    CHECK(build.calibration.k1_slope == doctest::Approx(model.k1_slope).epsilon(1e-6));
    CHECK(build.calibration.k1_intercept == doctest::Approx(model.k1_intercept).epsilon(1e-6));
    CHECK(build.calibration.k2_a == doctest::Approx(model.k2_a).epsilon(1e-6));
    CHECK(build.calibration.k2_b == doctest::Approx(model.k2_b).epsilon(1e-6));
    CHECK(build.range_law.r_squared > 0.999);
    CHECK(build.heading_fits.size() == 5);
}

TEST_CASE("build_calibration on exact inverse-law gaps recovers 3193.7") {
    GeneratingModel model;
    model.k = 3193.7;
    const CalibrationBuild build = build_calibration(model.full_dataset());
    CHECK(build.calibration.k_range == doctest::Approx(3193.7).epsilon(1e-9));
}

TEST_CASE("build_calibration is permutation invariant") {
    const GeneratingModel model;
    auto dataset = model.full_dataset();
    const Calibration a = build_calibration(dataset).calibration;

    std::mt19937 rng(31);
    std::shuffle(dataset.begin(), dataset.end(), rng);
    const Calibration b = build_calibration(dataset).calibration;

    CHECK(a.k_range == b.k_range);
    CHECK(a.fx_px == b.fx_px);
    CHECK(a.k1_slope == b.k1_slope);
    CHECK(a.k1_intercept == b.k1_intercept);
    CHECK(a.k2_a == b.k2_a);
    CHECK(a.k2_b == b.k2_b);
}

TEST_CASE("build_calibration coverage errors") {
    const GeneratingModel model;

    std::vector<SweepSample> one_distance;
    for (double psi : {45.0, 90.0, 135.0, 180.0, 225.0})
        one_distance.push_back(model.sample(25.0, 0.0, psi));
    CHECK_THROWS_AS(build_calibration(one_distance), CoverageError);

    // enough distances for the range law, but no psi sweeps per distance
    std::vector<SweepSample> no_psi;
    for (double dv : {14.0, 19.0, 24.0, 29.0, 34.0}) no_psi.push_back(model.sample(dv, 0.0, 180.0));
    CHECK_THROWS_AS(build_calibration(no_psi), CoverageError);

    // heading coverage but no nonzero lateral offsets
    std::vector<SweepSample> no_lateral;
    for (double dv : {14.0, 19.0, 24.0, 29.0, 34.0})
        for (double psi : {45.0, 90.0, 135.0, 180.0, 225.0})
            no_lateral.push_back(model.sample(dv, 0.0, psi));
    CHECK_THROWS_AS(build_calibration(no_lateral), CoverageError);
}

TEST_CASE("per_distance_heading_fits skips dead-zone headings and sparse groups") {
    const GeneratingModel model;
    std::vector<SweepSample> dataset;
    for (double psi : {10.0, 30.0, 45.0, 90.0, 135.0, 180.0, 225.0, 340.0})
        dataset.push_back(model.sample(20.0, 0.0, psi));
    for (double psi : {45.0, 90.0})
        dataset.push_back(model.sample(30.0, 0.0, psi)); // only 2 headings: skipped

    const auto fits = per_distance_heading_fits(dataset, Envelopes{});
    REQUIRE(fits.size() == 1);
    CHECK(fits[0].d_v_cm == 20.0);
    CHECK(fits[0].report.n == 5); // 10, 30 and 340 excluded
    CHECK(fits[0].k1 == doctest::Approx(model.k1_slope * 20.0 + model.k1_intercept).epsilon(1e-9));
}

TEST_CASE("calibration JSON round trip is lossless") {
    const GeneratingModel model;
    const Calibration calib = build_calibration(model.full_dataset()).calibration;
    const auto path = temp_file("calib.json");
    save_calibration(calib, path);
    const Calibration back = load_calibration(path);

    CHECK(back.k_range == calib.k_range);
    CHECK(back.fx_px == calib.fx_px);
    CHECK(back.k1_slope == calib.k1_slope);
    CHECK(back.k1_intercept == calib.k1_intercept);
    CHECK(back.k2_a == calib.k2_a);
    CHECK(back.k2_b == calib.k2_b);
    CHECK(back.seam_spread_frac == calib.seam_spread_frac);
    CHECK(back.envelopes.range_dv.lo == calib.envelopes.range_dv.lo);
    CHECK(back.envelopes.heading_dead_zone.hi == calib.envelopes.heading_dead_zone.hi);
}

TEST_CASE("calibration JSON validation") {
    CHECK_THROWS_AS(calibration_from_json("not json at all"), CalibrationIoError);
    CHECK_THROWS_AS(calibration_from_json(R"({"fx_px": 500})"), CalibrationIoError);
    // invariant violation: k_range must be positive
    CHECK_THROWS_AS(calibration_from_json(R"({"k_range": -1, "fx_px": 500, "k1_slope": 0.1,
        "k1_intercept": 0.2, "k2_a": 90, "k2_b": -0.001})"),
                    CalibrationIoError);
    CHECK_THROWS_AS(load_calibration(temp_file("missing_calibration.json")), CalibrationIoError);
}

TEST_CASE("a hand-written calibration document drives the inverse law") {
    const auto path = temp_file("hand_written.json");
    {
        std::ofstream out(path);
        out << R"({"k_range": 3193.7, "fx_px": 500.0, "k1_slope": 0.164576,
                   "k1_intercept": 0.120188, "k2_a": 98.531, "k2_b": -0.0011516})";
    }
    const Calibration calib = load_calibration(path);
    CHECK(vertical_range_cm(63.874, calib) == doctest::Approx(50.0).epsilon(1e-9));
    CHECK(vertical_range_cm(319.37, calib) == doctest::Approx(10.0).epsilon(1e-9));
    // unspecified envelopes fall back to the defaults
    CHECK(calib.envelopes.range_dv.lo == 13.0);
    CHECK(calib.envelopes.range_dv.hi == 50.0);
}

TEST_CASE("measured_dv subtracts the marker radius") {
    SweepSample s;
    s.truth.d_v_cm = 30.0;
    CHECK(measured_dv(s) == 30.0);
    s.marker_radius_cm = 2.0;
    CHECK(measured_dv(s) == 28.0);
}
