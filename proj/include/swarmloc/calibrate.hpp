#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "swarmloc/estimate.hpp"
#include "swarmloc/segment.hpp"
#include "swarmloc/synthcam.hpp"

namespace swarmloc {

/// Ground truth paired with the pixel features measured from its frame.
///
/// truth.d_v_cm locates the cylinder axis (the renderer's convention), while
/// the calibration experiments record camera-to-surface distances. The
/// marker radius bridges the two: every fit and evaluation uses
/// measured_dv(), the surface-referenced distance. Hand-built samples whose
/// d_v already is the measured quantity keep the radius at zero.
struct SweepSample {
    ScenePose truth;
    MarkerFeatures features;
    double marker_radius_cm = 0.0;
};

inline double measured_dv(const SweepSample& s) {
    return s.truth.d_v_cm - s.marker_radius_cm;
}

struct FitReport {
    std::vector<double> parameters;
    double residual_rms = 0.0;
    double r_squared = 0.0;
    int n = 0;
};

class FitError : public std::runtime_error {
public:
    explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

class CoverageError : public std::runtime_error {
public:
    explicit CoverageError(const std::string& what) : std::runtime_error(what) {}
};

class CalibrationIoError : public std::runtime_error {
public:
    explicit CalibrationIoError(const std::string& what) : std::runtime_error(what) {}
};

/// Least squares for d = k / p over (gap_px, d_v_cm) pairs; closed form
/// k = sum(d/p) / sum(1/p^2).
std::pair<double, FitReport> fit_inverse_k(std::span<const std::pair<double, double>> samples);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    FitReport report;
};

LinearFit fit_linear(std::span<const std::pair<double, double>> samples);

struct ExponentialFit {
    double a = 0.0;
    double b = 0.0;
    FitReport report;
};

/// Fits y = a * e^(b x) by ordinary least squares on ln y. Residuals and r^2
/// are reported in y units.
ExponentialFit fit_exponential(std::span<const std::pair<double, double>> samples);

struct LateralSample {
    double offset_px = 0.0;
    double d_h_cm = 0.0;
    double d_v_cm = 0.0;
};

/// Fits the pinhole scale in d_h = offset * d_v / fx by least squares on the
/// reciprocal parameter.
std::pair<double, FitReport> fit_fx(std::span<const LateralSample> samples);

/// Heading-law line fitted at one distance: psi = k1 * spiral_gap - k2.
struct HeadingFitPoint {
    double d_v_cm = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
    FitReport report;
};

/// Per-distance psi-vs-gap fits over on-axis (d_h = 0) samples inside the
/// heading envelope. Samples whose true heading falls in
/// [dead zone hi, 360 - dead zone hi] participate; a distance needs min_psi
/// distinct headings to be fit.
std::vector<HeadingFitPoint> per_distance_heading_fits(const std::vector<SweepSample>& dataset,
                                                       const Envelopes& envelopes,
                                                       int min_psi = 5);

struct CalibrationBuild {
    Calibration calibration;
    FitReport range_law;
    FitReport lateral_scale;
    FitReport k1_line;
    FitReport k2_exp;
    std::vector<HeadingFitPoint> heading_fits;
};

/// Runs every fit over one dataset: the inverse range law on ring gaps, the
/// lateral pinhole scale, and per-distance heading lines reduced to the
/// k1(d_v) linear and k2(d_v) exponential models. The dataset ordering does
/// not matter; samples are sorted before fitting.
CalibrationBuild build_calibration(const std::vector<SweepSample>& dataset,
                                   const Envelopes& envelopes = {});

void save_calibration(const Calibration& calib, const std::filesystem::path& path);
Calibration load_calibration(const std::filesystem::path& path);
std::string calibration_to_json(const Calibration& calib);
Calibration calibration_from_json(const std::string& json_text);

/// Loads every frame named by a manifest and extracts its features. The
/// radius defaults to the stock 4 cm marker's.
std::vector<SweepSample> load_sweep(const std::filesystem::path& manifest_path,
                                    const FeatureConfig& config = {},
                                    double marker_radius_cm = 2.0);

} // namespace swarmloc
