#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "swarmloc/calibrate.hpp"

namespace swarmloc {

/// Error statistics for one estimated variable. Percent errors use the range
/// itself as base for range, 90 degrees full scale for bearing and 360
/// degrees for heading; absolute errors (cm or wrapped degrees) ride along so
/// any other base can be recomputed. Only valid-flagged estimates enter the
/// statistics.
struct VariableStats {
    double mean_pct = 0.0;
    double std_pct = 0.0;
    double max_pct = 0.0;
    double mean_abs = 0.0;
    double std_abs = 0.0;
    double max_abs = 0.0;
    int n_valid = 0;
    int n_invalid = 0;
};

struct ErrorReport {
    VariableStats range;
    VariableStats bearing;
    VariableStats heading;
    Envelopes envelopes;
};

/// Absolute angular difference wrapped into [0, 180].
double wrapped_angle_error_deg(double a_deg, double b_deg);

/// Runs estimate_pose over every sample and accumulates per-variable error
/// statistics against the ground truth. Frames without a detectable marker
/// count as invalid for all three variables.
ErrorReport evaluate_samples(const Calibration& calib, const std::vector<SweepSample>& samples);

/// Same, loading frames through a manifest. Throws std::runtime_error on an
/// empty manifest.
ErrorReport evaluate(const Calibration& calib, const std::filesystem::path& manifest_path,
                     const FeatureConfig& config = {});

std::string report_to_json(const ErrorReport& report);

/// Aligned-text table with one row per variable: envelope and worst-case
/// error.
std::string report_to_table(const ErrorReport& report);

enum class CurveKind { range_law, k1k2, lateral_k };

CurveKind curve_kind_from_name(const std::string& name); // throws on unknown names

/// Writes scatter points plus the fitted curve as CSV columns and a
/// standalone SVG plot (axes, points, one polyline per fitted curve).
void curve_export(const std::vector<SweepSample>& dataset, const Calibration& calib,
                  CurveKind which, const std::filesystem::path& out_csv,
                  const std::filesystem::path& out_svg);

} // namespace swarmloc
