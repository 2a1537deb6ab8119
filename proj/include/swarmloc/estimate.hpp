#pragma once

#include <stdexcept>
#include <string>

#include "swarmloc/segment.hpp"

namespace swarmloc {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return v >= lo && v <= hi; }
    bool contains_half_open(double v) const { return v >= lo && v < hi; }
};

/// Validity envelopes from the error/limit table; closed intervals except the
/// heading dead zone, which excludes its upper bound.
struct Envelopes {
    Interval range_dv{13.0, 50.0};
    Interval bearing_dh{5.1, 23.0};
    Interval heading_dv{12.0, 37.0};
    Interval heading_dead_zone{0.0, 45.0};
};

/// Fitted constants mapping pixel features to metric pose.
///
/// k_range realizes the inverse pixel law d_v = k / gap. The lateral scale is
/// the pinhole identity d_h = offset_px * d_v / fx_px, so the cm-per-pixel
/// coefficient grows with distance. The heading law is
/// psi = k1(d_v) * spiral_gap - k2(d_v) with k1 linear and k2 exponential in
/// d_v. seam_spread_frac bounds the yellow vertical spread (relative to the
/// ring gap) beyond which the spiral is considered split by its seam.
struct Calibration {
    double k_range = 0.0;
    double fx_px = 0.0;
    double k1_slope = 0.0;
    double k1_intercept = 0.0;
    double k2_a = 0.0;
    double k2_b = 0.0;
    Envelopes envelopes;
    double seam_spread_frac = 0.17;

    double k1_at(double d_v_cm) const { return k1_slope * d_v_cm + k1_intercept; }
    double k2_at(double d_v_cm) const;

    void validate() const; // throws std::invalid_argument on bad constants
};

struct PoseEstimate {
    double d_v_cm = 0.0;
    double d_h_cm = 0.0;
    double range_cm = 0.0;
    double bearing_deg = 0.0;
    double heading_deg = 0.0;
    bool range_valid = false;
    bool bearing_valid = false;
    bool heading_valid = false;
};

std::string pose_to_json(const PoseEstimate& p, const MarkerFeatures* features = nullptr);

class MarkerNotFoundError : public std::runtime_error {
public:
    MarkerNotFoundError() : std::runtime_error("red or blue ring centroid absent; no marker in view") {}
};

class DegenerateFeatureError : public std::runtime_error {
public:
    explicit DegenerateFeatureError(const std::string& what) : std::runtime_error(what) {}
};

class OutOfEnvelopeError : public std::runtime_error {
public:
    explicit OutOfEnvelopeError(const std::string& what) : std::runtime_error(what) {}
};

class SingularGeometryError : public std::runtime_error {
public:
    explicit SingularGeometryError(const std::string& what) : std::runtime_error(what) {}
};

/// Inverse pixel law: k_range / ring_gap_px. Throws DegenerateFeatureError on
/// a non-positive gap.
double vertical_range_cm(double ring_gap_px, const Calibration& calib);

/// Pinhole lateral scale: offset_px * d_v / fx.
double lateral_offset_cm(double lateral_offset_px, double d_v_cm, const Calibration& calib);

/// atan(d_h / d_v) in degrees, sign following d_h.
double bearing_deg(double d_h_cm, double d_v_cm);

/// d_v / cos(bearing). Throws SingularGeometryError at +-90 degrees.
double relative_range_cm(double d_v_cm, double bearing);

struct HeadingResult {
    double psi_deg = 0.0; // wrapped into [0,360)
    bool dead_zone = false;
};

/// Heading law at distance d_v. Throws OutOfEnvelopeError when d_v lies
/// outside the heading envelope; a result inside the dead zone is returned
/// with the flag set rather than thrown.
HeadingResult heading_deg(double spiral_gap_px, double d_v_cm, const Calibration& calib);

/// Chains the estimators over one frame's features and applies the validity
/// envelopes. Throws MarkerNotFoundError when either ring centroid is absent.
PoseEstimate estimate_pose(const MarkerFeatures& features, const Calibration& calib);

} // namespace swarmloc
