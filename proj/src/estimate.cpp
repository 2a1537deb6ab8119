#include "swarmloc/estimate.hpp"

#include <cmath>
#include <numbers>

#include <json.hpp>

namespace swarmloc {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

double wrap360(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w < 0.0) w += 360.0;
    return w;
}

} // namespace

double Calibration::k2_at(double d_v_cm) const {
    return k2_a * std::exp(k2_b * d_v_cm);
}

void Calibration::validate() const {
    if (!(k_range > 0.0)) throw std::invalid_argument("calibration: k_range must be positive");
    if (!(fx_px > 0.0)) throw std::invalid_argument("calibration: fx_px must be positive");
    if (!(k1_slope > 0.0)) throw std::invalid_argument("calibration: k1_slope must be positive");
    if (!(k2_a > 0.0)) throw std::invalid_argument("calibration: k2_a must be positive");
    if (!(seam_spread_frac > 0.0))
        throw std::invalid_argument("calibration: seam_spread_frac must be positive");
    for (const Interval* iv : {&envelopes.range_dv, &envelopes.bearing_dh, &envelopes.heading_dv,
                               &envelopes.heading_dead_zone}) {
        if (!(iv->lo < iv->hi)) throw std::invalid_argument("calibration: empty envelope interval");
    }
}

double vertical_range_cm(double ring_gap_px, const Calibration& calib) {
    if (!(ring_gap_px > 0.0))
        throw DegenerateFeatureError("vertical_range_cm: ring gap must be positive");
    return calib.k_range / ring_gap_px;
}

double lateral_offset_cm(double lateral_offset_px, double d_v_cm, const Calibration& calib) {
    if (!(d_v_cm > 0.0)) throw std::invalid_argument("lateral_offset_cm: d_v must be positive");
    return lateral_offset_px * d_v_cm / calib.fx_px;
}

double bearing_deg(double d_h_cm, double d_v_cm) {
    if (!(d_v_cm > 0.0)) throw std::invalid_argument("bearing_deg: d_v must be positive");
    return std::atan(d_h_cm / d_v_cm) * kDegPerRad;
}

double relative_range_cm(double d_v_cm, double bearing) {
    if (std::abs(bearing) >= 90.0)
        throw SingularGeometryError("relative_range_cm: bearing at or beyond +-90 degrees");
    return d_v_cm / std::cos(bearing / kDegPerRad);
}

HeadingResult heading_deg(double spiral_gap_px, double d_v_cm, const Calibration& calib) {
    if (!calib.envelopes.heading_dv.contains(d_v_cm))
        throw OutOfEnvelopeError("heading_deg: d_v outside the heading envelope");
    const double k1 = calib.k1_at(d_v_cm);
    const double k2 = calib.k2_at(d_v_cm);
    HeadingResult r;
    r.psi_deg = wrap360(k1 * spiral_gap_px - k2);
    r.dead_zone = calib.envelopes.heading_dead_zone.contains_half_open(r.psi_deg);
    return r;
}

PoseEstimate estimate_pose(const MarkerFeatures& features, const Calibration& calib) {
    if (!features.red_centroid || !features.blue_centroid || !features.ring_gap_px ||
        !features.lateral_offset_px)
        throw MarkerNotFoundError();

    PoseEstimate pose;
    pose.d_v_cm = vertical_range_cm(*features.ring_gap_px, calib);
    pose.d_h_cm = lateral_offset_cm(*features.lateral_offset_px, pose.d_v_cm, calib);
    pose.bearing_deg = bearing_deg(pose.d_h_cm, pose.d_v_cm);
    pose.range_cm = relative_range_cm(pose.d_v_cm, pose.bearing_deg);

    pose.range_valid = calib.envelopes.range_dv.contains(pose.d_v_cm);
    pose.bearing_valid = pose.range_valid && calib.envelopes.bearing_dh.contains(std::abs(pose.d_h_cm));

    const bool heading_in_envelope = calib.envelopes.heading_dv.contains(pose.d_v_cm);
    if (features.yellow_centroid && features.spiral_gap_px && heading_in_envelope) {
        const HeadingResult h = heading_deg(*features.spiral_gap_px, pose.d_v_cm, calib);
        pose.heading_deg = h.psi_deg;
        // A split spiral (seam facing the camera) inflates the yellow mask's
        // vertical spread well beyond a single stripe's.
        const bool seam_split = features.yellow_spread_px && features.ring_gap_px &&
                                *features.yellow_spread_px >
                                    calib.seam_spread_frac * *features.ring_gap_px;
        pose.heading_valid = !h.dead_zone && !seam_split;
    }
    return pose;
}

std::string pose_to_json(const PoseEstimate& p, const MarkerFeatures* features) {
    nlohmann::json doc;
    doc["d_v_cm"] = p.d_v_cm;
    doc["d_h_cm"] = p.d_h_cm;
    doc["range_cm"] = p.range_cm;
    doc["bearing_deg"] = p.bearing_deg;
    doc["heading_deg"] = p.heading_deg;
    doc["range_valid"] = p.range_valid;
    doc["bearing_valid"] = p.bearing_valid;
    doc["heading_valid"] = p.heading_valid;
    if (features) doc["features"] = nlohmann::json::parse(features_to_json(*features));
    return doc.dump(2);
}

} // namespace swarmloc
