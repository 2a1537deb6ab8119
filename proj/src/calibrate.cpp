#include "swarmloc/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "swarmloc/manifest.hpp"

namespace swarmloc {

namespace {

// Residual statistics against a fitted model y_hat(x).
template <typename Model>
FitReport make_report(std::span<const std::pair<double, double>> samples, Model&& y_hat,
                      std::vector<double> parameters) {
    FitReport rep;
    rep.parameters = std::move(parameters);
    rep.n = static_cast<int>(samples.size());

    double mean_y = 0.0;
    for (const auto& [x, y] : samples) mean_y += y;
    mean_y /= samples.size();

    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& [x, y] : samples) {
        const double r = y - y_hat(x);
        ss_res += r * r;
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    rep.residual_rms = std::sqrt(ss_res / samples.size());
    if (ss_tot > 0.0)
        rep.r_squared = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
    else
        rep.r_squared = ss_res == 0.0 ? 1.0 : 0.0;
    return rep;
}

} // namespace

std::pair<double, FitReport> fit_inverse_k(std::span<const std::pair<double, double>> samples) {
    if (samples.size() < 2) throw FitError("fit_inverse_k: need at least 2 samples");
    double num = 0.0, den = 0.0;
    for (const auto& [p, d] : samples) {
        if (!(p > 0.0)) throw FitError("fit_inverse_k: gaps must be positive");
        num += d / p;
        den += 1.0 / (p * p);
    }
    if (!(den > 0.0)) throw FitError("fit_inverse_k: degenerate samples");
    const double k = num / den;
    return {k, make_report(samples, [k](double p) { return k / p; }, {k})};
}

LinearFit fit_linear(std::span<const std::pair<double, double>> samples) {
    if (samples.size() < 2) throw FitError("fit_linear: need at least 2 samples");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(samples.size());
    for (const auto& [x, y] : samples) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double det = n * sxx - sx * sx;
    if (det == 0.0) throw FitError("fit_linear: all x values identical (rank deficient)");

    LinearFit fit;
    fit.slope = (n * sxy - sx * sy) / det;
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.report = make_report(
        samples, [&](double x) { return fit.slope * x + fit.intercept; },
        {fit.slope, fit.intercept});
    return fit;
}

ExponentialFit fit_exponential(std::span<const std::pair<double, double>> samples) {
    if (samples.size() < 2) throw FitError("fit_exponential: need at least 2 samples");
    std::vector<std::pair<double, double>> logged;
    logged.reserve(samples.size());
    for (const auto& [x, y] : samples) {
        if (!(y > 0.0)) throw FitError("fit_exponential: y values must be positive");
        logged.emplace_back(x, std::log(y));
    }
    const LinearFit line = fit_linear(logged);

    ExponentialFit fit;
    fit.a = std::exp(line.intercept);
    fit.b = line.slope;
    fit.report = make_report(
        samples, [&](double x) { return fit.a * std::exp(fit.b * x); }, {fit.a, fit.b});
    return fit;
}

std::pair<double, FitReport> fit_fx(std::span<const LateralSample> samples) {
    if (samples.empty()) throw FitError("fit_fx: need at least 1 sample");
    // Model d_h = (offset * d_v) * c with c = 1/fx; linear least squares in c.
    double num = 0.0, den = 0.0;
    for (const auto& s : samples) {
        const double u = s.offset_px * s.d_v_cm;
        num += s.d_h_cm * u;
        den += u * u;
    }
    if (!(den > 0.0)) throw FitError("fit_fx: all lateral offsets are zero");
    const double c = num / den;
    if (!(c > 0.0)) throw FitError("fit_fx: offsets inconsistent with a positive focal scale");
    const double fx = 1.0 / c;

    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(samples.size());
    for (const auto& s : samples) pairs.emplace_back(s.offset_px * s.d_v_cm, s.d_h_cm);
    return {fx, make_report(std::span<const std::pair<double, double>>(pairs),
                            [c](double u) { return u * c; }, {fx})};
}

namespace {

bool sample_less(const SweepSample& a, const SweepSample& b) {
    const auto key = [](const SweepSample& s) {
        return std::tuple(s.truth.d_v_cm, s.truth.d_h_cm, s.truth.psi_deg);
    };
    return key(a) < key(b);
}

} // namespace

std::vector<HeadingFitPoint> per_distance_heading_fits(const std::vector<SweepSample>& dataset,
                                                       const Envelopes& envelopes, int min_psi) {
    std::vector<SweepSample> sorted = dataset;
    std::sort(sorted.begin(), sorted.end(), sample_less);

    const double psi_lo = envelopes.heading_dead_zone.hi;
    const double psi_hi = 360.0 - envelopes.heading_dead_zone.hi;

    std::map<double, std::vector<const SweepSample*>> by_distance;
    for (const auto& s : sorted) {
        // The spiral decodes heading relative to the line of sight, so only
        // on-axis poses carry an unbiased psi label for fitting.
        if (s.truth.d_h_cm != 0.0) continue;
        if (!envelopes.heading_dv.contains(measured_dv(s))) continue;
        if (!s.features.spiral_gap_px) continue;
        if (s.truth.psi_deg < psi_lo || s.truth.psi_deg > psi_hi) continue;
        by_distance[measured_dv(s)].push_back(&s);
    }

    std::vector<HeadingFitPoint> fits;
    for (const auto& [dv, group] : by_distance) {
        std::set<double> distinct;
        for (const auto* s : group) distinct.insert(s->truth.psi_deg);
        if (static_cast<int>(distinct.size()) < min_psi) continue;

        std::vector<std::pair<double, double>> pairs;
        pairs.reserve(group.size());
        for (const auto* s : group) pairs.emplace_back(*s->features.spiral_gap_px, s->truth.psi_deg);
        const LinearFit line = fit_linear(pairs);

        HeadingFitPoint point;
        point.d_v_cm = dv;
        point.k1 = line.slope;
        point.k2 = -line.intercept;
        point.report = line.report;
        fits.push_back(std::move(point));
    }
    return fits;
}

CalibrationBuild build_calibration(const std::vector<SweepSample>& dataset,
                                   const Envelopes& envelopes) {
    std::vector<SweepSample> sorted = dataset;
    std::sort(sorted.begin(), sorted.end(), sample_less);

    std::vector<std::pair<double, double>> range_pairs; // (gap_px, d_v)
    std::set<double> range_distances;
    std::vector<LateralSample> lateral_samples;
    for (const auto& s : sorted) {
        if (s.features.ring_gap_px) {
            range_pairs.emplace_back(*s.features.ring_gap_px, measured_dv(s));
            range_distances.insert(measured_dv(s));
        }
        if (s.features.lateral_offset_px && s.truth.d_h_cm != 0.0)
            lateral_samples.push_back({*s.features.lateral_offset_px, s.truth.d_h_cm, measured_dv(s)});
    }

    if (range_distances.size() < 5)
        throw CoverageError("build_calibration: range law needs >= 5 distinct d_v values, got " +
                            std::to_string(range_distances.size()));

    const auto heading_fits = per_distance_heading_fits(sorted, envelopes);
    if (heading_fits.size() < 2)
        throw CoverageError(
            "build_calibration: heading law needs >= 2 distances inside the heading envelope "
            "with >= 5 distinct psi values each, got " +
            std::to_string(heading_fits.size()));
    if (lateral_samples.empty())
        throw CoverageError("build_calibration: lateral scale needs samples with d_h != 0");

    CalibrationBuild build;
    auto [k, k_rep] = fit_inverse_k(range_pairs);
    build.range_law = std::move(k_rep);

    auto [fx, fx_rep] = fit_fx(lateral_samples);
    build.lateral_scale = std::move(fx_rep);

    std::vector<std::pair<double, double>> k1_pairs, k2_pairs;
    for (const auto& p : heading_fits) {
        k1_pairs.emplace_back(p.d_v_cm, p.k1);
        k2_pairs.emplace_back(p.d_v_cm, p.k2);
    }
    const LinearFit k1_fit = fit_linear(k1_pairs);
    const ExponentialFit k2_fit = fit_exponential(k2_pairs);
    build.k1_line = k1_fit.report;
    build.k2_exp = k2_fit.report;
    build.heading_fits = heading_fits;

    build.calibration.k_range = k;
    build.calibration.fx_px = fx;
    build.calibration.k1_slope = k1_fit.slope;
    build.calibration.k1_intercept = k1_fit.intercept;
    build.calibration.k2_a = k2_fit.a;
    build.calibration.k2_b = k2_fit.b;
    build.calibration.envelopes = envelopes;
    build.calibration.validate();
    return build;
}

namespace {

nlohmann::json interval_to_json(const Interval& iv) { return {iv.lo, iv.hi}; }

Interval interval_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2)
        throw CalibrationIoError("calibration: envelope intervals must be [lo, hi]");
    return {j[0].get<double>(), j[1].get<double>()};
}

} // namespace

std::string calibration_to_json(const Calibration& calib) {
    nlohmann::json doc;
    doc["schema_version"] = 1;
    doc["k_range"] = calib.k_range;
    doc["fx_px"] = calib.fx_px;
    doc["k1_slope"] = calib.k1_slope;
    doc["k1_intercept"] = calib.k1_intercept;
    doc["k2_a"] = calib.k2_a;
    doc["k2_b"] = calib.k2_b;
    doc["seam_spread_frac"] = calib.seam_spread_frac;
    doc["envelopes"] = {
        {"range_dv", interval_to_json(calib.envelopes.range_dv)},
        {"bearing_dh", interval_to_json(calib.envelopes.bearing_dh)},
        {"heading_dv", interval_to_json(calib.envelopes.heading_dv)},
        {"heading_dead_zone", interval_to_json(calib.envelopes.heading_dead_zone)},
    };
    return doc.dump(2);
}

Calibration calibration_from_json(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw CalibrationIoError(std::string("calibration: malformed JSON: ") + e.what());
    }
    Calibration calib;
    try {
        calib.k_range = doc.at("k_range").get<double>();
        calib.fx_px = doc.at("fx_px").get<double>();
        calib.k1_slope = doc.at("k1_slope").get<double>();
        calib.k1_intercept = doc.at("k1_intercept").get<double>();
        calib.k2_a = doc.at("k2_a").get<double>();
        calib.k2_b = doc.at("k2_b").get<double>();
        if (doc.contains("seam_spread_frac"))
            calib.seam_spread_frac = doc["seam_spread_frac"].get<double>();
        if (doc.contains("envelopes")) {
            const auto& env = doc["envelopes"];
            calib.envelopes.range_dv = interval_from_json(env.at("range_dv"));
            calib.envelopes.bearing_dh = interval_from_json(env.at("bearing_dh"));
            calib.envelopes.heading_dv = interval_from_json(env.at("heading_dv"));
            calib.envelopes.heading_dead_zone = interval_from_json(env.at("heading_dead_zone"));
        }
    } catch (const nlohmann::json::exception& e) {
        throw CalibrationIoError(std::string("calibration: missing or mistyped key: ") + e.what());
    }
    try {
        calib.validate();
    } catch (const std::invalid_argument& e) {
        throw CalibrationIoError(e.what());
    }
    return calib;
}

void save_calibration(const Calibration& calib, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw CalibrationIoError("cannot write calibration " + path.string());
    out << calibration_to_json(calib) << '\n';
    if (!out) throw CalibrationIoError("write failed for calibration " + path.string());
}

Calibration load_calibration(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CalibrationIoError("cannot open calibration " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return calibration_from_json(text);
}

std::vector<SweepSample> load_sweep(const std::filesystem::path& manifest_path,
                                    const FeatureConfig& config, double marker_radius_cm) {
    const auto rows = read_manifest(manifest_path);
    const auto dir = manifest_path.parent_path();

    std::vector<SweepSample> samples;
    samples.reserve(rows.size());
    for (const auto& row : rows) {
        SweepSample s;
        s.truth.d_v_cm = row.dv_cm;
        s.truth.d_h_cm = row.dh_cm;
        s.truth.psi_deg = row.psi_deg;
        s.marker_radius_cm = marker_radius_cm;
        s.features = extract_features(load_ppm(dir / row.image), config);
        samples.push_back(std::move(s));
    }
    return samples;
}

} // namespace swarmloc
