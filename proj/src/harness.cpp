#include "swarmloc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace swarmloc {

double wrapped_angle_error_deg(double a_deg, double b_deg) {
    double d = std::fmod(std::abs(a_deg - b_deg), 360.0);
    if (d > 180.0) d = 360.0 - d;
    return d;
}

namespace {

class StatsAccumulator {
public:
    void add(double abs_err, double pct_err) {
        abs_.push_back(abs_err);
        pct_.push_back(pct_err);
    }
    void add_invalid() { ++n_invalid_; }

    VariableStats finish() const {
        VariableStats out;
        out.n_valid = static_cast<int>(pct_.size());
        out.n_invalid = n_invalid_;
        if (pct_.empty()) return out;
        auto reduce = [](const std::vector<double>& v, double& mean, double& std_dev, double& mx) {
            mean = 0.0;
            for (double x : v) mean += x;
            mean /= v.size();
            double var = 0.0;
            for (double x : v) var += (x - mean) * (x - mean);
            std_dev = std::sqrt(var / v.size());
            mx = *std::max_element(v.begin(), v.end());
        };
        reduce(pct_, out.mean_pct, out.std_pct, out.max_pct);
        reduce(abs_, out.mean_abs, out.std_abs, out.max_abs);
        return out;
    }

private:
    std::vector<double> abs_;
    std::vector<double> pct_;
    int n_invalid_ = 0;
};

} // namespace

ErrorReport evaluate_samples(const Calibration& calib, const std::vector<SweepSample>& samples) {
    if (samples.empty()) throw std::runtime_error("evaluate: empty dataset");

    std::vector<const SweepSample*> ordered;
    ordered.reserve(samples.size());
    for (const auto& s : samples) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(), [](const SweepSample* a, const SweepSample* b) {
        return std::tuple(a->truth.d_v_cm, a->truth.d_h_cm, a->truth.psi_deg) <
               std::tuple(b->truth.d_v_cm, b->truth.d_h_cm, b->truth.psi_deg);
    });

    StatsAccumulator range_acc, bearing_acc, heading_acc;
    constexpr double kDegPerRad = 180.0 / std::numbers::pi;

    for (const auto* s : ordered) {
        // Bearing truth comes from the axis geometry; range truth is the
        // measurable lens-to-surface distance along the line of sight.
        const double theta_true = std::atan(s->truth.d_h_cm / s->truth.d_v_cm) * kDegPerRad;
        const double d_true =
            std::hypot(s->truth.d_v_cm, s->truth.d_h_cm) - s->marker_radius_cm;

        PoseEstimate pose;
        try {
            pose = estimate_pose(s->features, calib);
        } catch (const MarkerNotFoundError&) {
            range_acc.add_invalid();
            bearing_acc.add_invalid();
            heading_acc.add_invalid();
            continue;
        }

        if (pose.range_valid) {
            const double abs_err = std::abs(pose.range_cm - d_true);
            range_acc.add(abs_err, abs_err / d_true * 100.0);
        } else {
            range_acc.add_invalid();
        }
        if (pose.bearing_valid) {
            const double abs_err = wrapped_angle_error_deg(pose.bearing_deg, theta_true);
            bearing_acc.add(abs_err, abs_err / 90.0 * 100.0);
        } else {
            bearing_acc.add_invalid();
        }
        if (pose.heading_valid) {
            const double abs_err = wrapped_angle_error_deg(pose.heading_deg, s->truth.psi_deg);
            heading_acc.add(abs_err, abs_err / 360.0 * 100.0);
        } else {
            heading_acc.add_invalid();
        }
    }

    ErrorReport report;
    report.range = range_acc.finish();
    report.bearing = bearing_acc.finish();
    report.heading = heading_acc.finish();
    report.envelopes = calib.envelopes;
    return report;
}

ErrorReport evaluate(const Calibration& calib, const std::filesystem::path& manifest_path,
                     const FeatureConfig& config) {
    const auto samples = load_sweep(manifest_path, config);
    if (samples.empty()) throw std::runtime_error("evaluate: empty manifest " + manifest_path.string());
    return evaluate_samples(calib, samples);
}

namespace {

nlohmann::json stats_to_json(const VariableStats& s) {
    return {{"mean_pct_error", s.mean_pct}, {"std_pct_error", s.std_pct},
            {"max_pct_error", s.max_pct},   {"mean_abs_error", s.mean_abs},
            {"std_abs_error", s.std_abs},   {"max_abs_error", s.max_abs},
            {"n_valid", s.n_valid},         {"n_invalid", s.n_invalid}};
}

} // namespace

std::string report_to_json(const ErrorReport& report) {
    nlohmann::json doc;
    doc["range"] = stats_to_json(report.range);
    doc["bearing"] = stats_to_json(report.bearing);
    doc["heading"] = stats_to_json(report.heading);
    doc["envelopes"] = {
        {"range_dv", {report.envelopes.range_dv.lo, report.envelopes.range_dv.hi}},
        {"bearing_dh", {report.envelopes.bearing_dh.lo, report.envelopes.bearing_dh.hi}},
        {"heading_dv", {report.envelopes.heading_dv.lo, report.envelopes.heading_dv.hi}},
        {"heading_dead_zone",
         {report.envelopes.heading_dead_zone.lo, report.envelopes.heading_dead_zone.hi}},
    };
    return doc.dump(2);
}

std::string report_to_table(const ErrorReport& report) {
    const auto& env = report.envelopes;
    char buf[160];
    std::string out;
    out += "variable      dv envelope    dh envelope   mean err    max err     valid  invalid\n";
    auto row = [&](const char* name, const std::string& dv, const std::string& dh,
                   const VariableStats& s) {
        std::snprintf(buf, sizeof(buf), "%-12s  %-12s  %-12s  %7.3f %%  %7.3f %%  %5d  %7d\n", name,
                      dv.c_str(), dh.c_str(), s.mean_pct, s.max_pct, s.n_valid, s.n_invalid);
        out += buf;
    };
    auto iv = [&](const Interval& i) {
        std::snprintf(buf, sizeof(buf), "%g-%g cm", i.lo, i.hi);
        return std::string(buf);
    };
    row("range", iv(env.range_dv), "-", report.range);
    row("bearing", iv(env.range_dv), iv(env.bearing_dh), report.bearing);
    row("heading", iv(env.heading_dv), "-", report.heading);
    return out;
}

CurveKind curve_kind_from_name(const std::string& name) {
    if (name == "range_law") return CurveKind::range_law;
    if (name == "k1k2") return CurveKind::k1k2;
    if (name == "lateral_k") return CurveKind::lateral_k;
    throw std::invalid_argument("unknown curve kind '" + name + "'");
}

namespace {

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

// Minimal standalone scatter plot: frame, axis labels, one circle per point
// and one polyline per curve series.
void write_svg(const std::filesystem::path& path, const std::string& x_label,
               const std::string& y_label, const std::vector<Series>& scatter,
               const std::vector<Series>& curves) {
    constexpr double W = 640.0, H = 480.0, margin = 60.0;

    double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
    auto grow = [&](const std::vector<Series>& list) {
        for (const auto& s : list)
            for (const auto& [x, y] : s.points) {
                x_min = std::min(x_min, x);
                x_max = std::max(x_max, x);
                y_min = std::min(y_min, y);
                y_max = std::max(y_max, y);
            }
    };
    grow(scatter);
    grow(curves);
    if (x_min > x_max) { x_min = 0.0; x_max = 1.0; }
    if (y_min > y_max) { y_min = 0.0; y_max = 1.0; }
    if (x_max == x_min) x_max = x_min + 1.0;
    if (y_max == y_min) y_max = y_min + 1.0;

    auto sx = [&](double x) { return margin + (x - x_min) / (x_max - x_min) * (W - 2 * margin); };
    auto sy = [&](double y) { return H - margin - (y - y_min) / (y_max - y_min) * (H - 2 * margin); };

    const char* palette[] = {"#1f6fb4", "#d03030", "#2c8a4b", "#9050b0"};
    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    svg << "  <rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H
        << "\" fill=\"white\"/>\n";
    svg << "  <line x1=\"" << margin << "\" y1=\"" << H - margin << "\" x2=\"" << W - margin
        << "\" y2=\"" << H - margin << "\" stroke=\"black\"/>\n";
    svg << "  <line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << H - margin << "\" stroke=\"black\"/>\n";
    svg << "  <text x=\"" << W / 2 << "\" y=\"" << H - margin / 3
        << "\" text-anchor=\"middle\" font-size=\"14\">" << x_label << "</text>\n";
    svg << "  <text x=\"" << margin / 3 << "\" y=\"" << H / 2
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 " << margin / 3 << " "
        << H / 2 << ")\">" << y_label << "</text>\n";
    char num[64];
    std::snprintf(num, sizeof(num), "%g", x_min);
    svg << "  <text x=\"" << margin << "\" y=\"" << H - margin + 18
        << "\" text-anchor=\"middle\" font-size=\"11\">" << num << "</text>\n";
    std::snprintf(num, sizeof(num), "%g", x_max);
    svg << "  <text x=\"" << W - margin << "\" y=\"" << H - margin + 18
        << "\" text-anchor=\"middle\" font-size=\"11\">" << num << "</text>\n";
    std::snprintf(num, sizeof(num), "%g", y_min);
    svg << "  <text x=\"" << margin - 8 << "\" y=\"" << H - margin
        << "\" text-anchor=\"end\" font-size=\"11\">" << num << "</text>\n";
    std::snprintf(num, sizeof(num), "%g", y_max);
    svg << "  <text x=\"" << margin - 8 << "\" y=\"" << margin + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << num << "</text>\n";

    int color = 0;
    for (const auto& s : scatter) {
        const char* fill = palette[color++ % 4];
        for (const auto& [x, y] : s.points)
            svg << "  <circle cx=\"" << sx(x) << "\" cy=\"" << sy(y)
                << "\" r=\"3\" fill=\"" << fill << "\" fill-opacity=\"0.7\"/>\n";
    }
    for (const auto& s : curves) {
        const char* stroke = palette[color++ % 4];
        svg << "  <polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : s.points) svg << sx(x) << "," << sy(y) << " ";
        svg << "\"/>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write SVG " + path.string());
    out << svg.str();
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write CSV " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "\n");
    char buf[48];
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.12g", row[i]);
            out << buf << (i + 1 < row.size() ? "," : "\n");
        }
    }
}

} // namespace

void curve_export(const std::vector<SweepSample>& dataset, const Calibration& calib,
                  CurveKind which, const std::filesystem::path& out_csv,
                  const std::filesystem::path& out_svg) {
    switch (which) {
    case CurveKind::range_law: {
        std::vector<std::vector<double>> rows;
        Series points{"measured", {}};
        for (const auto& s : dataset) {
            if (!s.features.ring_gap_px) continue;
            const double gap = *s.features.ring_gap_px;
            rows.push_back({gap, s.truth.d_v_cm, calib.k_range / gap});
            points.points.emplace_back(gap, s.truth.d_v_cm);
        }
        if (rows.empty()) throw std::runtime_error("curve_export: no ring-gap samples");
        std::sort(rows.begin(), rows.end());
        std::sort(points.points.begin(), points.points.end());
        Series curve{"fit", {}};
        const double gap_lo = rows.front()[0], gap_hi = rows.back()[0];
        for (int i = 0; i <= 100; ++i) {
            const double gap = gap_lo + (gap_hi - gap_lo) * i / 100.0;
            curve.points.emplace_back(gap, calib.k_range / gap);
        }
        write_csv(out_csv, {"gap_px", "dv_true_cm", "dv_fit_cm"}, rows);
        write_svg(out_svg, "ring gap (px)", "vertical distance (cm)", {points}, {curve});
        break;
    }
    case CurveKind::k1k2: {
        const auto fits = per_distance_heading_fits(dataset, calib.envelopes);
        if (fits.empty()) throw std::runtime_error("curve_export: no per-distance heading fits");
        std::vector<std::vector<double>> rows;
        Series k1_points{"k1", {}}, k2_points{"k2", {}};
        Series k1_curve{"k1 fit", {}}, k2_curve{"k2 fit", {}};
        for (const auto& f : fits) {
            rows.push_back({f.d_v_cm, f.k1, calib.k1_at(f.d_v_cm), f.k2, calib.k2_at(f.d_v_cm)});
            k1_points.points.emplace_back(f.d_v_cm, f.k1);
            k2_points.points.emplace_back(f.d_v_cm, f.k2);
        }
        const double lo = fits.front().d_v_cm, hi = fits.back().d_v_cm;
        for (int i = 0; i <= 100; ++i) {
            const double dv = lo + (hi - lo) * i / 100.0;
            k1_curve.points.emplace_back(dv, calib.k1_at(dv));
            k2_curve.points.emplace_back(dv, calib.k2_at(dv));
        }
        write_csv(out_csv, {"dv_cm", "k1", "k1_fit", "k2", "k2_fit"}, rows);
        write_svg(out_svg, "vertical distance (cm)", "heading coefficients",
                  {k1_points, k2_points}, {k1_curve, k2_curve});
        break;
    }
    case CurveKind::lateral_k: {
        std::vector<std::vector<double>> rows;
        Series points{"implied k", {}};
        for (const auto& s : dataset) {
            if (!s.features.lateral_offset_px || s.truth.d_h_cm == 0.0) continue;
            const double offset = *s.features.lateral_offset_px;
            if (offset == 0.0) continue;
            const double k_implied = s.truth.d_h_cm / offset;
            rows.push_back({s.truth.d_v_cm, s.truth.d_h_cm, offset, k_implied,
                            s.truth.d_v_cm / calib.fx_px});
            points.points.emplace_back(s.truth.d_v_cm, k_implied);
        }
        if (rows.empty()) throw std::runtime_error("curve_export: no lateral samples");
        std::sort(rows.begin(), rows.end());
        std::sort(points.points.begin(), points.points.end());
        Series curve{"dv/fx", {}};
        const double lo = rows.front()[0], hi = rows.back()[0];
        for (int i = 0; i <= 100; ++i) {
            const double dv = lo + (hi - lo) * i / 100.0;
            curve.points.emplace_back(dv, dv / calib.fx_px);
        }
        write_csv(out_csv, {"dv_cm", "dh_cm", "offset_px", "k_implied", "k_model"}, rows);
        write_svg(out_svg, "vertical distance (cm)", "lateral scale k (cm/px)", {points}, {curve});
        break;
    }
    }
}

} // namespace swarmloc
