#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "swarmloc/calibrate.hpp"
#include "swarmloc/estimate.hpp"
#include "swarmloc/harness.hpp"
#include "swarmloc/manifest.hpp"
#include "swarmloc/segment.hpp"
#include "swarmloc/synthcam.hpp"

namespace {

// Exit codes: 0 success, 1 usage, 2 data error, 3 assertion failure.
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitAssert = 3;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

swarmloc::Interval parse_interval(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw CLI::ValidationError("intervals use lo:hi syntax, got '" + text + "'");
    swarmloc::Interval iv;
    try {
        iv.lo = std::stod(text.substr(0, colon));
        iv.hi = std::stod(text.substr(colon + 1));
    } catch (const std::exception&) {
        throw CLI::ValidationError("cannot parse interval '" + text + "'");
    }
    if (!(iv.lo < iv.hi)) throw CLI::ValidationError("interval '" + text + "' is empty");
    return iv;
}

struct CameraFlags {
    swarmloc::CameraSpec cam;

    void attach(CLI::App* app) {
        app->add_option("--cam-width", cam.width_px, "frame width in pixels");
        app->add_option("--cam-height-px", cam.height_px, "frame height in pixels");
        app->add_option("--fx", cam.fx_px, "horizontal focal scale in pixels");
        app->add_option("--fy", cam.fy_px, "vertical focal scale in pixels");
        app->add_option("--cx", cam.cx_px, "principal point x in pixels");
        app->add_option("--cy", cam.cy_px, "principal point y in pixels");
        app->add_option("--cam-height", cam.height_cm, "optical center height above ground, cm");
    }
};

struct MarkerFlags {
    swarmloc::MarkerSpec marker;

    void attach(CLI::App* app) {
        app->add_option("--marker-diameter", marker.diameter_cm, "cylinder diameter, cm");
        app->add_option("--marker-height", marker.height_cm, "cylinder height, cm");
        app->add_option("--spiral-width", marker.spiral_width_frac,
                        "spiral stripe width as a fraction of the inner band");
    }
};

swarmloc::FeatureConfig make_feature_config(const std::string& thresholds_path, double min_area) {
    swarmloc::FeatureConfig config;
    if (!thresholds_path.empty())
        config.ranges = swarmloc::color_ranges_from_json(read_text_file(thresholds_path));
    config.min_area = min_area;
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vision-based relative range, bearing and heading from cylindrical markers"};
    app.require_subcommand(1);

    // render
    auto* render_cmd = app.add_subcommand("render", "render one frame at a known pose");
    double dv = 30.0, dh = 0.0, psi = 180.0;
    std::string render_out;
    double noise_sigma = 0.0, salt_pepper = 0.0;
    std::uint64_t seed = 0;
    CameraFlags render_camera;
    MarkerFlags render_marker;
    render_cmd->add_option("--dv", dv, "forward distance, cm")->required();
    render_cmd->add_option("--dh", dh, "signed lateral offset, cm");
    render_cmd->add_option("--psi", psi, "marker heading, degrees");
    render_cmd->add_option("--out", render_out, "output PPM path")->required();
    render_cmd->add_option("--noise-sigma", noise_sigma, "Gaussian noise sigma, channel units");
    render_cmd->add_option("--salt-pepper", salt_pepper, "salt-and-pepper pixel fraction");
    render_cmd->add_option("--seed", seed, "noise seed");
    render_camera.attach(render_cmd);
    render_marker.attach(render_cmd);

    // render-sweep
    auto* sweep_cmd = app.add_subcommand("render-sweep", "render a pose grid plus manifest");
    std::string grid_path, sweep_out;
    std::optional<std::uint64_t> sweep_seed;
    CameraFlags sweep_camera;
    MarkerFlags sweep_marker;
    sweep_cmd->add_option("--grid", grid_path, "grid JSON {dv,dh,psi,noise}")->required();
    sweep_cmd->add_option("--out", sweep_out, "output directory")->required();
    sweep_cmd->add_option("--seed", sweep_seed, "override the grid's noise seed");
    sweep_camera.attach(sweep_cmd);
    sweep_marker.attach(sweep_cmd);

    // calibrate
    auto* calib_cmd = app.add_subcommand("calibrate", "fit calibration constants from a sweep");
    std::string calib_data, calib_out, calib_thresholds;
    double calib_min_area = 20.0, calib_marker_diameter = 4.0;
    std::optional<std::string> env_range, env_heading, env_lateral;
    calib_cmd->add_option("--data", calib_data, "sweep directory (contains manifest.csv)")
        ->required();
    calib_cmd->add_option("--out", calib_out, "calibration JSON path")->required();
    calib_cmd->add_option("--thresholds", calib_thresholds, "color threshold JSON");
    calib_cmd->add_option("--min-area", calib_min_area, "minimum mask area in pixels");
    calib_cmd->add_option("--marker-diameter", calib_marker_diameter,
                          "marker diameter, cm (surface-distance correction)");
    calib_cmd->add_option("--envelope-range", env_range, "range validity d_v interval, lo:hi cm");
    calib_cmd->add_option("--envelope-heading", env_heading, "heading validity d_v interval, lo:hi cm");
    calib_cmd->add_option("--envelope-lateral", env_lateral, "bearing validity |d_h| interval, lo:hi cm");

    // detect
    auto* detect_cmd = app.add_subcommand("detect", "estimate the pose in one frame");
    std::string detect_image, detect_calib, detect_thresholds;
    double detect_min_area = 20.0;
    detect_cmd->add_option("--image", detect_image, "input PPM frame")->required();
    detect_cmd->add_option("--calib", detect_calib, "calibration JSON")->required();
    detect_cmd->add_option("--thresholds", detect_thresholds, "color threshold JSON");
    detect_cmd->add_option("--min-area", detect_min_area, "minimum mask area in pixels");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "run the pipeline over a test sweep");
    std::string eval_calib, eval_data, eval_report, eval_thresholds, curves, curve_prefix = "curve";
    double eval_min_area = 20.0, eval_marker_diameter = 4.0;
    bool do_assert = false;
    double max_range_pct = 1.0, max_bearing_pct = 5.0, max_heading_pct = 5.0;
    eval_cmd->add_option("--calib", eval_calib, "calibration JSON")->required();
    eval_cmd->add_option("--data", eval_data, "sweep directory (contains manifest.csv)")->required();
    eval_cmd->add_option("--report", eval_report, "write the error report JSON here");
    eval_cmd->add_option("--thresholds", eval_thresholds, "color threshold JSON");
    eval_cmd->add_option("--min-area", eval_min_area, "minimum mask area in pixels");
    eval_cmd->add_option("--marker-diameter", eval_marker_diameter,
                         "marker diameter, cm (surface-distance correction)");
    eval_cmd->add_option("--curves", curves, "also export a curve: range_law, k1k2 or lateral_k");
    eval_cmd->add_option("--curve-prefix", curve_prefix, "output prefix for curve CSV/SVG");
    eval_cmd->add_flag("--assert", do_assert, "exit 3 when a mean error exceeds its bound");
    eval_cmd->add_option("--max-range-pct", max_range_pct, "range mean error bound, percent");
    eval_cmd->add_option("--max-bearing-pct", max_bearing_pct, "bearing mean error bound, percent");
    eval_cmd->add_option("--max-heading-pct", max_heading_pct, "heading mean error bound, percent");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*render_cmd) {
            swarmloc::ScenePose pose{dv, dh, psi, std::nullopt};
            swarmloc::Image frame = swarmloc::render(pose, render_camera.cam, render_marker.marker);
            if (noise_sigma > 0.0 || salt_pepper > 0.0)
                frame = swarmloc::add_noise(frame, noise_sigma, salt_pepper, seed);
            swarmloc::save_ppm(frame, render_out);
            std::cout << "rendered 1 frame to " << render_out << "\n";
        } else if (*sweep_cmd) {
            auto grid = swarmloc::sweep_grid_from_json(read_text_file(grid_path));
            if (sweep_seed) {
                if (!grid.noise) grid.noise = swarmloc::NoiseSpec{};
                grid.noise->seed = *sweep_seed;
            }
            const auto manifest =
                swarmloc::render_sweep(grid, sweep_camera.cam, sweep_marker.marker, sweep_out);
            const std::size_t count = grid.dv.size() * grid.dh.size() * grid.psi.size();
            std::cout << "rendered " << count << " frames, manifest at " << manifest.string()
                      << "\n";
        } else if (*calib_cmd) {
            swarmloc::Envelopes envelopes;
            if (env_range) envelopes.range_dv = parse_interval(*env_range);
            if (env_heading) envelopes.heading_dv = parse_interval(*env_heading);
            if (env_lateral) envelopes.bearing_dh = parse_interval(*env_lateral);

            const auto config = make_feature_config(calib_thresholds, calib_min_area);
            const auto samples =
                swarmloc::load_sweep(std::filesystem::path(calib_data) / "manifest.csv", config,
                                     calib_marker_diameter / 2.0);
            const auto build = swarmloc::build_calibration(samples, envelopes);
            swarmloc::save_calibration(build.calibration, calib_out);

            auto fit_row = [](const char* name, const swarmloc::FitReport& r) {
                std::printf("%-14s  n=%-4d  rms=%-12.6g  r2=%.6f\n", name, r.n, r.residual_rms,
                            r.r_squared);
            };
            std::printf("calibration written to %s\n", calib_out.c_str());
            std::printf("k_range=%.6f  fx=%.3f  k1=%.6f*dv%+.6f  k2=%.4f*e^(%.6g*dv)\n",
                        build.calibration.k_range, build.calibration.fx_px,
                        build.calibration.k1_slope, build.calibration.k1_intercept,
                        build.calibration.k2_a, build.calibration.k2_b);
            fit_row("range law", build.range_law);
            fit_row("lateral scale", build.lateral_scale);
            fit_row("k1 line", build.k1_line);
            fit_row("k2 exponential", build.k2_exp);
        } else if (*detect_cmd) {
            const auto calib = swarmloc::load_calibration(detect_calib);
            const auto config = make_feature_config(detect_thresholds, detect_min_area);
            const auto features =
                swarmloc::extract_features(swarmloc::load_ppm(detect_image), config);
            try {
                const auto pose = swarmloc::estimate_pose(features, calib);
                std::cout << swarmloc::pose_to_json(pose, &features) << "\n";
            } catch (const swarmloc::MarkerNotFoundError& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitData;
            }
        } else if (*eval_cmd) {
            const auto calib = swarmloc::load_calibration(eval_calib);
            const auto config = make_feature_config(eval_thresholds, eval_min_area);
            const auto samples =
                swarmloc::load_sweep(std::filesystem::path(eval_data) / "manifest.csv", config,
                                     eval_marker_diameter / 2.0);
            if (samples.empty()) throw std::runtime_error("empty manifest");
            const auto report = swarmloc::evaluate_samples(calib, samples);

            std::cout << swarmloc::report_to_table(report);
            if (!eval_report.empty()) {
                std::ofstream out(eval_report);
                if (!out) throw std::runtime_error("cannot write report " + eval_report);
                out << swarmloc::report_to_json(report) << "\n";
            }
            if (!curves.empty()) {
                const auto kind = swarmloc::curve_kind_from_name(curves);
                swarmloc::curve_export(samples, calib, kind, curve_prefix + ".csv",
                                       curve_prefix + ".svg");
                std::cout << "curves written to " << curve_prefix << ".csv/.svg\n";
            }
            if (do_assert) {
                const bool ok = report.range.mean_pct <= max_range_pct &&
                                report.bearing.mean_pct <= max_bearing_pct &&
                                report.heading.mean_pct <= max_heading_pct;
                if (!ok) {
                    std::cerr << "assertion failed: mean errors " << report.range.mean_pct << "/"
                              << report.bearing.mean_pct << "/" << report.heading.mean_pct
                              << " % exceed bounds " << max_range_pct << "/" << max_bearing_pct
                              << "/" << max_heading_pct << " %\n";
                    return kExitAssert;
                }
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
