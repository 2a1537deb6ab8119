#include "swarmloc/synthcam.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <json.hpp>

#include "swarmloc/manifest.hpp"

namespace swarmloc {

namespace {

constexpr double kDegPerRad = 180.0 / std::numbers::pi;

double wrap360(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w < 0.0) w += 360.0;
    return w;
}

} // namespace

void MarkerSpec::validate() const {
    if (!(diameter_cm > 0.0) || !(height_cm > 0.0))
        throw std::invalid_argument("marker: diameter and height must be positive");
    if (!(top_ring_frac > 0.0 && top_ring_frac < 1.0) ||
        !(bottom_ring_frac > 0.0 && bottom_ring_frac < 1.0) ||
        !(spiral_width_frac > 0.0 && spiral_width_frac < 1.0))
        throw std::invalid_argument("marker: band fractions must lie in (0,1)");
    if (!(top_ring_frac + bottom_ring_frac < 1.0))
        throw std::invalid_argument("marker: ring bands leave no inner band");
}

void CameraSpec::validate() const {
    if (width_px < 1 || height_px < 1) throw std::invalid_argument("camera: empty frame");
    if (!(fx_px > 0.0) || !(fy_px > 0.0))
        throw std::invalid_argument("camera: focal scales must be positive");
    if (!(cx_px >= 0.0 && cx_px <= width_px && cy_px >= 0.0 && cy_px <= height_px))
        throw std::invalid_argument("camera: principal point outside the frame");
}

Rgb marker_texture(double azimuth_deg, double height_frac, const MarkerSpec& spec) {
    if (!(azimuth_deg >= 0.0 && azimuth_deg < 360.0))
        throw std::invalid_argument("marker_texture: azimuth outside [0,360)");
    if (!(height_frac >= 0.0 && height_frac <= 1.0))
        throw std::invalid_argument("marker_texture: height fraction outside [0,1]");

    if (height_frac >= 1.0 - spec.top_ring_frac) return spec.red;
    if (height_frac <= spec.bottom_ring_frac) return spec.blue;

    const double inner_frac =
        (height_frac - spec.bottom_ring_frac) / (1.0 - spec.top_ring_frac - spec.bottom_ring_frac);
    if (std::abs(inner_frac - azimuth_deg / 360.0) <= spec.spiral_width_frac / 2.0)
        return spec.yellow;
    return spec.body;
}

Image render(const ScenePose& pose, const CameraSpec& cam, const MarkerSpec& spec) {
    cam.validate();
    spec.validate();
    if (!(pose.d_v_cm > 0.0)) throw std::invalid_argument("render: marker must be in front of the camera");

    const double r = spec.diameter_cm / 2.0;
    const double base_above_ground =
        pose.marker_base_height_cm.value_or(cam.height_cm - spec.height_cm / 2.0);
    const double base_y = base_above_ground - cam.height_cm; // camera-relative
    const double top_y = base_y + spec.height_cm;
    const double ax = pose.d_h_cm; // cylinder axis in the camera frame
    const double az = pose.d_v_cm;

    Image img(cam.width_px, cam.height_px, spec.body);

    for (int ix = 0; ix < cam.width_px; ++ix) {
        const double dx = (ix + 0.5 - cam.cx_px) / cam.fx_px;
        // Horizontal miss test for the infinite cylinder; exact, so pruned
        // columns stay background.
        if (std::abs(dx * az - ax) > r * std::sqrt(1.0 + dx * dx)) continue;

        const double a = dx * dx + 1.0;
        const double b = -2.0 * (dx * ax + az);
        const double c = ax * ax + az * az - r * r;
        const double disc = b * b - 4.0 * a * c;
        if (disc < 0.0) continue;
        const double sq = std::sqrt(disc);
        const double t0 = (-b - sq) / (2.0 * a);
        const double t1 = (-b + sq) / (2.0 * a);

        for (int iy = 0; iy < cam.height_px; ++iy) {
            const double dy = -(iy + 0.5 - cam.cy_px) / cam.fy_px;
            double t_hit = -1.0;
            for (double t : {t0, t1}) {
                if (t <= 1e-9) continue;
                const double y = dy * t;
                if (y >= base_y && y <= top_y) {
                    t_hit = t;
                    break;
                }
            }
            if (t_hit < 0.0) continue;

            const double px = dx * t_hit;
            const double pz = t_hit;
            const double py = dy * t_hit;
            const double phi = std::atan2(px - ax, pz - az) * kDegPerRad;
            const double azimuth = wrap360(pose.psi_deg + 180.0 - phi);
            const double height_frac =
                std::clamp((py - base_y) / spec.height_cm, 0.0, 1.0);
            img.at(ix, iy) = marker_texture(azimuth, height_frac, spec);
        }
    }
    return img;
}

Image add_noise(const Image& image, double gaussian_sigma, double salt_pepper_frac,
                std::uint64_t seed) {
    if (gaussian_sigma < 0.0) throw std::invalid_argument("add_noise: sigma must be >= 0");
    if (salt_pepper_frac < 0.0 || salt_pepper_frac > 1.0)
        throw std::invalid_argument("add_noise: salt/pepper fraction outside [0,1]");

    Image out = image;
    std::mt19937_64 rng(seed);

    if (gaussian_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, gaussian_sigma);
        for (auto& p : out.pixels) {
            for (std::uint8_t* ch : {&p.r, &p.g, &p.b}) {
                const double v = std::round(*ch + noise(rng));
                *ch = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
            }
        }
    }
    if (salt_pepper_frac > 0.0) {
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        std::bernoulli_distribution coin(0.5);
        for (auto& p : out.pixels) {
            if (uni(rng) < salt_pepper_frac) {
                const std::uint8_t v = coin(rng) ? 255 : 0;
                p = {v, v, v};
            }
        }
    }
    return out;
}

SweepGrid sweep_grid_from_json(const std::string& json_text) {
    const auto doc = nlohmann::json::parse(json_text);
    SweepGrid grid;
    grid.dv = doc.at("dv").get<std::vector<double>>();
    grid.dh = doc.at("dh").get<std::vector<double>>();
    grid.psi = doc.at("psi").get<std::vector<double>>();
    if (doc.contains("noise") && !doc["noise"].is_null()) {
        NoiseSpec n;
        n.sigma = doc["noise"].value("sigma", 0.0);
        n.salt_pepper = doc["noise"].value("salt_pepper", 0.0);
        n.seed = doc["noise"].value("seed", std::uint64_t{0});
        grid.noise = n;
    }
    return grid;
}

std::filesystem::path render_sweep(const SweepGrid& grid, const CameraSpec& cam,
                                   const MarkerSpec& spec, const std::filesystem::path& out_dir) {
    if (grid.dv.empty() || grid.dh.empty() || grid.psi.empty())
        throw std::invalid_argument("render_sweep: empty grid axis");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (!std::filesystem::is_directory(out_dir))
        throw std::runtime_error("render_sweep: cannot create " + out_dir.string());

    std::vector<ManifestRow> rows;
    std::uint64_t frame_index = 0;
    for (double dv : grid.dv) {
        for (double dh : grid.dh) {
            for (double psi : grid.psi) {
                char name[96];
                std::snprintf(name, sizeof(name), "dv%08.3f_dh%+09.3f_psi%07.3f.ppm", dv, dh, psi);

                ScenePose pose{dv, dh, psi, std::nullopt};
                Image frame = render(pose, cam, spec);
                if (grid.noise && (grid.noise->sigma > 0.0 || grid.noise->salt_pepper > 0.0))
                    frame = add_noise(frame, grid.noise->sigma, grid.noise->salt_pepper,
                                      grid.noise->seed + frame_index);
                save_ppm(frame, out_dir / name);

                ManifestRow row;
                row.image = name;
                row.dv_cm = dv;
                row.dh_cm = dh;
                row.psi_deg = psi;
                row.theta_deg = std::atan(dh / dv) * kDegPerRad;
                row.d_cm = std::hypot(dv, dh);
                rows.push_back(std::move(row));
                ++frame_index;
            }
        }
    }
    const auto manifest_path = out_dir / "manifest.csv";
    write_manifest(manifest_path, rows);
    return manifest_path;
}

} // namespace swarmloc
