#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "swarmloc/raster.hpp"

namespace swarmloc {

/// Cylindrical marker geometry and palette. Heights are fractions of the
/// cylinder height; the spiral width is a fraction of the inner band height.
struct MarkerSpec {
    double diameter_cm = 4.0;
    double height_cm = 6.0;
    double top_ring_frac = 1.0 / 6.0;
    double bottom_ring_frac = 1.0 / 6.0;
    double spiral_width_frac = 0.25;
    Rgb red{255, 0, 0};
    Rgb blue{0, 0, 255};
    Rgb yellow{255, 255, 0};
    Rgb body{255, 255, 255};

    void validate() const;
};

/// Pinhole camera. The principal point defaults to the center of the default
/// 640x460 frame; adjust it together with the frame size.
struct CameraSpec {
    int width_px = 640;
    int height_px = 460;
    double fx_px = 500.0;
    double fy_px = 500.0;
    double cx_px = 320.0;
    double cy_px = 230.0;
    double height_cm = 8.5; // optical center above the ground

    void validate() const;
};

/// Ground-truth relative pose of the marker. When marker_base_height_cm is
/// unset the marker is placed so its mid-height sits on the optical axis.
struct ScenePose {
    double d_v_cm = 0.0;  // forward distance, camera to marker axis
    double d_h_cm = 0.0;  // signed lateral offset, positive to the right
    double psi_deg = 0.0; // marker heading in [0,360)
    std::optional<double> marker_base_height_cm;
};

/// Texture lookup on the unrolled cylinder surface. Returns the top-ring red,
/// the bottom-ring blue, yellow on the single-turn helical stripe whose
/// height within the inner band tracks azimuth/360, and the body color
/// elsewhere. Exactly one color per input.
Rgb marker_texture(double azimuth_deg, double height_frac, const MarkerSpec& spec);

/// Ray-casts one frame of the marker against a plain background: one ray per
/// pixel center, nearest cylinder intersection wins, flat shading. Heading
/// 180 puts the stripe's mid height toward the camera; heading near 0 puts
/// the texture seam toward the camera.
Image render(const ScenePose& pose, const CameraSpec& cam, const MarkerSpec& spec);

/// Per-channel rounded Gaussian noise clamped to [0,255], then a
/// salt-and-pepper pass replacing the given fraction of pixels with black or
/// white. Deterministic per seed.
Image add_noise(const Image& image, double gaussian_sigma, double salt_pepper_frac,
                std::uint64_t seed);

struct NoiseSpec {
    double sigma = 0.0;
    double salt_pepper = 0.0;
    std::uint64_t seed = 0;
};

struct SweepGrid {
    std::vector<double> dv;
    std::vector<double> dh;
    std::vector<double> psi;
    std::optional<NoiseSpec> noise;
};

/// Parses {dv: [...], dh: [...], psi: [...], noise: {sigma, salt_pepper, seed}}.
SweepGrid sweep_grid_from_json(const std::string& json_text);

/// Renders the Cartesian product of the grid, writing one PPM per pose plus
/// manifest.csv (schema image,d_cm,theta_deg,psi_deg,dv_cm,dh_cm). File names
/// are deterministic functions of the grid point. Returns the manifest path.
std::filesystem::path render_sweep(const SweepGrid& grid, const CameraSpec& cam,
                                   const MarkerSpec& spec, const std::filesystem::path& out_dir);

} // namespace swarmloc
