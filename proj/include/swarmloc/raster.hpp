#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace swarmloc {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    bool operator==(const Rgb&) const = default;
};

/// 8-bit RGB raster, row-major. width/height must be >= 1 and
/// pixels.size() must equal width * height.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<Rgb> pixels;

    Image() = default;
    Image(int w, int h, Rgb fill = {255, 255, 255})
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    Rgb& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    const Rgb& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

    bool valid() const {
        return width >= 1 && height >= 1 &&
               pixels.size() == static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
};

/// Hue in degrees [0,360), saturation and value as fractions in [0,1].
struct Hsv {
    double h = 0.0;
    double s = 0.0;
    double v = 0.0;
};

struct HsvImage {
    int width = 0;
    int height = 0;
    std::vector<Hsv> pixels;

    const Hsv& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

enum class PpmErrorKind {
    missing_file,
    bad_magic,
    bad_header,
    bad_maxval,
    truncated,
    unwritable,
    invalid_image,
};

class PpmError : public std::runtime_error {
public:
    PpmError(PpmErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    PpmErrorKind kind() const { return kind_; }

private:
    PpmErrorKind kind_;
};

/// Reads a binary PPM (magic "P6", maxval 255). '#' comments in the header
/// are skipped. Throws PpmError with a kind identifying the failure.
Image load_ppm(const std::filesystem::path& path);

/// Writes a binary PPM with the canonical header "P6\n<w> <h>\n255\n".
void save_ppm(const Image& image, const std::filesystem::path& path);

/// Per-channel median over a window x window neighborhood with replicate
/// (clamp-to-edge) padding. window must be odd, >= 1 and <= min(w, h).
Image median_filter(const Image& image, int window);

/// Standard hexcone conversion. Achromatic pixels (max == min) get H = 0,
/// S = 0.
HsvImage rgb_to_hsv(const Image& image);

} // namespace swarmloc
