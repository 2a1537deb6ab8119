#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace swarmloc {

/// One row of a sweep manifest: frame file name (relative to the manifest)
/// plus the ground-truth pose it was rendered at.
struct ManifestRow {
    std::string image;
    double d_cm = 0.0;
    double theta_deg = 0.0;
    double psi_deg = 0.0;
    double dv_cm = 0.0;
    double dh_cm = 0.0;
};

/// CSV with header image,d_cm,theta_deg,psi_deg,dv_cm,dh_cm. Values are
/// written with enough digits to round-trip.
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows);

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);

} // namespace swarmloc
