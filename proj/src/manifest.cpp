#include "swarmloc/manifest.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace swarmloc {

namespace {

constexpr const char* kHeader = "image,d_cm,theta_deg,psi_deg,dv_cm,dh_cm";

double parse_field(const std::string& field, const std::filesystem::path& path) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw std::runtime_error(path.string() + ": bad numeric field '" + field + "'");
    return v;
}

} // namespace

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest " + path.string());
    out << kHeader << '\n';
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.12g,%.12g,%.12g,%.12g,%.12g", r.image.c_str(),
                      r.d_cm, r.theta_deg, r.psi_deg, r.dv_cm, r.dh_cm);
        out << buf << '\n';
    }
    if (!out) throw std::runtime_error("write failed for manifest " + path.string());
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest " + path.string());

    std::string line;
    if (!std::getline(in, line) || line != kHeader)
        throw std::runtime_error(path.string() + ": missing or unexpected manifest header");

    std::vector<ManifestRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 6)
            throw std::runtime_error(path.string() + ": expected 6 fields, got " +
                                     std::to_string(fields.size()));
        ManifestRow r;
        r.image = fields[0];
        r.d_cm = parse_field(fields[1], path);
        r.theta_deg = parse_field(fields[2], path);
        r.psi_deg = parse_field(fields[3], path);
        r.dv_cm = parse_field(fields[4], path);
        r.dh_cm = parse_field(fields[5], path);
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace swarmloc
