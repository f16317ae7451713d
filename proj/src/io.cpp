#include "pairtunnel/io.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace pairtunnel {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_series_csv(const std::string& path, const ObservableSeries& series,
                      const std::string& config_hash, const std::string& tag) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "# config_hash=" << config_hash << " version=" << kVersion << "\n";
    out << "t,norm,P_T,P_D,P_R,p_t,p_d,p_r,p_s,absorbed";
    if (!tag.empty()) out << ",tag";
    out << "\n";
    char line[512];
    for (const auto& r : series.records) {
        std::snprintf(line, sizeof(line),
                      "%.6f,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e", r.t,
                      r.norm, r.quad.transmitted, r.quad.disintegrated, r.quad.reflected,
                      r.shifted.transmitted, r.shifted.disintegrated, r.shifted.reflected,
                      r.shifted.trapped, r.absorbed);
        out << line;
        if (!tag.empty()) out << ',' << tag;
        out << "\n";
    }
    if (!out) throw IoError("failed writing " + path);
}

void write_density_file(const std::string& path, const DensityGrid& density,
                        const std::string& config_hash) {
    json header = {
        {"format", "density-grid-v1"},
        {"frame", density.grid.frame == Frame::cartesian ? "cartesian" : "cm_relative"},
        {"axis0", {{"min", density.grid.axis0.x_min},
                   {"max", density.grid.axis0.x_max},
                   {"n", density.grid.axis0.n}}},
        {"axis1", {{"min", density.grid.axis1.x_min},
                   {"max", density.grid.axis1.x_max},
                   {"n", density.grid.axis1.n}}},
        {"time", density.time},
        {"log_scale", density.log_scale},
        {"tag", density.tag},
        {"config_hash", config_hash},
        {"version", kVersion},
    };
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << header.dump() << "\n";
    out.write(reinterpret_cast<const char*>(density.values.data()),
              static_cast<std::streamsize>(density.values.size() * sizeof(double)));
    if (!out) throw IoError("failed writing " + path);
}

DensityGrid read_density_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    std::getline(in, line);
    const json header = json::parse(line);
    DensityGrid d;
    d.grid.frame = header.at("frame") == "cartesian" ? Frame::cartesian : Frame::cm_relative;
    d.grid.axis0 = {header.at("axis0").at("min"), header.at("axis0").at("max"),
                    header.at("axis0").at("n")};
    d.grid.axis1 = {header.at("axis1").at("min"), header.at("axis1").at("max"),
                    header.at("axis1").at("n")};
    d.time = header.at("time");
    d.log_scale = header.at("log_scale");
    d.tag = header.value("tag", "");
    d.values.resize(d.grid.size());
    in.read(reinterpret_cast<char*>(d.values.data()),
            static_cast<std::streamsize>(d.values.size() * sizeof(double)));
    if (!in) throw IoError("truncated density file " + path);
    return d;
}

void export_density(const std::string& path, const Wavefunction2D& psi, Frame frame,
                    const ModelParams& p, bool log_scale, const std::string& config_hash,
                    const Grid2D* target) {
    DensityGrid d = density_of(psi);
    if (frame != psi.grid.frame || target) {
        Grid2D out_grid;
        if (target) {
            out_grid = *target;
        } else {
            // bounding box of the mapped domain, same point counts
            const auto corner = [&](int i0, int i1) {
                const double a = i0 ? psi.grid.axis0.x_max : psi.grid.axis0.x_min;
                const double b = i1 ? psi.grid.axis1.x_max : psi.grid.axis1.x_min;
                if (frame == Frame::cartesian) return to_cartesian(p, CmCoords{a, b});
                const auto cm = to_cm(p, CartesianCoords{a, b});
                return CartesianCoords{cm.r, cm.rho};
            };
            double lo0 = 1e300, hi0 = -1e300, lo1 = 1e300, hi1 = -1e300;
            for (int i0 : {0, 1})
                for (int i1 : {0, 1}) {
                    const auto c = corner(i0, i1);
                    lo0 = std::min(lo0, c.x1);
                    hi0 = std::max(hi0, c.x1);
                    lo1 = std::min(lo1, c.x2);
                    hi1 = std::max(hi1, c.x2);
                }
            out_grid.frame = frame;
            out_grid.axis0 = {lo0, hi0, psi.grid.axis0.n};
            out_grid.axis1 = {lo1, hi1, psi.grid.axis1.n};
        }
        out_grid.frame = frame;
        d = resample_density(d, out_grid, p);
    }
    if (log_scale) log_scale_density(d);
    write_density_file(path, d, config_hash);
}

const ManifestEntry* RunManifest::find(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

void RunManifest::upsert(ManifestEntry entry) {
    for (auto& e : entries)
        if (e.name == entry.name) {
            e = std::move(entry);
            return;
        }
    entries.push_back(std::move(entry));
}

void save_manifest(const std::string& path, const RunManifest& manifest) {
    json j = {{"config_hash", manifest.config_hash},
              {"version", manifest.version},
              {"created", manifest.created},
              {"updated", manifest.updated},
              {"entries", json::array()}};
    for (const auto& e : manifest.entries) {
        json entry = {{"name", e.name}, {"file", e.file}, {"status", e.status}};
        entry["scalars"] = e.scalars;
        j["entries"].push_back(std::move(entry));
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("failed writing " + path);
}

std::optional<RunManifest> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    json j;
    try {
        in >> j;
    } catch (const json::exception&) {
        return std::nullopt;  // unreadable manifest counts as absent
    }
    RunManifest m;
    m.config_hash = j.value("config_hash", "");
    m.version = j.value("version", "");
    m.created = j.value("created", "");
    m.updated = j.value("updated", "");
    for (const auto& e : j.value("entries", json::array())) {
        ManifestEntry entry;
        entry.name = e.value("name", "");
        entry.file = e.value("file", "");
        entry.status = e.value("status", "");
        if (e.contains("scalars"))
            entry.scalars = e.at("scalars").get<std::map<std::string, double>>();
        m.entries.push_back(std::move(entry));
    }
    return m;
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

}  // namespace pairtunnel
