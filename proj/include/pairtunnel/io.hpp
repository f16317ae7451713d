#pragma once

// File formats: observable CSVs, self-describing density grids (one JSON
// header line followed by raw little-endian float64), and the run manifest
// that ties outputs to their configuration hash.

#include <cstdint>
#include <stdexcept>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pairtunnel/density.hpp"
#include "pairtunnel/tdse.hpp"

namespace pairtunnel {

inline constexpr const char* kVersion = "0.1.0";

/// File-system level failure (maps to exit code 3 in the CLI).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a64(std::string_view s);
std::string hash_hex(std::uint64_t h);

/// Observable series CSV. First line is a comment carrying the config hash,
/// then the header row (t, norm, P_T, P_D, P_R, p_t, p_d, p_r, p_s, absorbed),
/// plus a trailing tag column when a tag is given.
void write_series_csv(const std::string& path, const ObservableSeries& series,
                      const std::string& config_hash, const std::string& tag = "");

void write_density_file(const std::string& path, const DensityGrid& density,
                        const std::string& config_hash);
DensityGrid read_density_file(const std::string& path);

/// |psi|^2 written to a density-grid file, resampled first when the target
/// frame differs from the wavefunction's own.
void export_density(const std::string& path, const Wavefunction2D& psi, Frame frame,
                    const ModelParams& p, bool log_scale = false,
                    const std::string& config_hash = "", const Grid2D* target = nullptr);

struct ManifestEntry {
    std::string name;
    std::string file;  // relative to the manifest directory, may be empty
    std::string status = "done";
    std::map<std::string, double> scalars;
};

struct RunManifest {
    std::string config_hash;
    std::string version = kVersion;
    std::string created;
    std::string updated;
    std::vector<ManifestEntry> entries;

    const ManifestEntry* find(const std::string& name) const;
    void upsert(ManifestEntry entry);
};

void save_manifest(const std::string& path, const RunManifest& manifest);
std::optional<RunManifest> load_manifest(const std::string& path);

std::string timestamp_utc();

}  // namespace pairtunnel
