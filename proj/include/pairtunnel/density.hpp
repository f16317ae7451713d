#pragma once

// Probability density on a 2D grid, detached from the wavefunction so that
// quantum and classical results share one export path.

#include <string>
#include <vector>

#include "pairtunnel/grid.hpp"
#include "pairtunnel/model.hpp"

namespace pairtunnel {

struct Wavefunction2D;

struct DensityGrid {
    Grid2D grid;
    std::vector<double> values;  // row-major, index(i0, i1)
    double time = 0.0;
    bool log_scale = false;
    std::string tag;  // "quantum" or "classical"

    double total() const;
};

DensityGrid density_of(const Wavefunction2D& psi);

/// Resample onto a grid in a possibly different frame by bilinear
/// interpolation; both coordinate maps have unit Jacobian so totals carry
/// over up to interpolation error.
DensityGrid resample_density(const DensityGrid& src, const Grid2D& target,
                             const ModelParams& p);

/// Replace values by log10(value / max), clamped at the given floor decades
/// below the maximum.
void log_scale_density(DensityGrid& d, double decades = 12.0);

}  // namespace pairtunnel
