#include "pairtunnel/density.hpp"

#include <cmath>

#include "pairtunnel/tdse.hpp"

namespace pairtunnel {

double DensityGrid::total() const {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc * grid.cell_area();
}

DensityGrid density_of(const Wavefunction2D& psi) {
    DensityGrid d;
    d.grid = psi.grid;
    d.time = psi.time;
    d.tag = "quantum";
    d.values.resize(psi.data.size());
    for (std::size_t i = 0; i < psi.data.size(); ++i) d.values[i] = std::norm(psi.data[i]);
    return d;
}

namespace {

double bilinear(const DensityGrid& src, double c0, double c1) {
    const Grid1D& a0 = src.grid.axis0;
    const Grid1D& a1 = src.grid.axis1;
    const double f0 = (c0 - a0.x_min) / a0.dx();
    const double f1 = (c1 - a1.x_min) / a1.dx();
    const int i0 = static_cast<int>(std::floor(f0));
    const int i1 = static_cast<int>(std::floor(f1));
    if (i0 < 0 || i0 + 1 >= a0.n || i1 < 0 || i1 + 1 >= a1.n) return 0.0;
    const double t0 = f0 - i0, t1 = f1 - i1;
    const auto v = [&](int a, int b) { return src.values[src.grid.index(a, b)]; };
    return (1 - t0) * ((1 - t1) * v(i0, i1) + t1 * v(i0, i1 + 1)) +
           t0 * ((1 - t1) * v(i0 + 1, i1) + t1 * v(i0 + 1, i1 + 1));
}

}  // namespace

DensityGrid resample_density(const DensityGrid& src, const Grid2D& target,
                             const ModelParams& p) {
    DensityGrid out;
    out.grid = target;
    out.time = src.time;
    out.tag = src.tag;
    out.log_scale = false;
    if (src.log_scale)
        throw std::invalid_argument("resample_density: resample before log scaling");
    out.values.resize(target.size());
    const bool same_frame = src.grid.frame == target.frame;
    for (int i0 = 0; i0 < target.axis0.n; ++i0)
        for (int i1 = 0; i1 < target.axis1.n; ++i1) {
            double c0 = target.axis0.x(i0), c1 = target.axis1.x(i1);
            if (!same_frame) {
                if (target.frame == Frame::cartesian) {
                    const auto cm = to_cm(p, CartesianCoords{c0, c1});
                    c0 = cm.r;
                    c1 = cm.rho;
                } else {
                    const auto ca = to_cartesian(p, CmCoords{c0, c1});
                    c0 = ca.x1;
                    c1 = ca.x2;
                }
            }
            out.values[target.index(i0, i1)] = bilinear(src, c0, c1);
        }
    return out;
}

void log_scale_density(DensityGrid& d, double decades) {
    double peak = 0.0;
    for (double v : d.values) peak = std::max(peak, v);
    if (peak <= 0.0) peak = 1.0;
    const double floor = peak * std::pow(10.0, -decades);
    for (double& v : d.values) v = std::log10(std::max(v, floor) / peak);
    d.log_scale = true;
}

}  // namespace pairtunnel
