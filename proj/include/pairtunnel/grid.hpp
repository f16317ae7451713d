#pragma once

#include <Eigen/Core>
#include <stdexcept>

namespace pairtunnel {

/// Uniform periodic grid on [x_min, x_max); point i sits at x_min + i dx.
struct Grid1D {
    double x_min = 0.0;
    double x_max = 0.0;
    int n = 0;

    double dx() const { return (x_max - x_min) / n; }
    double length() const { return x_max - x_min; }
    double x(int i) const { return x_min + i * dx(); }

    Eigen::ArrayXd points() const {
        Eigen::ArrayXd p(n);
        for (int i = 0; i < n; ++i) p[i] = x(i);
        return p;
    }

    /// Discrete Fourier wavenumbers in FFT layout, dk = 2 pi / length().
    Eigen::ArrayXd wavenumbers() const {
        Eigen::ArrayXd k(n);
        const double dk = 2.0 * M_PI / length();
        for (int i = 0; i < n; ++i) k[i] = dk * (i < n / 2 ? i : i - n);
        return k;
    }

    /// Index of the grid point nearest to x.
    int index_of(double x) const {
        int i = static_cast<int>(std::lround((x - x_min) / dx()));
        return std::clamp(i, 0, n - 1);
    }

    bool symmetric() const { return std::abs(x_min + x_max) < 1e-12 * length(); }

    void validate() const {
        if (n < 64) throw std::invalid_argument("Grid1D: need at least 64 points");
        if (!(x_max > x_min)) throw std::invalid_argument("Grid1D: empty domain");
    }

    bool operator==(const Grid1D& o) const {
        return n == o.n && x_min == o.x_min && x_max == o.x_max;
    }
};

enum class Frame { cartesian, cm_relative };

/// Two uniform axes plus the tag saying whether they mean (x1, x2) or (R, rho).
struct Grid2D {
    Grid1D axis0;  // x1 or R
    Grid1D axis1;  // x2 or rho
    Frame frame = Frame::cm_relative;

    std::size_t size() const { return static_cast<std::size_t>(axis0.n) * axis1.n; }
    double cell_area() const { return axis0.dx() * axis1.dx(); }
    std::size_t index(int i0, int i1) const { return static_cast<std::size_t>(i0) * axis1.n + i1; }

    void validate() const {
        axis0.validate();
        axis1.validate();
        if ((axis0.n & (axis0.n - 1)) || (axis1.n & (axis1.n - 1)))
            throw std::invalid_argument("Grid2D: point counts must be powers of two");
    }
};

}  // namespace pairtunnel
