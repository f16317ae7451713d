#include "pairtunnel/model.hpp"

#include <cmath>
#include <string>

namespace pairtunnel {

ModelParams ModelParams::paper(int n_channels, double alpha) {
    ModelParams p;
    p.alpha = alpha;
    p.n_channels = n_channels;
    switch (n_channels) {
        case 1: p.well_width = 1.0; break;
        case 2: p.well_width = 1.961; break;
        case 4: p.well_width = 3.162; break;
        default:
            throw std::invalid_argument("paper preset: n_channels must be 1, 2 or 4");
    }
    return p;
}

void ModelParams::validate() const {
    if (!(well_depth > 0.0)) throw std::invalid_argument("well_depth must be positive");
    if (!(well_width > 0.0)) throw std::invalid_argument("well_width must be positive");
    if (!(sigma_r > 0.0)) throw std::invalid_argument("sigma_r must be positive");
    if (!(m1 > 0.0) || !(m2 > 0.0)) throw std::invalid_argument("masses must be positive");
    if (!(e_cm > 0.0)) throw std::invalid_argument("e_cm must be positive");
    if (n_channels != 1 && n_channels != 2 && n_channels != 4)
        throw std::invalid_argument("n_channels must be 1, 2 or 4");
    if (!std::isfinite(alpha) || !std::isfinite(rbar))
        throw std::invalid_argument("alpha and rbar must be finite");
}

double barrier_v(double x) { return x * std::exp(-x * x); }

double barrier_v_prime(double x) { return (1.0 - 2.0 * x * x) * std::exp(-x * x); }

double coupling_u(const ModelParams& p, double rho) {
    return -p.well_depth * std::exp(-rho * rho / (p.well_width * p.well_width));
}

double coupling_u_prime(const ModelParams& p, double rho) {
    const double r2 = p.well_width * p.well_width;
    return 2.0 * p.well_depth * rho / r2 * std::exp(-rho * rho / r2);
}

double omega_cartesian(const ModelParams& p, double x1, double x2) {
    return p.alpha * barrier_v(x1) + 3.0 * barrier_v(x2) + coupling_u(p, x2 - x1);
}

double omega_cm(const ModelParams& p, double r, double rho) {
    const auto c = to_cartesian(p, {r, rho});
    return omega_cartesian(p, c.x1, c.x2);
}

CartesianCoords to_cartesian(const ModelParams& p, const CmCoords& c) {
    const double mu = p.reduced_mass();
    return {c.r - mu / p.m1 * c.rho, c.r + mu / p.m2 * c.rho};
}

CmCoords to_cm(const ModelParams& p, const CartesianCoords& c) {
    return {(p.m1 * c.x1 + p.m2 * c.x2) / p.total_mass(), c.x2 - c.x1};
}

Force2 classical_force(const ModelParams& p, double x1, double x2) {
    const double du = coupling_u_prime(p, x2 - x1);
    return {-p.alpha * barrier_v_prime(x1) + du,
            -3.0 * barrier_v_prime(x2) - du};
}

}  // namespace pairtunnel
