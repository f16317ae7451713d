#pragma once

// Model family: two 1D particles bound by a short-range Gaussian attraction,
// running into a pair of well-plus-hill barriers near the origin. Everything
// downstream (spectra, wave-packet propagation, classical ensembles) consumes
// the definitions in this header.

#include <stdexcept>

namespace pairtunnel {

/// Physical constants of one scenario (atomic units throughout).
struct ModelParams {
    double alpha = 3.0;       ///< scaling of the barrier seen by particle 1
    int n_channels = 1;       ///< number of bound states of the coupling well (1, 2 or 4)
    double well_depth = 2.0;  ///< A
    double well_width = 1.0;  ///< r_N
    double m1 = 1.0;
    double m2 = 1.0;
    double rbar = -55.0;      ///< initial packet center
    double sigma_r = 3.0;     ///< initial packet width
    double e_cm = 1.0;        ///< center-of-mass kinetic energy of the packet

    double total_mass() const { return m1 + m2; }
    double reduced_mass() const { return m1 * m2 / (m1 + m2); }

    /// Preset used in all production runs: A=2 and r_N fixed by the channel count.
    static ModelParams paper(int n_channels, double alpha);

    /// Throws std::invalid_argument on non-physical values.
    void validate() const;
};

/// Barrier profile V(x) = x exp(-x^2): a well at x<0 followed by a hill.
double barrier_v(double x);
/// dV/dx, analytic.
double barrier_v_prime(double x);

/// Interparticle attraction U_N(rho) = -A exp(-rho^2 / r_N^2).
double coupling_u(const ModelParams& p, double rho);
/// dU/drho, analytic.
double coupling_u_prime(const ModelParams& p, double rho);

/// Full 2D potential in particle coordinates:
/// alpha V(x1) + 3 V(x2) + U(x2 - x1).
double omega_cartesian(const ModelParams& p, double x1, double x2);

/// Same potential in center-of-mass / relative coordinates.
double omega_cm(const ModelParams& p, double r, double rho);

// Coordinate maps between (x1, x2) and (R, rho). General masses; for
// m1 = m2 = 1 they reduce to R = (x1+x2)/2, x1 = R - rho/2, x2 = R + rho/2.
struct CartesianCoords { double x1, x2; };
struct CmCoords { double r, rho; };
CartesianCoords to_cartesian(const ModelParams& p, const CmCoords& c);
CmCoords to_cm(const ModelParams& p, const CartesianCoords& c);

/// Analytic force components (-dOmega/dx1, -dOmega/dx2).
struct Force2 { double f1, f2; };
Force2 classical_force(const ModelParams& p, double x1, double x2);

}  // namespace pairtunnel
