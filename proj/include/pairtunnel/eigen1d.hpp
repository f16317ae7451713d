#pragma once

// Intraparticle eigenproblem and the channel analysis built on it: bound
// spectra of the coupling well, scattering states, form factors, transition
// matrix elements with their parity selection rules, and the effective
// potentials felt by the center of mass.

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "pairtunnel/grid.hpp"
#include "pairtunnel/model.hpp"

namespace pairtunnel {

enum class Parity { even, odd };

/// Potentials entering matrix elements are plain callables; tabulate_on()
/// turns a sampled table back into one where needed.
using Potential = std::function<double(double)>;

/// Discrete spectrum of -1/(2 mu) d^2/drho^2 + U(rho) on a symmetric grid.
struct BoundStateSet {
    Grid1D grid;
    Eigen::VectorXd energies;        // ascending, all negative
    Eigen::MatrixXd wavefunctions;   // column per state, sum phi^2 dx = 1
    std::vector<Parity> parities;

    int count() const { return static_cast<int>(energies.size()); }
    Eigen::VectorXd state(int i) const { return wavefunctions.col(i); }
};

/// One scattering eigenfunction at fixed energy and parity, box-normalized
/// on the grid. Multiplying by delta_norm_factor converts the amplitude to
/// the energy-delta-normalization convention.
struct ContinuumState {
    Grid1D grid;
    double energy = 0.0;
    Parity parity = Parity::odd;
    Eigen::VectorXd wavefunction;
    double k = 0.0;                  // sqrt(2 mu E)
    double delta_norm_factor = 1.0;
    double phase_shift = 0.0;
};

/// Dense Hamiltonian with the spectral (Fourier) kinetic operator; exposed
/// because tests and the propagator share its wavenumber convention.
Eigen::MatrixXd fourier_grid_hamiltonian(const Grid1D& grid, double mu,
                                         const Potential& u);

/// Parity of a sampled state under rho -> -rho on a symmetric periodic grid.
/// Throws if the state is not close to a parity eigenstate.
Parity parity_of(const Grid1D& grid, const Eigen::VectorXd& phi);

/// All bound states (E < 0) of the intraparticle Hamiltonian, or the lowest
/// max_states of them when max_states >= 0. Fails if the box clips any
/// returned state (boundary amplitude above 1e-6).
BoundStateSet solve_bound_states(const ModelParams& p, const Grid1D& grid,
                                 int max_states = -1);

/// Scattering state at the requested energy, integrated outward from rho = 0
/// and mirrored by parity.
ContinuumState continuum_state(const ModelParams& p, double energy,
                               Parity parity, const Grid1D& grid);

/// Form factor F_{nn'}(p) = integral e^{i p rho} phi_n'(rho) phi_n(rho) drho.
std::complex<double> form_factor(const Grid1D& grid, const Eigen::VectorXd& phi_n,
                                 const Eigen::VectorXd& phi_np, double p);

/// (1/2pi) integral e^{i p q} V(q) dq over the grid.
std::complex<double> barrier_fourier(const Grid1D& grid, const Potential& v, double p);

/// Transition matrix element W_{nn'}(k - k') of the barrier pair between
/// internal states, in the form-factor representation.
std::complex<double> w_matrix_element(const Grid1D& grid, const Eigen::VectorXd& phi_n,
                                      const Eigen::VectorXd& phi_np, double k, double kp,
                                      const Potential& v1, const Potential& v2,
                                      const ModelParams& p);

enum class TransitionRule { allowed, forbidden };

/// Parity selection rule: the transition is forbidden iff the barrier
/// combination that couples the pair (V1 + V2 for equal parity, V1 - V2 for
/// opposite parity) vanishes identically on the grid.
TransitionRule classify_transition(const Grid1D& grid, Parity parity_n, Parity parity_np,
                                   const Potential& v1, const Potential& v2);

/// Effective potential Z_{nn'}(R) for the center of mass entering in channel
/// n' and leaving in channel n. Sets *clipped if the integrand has weight at
/// the grid edge above 1e-8 of the integral.
double effective_potential(const Grid1D& grid, const Eigen::VectorXd& phi_n,
                           const Eigen::VectorXd& phi_np, const Potential& v1,
                           const Potential& v2, double r, const ModelParams& p,
                           bool* clipped = nullptr);

struct EffectivePotentialCurve {
    Eigen::ArrayXd r;
    Eigen::ArrayXd z;
    bool clipped = false;
};

EffectivePotentialCurve effective_potential_curve(
    const Grid1D& grid, const Eigen::VectorXd& phi_n, const Eigen::VectorXd& phi_np,
    const Potential& v1, const Potential& v2, const Eigen::ArrayXd& r_samples,
    const ModelParams& p);

/// Conversion factor from box normalization to energy-delta normalization for
/// a positive-energy grid state, read off the asymptotic envelope.
double delta_normalization_factor(const Grid1D& grid, const ModelParams& p,
                                  const Eigen::VectorXd& phi, double energy);

/// Lowest positive-energy eigenstate of the given parity from the grid
/// diagonalization; the box stand-in for a low-lying continuum state.
struct GridContinuumState {
    double energy = 0.0;
    Eigen::VectorXd wavefunction;
};
GridContinuumState lowest_positive_state(const ModelParams& p, const Grid1D& grid,
                                         Parity parity);

/// Default box for spectra: wide enough that even the shallowest paper state
/// decays below the boundary-amplitude contract.
Grid1D default_eigen_grid();

}  // namespace pairtunnel
