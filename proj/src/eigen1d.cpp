#include "pairtunnel/eigen1d.hpp"

#include <cmath>
#include <Eigen/Dense>

namespace pairtunnel {

namespace {

// Mirror index for rho -> -rho on a periodic grid [-L, L).
inline int mirror(int i, int n) { return i == 0 ? 0 : n - i; }

void require_symmetric(const Grid1D& grid) {
    if (!grid.symmetric())
        throw std::invalid_argument("eigen1d: grid must be symmetric about rho = 0");
}

// Deterministic sign: first clearly nonzero sample from the origin outward is positive.
void fix_sign(const Grid1D& grid, Eigen::Ref<Eigen::VectorXd> phi) {
    const int i0 = grid.index_of(0.0);
    const double scale = phi.cwiseAbs().maxCoeff();
    for (int i = i0; i < grid.n; ++i) {
        if (std::abs(phi[i]) > 1e-3 * scale) {
            if (phi[i] < 0) phi = -phi;
            return;
        }
    }
}

}  // namespace

Grid1D default_eigen_grid() { return {-128.0, 128.0, 1024}; }

Eigen::MatrixXd fourier_grid_hamiltonian(const Grid1D& grid, double mu,
                                         const Potential& u) {
    const int n = grid.n;
    const Eigen::ArrayXd k = grid.wavenumbers();
    const Eigen::ArrayXd t_of_k = k.square() / (2.0 * mu);

    // Kinetic operator F^-1 diag(k^2/2mu) F is circulant; build its first row.
    Eigen::VectorXd row(n);
    for (int d = 0; d < n; ++d) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += t_of_k[j] * std::cos(2.0 * M_PI * j * d / n);
        row[d] = s / n;
    }

    Eigen::MatrixXd h(n, n);
    for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m) h(l, m) = row[(l - m + n) % n];
    for (int i = 0; i < n; ++i) h(i, i) += u(grid.x(i));
    return 0.5 * (h + h.transpose());
}

Parity parity_of(const Grid1D& grid, const Eigen::VectorXd& phi) {
    require_symmetric(grid);
    const int n = grid.n;
    double overlap = 0.0, norm = 0.0;
    for (int i = 0; i < n; ++i) {
        overlap += phi[i] * phi[mirror(i, n)];
        norm += phi[i] * phi[i];
    }
    const double s = overlap / norm;
    if (s > 0.9) return Parity::even;
    if (s < -0.9) return Parity::odd;
    throw std::runtime_error("parity_of: state is not a parity eigenstate");
}

BoundStateSet solve_bound_states(const ModelParams& p, const Grid1D& grid,
                                 int max_states) {
    p.validate();
    grid.validate();
    require_symmetric(grid);

    const double a = p.well_depth;
    if (std::abs(coupling_u(p, grid.x_min)) >= 1e-12 * a ||
        std::abs(coupling_u(p, grid.x_max)) >= 1e-12 * a)
        throw std::invalid_argument("solve_bound_states: coupling does not vanish at the box edge");

    const auto u = [&p](double rho) { return coupling_u(p, rho); };
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        fourier_grid_hamiltonian(grid, p.reduced_mass(), u));
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("solve_bound_states: eigensolver failed to converge");

    const Eigen::VectorXd& w = solver.eigenvalues();
    int n_bound = 0;
    while (n_bound < grid.n && w[n_bound] < 0.0) ++n_bound;
    if (max_states >= 0) n_bound = std::min(n_bound, max_states);

    BoundStateSet set;
    set.grid = grid;
    set.energies = w.head(n_bound);
    set.wavefunctions = solver.eigenvectors().leftCols(n_bound) / std::sqrt(grid.dx());
    set.parities.reserve(n_bound);
    for (int i = 0; i < n_bound; ++i) {
        fix_sign(grid, set.wavefunctions.col(i));
        set.parities.push_back(parity_of(grid, set.wavefunctions.col(i)));
        const double edge = std::max(std::abs(set.wavefunctions(0, i)),
                                     std::abs(set.wavefunctions(grid.n - 1, i)));
        if (edge > 1e-6)
            throw std::runtime_error("solve_bound_states: grid too narrow, bound state reaches the boundary");
    }
    return set;
}

ContinuumState continuum_state(const ModelParams& p, double energy, Parity parity,
                               const Grid1D& grid) {
    p.validate();
    grid.validate();
    require_symmetric(grid);
    if (!(energy > 0.0))
        throw std::invalid_argument("continuum_state: energy must be positive");

    const double mu = p.reduced_mass();
    const double k_local = std::sqrt(2.0 * mu * (energy + p.well_depth));
    if (2.0 * M_PI / k_local < 8.0 * grid.dx())
        throw std::runtime_error("continuum_state: grid under-resolves the local wavelength");

    // Integrate u'' = 2 mu (U - E) u outward from rho = 0 with RK4 substeps,
    // sampling value and derivative at every grid point up to +L.
    const int n = grid.n;
    const int half = n / 2;  // index of rho = 0
    const int substeps = 16;
    const double h = grid.dx() / substeps;
    const auto rhs = [&](double x, double u) { return 2.0 * mu * (coupling_u(p, x) - energy) * u; };

    double u = (parity == Parity::odd) ? 0.0 : 1.0;
    double v = (parity == Parity::odd) ? 1.0 : 0.0;
    Eigen::VectorXd us(half + 1), vs(half + 1);
    us[0] = u;
    vs[0] = v;
    for (int i = 0; i < half; ++i) {
        double x = grid.x(half + i) - grid.x(half);  // = i * dx, kept exact
        for (int s = 0; s < substeps; ++s) {
            const double k1u = v, k1v = rhs(x, u);
            const double k2u = v + 0.5 * h * k1v, k2v = rhs(x + 0.5 * h, u + 0.5 * h * k1u);
            const double k3u = v + 0.5 * h * k2v, k3v = rhs(x + 0.5 * h, u + 0.5 * h * k2u);
            const double k4u = v + h * k3v, k4v = rhs(x + h, u + h * k3u);
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            x += h;
        }
        us[i + 1] = u;
        vs[i + 1] = v;
    }

    const double sign = (parity == Parity::odd) ? -1.0 : 1.0;
    Eigen::VectorXd phi(n);
    for (int i = half; i < n; ++i) phi[i] = us[i - half];
    for (int i = 1; i < half; ++i) phi[i] = sign * us[half - i];
    phi[0] = sign * us[half];  // wrap point at -L mirrors +L

    const double norm = std::sqrt(phi.squaredNorm() * grid.dx());
    phi /= norm;

    ContinuumState st;
    st.grid = grid;
    st.energy = energy;
    st.parity = parity;
    st.k = std::sqrt(2.0 * mu * energy);

    // Asymptotic envelope at a reference point outside the well fixes both
    // the phase shift and the conversion to delta normalization.
    const int iref = std::min(half - 2, static_cast<int>(std::lround(0.9 * half)));
    const double xr = iref * grid.dx();
    const double ur = us[iref] / norm, vr = vs[iref] / norm;
    const double amp = std::sqrt(ur * ur + vr * vr / (st.k * st.k));
    st.delta_norm_factor = std::sqrt(mu / (M_PI * st.k)) / amp;
    st.phase_shift = (parity == Parity::odd)
                         ? std::atan2(st.k * ur, vr) - st.k * xr
                         : std::atan2(-vr, st.k * ur) - st.k * xr;
    st.phase_shift = std::remainder(st.phase_shift, M_PI);
    st.wavefunction = std::move(phi);
    return st;
}

std::complex<double> form_factor(const Grid1D& grid, const Eigen::VectorXd& phi_n,
                                 const Eigen::VectorXd& phi_np, double p) {
    if (phi_n.size() != grid.n || phi_np.size() != grid.n)
        throw std::invalid_argument("form_factor: states not on the given grid");
    std::complex<double> acc = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        acc += std::polar(phi_np[i] * phi_n[i], p * x);
    }
    return acc * grid.dx();
}

std::complex<double> barrier_fourier(const Grid1D& grid, const Potential& v, double p) {
    std::complex<double> acc = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        acc += std::polar(v(x), p * x);
    }
    return acc * grid.dx() / (2.0 * M_PI);
}

std::complex<double> w_matrix_element(const Grid1D& grid, const Eigen::VectorXd& phi_n,
                                      const Eigen::VectorXd& phi_np, double k, double kp,
                                      const Potential& v1, const Potential& v2,
                                      const ModelParams& p) {
    const double dk = k - kp;
    const double mu = p.reduced_mass();
    return form_factor(grid, phi_n, phi_np, mu / p.m1 * dk) * barrier_fourier(grid, v1, dk) +
           form_factor(grid, phi_n, phi_np, mu / p.m2 * (kp - k)) * barrier_fourier(grid, v2, dk);
}

TransitionRule classify_transition(const Grid1D& grid, Parity parity_n, Parity parity_np,
                                   const Potential& v1, const Potential& v2) {
    const bool same = parity_n == parity_np;
    double sup = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        const double combo = same ? v1(x) + v2(x) : v1(x) - v2(x);
        sup = std::max(sup, std::abs(combo));
    }
    return sup < 1e-12 ? TransitionRule::forbidden : TransitionRule::allowed;
}

double effective_potential(const Grid1D& grid, const Eigen::VectorXd& phi_n,
                           const Eigen::VectorXd& phi_np, const Potential& v1,
                           const Potential& v2, double r, const ModelParams& p,
                           bool* clipped) {
    if (phi_n.size() != grid.n || phi_np.size() != grid.n)
        throw std::invalid_argument("effective_potential: states not on the given grid");
    const double mu = p.reduced_mass();
    double acc = 0.0, edge = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        const double rho = grid.x(i);
        const double w = phi_n[i] * (v1(r - mu / p.m1 * rho) + v2(r + mu / p.m2 * rho)) * phi_np[i];
        acc += w;
        if (i == 0 || i == grid.n - 1) edge += std::abs(w);
    }
    const double z = acc * grid.dx();
    if (clipped)
        *clipped = edge * grid.dx() > 1e-8 * std::max(std::abs(z), 1e-12);
    return z;
}

EffectivePotentialCurve effective_potential_curve(
    const Grid1D& grid, const Eigen::VectorXd& phi_n, const Eigen::VectorXd& phi_np,
    const Potential& v1, const Potential& v2, const Eigen::ArrayXd& r_samples,
    const ModelParams& p) {
    EffectivePotentialCurve curve;
    curve.r = r_samples;
    curve.z.resize(r_samples.size());
    for (Eigen::Index i = 0; i < r_samples.size(); ++i) {
        bool clipped = false;
        curve.z[i] = effective_potential(grid, phi_n, phi_np, v1, v2, r_samples[i], p, &clipped);
        curve.clipped = curve.clipped || clipped;
    }
    return curve;
}

GridContinuumState lowest_positive_state(const ModelParams& p, const Grid1D& grid,
                                         Parity parity) {
    p.validate();
    grid.validate();
    require_symmetric(grid);
    const auto u = [&p](double rho) { return coupling_u(p, rho); };
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        fourier_grid_hamiltonian(grid, p.reduced_mass(), u));
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("lowest_positive_state: eigensolver failed to converge");
    const Eigen::VectorXd& w = solver.eigenvalues();
    for (int i = 0; i < grid.n; ++i) {
        if (w[i] <= 0.0) continue;
        Eigen::VectorXd phi = solver.eigenvectors().col(i) / std::sqrt(grid.dx());
        fix_sign(grid, phi);
        if (parity_of(grid, phi) == parity) return {w[i], std::move(phi)};
    }
    throw std::runtime_error("lowest_positive_state: no matching state found");
}

double delta_normalization_factor(const Grid1D& grid, const ModelParams& p,
                                  const Eigen::VectorXd& phi, double energy) {
    if (!(energy > 0.0))
        throw std::invalid_argument("delta_normalization_factor: energy must be positive");
    const double mu = p.reduced_mass();
    const double k = std::sqrt(2.0 * mu * energy);
    const int i = grid.index_of(0.8 * grid.x_max);
    const double dphi = (phi[i + 1] - phi[i - 1]) / (2.0 * grid.dx());
    const double amp = std::sqrt(phi[i] * phi[i] + dphi * dphi / (k * k));
    return std::sqrt(mu / (M_PI * k)) / amp;
}

}  // namespace pairtunnel
