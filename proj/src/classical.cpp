#include "pairtunnel/classical.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <thread>

namespace pairtunnel {

namespace {

// Forest-Ruth composition: drift(c1) kick(d1) ... drift(c4), with
// w1 = 1/(2 - 2^(1/3)) and w0 = 1 - 2 w1.
const double kW1 = 1.0 / (2.0 - std::cbrt(2.0));
const double kW0 = 1.0 - 2.0 * kW1;
const double kDrift[4] = {kW1 / 2.0, (kW0 + kW1) / 2.0, (kW0 + kW1) / 2.0, kW1 / 2.0};
const double kKick[3] = {kW1, kW0, kW1};

}  // namespace

CartesianPoint to_cartesian(const ModelParams& p, const PhaseSpacePoint& s) {
    const auto c = to_cartesian(p, CmCoords{s.r, s.rho});
    const double m = p.total_mass();
    return {c.x1, c.x2, p.m1 / m * s.p_r - s.p_rho, p.m2 / m * s.p_r + s.p_rho};
}

PhaseSpacePoint to_cm(const ModelParams& p, const CartesianPoint& s) {
    const auto c = to_cm(p, CartesianCoords{s.x1, s.x2});
    const double m = p.total_mass();
    return {c.r, c.rho, s.p1 + s.p2, (p.m1 * s.p2 - p.m2 * s.p1) / m};
}

double classical_hamiltonian(const ModelParams& p, const PhaseSpacePoint& s) {
    return s.p_r * s.p_r / (2.0 * p.total_mass()) +
           s.p_rho * s.p_rho / (2.0 * p.reduced_mass()) + omega_cm(p, s.r, s.rho);
}

double classical_hamiltonian(const ModelParams& p, const CartesianPoint& s) {
    return s.p1 * s.p1 / (2.0 * p.m1) + s.p2 * s.p2 / (2.0 * p.m2) +
           omega_cartesian(p, s.x1, s.x2);
}

PhaseSpacePoint symplectic_step(const ModelParams& p, PhaseSpacePoint s, double dt) {
    const double inv_m = 1.0 / p.total_mass();
    const double inv_mu = 1.0 / p.reduced_mass();
    const double mu1 = p.reduced_mass() / p.m1, mu2 = p.reduced_mass() / p.m2;
    for (int stage = 0; stage < 4; ++stage) {
        s.r += kDrift[stage] * dt * s.p_r * inv_m;
        s.rho += kDrift[stage] * dt * s.p_rho * inv_mu;
        if (stage < 3) {
            const auto c = to_cartesian(p, CmCoords{s.r, s.rho});
            const auto f = classical_force(p, c.x1, c.x2);
            s.p_r += kKick[stage] * dt * (f.f1 + f.f2);
            s.p_rho += kKick[stage] * dt * (-mu1 * f.f1 + mu2 * f.f2);
        }
    }
    return s;
}

CartesianPoint symplectic_step(const ModelParams& p, CartesianPoint s, double dt) {
    for (int stage = 0; stage < 4; ++stage) {
        s.x1 += kDrift[stage] * dt * s.p1 / p.m1;
        s.x2 += kDrift[stage] * dt * s.p2 / p.m2;
        if (stage < 3) {
            const auto f = classical_force(p, s.x1, s.x2);
            s.p1 += kKick[stage] * dt * f.f1;
            s.p2 += kKick[stage] * dt * f.f2;
        }
    }
    return s;
}

Region classify_region(double x1, double x2) {
    if (x1 > 0.0 && x2 > 0.0) return Region::transmitted;
    if (x1 < 0.0 && x2 < 0.0) return Region::reflected;
    if ((x1 < 0.0 && x2 > 0.0) || (x1 > 0.0 && x2 < 0.0)) return Region::disintegrated;
    return Region::boundary;
}

Trajectory single_trajectory(const ModelParams& p, double total_energy, double t_final,
                             double dt, double record_every) {
    p.validate();
    const double omega0 = omega_cartesian(p, p.rbar, p.rbar);
    const double p0_sq = total_energy - omega0;
    if (p0_sq < 0.0)
        throw std::invalid_argument("single_trajectory: energy below the launch potential");
    const double p0 = std::sqrt(p0_sq);

    PhaseSpacePoint s{p.rbar, 0.0, 2.0 * p0, 0.0};  // p1 = p2 = p0 on the diagonal
    Trajectory traj;
    traj.energy_initial = classical_hamiltonian(p, s);
    const long n_steps = std::lround(t_final / dt);
    const long cadence = std::max(1L, std::lround(record_every / dt));
    traj.t.push_back(0.0);
    traj.points.push_back(s);
    for (long i = 1; i <= n_steps; ++i) {
        s = symplectic_step(p, s, dt);
        if (i % cadence == 0 || i == n_steps) {
            traj.t.push_back(i * dt);
            traj.points.push_back(s);
        }
    }
    traj.energy_drift = std::abs(classical_hamiltonian(p, s) - traj.energy_initial) /
                        std::abs(traj.energy_initial);
    const auto c = to_cartesian(p, s);
    traj.final_region = classify_region(c.x1, c.x2);
    return traj;
}

PhaseSpaceEnsemble wigner_sample(const EnsembleConfig& cfg, const ModelParams& p) {
    p.validate();
    if (cfg.n_particles < 1)
        throw std::invalid_argument("wigner_sample: need at least one particle");
    if (!(cfg.sigma_rho > 0.0))
        throw std::invalid_argument("wigner_sample: sigma_rho must be positive");

    const double root2 = std::sqrt(2.0);
    const double mean_pr = std::sqrt(2.0 * p.total_mass() * p.e_cm);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> n01(0.0, 1.0);

    PhaseSpaceEnsemble ens;
    ens.seed = cfg.seed;
    ens.r.resize(cfg.n_particles);
    ens.rho.resize(cfg.n_particles);
    ens.p_r.resize(cfg.n_particles);
    ens.p_rho.resize(cfg.n_particles);
    for (long i = 0; i < cfg.n_particles; ++i) {
        // draw order is part of the reproducibility contract
        ens.r[i] = p.rbar + p.sigma_r / root2 * n01(rng);
        ens.rho[i] = cfg.sigma_rho / root2 * n01(rng);
        ens.p_r[i] = mean_pr + 1.0 / (root2 * p.sigma_r) * n01(rng);
        ens.p_rho[i] = 1.0 / (root2 * cfg.sigma_rho) * n01(rng);
    }
    return ens;
}

namespace {

// region index 0..3 for quadrants, 4..7 for shifted regions
inline int quad_index(double x1, double x2) {
    if (x1 > 0.0 && x2 > 0.0) return 0;
    if ((x1 < 0.0 && x2 > 0.0) || (x1 > 0.0 && x2 < 0.0)) return 1;
    if (x1 < 0.0 && x2 < 0.0) return 2;
    return 3;
}

inline int shifted_index(double x1, double x2) {
    if (x1 > 3.0 && x2 > 3.0) return 0;
    if ((x1 < -3.0 && x2 > 3.0) || (x1 > 3.0 && x2 < -3.0)) return 1;
    if (x1 < -3.0 && x2 < -3.0) return 2;
    return 3;
}

using RecordCounts = std::array<long, 8>;

}  // namespace

EnsembleResult run_ensemble(const PhaseSpaceEnsemble& ens, const ModelParams& p,
                            double t_final, double dt, const HistogramSpec* hist,
                            int workers, double record_every) {
    p.validate();
    const long n = ens.size();
    const long n_steps = std::lround(t_final / dt);
    const long cadence = record_every > 0.0 ? std::max(1L, std::lround(record_every / dt)) : 0;
    const double inv_m = 1.0 / p.total_mass();
    const double inv_mu = 1.0 / p.reduced_mass();
    const double mu1 = p.reduced_mass() / p.m1, mu2 = p.reduced_mass() / p.m2;
    const double a = p.alpha, depth = p.well_depth;
    const double inv_w2 = 1.0 / (p.well_width * p.well_width);

    std::vector<double> r = ens.r, rho = ens.rho, pr = ens.p_r, prho = ens.p_rho;
    std::vector<double> e0(n);
    const auto hamiltonian = [&](long i) {
        return pr[i] * pr[i] * (0.5 * inv_m) + prho[i] * prho[i] * (0.5 * inv_mu) +
               omega_cm(p, r[i], rho[i]);
    };
    for (long i = 0; i < n; ++i) e0[i] = hamiltonian(i);

    std::vector<long> record_steps;
    if (cadence) {
        for (long s = 0; s <= n_steps; s += cadence) record_steps.push_back(s);
        if (record_steps.back() != n_steps) record_steps.push_back(n_steps);
    }

    const auto integrate_slice = [&](long lo, long hi, std::vector<RecordCounts>* recs) {
        const auto count_into = [&](RecordCounts& c) {
            for (long i = lo; i < hi; ++i) {
                const double x1 = r[i] - mu1 * rho[i];
                const double x2 = r[i] + mu2 * rho[i];
                c[quad_index(x1, x2)]++;
                c[4 + shifted_index(x1, x2)]++;
            }
        };
        std::size_t rec = 0;
        if (recs) count_into((*recs)[rec++]);
        for (long step = 1; step <= n_steps; ++step) {
            for (int stage = 0; stage < 4; ++stage) {
                const double cd = kDrift[stage] * dt;
                for (long i = lo; i < hi; ++i) {
                    r[i] += cd * pr[i] * inv_m;
                    rho[i] += cd * prho[i] * inv_mu;
                }
                if (stage < 3) {
                    const double kd = kKick[stage] * dt;
                    for (long i = lo; i < hi; ++i) {
                        const double x1 = r[i] - mu1 * rho[i];
                        const double x2 = r[i] + mu2 * rho[i];
                        const double du = 2.0 * depth * (x2 - x1) * inv_w2 *
                                          std::exp(-(x2 - x1) * (x2 - x1) * inv_w2);
                        const double f1 = -a * (1.0 - 2.0 * x1 * x1) * std::exp(-x1 * x1) + du;
                        const double f2 = -3.0 * (1.0 - 2.0 * x2 * x2) * std::exp(-x2 * x2) - du;
                        pr[i] += kd * (f1 + f2);
                        prho[i] += kd * (-mu1 * f1 + mu2 * f2);
                    }
                }
            }
            if (recs && rec < record_steps.size() && record_steps[rec] == step)
                count_into((*recs)[rec++]);
        }
    };

    workers = std::max(1, workers);
    std::vector<std::vector<RecordCounts>> all_recs;
    if (workers == 1 || n < 4 * workers) {
        all_recs.emplace_back(record_steps.size(), RecordCounts{});
        integrate_slice(0, n, cadence ? &all_recs[0] : nullptr);
    } else {
        const long chunk = (n + workers - 1) / workers;
        std::vector<std::thread> pool;
        all_recs.resize(workers, std::vector<RecordCounts>(record_steps.size(), RecordCounts{}));
        for (int w = 0; w < workers; ++w) {
            const long lo = w * chunk, hi = std::min(n, lo + chunk);
            if (lo < hi)
                pool.emplace_back(integrate_slice, lo, hi, cadence ? &all_recs[w] : nullptr);
        }
        for (auto& t : pool) t.join();
    }

    EnsembleResult res;
    const double inv_n = 1.0 / static_cast<double>(n);

    if (cadence) {
        for (std::size_t rec = 0; rec < record_steps.size(); ++rec) {
            RecordCounts sum{};
            for (const auto& recs : all_recs)
                for (int j = 0; j < 8; ++j) sum[j] += recs[rec][j];
            ObservableRecord row;
            row.t = record_steps[rec] * dt;
            row.norm = 1.0;  // counting measure
            row.quad.transmitted = sum[0] * inv_n;
            row.quad.disintegrated = sum[1] * inv_n;
            row.quad.reflected = (sum[2] + sum[3]) * inv_n;  // boundary ties go to III
            row.shifted.transmitted = sum[4] * inv_n;
            row.shifted.disintegrated = sum[5] * inv_n;
            row.shifted.reflected = sum[6] * inv_n;
            row.shifted.trapped = sum[7] * inv_n;
            res.series.records.push_back(row);
        }
    }

    long counts[4] = {0, 0, 0, 0}, shifted_counts[4] = {0, 0, 0, 0};
    long upper = 0, lower = 0;
    std::vector<std::int64_t> bins;
    Grid2D hgrid;
    if (hist) {
        hgrid.frame = Frame::cartesian;
        hgrid.axis0 = {hist->x_min, hist->x_max, hist->bins};
        hgrid.axis1 = {hist->x_min, hist->x_max, hist->bins};
        bins.assign(hgrid.size(), 0);
    }
    std::vector<double> drift(n);
    for (long i = 0; i < n; ++i) {
        const double x1 = r[i] - mu1 * rho[i];
        const double x2 = r[i] + mu2 * rho[i];
        counts[quad_index(x1, x2)]++;
        shifted_counts[shifted_index(x1, x2)]++;
        if (x1 < 0.0 && x2 > 0.0) upper++;
        else if (x1 > 0.0 && x2 < 0.0) lower++;
        // near-zero total energies would make the plain ratio blow up, so the
        // drift is measured against the larger of |E0| and the well depth
        drift[i] = std::abs(hamiltonian(i) - e0[i]) / std::max(std::abs(e0[i]), depth);
        if (hist) {
            const int b1 = static_cast<int>(std::floor((x1 - hist->x_min) / hgrid.axis0.dx()));
            const int b2 = static_cast<int>(std::floor((x2 - hist->x_min) / hgrid.axis1.dx()));
            if (b1 >= 0 && b1 < hist->bins && b2 >= 0 && b2 < hist->bins)
                bins[hgrid.index(b1, b2)]++;
            else
                res.overflow++;
        }
    }

    res.quad.transmitted = counts[0] * inv_n;
    res.quad.disintegrated = counts[1] * inv_n;
    res.quad.reflected = (counts[2] + counts[3]) * inv_n;
    res.shifted.transmitted = shifted_counts[0] * inv_n;
    res.shifted.disintegrated = shifted_counts[1] * inv_n;
    res.shifted.reflected = shifted_counts[2] * inv_n;
    res.shifted.trapped = shifted_counts[3] * inv_n;
    res.disintegration.upper = upper * inv_n;
    res.disintegration.lower = lower * inv_n;

    for (double d : drift) {
        if (d > 1e-6) res.drift_outliers++;
        res.drift_worst = std::max(res.drift_worst, d);
    }
    std::vector<double> tmp = drift;
    const long q = std::min<long>(n - 1, static_cast<long>(0.999 * n));
    std::nth_element(tmp.begin(), tmp.begin() + q, tmp.end());
    res.drift_q999 = tmp[q];

    if (hist) {
        res.density.grid = hgrid;
        res.density.time = t_final;
        res.density.tag = "classical";
        res.density.values.resize(bins.size());
        const double w = inv_n / hgrid.cell_area();
        for (std::size_t i = 0; i < bins.size(); ++i) res.density.values[i] = bins[i] * w;
    }
    return res;
}

}  // namespace pairtunnel
