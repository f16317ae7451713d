// Acceptance suite: one pass/fail line per criterion, exit code equals the
// number of failures. Runs the full production configuration; --quick exists
// for development smoke runs only and is labeled as such.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdarg>
#include <cstring>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "pairtunnel/experiments.hpp"

using namespace pairtunnel;

namespace {

int g_failures = 0;
std::chrono::steady_clock::time_point g_t0;

double elapsed() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - g_t0).count();
}

void verdict(int criterion, bool ok, const std::string& what, const std::string& detail) {
    if (!ok) ++g_failures;
    std::printf("[%s] criterion %d: %s  --  %s  (t=%.0fs)\n", ok ? "PASS" : "FAIL",
                criterion, what.c_str(), detail.c_str(), elapsed());
    std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    g_t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    cfg.out_dir = "acceptance_out";
    bool quick = false;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--out") && i + 1 < argc) cfg.out_dir = argv[++i];
        if (!std::strcmp(argv[i], "--quick")) quick = true;
    }
    if (quick) {
        std::printf("== quick mode: reduced scales, NOT the acceptance configuration ==\n");
        cfg.grid.n_r = 1024;
        cfg.ensemble.n_particles = 10000;
    }
    std::filesystem::create_directories(cfg.out_dir);

    const Grid1D egrid = cfg.make_eigen_grid();

    // ---- criterion 1: bound-state energies ---------------------------------
    {
        bool ok = true;
        double worst = 0.0;
        for (int n : {1, 2, 4}) {
            const auto& ref = reference_bound_energies(n);
            const auto set = solve_bound_states(cfg.params_for(n, 3.0), egrid);
            ok = ok && set.count() == static_cast<int>(ref.size());
            for (int i = 0; ok && i < set.count(); ++i)
                worst = std::max(worst, std::abs(set.energies[i] - ref[i]));
        }
        ok = ok && worst <= 0.01;
        verdict(1, ok, "six bound-state energies within 0.01",
                fmt("worst |dE| = %.2e", worst));
    }

    // ---- criterion 2: initial energy expectations ---------------------------
    {
        const std::map<int, double> ref{{1, 0.05911}, {2, -0.3631}, {4, -0.5766}};
        bool ok = true;
        double worst = 0.0;
        const Grid2D grid = cfg.make_grid();
        for (const auto& [n, ebar] : ref)
            for (const double alpha : {3.0, -3.0}) {
                const ModelParams p = cfg.params_for(n, alpha);
                const auto ground = solve_bound_states(p, grid.axis1, 1);
                const auto psi = build_initial_state(p, ground.state(0), grid);
                worst = std::max(worst, std::abs(energy_expectation(psi, p) - ebar));
            }
        ok = worst <= 0.005;
        verdict(2, ok, "initial energies within 0.005 at alpha = +-3",
                fmt("worst |dE| = %.2e", worst));
    }

    // ---- six reference propagations (criteria 3, 4, 9 and the quantum side of 7)
    std::map<std::pair<int, int>, CaseResult> runs;  // key: (N, sign of alpha)
    for (int n : {1, 2, 4})
        for (const double alpha : {3.0, -3.0}) {
            runs[{n, alpha > 0 ? 1 : -1}] = run_quantum_case(cfg, n, alpha);
            const auto& r = runs[{n, alpha > 0 ? 1 : -1}];
            write_series_csv(cfg.out_dir + "/traces_n" + std::to_string(n) +
                                 (alpha > 0 ? "_a+3.00" : "_a-3.00") + ".csv",
                             r.series, cfg.hash());
            std::printf("  .. propagated N=%d alpha=%+g: P_T=%.5f p_t=%.5f norm=%.4f "
                        "(t=%.0fs)\n",
                        n, alpha, r.series.last().quad.transmitted,
                        r.series.last().shifted.transmitted, r.series.last().norm,
                        elapsed());
            std::fflush(stdout);
        }

    // ---- criterion 3: the central inversion ---------------------------------
    {
        const auto pt = [&](int n, int sgn) {
            return runs[{n, sgn}].series.last().quad.transmitted;
        };
        const auto spt = [&](int n, int sgn) {
            return runs[{n, sgn}].series.last().shifted.transmitted;
        };
        const bool ok = pt(1, 1) < pt(1, -1) && pt(2, 1) > pt(2, -1) &&
                        pt(4, 1) > pt(4, -1) && spt(1, 1) < spt(1, -1) &&
                        spt(2, 1) > spt(2, -1) && spt(4, 1) > spt(4, -1);
        verdict(3, ok, "P_T and p_t orderings at tau = 150",
                fmt("P_T: N1 %.4f<%.4f N2 %.4f>%.4f N4 %.4f>%.4f | p_t: N2 %.4f>%.4f",
                    pt(1, 1), pt(1, -1), pt(2, 1), pt(2, -1), pt(4, 1), pt(4, -1),
                    spt(2, 1), spt(2, -1)));
    }

    // ---- criterion 4: disintegration ordering for N = 1 ---------------------
    {
        const auto& plus = runs[{1, 1}].series.last();
        const auto& minus = runs[{1, -1}].series.last();
        const bool ok = plus.quad.disintegrated < minus.quad.disintegrated &&
                        plus.shifted.disintegrated < minus.shifted.disintegrated;
        verdict(4, ok, "P_D and p_d smaller at alpha = +3 for N = 1",
                fmt("P_D %.3e < %.3e, p_d %.3e < %.3e", plus.quad.disintegrated,
                    minus.quad.disintegrated, plus.shifted.disintegrated,
                    minus.shifted.disintegrated));
    }

    // ---- criterion 5: selection rules ---------------------------------------
    {
        const ModelParams p = cfg.params_for(2, 3.0);
        const auto set = solve_bound_states(p, egrid);
        const Potential v = [](double q) { return 3.0 * barrier_v(q); };
        const Potential nv = [](double q) { return -3.0 * barrier_v(q); };
        const Potential v1m = [](double q) { return barrier_v(q - 0.7); };
        const Potential v2m = [](double q) { return barrier_v(-q - 0.7); };
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> ks(-3.0, 3.0);
        double opp_forbidden = 0.0, opp_allowed = 0.0;
        double same_forbidden = 0.0, same_allowed = 0.0, asym = 0.0;
        for (int i = 0; i < 64; ++i) {
            const double k = ks(rng), kp = ks(rng);
            opp_forbidden = std::max(opp_forbidden,
                                     std::abs(w_matrix_element(egrid, set.state(0),
                                                               set.state(1), k, kp, v, v, p)));
            opp_allowed = std::max(opp_allowed,
                                   std::abs(w_matrix_element(egrid, set.state(0),
                                                             set.state(1), k, kp, nv, v, p)));
            same_forbidden = std::max(same_forbidden,
                                      std::abs(w_matrix_element(egrid, set.state(0),
                                                                set.state(0), k, kp, nv, v,
                                                                p)));
            same_allowed = std::max(same_allowed,
                                    std::abs(w_matrix_element(egrid, set.state(0),
                                                              set.state(0), k, kp, v, v, p)));
            asym = std::max(asym, std::abs(w_matrix_element(egrid, set.state(0), set.state(1),
                                                            k, kp, v1m, v2m, p) -
                                           w_matrix_element(egrid, set.state(0), set.state(1),
                                                            kp, k, v1m, v2m, p)));
        }
        const bool ok = opp_forbidden < 1e-10 * opp_allowed &&
                        same_forbidden < 1e-10 * same_allowed && asym < 1e-10;
        verdict(5, ok, "parity selection rules and the k <-> k' symmetry",
                fmt("opp %.1e/%.1e same %.1e/%.1e asym %.1e", opp_forbidden, opp_allowed,
                    same_forbidden, same_allowed, asym));
    }

    // ---- criterion 6: effective potentials ----------------------------------
    {
        const ModelParams p = cfg.params_for(1, 3.0);
        const auto bound = solve_bound_states(p, egrid);
        const Eigen::VectorXd phi_g = bound.state(0);
        const auto cont = lowest_positive_state(p, egrid, Parity::odd);
        const double factor = delta_normalization_factor(egrid, p, cont.wavefunction,
                                                         cont.energy);
        const Eigen::VectorXd phi_c = cont.wavefunction * factor;
        const Potential v3 = [](double q) { return 3.0 * barrier_v(q); };
        const Potential vm3 = [](double q) { return -3.0 * barrier_v(q); };
        const Eigen::ArrayXd rs = Eigen::ArrayXd::LinSpaced(481, -12.0, 12.0);

        const auto zgg_a = effective_potential_curve(egrid, phi_g, phi_g, v3, v3, rs, p);
        const auto zcg_a = effective_potential_curve(egrid, phi_c, phi_g, v3, v3, rs, p);
        const auto zgg_b = effective_potential_curve(egrid, phi_g, phi_g, vm3, v3, rs, p);
        const auto zcg_b = effective_potential_curve(egrid, phi_c, phi_g, vm3, v3, rs, p);

        const double e_in = cfg.e_cm;  // incident CM kinetic energy scale
        const bool zeros = zcg_a.z.abs().maxCoeff() < 1e-10 &&
                           zgg_b.z.abs().maxCoeff() < 1e-10;
        const bool barrier = zgg_a.z.maxCoeff() > e_in;
        const bool open = zcg_b.z.abs().maxCoeff() < e_in;
        const bool local = std::abs(zgg_a.z[0]) < 1e-8 &&
                           std::abs(zgg_a.z[rs.size() - 1]) < 1e-8 &&
                           std::abs(zcg_b.z[0]) < 1e-8 &&
                           std::abs(zcg_b.z[rs.size() - 1]) < 1e-8;
        verdict(6, zeros && barrier && open && local,
                "effective potentials: zeros, barrier above and channel below 1 au",
                fmt("|Z_cg,a|<%.1e |Z_gg,b|<%.1e peak Z_gg,a=%.3f max|Z_cg,b|=%.3f (E_c=%.4f)",
                    zcg_a.z.abs().maxCoeff(), zgg_b.z.abs().maxCoeff(), zgg_a.z.maxCoeff(),
                    zcg_b.z.abs().maxCoeff(), cont.energy));
    }

    // ---- criterion 7: classical refutation ----------------------------------
    {
        std::map<std::pair<int, int>, EnsembleResult> cls;
        for (int n : {1, 2, 4})
            for (const double alpha : {3.0, -3.0}) {
                const ModelParams p = cfg.params_for(n, alpha);
                EnsembleConfig ec;
                ec.n_particles = cfg.ensemble.n_particles;
                ec.seed = cfg.seed;
                ec.sigma_rho = cfg.ensemble.sigma_rho;
                const auto ens = wigner_sample(ec, p);
                cls[{n, alpha > 0 ? 1 : -1}] =
                    run_ensemble(ens, p, cfg.prop.t_final, cfg.ensemble.dt, nullptr, 1);
                std::printf("  .. classical N=%d alpha=%+g: P_T=%.5g (t=%.0fs)\n", n, alpha,
                            cls[{n, alpha > 0 ? 1 : -1}].quad.transmitted, elapsed());
                std::fflush(stdout);
            }
        bool ok = true;
        std::string detail;
        for (int n : {2, 4}) {
            const double under = cls[{n, 1}].quad.transmitted;    // tunneling geometry
            const double above = cls[{n, -1}].quad.transmitted;   // over-barrier geometry
            const double quantum_plus = runs[{n, 1}].series.last().quad.transmitted;
            const double quantum_minus = runs[{n, -1}].series.last().quad.transmitted;
            const bool reversed = above > under && quantum_plus > quantum_minus;
            const bool ratio = above >= 5.0 * under;
            ok = ok && reversed && ratio;
            detail += fmt("N%d: cl %.2e vs %.2e (q %.3f vs %.3f) ", n, under, above,
                          quantum_plus, quantum_minus);
        }
        verdict(7, ok, "classical orderings reversed with ratio >= 5", detail);
    }

    // ---- criterion 8: numerical hygiene --------------------------------------
    {
        bool ok = true;
        std::string detail;

        // norm conservation without the absorber, 1000 steps
        {
            ModelParams p = cfg.params_for(1, 3.0);
            p.rbar = -8.0;
            p.sigma_r = 1.0;
            Grid2D g;
            g.frame = Frame::cm_relative;
            g.axis0 = {-32.0, 32.0, 256};
            g.axis1 = {-16.0, 16.0, 128};
            const auto ground = solve_bound_states(p, g.axis1, 1);
            auto psi = build_initial_state(p, ground.state(0), g);
            const auto series =
                propagate(psi, 1000 * 0.02, 4.0, p, AbsorbingMask::none(g), 0.02);
            double drift = 0.0;
            for (const auto& rec : series.records)
                drift = std::max(drift, std::abs(rec.norm - 1.0));
            ok = ok && drift < 1e-10;
            detail += fmt("norm %.1e ", drift);

            // time reversal on the same state
            auto fwd = build_initial_state(p, ground.state(0), g);
            SplitOperator prop(p, g, 0.02, AbsorbingMask::none(g));
            for (int i = 0; i < 500; ++i) prop.step(fwd);
            for (auto& c : fwd.data) c = std::conj(c);
            for (int i = 0; i < 500; ++i) prop.step(fwd);
            std::complex<double> ov = 0.0;
            const auto psi0 = build_initial_state(p, ground.state(0), g);
            for (std::size_t i = 0; i < fwd.data.size(); ++i)
                ov += psi0.data[i] * fwd.data[i];  // conjugate twice = plain product
            const double fid = std::abs(ov * g.cell_area());
            ok = ok && fid >= 1.0 - 1e-8;
            detail += fmt("reversal %.2e ", 1.0 - fid);
        }

        // symplectic order by global step halving
        {
            const ModelParams p = cfg.params_for(2, -3.0);
            const auto run_to = [&](double dt) {
                PhaseSpacePoint s{-4.0, 0.3, 2.4, 0.1};
                const long n = std::lround(4.0 / dt);
                for (long i = 0; i < n; ++i) s = symplectic_step(p, s, dt);
                return s;
            };
            const auto ref = run_to(0.0005);
            const auto dist = [&](const PhaseSpacePoint& a, const PhaseSpacePoint& b) {
                return std::sqrt(std::pow(a.r - b.r, 2) + std::pow(a.rho - b.rho, 2) +
                                 std::pow(a.p_r - b.p_r, 2) + std::pow(a.p_rho - b.p_rho, 2));
            };
            const double e1 = dist(run_to(0.02), ref);
            const double e2 = dist(run_to(0.01), ref);
            const double order = std::log2(e1 / e2);
            ok = ok && order > 3.5 && order < 4.6;
            detail += fmt("order %.2f ", order);
        }

        // symplectic energy drift over t = 150
        {
            const ModelParams p = cfg.params_for(2, -3.0);
            const auto traj = single_trajectory(p, -0.3631, 150.0, 1e-3, 150.0);
            ok = ok && traj.energy_drift < 1e-6;
            detail += fmt("traj drift %.1e ", traj.energy_drift);

            EnsembleConfig ec;
            ec.n_particles = quick ? 4000 : 20000;
            ec.seed = cfg.seed + 1;
            const auto ens = wigner_sample(ec, p);
            const auto res = run_ensemble(ens, p, 150.0, 1e-2);
            ok = ok && res.drift_q999 < 1e-6;
            detail += fmt("q999 %.1e (outliers %ld) ", res.drift_q999, res.drift_outliers);
        }

        // forces against central differences
        {
            const ModelParams p = cfg.params_for(4, -3.0);
            std::mt19937_64 rng(123);
            std::uniform_real_distribution<double> xs(-5.0, 5.0);
            double worst = 0.0;
            const double h = 1e-5;
            for (int i = 0; i < 1000; ++i) {
                const double x1 = xs(rng), x2 = xs(rng);
                const auto f = classical_force(p, x1, x2);
                const double fd1 = -(omega_cartesian(p, x1 + h, x2) -
                                     omega_cartesian(p, x1 - h, x2)) / (2 * h);
                const double fd2 = -(omega_cartesian(p, x1, x2 + h) -
                                     omega_cartesian(p, x1, x2 - h)) / (2 * h);
                const double scale = std::max({1.0, std::abs(f.f1), std::abs(f.f2)});
                worst = std::max({worst, std::abs(f.f1 - fd1) / scale,
                                  std::abs(f.f2 - fd2) / scale});
            }
            ok = ok && worst < 1e-6;
            detail += fmt("forces %.1e ", worst);
        }

        // sampler moments within five standard errors
        {
            const ModelParams p = cfg.params_for(1, 3.0);
            EnsembleConfig ec;
            ec.n_particles = 100000;
            ec.seed = cfg.seed;
            const auto ens = wigner_sample(ec, p);
            const double root2 = std::sqrt(2.0);
            const double want_mean[4] = {p.rbar, 0.0, 2.0, 0.0};
            const double want_sd[4] = {p.sigma_r / root2, ec.sigma_rho / root2,
                                       1.0 / (root2 * p.sigma_r),
                                       1.0 / (root2 * ec.sigma_rho)};
            const std::vector<double>* cols[4] = {&ens.r, &ens.rho, &ens.p_r, &ens.p_rho};
            double pull = 0.0;
            for (int c = 0; c < 4; ++c) {
                double mean = 0.0;
                for (double x : *cols[c]) mean += x;
                mean /= cols[c]->size();
                double var = 0.0;
                for (double x : *cols[c]) var += (x - mean) * (x - mean);
                var /= (cols[c]->size() - 1);
                pull = std::max(pull, std::abs(mean - want_mean[c]) /
                                          (want_sd[c] / std::sqrt(double(cols[c]->size()))));
                pull = std::max(pull,
                                std::abs(std::sqrt(var) - want_sd[c]) /
                                    (want_sd[c] / std::sqrt(2.0 * cols[c]->size())));
            }
            ok = ok && pull < 5.0;
            detail += fmt("sampler pull %.2f", pull);
        }

        verdict(8, ok, "numerical hygiene gauntlet", detail);
    }

    // ---- criterion 9: steplike structures ------------------------------------
    {
        const auto steps_of = [&](int n, int sgn) {
            const auto& s = runs[{n, sgn}].series;
            return count_pronounced_steps(s.times(), s.transmitted()).count;
        };
        const int s2m = steps_of(2, -1), s4m = steps_of(4, -1);
        const int s2p = steps_of(2, 1), s4p = steps_of(4, 1);
        const bool ok = s2m >= 2 && s4m >= 2 && s2p < 2 && s4p < 2;
        verdict(9, ok, "steplike structures in the alpha = -3 traces only",
                fmt("N2: %d vs %d, N4: %d vs %d (-3 vs +3)", s2m, s2p, s4m, s4p));
    }

    std::printf("%s: %d criteria failed (total %.0fs)\n",
                g_failures == 0 ? "ALL PASS" : "FAILURES", g_failures, elapsed());
    return g_failures;
}
