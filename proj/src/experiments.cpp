#include "pairtunnel/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <thread>

namespace pairtunnel {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end())
            throw ConfigError("unknown key '" + key + "' in " + context);
    }
}

std::string alpha_label(double alpha) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%+.2f", alpha);
    return buf;
}

std::string case_name(int channels, double alpha) {
    return "n" + std::to_string(channels) + "_a" + alpha_label(alpha);
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

RunManifest open_manifest(const ExperimentConfig& cfg) {
    const std::string path = cfg.out_dir + "/manifest.json";
    if (auto existing = load_manifest(path); existing && existing->config_hash == cfg.hash())
        return *existing;
    RunManifest m;
    m.config_hash = cfg.hash();
    m.created = timestamp_utc();
    return m;
}

void commit_manifest(const ExperimentConfig& cfg, RunManifest& m) {
    m.updated = timestamp_utc();
    save_manifest(cfg.out_dir + "/manifest.json", m);
}

std::map<std::string, double> record_scalars(const ObservableRecord& r) {
    return {{"t", r.t},
            {"norm", r.norm},
            {"P_T", r.quad.transmitted},
            {"P_D", r.quad.disintegrated},
            {"P_R", r.quad.reflected},
            {"p_t", r.shifted.transmitted},
            {"p_d", r.shifted.disintegrated},
            {"p_r", r.shifted.reflected},
            {"p_s", r.shifted.trapped},
            {"absorbed", r.absorbed}};
}

}  // namespace

const std::vector<double>& reference_bound_energies(int channels) {
    static const std::vector<double> n1{-0.955};
    static const std::vector<double> n2{-1.377, -0.372};
    static const std::vector<double> n4{-1.590, -0.856, -0.308, -0.012};
    switch (channels) {
        case 1: return n1;
        case 2: return n2;
        case 4: return n4;
        default: throw std::invalid_argument("channels must be 1, 2 or 4");
    }
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    check_keys(j, {"preset", "seed", "workers", "out_dir", "model", "grid", "propagation",
                   "sweep", "cases", "ensemble", "histogram", "zeff", "eigen_grid",
                   "fftw_planner"},
               "config");
    ExperimentConfig cfg;
    cfg.preset = j.value("preset", cfg.preset);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.workers = j.value("workers", cfg.workers);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    if (j.contains("model")) {
        const json& m = j.at("model");
        check_keys(m, {"well_depth", "rbar", "sigma_r", "e_cm", "well_width_1",
                       "well_width_2", "well_width_4"},
                   "model");
        cfg.well_depth = m.value("well_depth", cfg.well_depth);
        cfg.rbar = m.value("rbar", cfg.rbar);
        cfg.sigma_r = m.value("sigma_r", cfg.sigma_r);
        cfg.e_cm = m.value("e_cm", cfg.e_cm);
        if (m.contains("well_width_1")) cfg.well_width_1 = m.at("well_width_1").get<double>();
        if (m.contains("well_width_2")) cfg.well_width_2 = m.at("well_width_2").get<double>();
        if (m.contains("well_width_4")) cfg.well_width_4 = m.at("well_width_4").get<double>();
    }
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        check_keys(g, {"r_min", "r_max", "n_r", "rho_min", "rho_max", "n_rho",
                       "absorber_width_r", "absorber_width_rho", "absorber_strength"},
                   "grid");
        cfg.grid.r_min = g.value("r_min", cfg.grid.r_min);
        cfg.grid.r_max = g.value("r_max", cfg.grid.r_max);
        cfg.grid.n_r = g.value("n_r", cfg.grid.n_r);
        cfg.grid.rho_min = g.value("rho_min", cfg.grid.rho_min);
        cfg.grid.rho_max = g.value("rho_max", cfg.grid.rho_max);
        cfg.grid.n_rho = g.value("n_rho", cfg.grid.n_rho);
        cfg.grid.absorber_width_r = g.value("absorber_width_r", cfg.grid.absorber_width_r);
        cfg.grid.absorber_width_rho = g.value("absorber_width_rho", cfg.grid.absorber_width_rho);
        cfg.grid.absorber_strength = g.value("absorber_strength", cfg.grid.absorber_strength);
    }
    if (j.contains("propagation")) {
        const json& p = j.at("propagation");
        check_keys(p, {"dt", "t_final", "record_every"}, "propagation");
        cfg.prop.dt = p.value("dt", cfg.prop.dt);
        cfg.prop.t_final = p.value("t_final", cfg.prop.t_final);
        cfg.prop.record_every = p.value("record_every", cfg.prop.record_every);
    }
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        check_keys(s, {"alpha_min", "alpha_max", "alpha_step", "channels"}, "sweep");
        cfg.sweep.alpha_min = s.value("alpha_min", cfg.sweep.alpha_min);
        cfg.sweep.alpha_max = s.value("alpha_max", cfg.sweep.alpha_max);
        cfg.sweep.alpha_step = s.value("alpha_step", cfg.sweep.alpha_step);
        if (s.contains("channels")) cfg.sweep.channels = s.at("channels").get<std::vector<int>>();
    }
    if (j.contains("cases")) {
        const json& c = j.at("cases");
        check_keys(c, {"alphas", "channels"}, "cases");
        if (c.contains("alphas")) cfg.cases.alphas = c.at("alphas").get<std::vector<double>>();
        if (c.contains("channels")) cfg.cases.channels = c.at("channels").get<std::vector<int>>();
    }
    if (j.contains("ensemble")) {
        const json& e = j.at("ensemble");
        check_keys(e, {"n_particles", "dt", "sigma_rho"}, "ensemble");
        cfg.ensemble.n_particles = e.value("n_particles", cfg.ensemble.n_particles);
        cfg.ensemble.dt = e.value("dt", cfg.ensemble.dt);
        cfg.ensemble.sigma_rho = e.value("sigma_rho", cfg.ensemble.sigma_rho);
    }
    if (j.contains("histogram")) {
        const json& h = j.at("histogram");
        check_keys(h, {"min", "max", "bins"}, "histogram");
        cfg.histogram.min = h.value("min", cfg.histogram.min);
        cfg.histogram.max = h.value("max", cfg.histogram.max);
        cfg.histogram.bins = h.value("bins", cfg.histogram.bins);
    }
    if (j.contains("zeff")) {
        const json& z = j.at("zeff");
        check_keys(z, {"r_min", "r_max", "n_samples", "continuum_energy"}, "zeff");
        cfg.zeff.r_min = z.value("r_min", cfg.zeff.r_min);
        cfg.zeff.r_max = z.value("r_max", cfg.zeff.r_max);
        cfg.zeff.n_samples = z.value("n_samples", cfg.zeff.n_samples);
        if (z.contains("continuum_energy") && !z.at("continuum_energy").is_null())
            cfg.zeff.continuum_energy = z.at("continuum_energy").get<double>();
    }
    if (j.contains("eigen_grid")) {
        const json& e = j.at("eigen_grid");
        check_keys(e, {"min", "max", "n"}, "eigen_grid");
        cfg.eigen_grid.min = e.value("min", cfg.eigen_grid.min);
        cfg.eigen_grid.max = e.value("max", cfg.eigen_grid.max);
        cfg.eigen_grid.n = e.value("n", cfg.eigen_grid.n);
    }
    if (j.contains("fftw_planner")) {
        const std::string planner = j.at("fftw_planner");
        if (planner == "measure") cfg.fftw_measure = true;
        else if (planner == "estimate") cfg.fftw_measure = false;
        else throw ConfigError("fftw_planner must be 'measure' or 'estimate'");
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

json ExperimentConfig::to_json() const {
    json j;
    j["preset"] = preset;
    j["seed"] = seed;
    j["workers"] = workers;
    j["out_dir"] = out_dir;
    j["model"] = {{"well_depth", well_depth}, {"rbar", rbar}, {"sigma_r", sigma_r},
                  {"e_cm", e_cm}};
    if (well_width_1) j["model"]["well_width_1"] = *well_width_1;
    if (well_width_2) j["model"]["well_width_2"] = *well_width_2;
    if (well_width_4) j["model"]["well_width_4"] = *well_width_4;
    j["grid"] = {{"r_min", grid.r_min},
                 {"r_max", grid.r_max},
                 {"n_r", grid.n_r},
                 {"rho_min", grid.rho_min},
                 {"rho_max", grid.rho_max},
                 {"n_rho", grid.n_rho},
                 {"absorber_width_r", grid.absorber_width_r},
                 {"absorber_width_rho", grid.absorber_width_rho},
                 {"absorber_strength", grid.absorber_strength}};
    j["propagation"] = {{"dt", prop.dt},
                        {"t_final", prop.t_final},
                        {"record_every", prop.record_every}};
    j["sweep"] = {{"alpha_min", sweep.alpha_min},
                  {"alpha_max", sweep.alpha_max},
                  {"alpha_step", sweep.alpha_step},
                  {"channels", sweep.channels}};
    j["cases"] = {{"alphas", cases.alphas}, {"channels", cases.channels}};
    j["ensemble"] = {{"n_particles", ensemble.n_particles},
                     {"dt", ensemble.dt},
                     {"sigma_rho", ensemble.sigma_rho}};
    j["histogram"] = {{"min", histogram.min}, {"max", histogram.max},
                      {"bins", histogram.bins}};
    j["zeff"] = {{"r_min", zeff.r_min}, {"r_max", zeff.r_max},
                 {"n_samples", zeff.n_samples}};
    if (zeff.continuum_energy) j["zeff"]["continuum_energy"] = *zeff.continuum_energy;
    j["eigen_grid"] = {{"min", eigen_grid.min}, {"max", eigen_grid.max},
                       {"n", eigen_grid.n}};
    j["fftw_planner"] = fftw_measure ? "measure" : "estimate";
    return j;
}

std::string ExperimentConfig::hash() const { return hash_hex(fnv1a64(to_json().dump())); }

void ExperimentConfig::validate() const {
    if (preset != "paper") throw ConfigError("unknown preset '" + preset + "'");
    try {
        for (int n : cases.channels) params_for(n, cases.alphas.at(0)).validate();
        for (int n : sweep.channels) params_for(n, 3.0).validate();
        make_grid().validate();
        make_eigen_grid().validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    } catch (const std::out_of_range&) {
        throw ConfigError("cases.alphas must not be empty");
    }
    if (!(prop.dt > 0.0) || !(prop.t_final > 0.0) || !(prop.record_every > 0.0))
        throw ConfigError("propagation times must be positive");
    if (!(sweep.alpha_step > 0.0) || sweep.alpha_max < sweep.alpha_min)
        throw ConfigError("sweep range is empty");
    if (ensemble.n_particles < 1 || !(ensemble.dt > 0.0) || !(ensemble.sigma_rho > 0.0))
        throw ConfigError("ensemble settings must be positive");
    if (histogram.bins < 2 || !(histogram.max > histogram.min))
        throw ConfigError("histogram window is empty");
    if (zeff.n_samples < 2 || !(zeff.r_max > zeff.r_min))
        throw ConfigError("zeff sample range is empty");
    if (zeff.continuum_energy && !(*zeff.continuum_energy > 0.0))
        throw ConfigError("zeff continuum energy must be positive");
    if (workers < 1) throw ConfigError("workers must be at least 1");
    if (!(grid.absorber_strength > 0.0))
        throw ConfigError("absorber strength must be positive");
    // packet must fit the grid with its 6-sigma margin
    if (grid.r_min > rbar - 6.0 * sigma_r || grid.r_max < rbar + 6.0 * sigma_r)
        throw ConfigError("grid does not cover the initial packet");
}

ModelParams ExperimentConfig::params_for(int channels, double alpha) const {
    ModelParams p = ModelParams::paper(channels, alpha);
    p.well_depth = well_depth;
    p.rbar = rbar;
    p.sigma_r = sigma_r;
    p.e_cm = e_cm;
    if (channels == 1 && well_width_1) p.well_width = *well_width_1;
    if (channels == 2 && well_width_2) p.well_width = *well_width_2;
    if (channels == 4 && well_width_4) p.well_width = *well_width_4;
    return p;
}

Grid2D ExperimentConfig::make_grid() const {
    Grid2D g;
    g.frame = Frame::cm_relative;
    g.axis0 = {grid.r_min, grid.r_max, grid.n_r};
    g.axis1 = {grid.rho_min, grid.rho_max, grid.n_rho};
    return g;
}

AbsorbingMask ExperimentConfig::make_mask(const Grid2D& g) const {
    return AbsorbingMask::cos2_ramp(g, grid.absorber_width_r, grid.absorber_width_rho,
                                    grid.absorber_strength);
}

Grid1D ExperimentConfig::make_eigen_grid() const {
    return {eigen_grid.min, eigen_grid.max, eigen_grid.n};
}

CaseResult run_quantum_case(const ExperimentConfig& cfg, int channels, double alpha) {
    set_fftw_planner_measure(cfg.fftw_measure);
    const ModelParams params = cfg.params_for(channels, alpha);
    const Grid2D grid = cfg.make_grid();
    const AbsorbingMask mask = cfg.make_mask(grid);
    // the ground state is solved on the rho axis of the propagation grid
    const BoundStateSet ground = solve_bound_states(params, grid.axis1, 1);
    CaseResult result;
    result.channels = channels;
    result.alpha = alpha;
    result.psi = build_initial_state(params, ground.state(0), grid);
    result.ebar = energy_expectation(result.psi, params);
    result.series = propagate(result.psi, cfg.prop.t_final, cfg.prop.record_every, params,
                              mask, cfg.prop.dt);
    return result;
}

StepDetection count_pronounced_steps(const Eigen::ArrayXd& t, const Eigen::ArrayXd& y,
                                     double rel_floor) {
    const Eigen::Index n = t.size();
    if (n < 3 || y.size() != n)
        throw std::invalid_argument("count_pronounced_steps: need matching series");
    Eigen::ArrayXd d(n);
    for (Eigen::Index i = 1; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i - 1]) / (t[i + 1] - t[i - 1]);
    d[0] = (y[1] - y[0]) / (t[1] - t[0]);
    d[n - 1] = (y[n - 1] - y[n - 2]) / (t[n - 1] - t[n - 2]);

    std::vector<double> mags(d.data(), d.data() + n);
    for (double& m : mags) m = std::abs(m);
    std::nth_element(mags.begin(), mags.begin() + n / 2, mags.end());
    const double median = mags[n / 2];

    StepDetection det;
    det.threshold = std::max(3.0 * median, rel_floor * d.maxCoeff());

    // local maxima above the threshold ...
    std::vector<Eigen::Index> peaks;
    for (Eigen::Index i = 1; i + 1 < n; ++i)
        if (d[i] > det.threshold && d[i] >= d[i - 1] && d[i] > d[i + 1]) peaks.push_back(i);

    // ... merged unless the rate in between drops below half the smaller peak
    Eigen::Index group_peak = -1;
    for (const Eigen::Index i : peaks) {
        if (group_peak < 0) {
            group_peak = i;
            det.count = 1;
            continue;
        }
        double valley = d[i];
        for (Eigen::Index j = group_peak; j <= i; ++j) valley = std::min(valley, d[j]);
        if (valley < 0.5 * std::min(d[group_peak], d[i])) {
            det.count++;
            group_peak = i;
        } else if (d[i] > d[group_peak]) {
            group_peak = i;
        }
    }
    return det;
}

bool run_validate(const ExperimentConfig& cfg) {
    bool all_ok = true;
    const auto report = [&](const std::string& name, bool ok, const std::string& detail) {
        std::printf("[%s] %-28s %s\n", ok ? " ok " : "FAIL", name.c_str(), detail.c_str());
        all_ok = all_ok && ok;
    };

    // bound spectra against the reference table
    const Grid1D egrid = cfg.make_eigen_grid();
    for (int n : std::vector<int>{1, 2, 4}) {
        const auto& ref = reference_bound_energies(n);
        char detail[160];
        try {
            const auto set = solve_bound_states(cfg.params_for(n, 3.0), egrid);
            bool ok = set.count() == static_cast<int>(ref.size());
            double worst = 0.0;
            for (int i = 0; ok && i < set.count(); ++i)
                worst = std::max(worst, std::abs(set.energies[i] - ref[i]));
            ok = ok && worst <= 0.01;
            std::snprintf(detail, sizeof(detail), "states=%d worst |dE|=%.2e", set.count(),
                          worst);
            report("bound spectrum N=" + std::to_string(n), ok, detail);
        } catch (const std::exception& e) {
            report("bound spectrum N=" + std::to_string(n), false, e.what());
        }
    }

    // norm conservation smoke test on a small mask-free grid
    try {
        ModelParams p = cfg.params_for(1, 3.0);
        p.rbar = -6.0;
        p.sigma_r = 1.0;
        Grid2D g;
        g.frame = Frame::cm_relative;
        g.axis0 = {-20.0, 20.0, 256};
        g.axis1 = {-16.0, 16.0, 64};
        const auto ground = solve_bound_states(p, g.axis1, 1);
        auto psi = build_initial_state(p, ground.state(0), g);
        const auto series =
            propagate(psi, 200 * 0.02, 1.0, p, AbsorbingMask::none(g), 0.02);
        const double drift = std::abs(series.last().norm - 1.0);
        char detail[80];
        std::snprintf(detail, sizeof(detail), "|norm-1|=%.2e over 200 steps", drift);
        report("norm conservation", drift < 1e-10, detail);
    } catch (const std::exception& e) {
        report("norm conservation", false, e.what());
    }

    // parity selection rules
    try {
        const ModelParams p = cfg.params_for(2, 3.0);
        const auto set = solve_bound_states(p, egrid);
        const Potential v = [](double q) { return 3.0 * barrier_v(q); };
        const Potential neg_v = [](double q) { return -3.0 * barrier_v(q); };
        double forbidden = 0.0, allowed = 0.0, symm = 0.0;
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> mom(-3.0, 3.0);
        for (int i = 0; i < 16; ++i) {
            const double k = mom(rng), kp = mom(rng);
            forbidden = std::max(forbidden,
                                 std::abs(w_matrix_element(egrid, set.state(0), set.state(1),
                                                           k, kp, v, v, p)));
            allowed = std::max(allowed,
                               std::abs(w_matrix_element(egrid, set.state(0), set.state(1),
                                                         k, kp, neg_v, v, p)));
            // V1(q) = V2(-q) makes W symmetric under k <-> k'
            const Potential v1 = [](double q) { return barrier_v(q - 0.5); };
            const Potential v2 = [](double q) { return barrier_v(-q - 0.5); };
            symm = std::max(symm,
                            std::abs(w_matrix_element(egrid, set.state(0), set.state(0), k,
                                                      kp, v1, v2, p) -
                                     w_matrix_element(egrid, set.state(0), set.state(0), kp,
                                                      k, v1, v2, p)));
        }
        const bool ok = forbidden < 1e-10 * allowed && allowed > 0.0 && symm < 1e-10;
        char detail[120];
        std::snprintf(detail, sizeof(detail), "forbidden/allowed=%.2e symm=%.2e",
                      forbidden / std::max(allowed, 1e-300), symm);
        report("selection rules", ok, detail);
    } catch (const std::exception& e) {
        report("selection rules", false, e.what());
    }

    // sampler moments at a desk-size draw
    try {
        const ModelParams p = cfg.params_for(1, 3.0);
        EnsembleConfig ec;
        ec.n_particles = 100000;
        ec.seed = cfg.seed;
        ec.sigma_rho = cfg.ensemble.sigma_rho;
        const auto ens = wigner_sample(ec, p);
        const double root2 = std::sqrt(2.0);
        const double want_mean[4] = {p.rbar, 0.0, std::sqrt(2.0 * p.total_mass() * p.e_cm),
                                     0.0};
        const double want_sd[4] = {p.sigma_r / root2, ec.sigma_rho / root2,
                                   1.0 / (root2 * p.sigma_r), 1.0 / (root2 * ec.sigma_rho)};
        const std::vector<double>* cols[4] = {&ens.r, &ens.rho, &ens.p_r, &ens.p_rho};
        bool ok = true;
        double worst = 0.0;
        for (int c = 0; c < 4; ++c) {
            const auto& v = *cols[c];
            double mean = 0.0;
            for (double x : v) mean += x;
            mean /= v.size();
            double var = 0.0;
            for (double x : v) var += (x - mean) * (x - mean);
            var /= (v.size() - 1);
            const double sd = std::sqrt(var);
            const double se_mean = want_sd[c] / std::sqrt(double(v.size()));
            const double se_sd = want_sd[c] / std::sqrt(2.0 * v.size());
            const double pull_mean = std::abs(mean - want_mean[c]) / se_mean;
            const double pull_sd = std::abs(sd - want_sd[c]) / se_sd;
            worst = std::max({worst, pull_mean, pull_sd});
            ok = ok && pull_mean < 5.0 && pull_sd < 5.0;
        }
        char detail[80];
        std::snprintf(detail, sizeof(detail), "worst pull=%.2f sigma", worst);
        report("sampler moments", ok, detail);
    } catch (const std::exception& e) {
        report("sampler moments", false, e.what());
    }

    return all_ok;
}

void run_alpha_sweep(const ExperimentConfig& cfg) {
    ensure_out_dir(cfg.out_dir);
    RunManifest manifest = open_manifest(cfg);
    std::mutex manifest_mutex;

    std::vector<double> alphas;
    for (double a = cfg.sweep.alpha_min; a <= cfg.sweep.alpha_max + 1e-9;
         a += cfg.sweep.alpha_step)
        alphas.push_back(a);

    struct Job {
        int channels;
        double alpha;
    };
    std::vector<Job> jobs;
    for (int n : cfg.sweep.channels)
        for (double a : alphas) {
            const std::string name = "sweep/" + case_name(n, a);
            if (!manifest.find(name)) jobs.push_back({n, a});
        }

    std::atomic<std::size_t> next{0};
    const auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const Job job = jobs[i];
            ManifestEntry entry;
            entry.name = "sweep/" + case_name(job.channels, job.alpha);
            try {
                const CaseResult res = run_quantum_case(cfg, job.channels, job.alpha);
                entry.scalars = record_scalars(res.series.last());
                entry.scalars["alpha"] = job.alpha;
                entry.scalars["ebar"] = res.ebar;
            } catch (const std::exception& e) {
                entry.status = std::string("failed: ") + e.what();
            }
            std::scoped_lock lock(manifest_mutex);
            manifest.upsert(std::move(entry));
            commit_manifest(cfg, manifest);
            std::printf("sweep %s done (%zu/%zu)\n",
                        case_name(job.channels, job.alpha).c_str(), i + 1, jobs.size());
            std::fflush(stdout);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min<int>(cfg.workers, std::max<std::size_t>(jobs.size(), 1));
         ++w)
        pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    // regenerate the per-channel CSVs from the manifest
    for (int n : cfg.sweep.channels) {
        const std::string file = "sweep_n" + std::to_string(n) + ".csv";
        std::ofstream out(cfg.out_dir + "/" + file);
        if (!out) throw IoError("cannot open " + file);
        out << "# config_hash=" << cfg.hash() << " version=" << kVersion << "\n";
        out << "alpha,P_T,P_D,P_R,p_t,p_d,p_r,p_s\n";
        for (double a : alphas) {
            const ManifestEntry* e = manifest.find("sweep/" + case_name(n, a));
            if (!e || e->status != "done") continue;
            char line[400];
            std::snprintf(line, sizeof(line),
                          "%.4f,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e\n", a,
                          e->scalars.at("P_T"), e->scalars.at("P_D"), e->scalars.at("P_R"),
                          e->scalars.at("p_t"), e->scalars.at("p_d"), e->scalars.at("p_r"),
                          e->scalars.at("p_s"));
            out << line;
        }
        ManifestEntry entry;
        entry.name = file;
        entry.file = file;
        manifest.upsert(std::move(entry));

        // the curves of the sweep are smooth in alpha; a jump flags trouble
        if (cfg.sweep.alpha_step <= 0.25 + 1e-12) {
            double prev = -1.0, prev_alpha = 0.0;
            for (double a : alphas) {
                const ManifestEntry* pt = manifest.find("sweep/" + case_name(n, a));
                if (!pt || pt->status != "done") continue;
                const double cur = pt->scalars.at("P_T");
                if (prev >= 0.0 && std::abs(cur - prev) > 0.1)
                    std::fprintf(stderr,
                                 "warning: P_T jump %.3f between alpha %.2f and %.2f (n=%d)\n",
                                 std::abs(cur - prev), prev_alpha, a, n);
                prev = cur;
                prev_alpha = a;
            }
        }
    }
    commit_manifest(cfg, manifest);
}

void run_time_traces(const ExperimentConfig& cfg) {
    ensure_out_dir(cfg.out_dir);
    RunManifest manifest = open_manifest(cfg);
    for (int n : cfg.cases.channels)
        for (double a : cfg.cases.alphas) {
            const std::string file = "traces_" + case_name(n, a) + ".csv";
            const CaseResult res = run_quantum_case(cfg, n, a);
            write_series_csv(cfg.out_dir + "/" + file, res.series, cfg.hash());
            ManifestEntry entry;
            entry.name = file;
            entry.file = file;
            entry.scalars = record_scalars(res.series.last());
            entry.scalars["ebar"] = res.ebar;
            entry.scalars["steps_P_T"] = count_pronounced_steps(res.series.times(),
                                                                res.series.transmitted())
                                             .count;
            entry.scalars["steps_p_t"] =
                count_pronounced_steps(res.series.times(), res.series.shifted_transmitted())
                    .count;
            manifest.upsert(std::move(entry));
            commit_manifest(cfg, manifest);
            std::printf("traces %s done\n", case_name(n, a).c_str());
            std::fflush(stdout);
        }
}

void run_effective_potentials(const ExperimentConfig& cfg) {
    ensure_out_dir(cfg.out_dir);
    RunManifest manifest = open_manifest(cfg);
    const Grid1D egrid = cfg.make_eigen_grid();
    const Eigen::ArrayXd rs =
        Eigen::ArrayXd::LinSpaced(cfg.zeff.n_samples, cfg.zeff.r_min, cfg.zeff.r_max);

    // spectra for each channel preset
    for (int n : std::vector<int>{1, 2, 4}) {
        const auto set = solve_bound_states(cfg.params_for(n, 3.0), egrid);
        const std::string file = "spectrum_n" + std::to_string(n) + ".csv";
        std::ofstream out(cfg.out_dir + "/" + file);
        if (!out) throw IoError("cannot open " + file);
        out << "# config_hash=" << cfg.hash() << " version=" << kVersion << "\n";
        out << "index,E,parity\n";
        for (int i = 0; i < set.count(); ++i)
            out << i << ',' << std::scientific << set.energies[i] << ','
                << (set.parities[i] == Parity::even ? "even" : "odd") << "\n";
        ManifestEntry entry;
        entry.name = file;
        entry.file = file;
        for (int i = 0; i < set.count(); ++i)
            entry.scalars["E" + std::to_string(i)] = set.energies[i];
        manifest.upsert(std::move(entry));
    }

    // the two barrier arrangements of the single-bound-state well
    const ModelParams p1 = cfg.params_for(1, 3.0);
    const auto bound = solve_bound_states(p1, egrid);
    const Eigen::VectorXd phi_g = bound.state(0);

    GridContinuumState cont;
    if (cfg.zeff.continuum_energy) {
        const auto st = continuum_state(p1, *cfg.zeff.continuum_energy, Parity::odd, egrid);
        cont.energy = st.energy;
        cont.wavefunction = st.wavefunction;
    } else {
        cont = lowest_positive_state(p1, egrid, Parity::odd);
    }
    const double factor = delta_normalization_factor(egrid, p1, cont.wavefunction,
                                                     cont.energy);
    const Eigen::VectorXd phi_c = cont.wavefunction * factor;

    const auto emit = [&](const std::string& file, const char* label, double alpha,
                          const Eigen::VectorXd& phi_out, const char* pair,
                          const char* normalization, json extra) {
        const Potential v1 = [alpha](double q) { return alpha * barrier_v(q); };
        const Potential v2 = [](double q) { return 3.0 * barrier_v(q); };
        const auto curve = effective_potential_curve(egrid, phi_out, phi_g, v1, v2, rs, p1);
        std::ofstream out(cfg.out_dir + "/" + file);
        if (!out) throw IoError("cannot open " + file);
        out << "# config_hash=" << cfg.hash() << " version=" << kVersion << "\n";
        out << "# case=" << label << " alpha=" << alpha << " pair=" << pair
            << " normalization=" << normalization;
        for (const auto& [k, v] : extra.items()) out << ' ' << k << '=' << v.dump();
        out << " clipped=" << (curve.clipped ? "true" : "false") << "\n";
        out << "R,Z\n";
        for (Eigen::Index i = 0; i < rs.size(); ++i)
            out << rs[i] << ',' << std::scientific << curve.z[i] << "\n";
        ManifestEntry entry;
        entry.name = file;
        entry.file = file;
        entry.scalars["z_peak"] = curve.z.maxCoeff();
        entry.scalars["z_abs_peak"] = curve.z.abs().maxCoeff();
        entry.scalars["alpha"] = alpha;
        manifest.upsert(std::move(entry));
        if (curve.clipped)
            std::fprintf(stderr, "warning: %s integrand clipped by the rho grid\n",
                         file.c_str());
    };

    // case (a): both barriers scaled alike, elastic channel carries the barrier
    emit("zeff_case_a.csv", "a", 3.0, phi_g, "gg", "bound", json::object());
    // case (b): opposite barriers, the g->c channel carries it instead
    emit("zeff_case_b.csv", "b", -3.0, phi_c, "cg", "energy-delta",
         json{{"continuum_energy", cont.energy}, {"delta_norm_factor", factor}});
    // the vanishing partners in each case, kept as data for the reports
    emit("zeff_case_a_cg.csv", "a", 3.0, phi_c, "cg", "energy-delta",
         json{{"continuum_energy", cont.energy}, {"delta_norm_factor", factor}});
    emit("zeff_case_b_gg.csv", "b", -3.0, phi_g, "gg", "bound", json::object());
    commit_manifest(cfg, manifest);
}

namespace {

EnsembleResult run_classical_case(const ExperimentConfig& cfg, int channels, double alpha,
                                  bool with_histogram, double record_every) {
    const ModelParams params = cfg.params_for(channels, alpha);
    EnsembleConfig ec;
    ec.n_particles = cfg.ensemble.n_particles;
    ec.seed = cfg.seed;
    ec.sigma_rho = cfg.ensemble.sigma_rho;
    const auto ens = wigner_sample(ec, params);
    HistogramSpec hist{cfg.histogram.min, cfg.histogram.max, cfg.histogram.bins};
    return run_ensemble(ens, params, cfg.prop.t_final, cfg.ensemble.dt,
                        with_histogram ? &hist : nullptr, cfg.workers, record_every);
}

}  // namespace

void run_classical_cases(const ExperimentConfig& cfg) {
    ensure_out_dir(cfg.out_dir);
    RunManifest manifest = open_manifest(cfg);
    for (int n : cfg.cases.channels)
        for (double a : cfg.cases.alphas) {
            const auto res = run_classical_case(cfg, n, a, true, cfg.prop.record_every);
            const std::string series_file = "classical_" + case_name(n, a) + ".csv";
            write_series_csv(cfg.out_dir + "/" + series_file, res.series, cfg.hash(),
                             "classical");
            const std::string density_file = "density_classical_" + case_name(n, a) + ".dgrid";
            write_density_file(cfg.out_dir + "/" + density_file, res.density, cfg.hash());
            ManifestEntry entry;
            entry.name = series_file;
            entry.file = series_file;
            entry.scalars = record_scalars(res.series.last());
            entry.scalars["drift_q999"] = res.drift_q999;
            entry.scalars["drift_outliers"] = static_cast<double>(res.drift_outliers);
            entry.scalars["overflow"] = static_cast<double>(res.overflow);
            manifest.upsert(std::move(entry));
            ManifestEntry dentry;
            dentry.name = density_file;
            dentry.file = density_file;
            manifest.upsert(std::move(dentry));
            commit_manifest(cfg, manifest);
            if (res.drift_outliers > 0)
                std::fprintf(stderr,
                             "note: %ld/%ld particles exceeded the 1e-6 energy-drift budget "
                             "(worst %.2e) in %s\n",
                             res.drift_outliers, cfg.ensemble.n_particles, res.drift_worst,
                             case_name(n, a).c_str());
            std::printf("classical %s done\n", case_name(n, a).c_str());
            std::fflush(stdout);
        }
}

bool run_classical_comparison(const ExperimentConfig& cfg) {
    ensure_out_dir(cfg.out_dir);
    RunManifest manifest = open_manifest(cfg);
    Grid2D window;
    window.frame = Frame::cartesian;
    window.axis0 = {cfg.histogram.min, cfg.histogram.max, cfg.histogram.bins};
    window.axis1 = {cfg.histogram.min, cfg.histogram.max, cfg.histogram.bins};

    struct Entry {
        double quantum_pt = 0.0, classical_pt = 0.0;
        double quantum_spt = 0.0, classical_spt = 0.0;
        double quantum_imbalance = 0.0, classical_imbalance = 0.0;
    };
    std::map<std::pair<int, double>, Entry> table;

    for (int n : cfg.cases.channels)
        for (double a : cfg.cases.alphas) {
            Entry e;
            {
                const CaseResult q = run_quantum_case(cfg, n, a);
                e.quantum_pt = q.series.last().quad.transmitted;
                e.quantum_spt = q.series.last().shifted.transmitted;
                const auto split = disintegration_split(q.psi, cfg.params_for(n, a));
                e.quantum_imbalance = split.imbalance();
                DensityGrid d = resample_density(density_of(q.psi), window,
                                                 cfg.params_for(n, a));
                log_scale_density(d);
                const std::string file = "density_quantum_" + case_name(n, a) + ".dgrid";
                write_density_file(cfg.out_dir + "/" + file, d, cfg.hash());
                ManifestEntry me;
                me.name = file;
                me.file = file;
                me.scalars["P_T"] = e.quantum_pt;
                manifest.upsert(std::move(me));
            }
            {
                const auto c = run_classical_case(cfg, n, a, true, 0.0);
                e.classical_pt = c.quad.transmitted;
                e.classical_spt = c.shifted.transmitted;
                e.classical_imbalance = c.disintegration.imbalance();
                DensityGrid d = c.density;
                log_scale_density(d);
                const std::string file = "density_classical_" + case_name(n, a) + ".dgrid";
                write_density_file(cfg.out_dir + "/" + file, d, cfg.hash());
                ManifestEntry me;
                me.name = file;
                me.file = file;
                me.scalars["P_T"] = e.classical_pt;
                manifest.upsert(std::move(me));
            }
            table[{n, a}] = e;
            commit_manifest(cfg, manifest);
            std::printf("compare %s done (quantum P_T=%.4g, classical P_T=%.4g)\n",
                        case_name(n, a).c_str(), e.quantum_pt, e.classical_pt);
            std::fflush(stdout);
        }

    json report;
    report["config_hash"] = cfg.hash();
    bool ok = true;
    const auto has = [&](int n, double a) { return table.count({n, a}) > 0; };
    for (int n : cfg.cases.channels) {
        if (!has(n, 3.0) || !has(n, -3.0)) continue;
        const Entry& plus = table[{n, 3.0}];
        const Entry& minus = table[{n, -3.0}];
        json row;
        row["quantum_P_T(+3)"] = plus.quantum_pt;
        row["quantum_P_T(-3)"] = minus.quantum_pt;
        row["classical_P_T(+3)"] = plus.classical_pt;
        row["classical_P_T(-3)"] = minus.classical_pt;
        row["classical_above_under_ratio"] =
            minus.classical_pt / std::max(plus.classical_pt, 1e-12);
        row["quantum_imbalance(-3)"] = minus.quantum_imbalance;
        row["classical_imbalance(-3)"] = minus.classical_imbalance;
        if (n == 1) {
            row["quantum_ordering_ok"] = plus.quantum_pt < minus.quantum_pt;
        } else {
            const bool quantum_ok = plus.quantum_pt > minus.quantum_pt;
            const bool classical_reversed = minus.classical_pt > plus.classical_pt;
            const bool ratio_ok = minus.classical_pt >= 5.0 * plus.classical_pt;
            row["quantum_ordering_ok"] = quantum_ok;
            row["classical_reversed"] = classical_reversed;
            row["ratio_at_least_5"] = ratio_ok;
            ok = ok && quantum_ok && classical_reversed && ratio_ok;
        }
        report["n" + std::to_string(n)] = row;
    }
    report["all_ok"] = ok;
    std::ofstream out(cfg.out_dir + "/compare_report.json");
    if (!out) throw IoError("cannot open compare_report.json");
    out << report.dump(2) << "\n";
    ManifestEntry me;
    me.name = "compare_report.json";
    me.file = "compare_report.json";
    manifest.upsert(std::move(me));
    commit_manifest(cfg, manifest);
    return ok;
}

}  // namespace pairtunnel
