#pragma once

// Named experiment recipes on top of the core modules: parameter presets,
// reproducible grids and masks, the alpha sweep, the six reference cases,
// effective-potential exports and the quantum/classical comparison. The CLI
// is a thin wrapper around these.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pairtunnel/classical.hpp"
#include "pairtunnel/eigen1d.hpp"
#include "pairtunnel/io.hpp"
#include "pairtunnel/tdse.hpp"

namespace pairtunnel {

/// Bad configuration input (maps to exit code 1 in the CLI).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A numerical check that should hold failed (exit code 2 in the CLI).
struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridSettings {
    double r_min = -150.0, r_max = 150.0;
    int n_r = 2048;
    double rho_min = -24.0, rho_max = 24.0;
    int n_rho = 256;
    double absorber_width_r = 15.0, absorber_width_rho = 6.0;
    double absorber_strength = 0.05;
};

struct PropagationSettings {
    double dt = 0.02;
    double t_final = 150.0;
    double record_every = 0.5;
};

struct SweepSettings {
    double alpha_min = -4.0, alpha_max = 4.0, alpha_step = 0.25;
    std::vector<int> channels{1, 2, 4};
};

struct CaseSettings {
    std::vector<double> alphas{3.0, -3.0};
    std::vector<int> channels{1, 2, 4};
};

struct EnsembleSettings {
    long n_particles = 100000;
    double dt = 5e-3;
    double sigma_rho = 1.5;
};

struct HistogramSettings {
    double min = -100.0, max = 100.0;
    int bins = 512;
};

struct ZeffSettings {
    double r_min = -12.0, r_max = 12.0;
    int n_samples = 481;
    std::optional<double> continuum_energy;  // default: lowest odd grid state
};

struct EigenGridSettings {
    double min = -128.0, max = 128.0;
    int n = 1024;
};

struct ExperimentConfig {
    std::string preset = "paper";
    std::uint64_t seed = 1;
    int workers = 1;
    std::string out_dir = "out";
    double well_depth = 2.0;
    double rbar = -55.0;
    double sigma_r = 3.0;
    double e_cm = 1.0;
    std::optional<double> well_width_1, well_width_2, well_width_4;
    GridSettings grid;
    PropagationSettings prop;
    SweepSettings sweep;
    CaseSettings cases;
    EnsembleSettings ensemble;
    HistogramSettings histogram;
    ZeffSettings zeff;
    EigenGridSettings eigen_grid;
    bool fftw_measure = true;

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);
    nlohmann::json to_json() const;
    std::string hash() const;
    void validate() const;  // throws ConfigError

    ModelParams params_for(int channels, double alpha) const;
    Grid2D make_grid() const;
    AbsorbingMask make_mask(const Grid2D& g) const;
    Grid1D make_eigen_grid() const;
};

/// Reference bound-state energies used by `validate` as a regression table.
const std::vector<double>& reference_bound_energies(int channels);

/// One propagated case with everything the reports need.
struct CaseResult {
    int channels = 0;
    double alpha = 0.0;
    double ebar = 0.0;  // initial energy expectation
    ObservableSeries series;
    Wavefunction2D psi;  // final state
};

CaseResult run_quantum_case(const ExperimentConfig& cfg, int channels, double alpha);

/// Pronounced local maxima of dy/dt, counted as contiguous segments of the
/// derivative above max(3 x median |dy/dt|, rel_floor x peak rate). The
/// relative floor is what makes a maximum "pronounced": five-percent ripples
/// on an otherwise finished trace do not count, surges at a fifth of the
/// peak arrival rate do.
struct StepDetection {
    int count = 0;
    double threshold = 0.0;
};
StepDetection count_pronounced_steps(const Eigen::ArrayXd& t, const Eigen::ArrayXd& y,
                                     double rel_floor = 0.2);

// Experiment entry points. Each writes its outputs plus a manifest into
// cfg.out_dir and returns false when a checked numerical property failed.
bool run_validate(const ExperimentConfig& cfg);
void run_alpha_sweep(const ExperimentConfig& cfg);
void run_time_traces(const ExperimentConfig& cfg);
void run_effective_potentials(const ExperimentConfig& cfg);
void run_classical_cases(const ExperimentConfig& cfg);
bool run_classical_comparison(const ExperimentConfig& cfg);

}  // namespace pairtunnel
