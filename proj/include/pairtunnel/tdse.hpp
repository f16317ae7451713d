#pragma once

// Time-dependent propagation of the 2D wave packet: symmetric split-operator
// stepping with spectral kinetic evolution, an absorbing mask at the grid
// edges, and the quadrant observables read off the evolving density.

#include <complex>
#include <vector>

#include <Eigen/Core>
#include <fftw3.h>

#include "pairtunnel/eigen1d.hpp"
#include "pairtunnel/grid.hpp"
#include "pairtunnel/model.hpp"

namespace pairtunnel {

/// fftw_malloc-backed storage so planned transforms run on the buffer itself.
template <class T>
struct FftwAllocator {
    using value_type = T;
    FftwAllocator() = default;
    template <class U> FftwAllocator(const FftwAllocator<U>&) {}
    T* allocate(std::size_t n) {
        void* p = fftw_malloc(n * sizeof(T));
        if (!p) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) { fftw_free(p); }
    template <class U> bool operator==(const FftwAllocator<U>&) const { return true; }
};

using complex_field = std::vector<std::complex<double>, FftwAllocator<std::complex<double>>>;

struct Wavefunction2D {
    Grid2D grid;
    complex_field data;  // row-major, index(i0, i1)
    double time = 0.0;

    double norm() const;
    std::complex<double>& at(int i0, int i1) { return data[grid.index(i0, i1)]; }
    const std::complex<double>& at(int i0, int i1) const { return data[grid.index(i0, i1)]; }
};

/// Smooth damping field, 1 in the interior and falling to 0 at the outermost
/// grid points over a ramp of the given width per axis. The ramp is
/// [sin^2(pi s / 2)]^strength with s the scaled distance from the edge; small
/// strength keeps the per-step multiplier gentle enough to avoid reflections.
struct AbsorbingMask {
    Grid2D grid;
    std::vector<double> data;
    double width0 = 0.0, width1 = 0.0, strength = 0.0;

    static AbsorbingMask cos2_ramp(const Grid2D& grid, double width0, double width1,
                                   double strength);
    static AbsorbingMask none(const Grid2D& grid);
};

struct QuadrantProbs {
    double transmitted = 0.0;   // x1 > 0 and x2 > 0
    double disintegrated = 0.0; // x1, x2 of opposite sign
    double reflected = 0.0;     // x1 < 0 and x2 < 0
};

struct ShiftedProbs {
    double transmitted = 0.0;   // x1, x2 > 3
    double disintegrated = 0.0; // one beyond +3, the other beyond -3
    double reflected = 0.0;     // x1, x2 < -3
    double trapped = 0.0;       // remainder of the current norm
};

/// The two disintegration quadrants separately, for asymmetry comparisons.
struct DisintegrationSplit {
    double upper = 0.0;  // x1 < 0, x2 > 0
    double lower = 0.0;  // x1 > 0, x2 < 0
    double imbalance() const {
        return std::max(upper, lower) / std::max(std::min(upper, lower), 1e-300);
    }
};

struct ObservableRecord {
    double t = 0.0;
    double norm = 0.0;
    QuadrantProbs quad;
    ShiftedProbs shifted;
    double absorbed = 0.0;
};

struct ObservableSeries {
    std::vector<ObservableRecord> records;

    const ObservableRecord& last() const { return records.back(); }
    Eigen::ArrayXd times() const;
    Eigen::ArrayXd transmitted() const;
    Eigen::ArrayXd shifted_transmitted() const;
};

/// Wave packet of Eq.-of-motion fame: the intraparticle ground state times a
/// Gaussian moving in R with mean momentum sqrt(2 M E_cm); unit norm.
Wavefunction2D build_initial_state(const ModelParams& p, const Eigen::VectorXd& phi_g,
                                   const Grid2D& grid);

/// <H> with the kinetic part evaluated spectrally.
double energy_expectation(const Wavefunction2D& psi, const ModelParams& p);

/// Plain quadrant integrals of |psi|^2, always in particle coordinates
/// (params supplies the mass ratio of the coordinate map).
QuadrantProbs quadrant_probabilities(const Wavefunction2D& psi, const ModelParams& p = {});
ShiftedProbs shifted_probabilities(const Wavefunction2D& psi, const ModelParams& p = {});
DisintegrationSplit disintegration_split(const Wavefunction2D& psi, const ModelParams& p = {});

/// One propagation owns its plans and phase fields; steps are
/// exp(-iV dt/2) exp(-iT dt) exp(-iV dt/2) followed by the mask.
class SplitOperator {
  public:
    SplitOperator(const ModelParams& p, const Grid2D& grid, double dt,
                  const AbsorbingMask& mask);

    void step(Wavefunction2D& psi);
    double dt() const { return dt_; }
    double absorbed() const { return absorbed_; }
    void reset_absorbed(double value = 0.0) { absorbed_ = value; }

  private:
    Grid2D grid_;
    double dt_;
    double absorbed_ = 0.0;
    complex_field half_v_;         // exp(-i Omega dt / 2)
    complex_field half_v_masked_;  // same, times the mask
    complex_field kinetic_;        // exp(-i T dt) / (n0 n1)
    std::vector<double> mask_sq_;
    fftw_plan fwd_ = nullptr;      // shared cached plans, executed on psi's buffer
    fftw_plan bwd_ = nullptr;
};

/// Advance to t_final recording observables every record_every time units
/// (the initial state is always recorded). Aborts if the norm grows.
ObservableSeries propagate(Wavefunction2D& psi, double t_final, double record_every,
                           const ModelParams& p, const AbsorbingMask& mask, double dt);

/// Planner knobs for FFTW shared by every propagation in the process.
/// With "measure" plans, a wisdom file (PAIRTUNNEL_FFTW_WISDOM) makes
/// planning reproducible across runs.
void set_fftw_planner_measure(bool on);
bool fftw_planner_measure();

}  // namespace pairtunnel
