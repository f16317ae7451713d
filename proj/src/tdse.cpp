#include "pairtunnel/tdse.hpp"

#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>

namespace pairtunnel {

namespace {

// FFTW planning is not thread safe; plans are cached per shape and executed
// concurrently on distinct buffers via the new-array interface.
std::mutex g_plan_mutex;
std::map<std::tuple<int, int, int>, fftw_plan> g_plans;
bool g_measure = true;
bool g_wisdom_loaded = false;

const char* wisdom_path() { return std::getenv("PAIRTUNNEL_FFTW_WISDOM"); }

fftw_plan cached_plan(int n0, int n1, int sign) {
    std::scoped_lock lock(g_plan_mutex);
    const auto key = std::make_tuple(n0, n1, sign);
    auto it = g_plans.find(key);
    if (it != g_plans.end()) return it->second;

    if (const char* path = wisdom_path(); path && !g_wisdom_loaded) {
        fftw_import_wisdom_from_filename(path);  // best effort
        g_wisdom_loaded = true;
    }
    complex_field scratch(static_cast<std::size_t>(n0) * n1);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_2d(n0, n1, buf, buf, sign,
                                      g_measure ? FFTW_MEASURE : FFTW_ESTIMATE);
    if (!plan) throw std::runtime_error("fftw planning failed");
    if (const char* path = wisdom_path()) fftw_export_wisdom_to_filename(path);
    g_plans.emplace(key, plan);
    return plan;
}

void execute(fftw_plan plan, std::complex<double>* data) {
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, buf, buf);
}

double axis_mask(const Grid1D& axis, double width, double strength, int i) {
    if (width <= 0.0) return 1.0;
    // distance is measured to the outermost grid points, so the mask hits
    // exactly zero there and exactly one past the ramp
    const double d = std::min(axis.x(i) - axis.x(0), axis.x(axis.n - 1) - axis.x(i));
    const double s = d / width;
    if (s >= 1.0) return 1.0;
    const double ramp = std::sin(0.5 * M_PI * s);
    return std::pow(ramp * ramp, strength);
}

struct FrameGeometry {
    // per-point particle coordinates and kinetic masses for either frame
    double mass0, mass1;
    std::vector<double> c0, c1;  // axis samples
    Frame frame;
    const ModelParams* p;

    FrameGeometry(const ModelParams& params, const Grid2D& grid) : p(&params) {
        frame = grid.frame;
        c0.resize(grid.axis0.n);
        c1.resize(grid.axis1.n);
        for (int i = 0; i < grid.axis0.n; ++i) c0[i] = grid.axis0.x(i);
        for (int i = 0; i < grid.axis1.n; ++i) c1[i] = grid.axis1.x(i);
        if (frame == Frame::cartesian) {
            mass0 = params.m1;
            mass1 = params.m2;
        } else {
            mass0 = params.total_mass();
            mass1 = params.reduced_mass();
        }
    }

    CartesianCoords cartesian(int i0, int i1) const {
        if (frame == Frame::cartesian) return {c0[i0], c1[i1]};
        return to_cartesian(*p, {c0[i0], c1[i1]});
    }

    double potential(int i0, int i1) const {
        if (frame == Frame::cartesian) return omega_cartesian(*p, c0[i0], c1[i1]);
        return omega_cm(*p, c0[i0], c1[i1]);
    }
};

enum : unsigned char { kQuadT = 0, kQuadD = 1, kQuadR = 2, kQuadEdge = 3 };

unsigned char quad_code(double x1, double x2) {
    if (x1 > 0.0 && x2 > 0.0) return kQuadT;
    if (x1 < 0.0 && x2 < 0.0) return kQuadR;
    if ((x1 < 0.0 && x2 > 0.0) || (x1 > 0.0 && x2 < 0.0)) return kQuadD;
    return kQuadEdge;
}

unsigned char shifted_code(double x1, double x2) {
    if (x1 > 3.0 && x2 > 3.0) return kQuadT;
    if (x1 < -3.0 && x2 < -3.0) return kQuadR;
    if ((x1 < -3.0 && x2 > 3.0) || (x1 > 3.0 && x2 < -3.0)) return kQuadD;
    return kQuadEdge;
}

}  // namespace

void set_fftw_planner_measure(bool on) {
    std::scoped_lock lock(g_plan_mutex);
    g_measure = on;
}

bool fftw_planner_measure() {
    std::scoped_lock lock(g_plan_mutex);
    return g_measure;
}

double Wavefunction2D::norm() const {
    double acc = 0.0;
    for (const auto& c : data) acc += std::norm(c);
    return acc * grid.cell_area();
}

AbsorbingMask AbsorbingMask::cos2_ramp(const Grid2D& grid, double width0, double width1,
                                       double strength) {
    AbsorbingMask m;
    m.grid = grid;
    m.width0 = width0;
    m.width1 = width1;
    m.strength = strength;
    m.data.resize(grid.size());
    std::vector<double> m0(grid.axis0.n), m1(grid.axis1.n);
    for (int i = 0; i < grid.axis0.n; ++i) m0[i] = axis_mask(grid.axis0, width0, strength, i);
    for (int i = 0; i < grid.axis1.n; ++i) m1[i] = axis_mask(grid.axis1, width1, strength, i);
    for (int i0 = 0; i0 < grid.axis0.n; ++i0)
        for (int i1 = 0; i1 < grid.axis1.n; ++i1) m.data[grid.index(i0, i1)] = m0[i0] * m1[i1];
    return m;
}

AbsorbingMask AbsorbingMask::none(const Grid2D& grid) {
    AbsorbingMask m;
    m.grid = grid;
    m.data.assign(grid.size(), 1.0);
    return m;
}

Eigen::ArrayXd ObservableSeries::times() const {
    Eigen::ArrayXd v(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) v[i] = records[i].t;
    return v;
}

Eigen::ArrayXd ObservableSeries::transmitted() const {
    Eigen::ArrayXd v(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) v[i] = records[i].quad.transmitted;
    return v;
}

Eigen::ArrayXd ObservableSeries::shifted_transmitted() const {
    Eigen::ArrayXd v(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) v[i] = records[i].shifted.transmitted;
    return v;
}

Wavefunction2D build_initial_state(const ModelParams& p, const Eigen::VectorXd& phi_g,
                                   const Grid2D& grid) {
    p.validate();
    grid.validate();
    if (grid.frame != Frame::cm_relative)
        throw std::invalid_argument("build_initial_state: needs a (R, rho) grid");
    if (phi_g.size() != grid.axis1.n)
        throw std::invalid_argument("build_initial_state: phi_g not on the rho axis");
    if (grid.axis0.x_min > p.rbar - 6.0 * p.sigma_r ||
        grid.axis0.x_max < p.rbar + 6.0 * p.sigma_r)
        throw std::invalid_argument("build_initial_state: grid does not cover rbar +- 6 sigma");

    const double k0 = std::sqrt(2.0 * p.total_mass() * p.e_cm);
    Wavefunction2D psi;
    psi.grid = grid;
    psi.data.resize(grid.size());
    for (int i0 = 0; i0 < grid.axis0.n; ++i0) {
        const double r = grid.axis0.x(i0);
        const double g = std::exp(-(r - p.rbar) * (r - p.rbar) / (2.0 * p.sigma_r * p.sigma_r));
        const std::complex<double> wave = std::polar(g, k0 * r);
        for (int i1 = 0; i1 < grid.axis1.n; ++i1)
            psi.data[grid.index(i0, i1)] = wave * phi_g[i1];
    }
    const double nrm = std::sqrt(psi.norm());
    for (auto& c : psi.data) c /= nrm;

    // reject clipped support: the packet must die out before every edge
    double edge = 0.0;
    const int n0 = grid.axis0.n, n1 = grid.axis1.n;
    for (int i1 = 0; i1 < n1; ++i1)
        edge = std::max({edge, std::norm(psi.at(0, i1)), std::norm(psi.at(n0 - 1, i1))});
    for (int i0 = 0; i0 < n0; ++i0)
        edge = std::max({edge, std::norm(psi.at(i0, 0)), std::norm(psi.at(i0, n1 - 1))});
    if (edge > 1e-12)
        throw std::runtime_error("build_initial_state: packet support clipped by the grid");
    return psi;
}

double energy_expectation(const Wavefunction2D& psi, const ModelParams& p) {
    const Grid2D& grid = psi.grid;
    const FrameGeometry geom(p, grid);
    const double da = grid.cell_area();

    double pot = 0.0, nrm = 0.0;
    for (int i0 = 0; i0 < grid.axis0.n; ++i0)
        for (int i1 = 0; i1 < grid.axis1.n; ++i1) {
            const double d = std::norm(psi.at(i0, i1));
            pot += d * geom.potential(i0, i1);
            nrm += d;
        }
    pot *= da;
    nrm *= da;

    complex_field scratch(psi.data.begin(), psi.data.end());
    execute(cached_plan(grid.axis0.n, grid.axis1.n, FFTW_FORWARD), scratch.data());
    const Eigen::ArrayXd k0 = grid.axis0.wavenumbers();
    const Eigen::ArrayXd k1 = grid.axis1.wavenumbers();
    double kin = 0.0, knrm = 0.0;
    for (int i0 = 0; i0 < grid.axis0.n; ++i0)
        for (int i1 = 0; i1 < grid.axis1.n; ++i1) {
            const double d = std::norm(scratch[grid.index(i0, i1)]);
            kin += d * (k0[i0] * k0[i0] / (2.0 * geom.mass0) +
                        k1[i1] * k1[i1] / (2.0 * geom.mass1));
            knrm += d;
        }
    return pot / nrm + kin / knrm;
}

QuadrantProbs quadrant_probabilities(const Wavefunction2D& psi, const ModelParams& p) {
    const FrameGeometry geom(p, psi.grid);
    QuadrantProbs q;
    for (int i0 = 0; i0 < psi.grid.axis0.n; ++i0)
        for (int i1 = 0; i1 < psi.grid.axis1.n; ++i1) {
            const auto c = geom.cartesian(i0, i1);
            const double d = std::norm(psi.at(i0, i1));
            switch (quad_code(c.x1, c.x2)) {
                case kQuadT: q.transmitted += d; break;
                case kQuadD: q.disintegrated += d; break;
                case kQuadR: q.reflected += d; break;
                default: break;
            }
        }
    const double da = psi.grid.cell_area();
    q.transmitted *= da;
    q.disintegrated *= da;
    q.reflected *= da;
    return q;
}

ShiftedProbs shifted_probabilities(const Wavefunction2D& psi, const ModelParams& p) {
    const FrameGeometry geom(p, psi.grid);
    ShiftedProbs s;
    double nrm = 0.0;
    for (int i0 = 0; i0 < psi.grid.axis0.n; ++i0)
        for (int i1 = 0; i1 < psi.grid.axis1.n; ++i1) {
            const auto c = geom.cartesian(i0, i1);
            const double d = std::norm(psi.at(i0, i1));
            nrm += d;
            switch (shifted_code(c.x1, c.x2)) {
                case kQuadT: s.transmitted += d; break;
                case kQuadD: s.disintegrated += d; break;
                case kQuadR: s.reflected += d; break;
                default: break;
            }
        }
    const double da = psi.grid.cell_area();
    s.transmitted *= da;
    s.disintegrated *= da;
    s.reflected *= da;
    s.trapped = nrm * da - s.transmitted - s.disintegrated - s.reflected;
    return s;
}

DisintegrationSplit disintegration_split(const Wavefunction2D& psi, const ModelParams& p) {
    const FrameGeometry geom(p, psi.grid);
    DisintegrationSplit s;
    for (int i0 = 0; i0 < psi.grid.axis0.n; ++i0)
        for (int i1 = 0; i1 < psi.grid.axis1.n; ++i1) {
            const auto c = geom.cartesian(i0, i1);
            const double d = std::norm(psi.at(i0, i1));
            if (c.x1 < 0.0 && c.x2 > 0.0) s.upper += d;
            else if (c.x1 > 0.0 && c.x2 < 0.0) s.lower += d;
        }
    s.upper *= psi.grid.cell_area();
    s.lower *= psi.grid.cell_area();
    return s;
}

SplitOperator::SplitOperator(const ModelParams& p, const Grid2D& grid, double dt,
                             const AbsorbingMask& mask)
    : grid_(grid), dt_(dt) {
    p.validate();
    grid.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("SplitOperator: dt must be positive");
    if (mask.data.size() != grid.size())
        throw std::invalid_argument("SplitOperator: mask not on this grid");

    const FrameGeometry geom(p, grid);
    const std::size_t n = grid.size();
    half_v_.resize(n);
    half_v_masked_.resize(n);
    kinetic_.resize(n);
    mask_sq_.resize(n);
    for (int i0 = 0; i0 < grid.axis0.n; ++i0)
        for (int i1 = 0; i1 < grid.axis1.n; ++i1) {
            const std::size_t i = grid.index(i0, i1);
            half_v_[i] = std::polar(1.0, -0.5 * dt * geom.potential(i0, i1));
            half_v_masked_[i] = half_v_[i] * mask.data[i];
            mask_sq_[i] = mask.data[i] * mask.data[i];
        }
    const Eigen::ArrayXd k0 = grid.axis0.wavenumbers();
    const Eigen::ArrayXd k1 = grid.axis1.wavenumbers();
    const double scale = 1.0 / static_cast<double>(n);  // fftw backward is unnormalized
    for (int i0 = 0; i0 < grid.axis0.n; ++i0)
        for (int i1 = 0; i1 < grid.axis1.n; ++i1) {
            const double t = k0[i0] * k0[i0] / (2.0 * geom.mass0) +
                             k1[i1] * k1[i1] / (2.0 * geom.mass1);
            kinetic_[grid.index(i0, i1)] = std::polar(scale, -dt * t);
        }
    fwd_ = cached_plan(grid.axis0.n, grid.axis1.n, FFTW_FORWARD);
    bwd_ = cached_plan(grid.axis0.n, grid.axis1.n, FFTW_BACKWARD);
}

void SplitOperator::step(Wavefunction2D& psi) {
    if (!(psi.grid.axis0 == grid_.axis0) || !(psi.grid.axis1 == grid_.axis1))
        throw std::invalid_argument("SplitOperator::step: wavefunction grid mismatch");
    const std::size_t n = grid_.size();
    std::complex<double>* d = psi.data.data();
    for (std::size_t i = 0; i < n; ++i) d[i] *= half_v_[i];
    execute(fwd_, d);
    for (std::size_t i = 0; i < n; ++i) d[i] *= kinetic_[i];
    execute(bwd_, d);
    double lost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        lost += std::norm(d[i]) * (1.0 - mask_sq_[i]);
        d[i] *= half_v_masked_[i];
    }
    absorbed_ += lost * grid_.cell_area();
    psi.time += dt_;
}

ObservableSeries propagate(Wavefunction2D& psi, double t_final, double record_every,
                           const ModelParams& p, const AbsorbingMask& mask, double dt) {
    SplitOperator prop(p, psi.grid, dt, mask);
    const long n_steps = std::lround((t_final - psi.time) / dt);
    const long cadence = std::max(1L, std::lround(record_every / dt));

    // cache the region code of every grid point once
    const Grid2D& grid = psi.grid;
    const FrameGeometry geom(p, grid);
    std::vector<unsigned char> qcode(grid.size()), scode(grid.size());
    for (int i0 = 0; i0 < grid.axis0.n; ++i0)
        for (int i1 = 0; i1 < grid.axis1.n; ++i1) {
            const auto c = geom.cartesian(i0, i1);
            qcode[grid.index(i0, i1)] = quad_code(c.x1, c.x2);
            scode[grid.index(i0, i1)] = shifted_code(c.x1, c.x2);
        }

    ObservableSeries series;
    const double da = grid.cell_area();
    const auto record = [&]() {
        ObservableRecord rec;
        rec.t = psi.time;
        double q[4] = {0, 0, 0, 0}, s[4] = {0, 0, 0, 0}, nrm = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double d = std::norm(psi.data[i]);
            nrm += d;
            q[qcode[i]] += d;
            s[scode[i]] += d;
        }
        rec.norm = nrm * da;
        rec.quad = {q[kQuadT] * da, q[kQuadD] * da, q[kQuadR] * da};
        rec.shifted.transmitted = s[kQuadT] * da;
        rec.shifted.disintegrated = s[kQuadD] * da;
        rec.shifted.reflected = s[kQuadR] * da;
        rec.shifted.trapped = rec.norm - rec.shifted.transmitted -
                              rec.shifted.disintegrated - rec.shifted.reflected;
        rec.absorbed = prop.absorbed();
        if (!series.records.empty() && rec.norm > series.records.back().norm + 1e-8)
            throw std::runtime_error("propagate: norm increased, propagation unstable");
        series.records.push_back(rec);
    };

    record();
    for (long step = 1; step <= n_steps; ++step) {
        prop.step(psi);
        if (step % cadence == 0 || step == n_steps) record();
    }
    return series;
}

}  // namespace pairtunnel
